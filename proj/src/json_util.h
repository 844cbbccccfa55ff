/* Copyright 2026 The sgg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SGG_JSON_UTIL_H_
#define SGG_JSON_UTIL_H_

#include <string>

#include "json.hpp"
#include "linalg.h"

namespace sgg {

using Json = nlohmann::json;

// {"rows": r, "cols": c, "data": [...]} in row-major order.
Json MatToJson(const Mat& m);
Mat MatFromJson(const Json& j);

Json ReadJsonFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);
std::string ReadTextFile(const std::string& path);

}  // namespace sgg

#endif  // SGG_JSON_UTIL_H_
