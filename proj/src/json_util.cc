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
#include "json_util.h"

#include <fstream>
#include <sstream>

#include "errors.h"

namespace sgg {

Json MatToJson(const Mat& m) {
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}};
}

Mat MatFromJson(const Json& j) {
  try {
    const size_t rows = j.at("rows").get<size_t>();
    const size_t cols = j.at("cols").get<size_t>();
    auto data = j.at("data").get<std::vector<double>>();
    return Mat(rows, cols, std::move(data));
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed matrix JSON: ") + e.what());
  }
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json ReadJsonFile(const std::string& path) {
  const std::string text = ReadTextFile(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace sgg
