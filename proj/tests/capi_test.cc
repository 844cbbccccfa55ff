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
#include "sgg/sgg.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Str {
  char* s = nullptr;
  ~Str() { sgg_string_free(s); }
  Json json() const { return Json::parse(s); }
};

const char* kConfig = R"({"gen": {"num_images": 20, "feature_dim": 8, "union_dim": 8},
                         "model": {"hidden_dim": 4, "fusion_dim": 8},
                         "train": {"epochs": 2, "lr": 0.01},
                         "gradcheck": {"fixtures": 1}})";

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sgg_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(CApiTest, StatusNamesAndVersion) {
  EXPECT_STREQ(sgg_status_name(SGG_OK), "ok");
  EXPECT_NE(std::string(sgg_version()), "");
  EXPECT_EQ(sgg_score_wtd(77.27, 38.78, 40.15), 0.2 * 77.27 + 0.4 * 38.78 + 0.4 * 40.15);
}

TEST(CApiTest, ErrorsMapToStatusCodes) {
  double g = 0.0;
  EXPECT_EQ(sgg_gamma_map(0.5, 4.0, &g), SGG_OK);
  EXPECT_NEAR(g, 0.043321698784996581838, 1e-15);
  EXPECT_EQ(sgg_gamma_map(1.5, 4.0, &g), SGG_ERR_DOMAIN);
  EXPECT_NE(std::string(sgg_last_error_message()), "");
  EXPECT_EQ(sgg_gamma_map(0.5, 4.0, nullptr), SGG_ERR_INVALID_ARGUMENT);

  sgg_corpus* c = nullptr;
  EXPECT_EQ(sgg_corpus_read("/nonexistent/corpus", &c), SGG_ERR_IO);
  EXPECT_EQ(c, nullptr);
  EXPECT_EQ(sgg_corpus_generate("{not json", &c), SGG_ERR_CONFIG);
  EXPECT_EQ(sgg_corpus_generate(R"({"gen": {"min_nodes": 1}})", &c), SGG_ERR_CONFIG);
  Str out;
  const char* bad[] = {"train.nope=1"};
  EXPECT_EQ(sgg_config_effective(nullptr, bad, 1, &out.s), SGG_ERR_CONFIG);
}

TEST(CApiTest, EndToEnd) {
  const fs::path dir = TempDir("e2e");
  sgg_corpus* corpus = nullptr;
  ASSERT_EQ(sgg_corpus_generate(kConfig, &corpus), SGG_OK) << sgg_last_error_message();
  EXPECT_EQ(sgg_corpus_size(corpus), 20u);
  ASSERT_EQ(sgg_corpus_write(corpus, (dir / "corpus").c_str()), SGG_OK);
  sgg_corpus* reread = nullptr;
  ASSERT_EQ(sgg_corpus_read((dir / "corpus").c_str(), &reread), SGG_OK);
  Str stats;
  ASSERT_EQ(sgg_corpus_stats(reread, &stats.s), SGG_OK);
  EXPECT_EQ(stats.json()["images"], 20);

  sgg_corpus* train = nullptr;
  sgg_corpus* test = nullptr;
  ASSERT_EQ(sgg_corpus_split_config(reread, kConfig, &train, &test), SGG_OK);
  EXPECT_EQ(sgg_corpus_size(train), 14u);
  EXPECT_EQ(sgg_corpus_size(test), 6u);

  sgg_model* model = nullptr;
  ASSERT_EQ(sgg_model_init(kConfig, train, &model), SGG_OK) << sgg_last_error_message();
  std::vector<double> totals;
  auto cb = [](void* user, size_t, double, double, double total) {
    static_cast<std::vector<double>*>(user)->push_back(total);
  };
  Str summary;
  ASSERT_EQ(sgg_train(model, train, kConfig, (dir / "loss.csv").c_str(), cb, &totals,
                      &summary.s),
            SGG_OK)
      << sgg_last_error_message();
  EXPECT_EQ(totals.size(), 2u);
  EXPECT_EQ(summary.json()["epochs"], 2);
  std::ifstream csv(dir / "loss.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "epoch,obj_loss,rel_loss,total");

  ASSERT_EQ(sgg_model_write(model, (dir / "w.json").c_str()), SGG_OK);
  sgg_model* loaded = nullptr;
  ASSERT_EQ(sgg_model_read((dir / "w.json").c_str(), &loaded), SGG_OK);

  Str report, text;
  ASSERT_EQ(sgg_evaluate(loaded, train, test, kConfig, (dir / "preds.jsonl").c_str(),
                         &report.s, &text.s),
            SGG_OK)
      << sgg_last_error_message();
  const Json r = report.json();
  EXPECT_TRUE(r.contains("recall"));
  Str report2, text2;
  ASSERT_EQ(sgg_evaluate_predictions((dir / "preds.jsonl").c_str(), test, kConfig, &report2.s,
                                     &text2.s),
            SGG_OK)
      << sgg_last_error_message();
  EXPECT_EQ(report2.json()["recall"], r["recall"]);

  Str att;
  const std::string image = "img_00000";
  ASSERT_EQ(sgg_attention(loaded, reread, image.c_str(), (dir / "att").c_str(), kConfig, &att.s),
            SGG_OK)
      << sgg_last_error_message();
  for (const char* f : {"gcmp.csv", "sgcmp.csv", "sgcmp_scores.csv", "dmp.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "att" / f)) << f;
  }
  EXPECT_EQ(sgg_attention(loaded, reread, "no-such-image", (dir / "att").c_str(), kConfig,
                          nullptr),
            SGG_ERR_DATA);

  // A model built for other class counts is rejected.
  sgg_corpus* other = nullptr;
  ASSERT_EQ(sgg_corpus_generate(R"({"gen": {"num_images": 4, "num_object_classes": 4}})", &other),
            SGG_OK);
  EXPECT_EQ(sgg_train(model, other, kConfig, nullptr, nullptr, nullptr, nullptr),
            SGG_ERR_CONFIG);

  EXPECT_EQ(sgg_prior_write(train, (dir / "prior.json").c_str()), SGG_OK);
  EXPECT_TRUE(fs::exists(dir / "prior.json"));

  sgg_model_free(model);
  sgg_model_free(loaded);
  sgg_corpus_free(corpus);
  sgg_corpus_free(reread);
  sgg_corpus_free(train);
  sgg_corpus_free(test);
  sgg_corpus_free(other);
  sgg_model_free(nullptr);
  sgg_corpus_free(nullptr);
  fs::remove_all(dir);
}

TEST(CApiTest, GradcheckReportsFaults) {
  Str json, text;
  int passed = 0;
  ASSERT_EQ(sgg_gradcheck(kConfig, &json.s, &text.s, &passed), SGG_OK) << sgg_last_error_message();
  EXPECT_EQ(passed, 1);
  Str json2, text2;
  ASSERT_EQ(sgg_gradcheck(R"({"gradcheck": {"fixtures": 1, "fault": "dmp.W_t2"}})", &json2.s,
                          &text2.s, &passed),
            SGG_OK);
  EXPECT_EQ(passed, 0);
  EXPECT_NE(std::string(text2.s).find("dmp.W_t2"), std::string::npos);
}

}  // namespace
