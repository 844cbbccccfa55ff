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
// Command-line front end. Links only against the C API.
//
//   sgg gen        write a synthetic corpus
//   sgg train      train on the corpus train split
//   sgg eval       score the held-out split
//   sgg gradcheck  finite-difference suite
//   sgg attention  export attention maps of one image
//   sgg prior      write the train-split frequency prior
//   sgg config     print the effective configuration

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgg/sgg.h"

namespace {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

int ExitCode(sgg_status s) {
  switch (s) {
    case SGG_OK:
      return kExitOk;
    case SGG_ERR_NUMERICAL:
      return kExitNumerical;
    case SGG_ERR_IO:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

class Failure {
 public:
  explicit Failure(int code) : code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

void Check(sgg_status s, const char* what) {
  if (s == SGG_OK) return;
  std::cerr << "sgg: " << what << ": " << sgg_status_name(s) << ": " << sgg_last_error_message()
            << "\n";
  throw Failure(ExitCode(s));
}

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { sgg_string_free(s); }
  std::string str() const { return s == nullptr ? std::string() : std::string(s); }
};

using CorpusPtr = std::unique_ptr<sgg_corpus, decltype(&sgg_corpus_free)>;
using ModelPtr = std::unique_ptr<sgg_model, decltype(&sgg_model_free)>;

ModelPtr NoModel() { return ModelPtr(nullptr, &sgg_model_free); }

struct Options {
  std::string config_file;
  std::vector<std::string> sets;
  bool quiet = false;
  // Flag-specific overrides, applied after --set.
  std::vector<std::string> flags;

  void Add(const std::string& key, const std::string& value) { flags.push_back(key + "=" + value); }
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "sgg: cannot read config file '" << path << "'\n";
    throw Failure(kExitIo);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Effective config JSON; echoed to stdout unless quiet.
std::string Effective(const Options& o) {
  const std::string overlay = o.config_file.empty() ? std::string() : ReadFile(o.config_file);
  std::vector<std::string> all = o.sets;
  all.insert(all.end(), o.flags.begin(), o.flags.end());
  std::vector<const char*> ptrs;
  for (const std::string& a : all) ptrs.push_back(a.c_str());
  OwnedString out;
  Check(sgg_config_effective(overlay.empty() ? nullptr : overlay.c_str(), ptrs.data(),
                             ptrs.size(), &out.s),
        "config");
  if (!o.quiet) std::cout << "# effective config\n" << out.str() << "\n";
  return out.str();
}

struct Paths {
  std::string corpus;
  std::string weights;
  std::string loss_csv;
  std::string report;
  std::string predictions;
  std::string attention_dir;
};

CorpusPtr ReadCorpus(const std::string& dir) {
  sgg_corpus* c = nullptr;
  Check(sgg_corpus_read(dir.c_str(), &c), "reading corpus");
  return CorpusPtr(c, &sgg_corpus_free);
}

std::pair<CorpusPtr, CorpusPtr> SplitCorpus(const sgg_corpus* c, const std::string& config) {
  sgg_corpus* train = nullptr;
  sgg_corpus* test = nullptr;
  Check(sgg_corpus_split_config(c, config.c_str(), &train, &test), "splitting corpus");
  return {CorpusPtr(train, &sgg_corpus_free), CorpusPtr(test, &sgg_corpus_free)};
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) {
    std::cerr << "sgg: cannot write '" << path << "'\n";
    throw Failure(kExitIo);
  }
}

void PrintEpoch(void* user, size_t epoch, double obj, double rel, double total) {
  if (*static_cast<bool*>(user)) return;
  std::printf("epoch %4zu  obj %.6f  rel %.6f  total %.6f\n", epoch, obj, rel, total);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-graph message passing, losses and metrics"};
  app.require_subcommand(1);
  Options o;
  uint64_t seed = 0;
  size_t threads = 0;
  app.add_option("--config", o.config_file, "JSON config file overlaid on the defaults");
  app.add_option("--set", o.sets, "Override, e.g. --set train.lr=0.01 (repeatable)");
  auto* seed_opt = app.add_option("--seed", seed, "Run seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads");
  app.add_flag("--quiet", o.quiet, "Do not echo the effective config");

  std::string corpus_dir;
  std::string weights;
  std::string loss_csv;
  std::string report;
  std::string predictions;
  std::string from_predictions;
  std::string out_path;
  std::string image_id;
  std::string mode;
  std::string ks;
  std::string fault;
  std::string split = "test";
  size_t k_per_pair = 0;
  size_t epochs = 0;
  size_t images = 0;
  size_t fixtures = 0;
  double lr = 0.0;
  double mu = 0.0;
  bool graph_constraint = true;

  auto* gen = app.add_subcommand("gen", "Write a synthetic corpus");
  gen->add_option("--out,--corpus", corpus_dir, "Corpus directory");
  auto* gen_images = gen->add_option("--images", images, "Number of images");

  auto* train = app.add_subcommand("train", "Train on the train split of a corpus");
  train->add_option("--corpus", corpus_dir, "Corpus directory");
  train->add_option("--weights", weights, "Output weights file");
  train->add_option("--loss-csv", loss_csv, "Output loss curve CSV");
  auto* epochs_opt = train->add_option("--epochs", epochs, "Training epochs");
  auto* lr_opt = train->add_option("--lr", lr, "Learning rate");
  auto* mu_opt = train->add_option("--mu", mu, "Priority-map exponent");

  auto* eval = app.add_subcommand("eval", "Evaluate trained weights");
  eval->add_option("--corpus", corpus_dir, "Corpus directory");
  eval->add_option("--weights", weights, "Weights file");
  eval->add_option("--report", report, "Report prefix (writes .json and .txt)");
  eval->add_option("--predictions", predictions, "Also write predictions JSONL");
  eval->add_option("--from-predictions", from_predictions,
                   "Score this predictions JSONL instead of running the model");
  auto* mode_opt = eval->add_option("--mode", mode, "predcls, sgcls or sgdet")
                       ->check(CLI::IsMember({"predcls", "sgcls", "sgdet"}));
  auto* k_opt = eval->add_option("--k", ks, "Comma-separated K list, e.g. 20,50,100");
  auto* kpp_opt = eval->add_option("--k-per-pair", k_per_pair, "Predicates kept per pair");
  auto* gc_opt = eval->add_flag("--graph-constraint,!--no-graph-constraint", graph_constraint,
                                "One predicate per ordered pair");
  eval->add_option("--split", split, "Images to score: test, train or all")
      ->check(CLI::IsMember({"test", "train", "all"}));

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  auto* fault_opt = gradcheck->add_option("--fault", fault,
                                          "Negate this parameter's gradient (e.g. dmp.W_t2)");
  auto* fixtures_opt = gradcheck->add_option("--fixtures", fixtures, "Seeded fixtures");
  gradcheck->add_option("--report", report, "Report prefix (writes .json and .txt)");

  auto* attention = app.add_subcommand("attention", "Export attention maps for one image");
  attention->add_option("--corpus", corpus_dir, "Corpus directory");
  attention->add_option("--weights", weights, "Weights file (seeded weights when omitted)");
  attention->add_option("--image", image_id, "Image id")->required();
  attention->add_option("--out", out_path, "Output directory");

  auto* prior = app.add_subcommand("prior", "Write the train-split frequency prior");
  prior->add_option("--corpus", corpus_dir, "Corpus directory");
  prior->add_option("--out", out_path, "Output JSON file")->required();

  app.add_subcommand("config", "Print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (seed_opt->count()) o.Add("seed", std::to_string(seed));
    if (threads_opt->count()) o.Add("threads", std::to_string(threads));
    if (!corpus_dir.empty()) o.Add("paths.corpus", corpus_dir);
    if (!weights.empty()) o.Add("paths.weights", weights);
    if (!loss_csv.empty()) o.Add("paths.loss_csv", loss_csv);
    if (!report.empty()) o.Add("paths.report", report);
    if (!predictions.empty()) o.Add("paths.predictions", predictions);
    if (!image_id.empty()) o.Add("image_id", image_id);
    if (gen_images->count()) o.Add("gen.num_images", std::to_string(images));
    if (epochs_opt->count()) o.Add("train.epochs", std::to_string(epochs));
    if (lr_opt->count()) o.Add("train.lr", std::to_string(lr));
    if (mu_opt->count()) o.Add("train.mu", std::to_string(mu));
    if (mode_opt->count()) o.Add("eval.mode", mode);
    if (k_opt->count()) o.Add("eval.ks", "[" + ks + "]");
    if (kpp_opt->count()) o.Add("eval.k_per_pair", std::to_string(k_per_pair));
    if (gc_opt->count()) o.Add("eval.graph_constraint", graph_constraint ? "true" : "false");
    if (fault_opt->count()) o.Add("gradcheck.fault", fault);
    if (fixtures_opt->count()) o.Add("gradcheck.fixtures", std::to_string(fixtures));

    const std::string config = Effective(o);
    // Paths are read back from the effective config so file values apply too.
    const nlohmann::json effective = nlohmann::json::parse(config);
    const nlohmann::json& pj = effective.at("paths");
    Paths paths{pj.at("corpus"),        pj.at("weights"),     pj.at("loss_csv"),
                pj.at("report"),        pj.at("predictions"), pj.at("attention_dir")};
    if (!out_path.empty()) paths.attention_dir = out_path;

    if (app.got_subcommand("config")) {
      if (o.quiet) std::cout << config << "\n";
      return kExitOk;
    }

    if (app.got_subcommand("gen")) {
      sgg_corpus* raw = nullptr;
      Check(sgg_corpus_generate(config.c_str(), &raw), "generating corpus");
      CorpusPtr corpus(raw, &sgg_corpus_free);
      Check(sgg_corpus_write(corpus.get(), paths.corpus.c_str()), "writing corpus");
      OwnedString stats;
      Check(sgg_corpus_stats(corpus.get(), &stats.s), "corpus statistics");
      std::cout << "# corpus written to " << paths.corpus << "\n" << stats.str() << "\n";
      return kExitOk;
    }

    if (app.got_subcommand("train")) {
      CorpusPtr corpus = ReadCorpus(paths.corpus);
      auto [train_part, test_part] = SplitCorpus(corpus.get(), config);
      sgg_model* raw = nullptr;
      Check(sgg_model_init(config.c_str(), train_part.get(), &raw), "initializing model");
      ModelPtr model(raw, &sgg_model_free);
      OwnedString summary;
      bool quiet = o.quiet;
      Check(sgg_train(model.get(), train_part.get(), config.c_str(), paths.loss_csv.c_str(),
                      &PrintEpoch, &quiet, &summary.s),
            "training");
      Check(sgg_model_write(model.get(), paths.weights.c_str()), "writing weights");
      std::cout << "# weights written to " << paths.weights << ", loss curve to "
                << paths.loss_csv << "\n"
                << summary.str() << "\n";
      return kExitOk;
    }

    if (app.got_subcommand("eval")) {
      CorpusPtr corpus = ReadCorpus(paths.corpus);
      auto [train_part, test_part] = SplitCorpus(corpus.get(), config);
      const sgg_corpus* target = split == "test"    ? test_part.get()
                                 : split == "train" ? train_part.get()
                                                    : corpus.get();
      OwnedString json;
      OwnedString text;
      if (!from_predictions.empty()) {
        Check(sgg_evaluate_predictions(from_predictions.c_str(), target, config.c_str(), &json.s,
                                       &text.s),
              "evaluating predictions");
      } else {
        sgg_model* raw = nullptr;
        Check(sgg_model_read(paths.weights.c_str(), &raw), "reading weights");
        ModelPtr model(raw, &sgg_model_free);
        Check(sgg_evaluate(model.get(), train_part.get(), target, config.c_str(),
                           paths.predictions.empty() ? nullptr : paths.predictions.c_str(),
                           &json.s, &text.s),
              "evaluating");
      }
      WriteFile(paths.report + ".json", json.str() + "\n");
      WriteFile(paths.report + ".txt", text.str());
      std::cout << text.str();
      return kExitOk;
    }

    if (app.got_subcommand("gradcheck")) {
      OwnedString json;
      OwnedString text;
      int all_passed = 0;
      Check(sgg_gradcheck(config.c_str(), &json.s, &text.s, &all_passed), "gradient check");
      if (!report.empty()) {
        WriteFile(paths.report + ".json", json.str() + "\n");
        WriteFile(paths.report + ".txt", text.str());
      }
      std::cout << text.str();
      return all_passed ? kExitOk : kExitNumerical;
    }

    if (app.got_subcommand("attention")) {
      CorpusPtr corpus = ReadCorpus(paths.corpus);
      ModelPtr model = NoModel();
      if (!weights.empty()) {
        sgg_model* raw = nullptr;
        Check(sgg_model_read(paths.weights.c_str(), &raw), "reading weights");
        model.reset(raw);
      }
      OwnedString json;
      Check(sgg_attention(model.get(), corpus.get(), image_id.c_str(),
                          paths.attention_dir.c_str(), config.c_str(), &json.s),
            "exporting attention");
      std::cout << json.str() << "\n";
      return kExitOk;
    }

    if (app.got_subcommand("prior")) {
      CorpusPtr corpus = ReadCorpus(paths.corpus);
      auto [train_part, test_part] = SplitCorpus(corpus.get(), config);
      Check(sgg_prior_write(train_part.get(), out_path.c_str()), "writing prior");
      std::cout << "# prior written to " << out_path << "\n";
      return kExitOk;
    }
  } catch (const Failure& f) {
    return f.code();
  }
  return kExitOk;
}
