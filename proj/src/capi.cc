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

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <random>
#include <string>

#include "config.h"
#include "corpus.h"
#include "errors.h"
#include "eval.h"
#include "gradcheck_suite.h"
#include "loss.h"
#include "message_passing.h"
#include "model.h"
#include "seed.h"
#include "synthetic.h"
#include "trainer.h"

struct sgg_corpus {
  sgg::Corpus corpus;
};

struct sgg_model {
  sgg::ModelParams params;
  sgg::ModelConfig config;
  uint64_t seed = 0;
};

namespace {

thread_local std::string last_message;

sgg_status StatusOf(sgg::ErrorKind kind) {
  switch (kind) {
    case sgg::ErrorKind::kDimension:
      return SGG_ERR_DIMENSION;
    case sgg::ErrorKind::kDomain:
      return SGG_ERR_DOMAIN;
    case sgg::ErrorKind::kRange:
      return SGG_ERR_RANGE;
    case sgg::ErrorKind::kData:
      return SGG_ERR_DATA;
    case sgg::ErrorKind::kConfig:
      return SGG_ERR_CONFIG;
    case sgg::ErrorKind::kNumerical:
      return SGG_ERR_NUMERICAL;
    case sgg::ErrorKind::kIo:
      return SGG_ERR_IO;
  }
  return SGG_ERR_INTERNAL;
}

template <typename Fn>
sgg_status Guard(Fn&& fn) {
  try {
    fn();
    last_message.clear();
    return SGG_OK;
  } catch (const sgg::Error& e) {
    last_message = e.what();
    return StatusOf(e.kind());
  } catch (const std::invalid_argument& e) {
    last_message = e.what();
    return SGG_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_message = "out of memory";
    return SGG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_message = e.what();
    return SGG_ERR_INTERNAL;
  } catch (...) {
    last_message = "unknown error";
    return SGG_ERR_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sgg::RunConfig Config(const char* config_json) {
  sgg::Json overlay;
  if (config_json != nullptr && config_json[0] != '\0') {
    try {
      overlay = sgg::Json::parse(config_json);
    } catch (const sgg::Json::exception& e) {
      throw sgg::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  return sgg::ParseRunConfig(sgg::EffectiveConfig(overlay, {}));
}

sgg::ModelConfig ModelConfigFor(const sgg::RunConfig& rc, const sgg::Corpus& corpus) {
  sgg::ModelConfig mc = rc.model;
  mc.num_object_classes = corpus.num_object_classes;
  mc.num_predicate_classes = corpus.num_predicate_classes;
  mc.feature_dim = corpus.feature_dim;
  mc.union_dim = corpus.union_dim;
  return mc;
}

void CheckCompatible(const sgg_model& m, const sgg::Corpus& c) {
  if (m.config.num_object_classes != c.num_object_classes ||
      m.config.num_predicate_classes != c.num_predicate_classes ||
      m.config.feature_dim != c.feature_dim || m.config.union_dim != c.union_dim) {
    throw sgg::ConfigError(
        "model was built for O=" + std::to_string(m.config.num_object_classes) +
        ", R=" + std::to_string(m.config.num_predicate_classes) +
        ", d=" + std::to_string(m.config.feature_dim) +
        ", d_u=" + std::to_string(m.config.union_dim) + " but the corpus has O=" +
        std::to_string(c.num_object_classes) + ", R=" + std::to_string(c.num_predicate_classes) +
        ", d=" + std::to_string(c.feature_dim) + ", d_u=" + std::to_string(c.union_dim));
  }
}

void EmitReport(const sgg::MetricReport& rep, char** out_json, char** out_text) {
  if (out_json != nullptr) *out_json = Dup(sgg::MetricReportToJson(rep).dump(2));
  if (out_text != nullptr) *out_text = Dup(sgg::MetricReportText(rep));
}

}  // namespace

extern "C" {

const char* sgg_version(void) { return "1.0.0"; }

const char* sgg_status_name(sgg_status status) {
  switch (status) {
    case SGG_OK:
      return "ok";
    case SGG_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case SGG_ERR_DIMENSION:
      return "dimension error";
    case SGG_ERR_DOMAIN:
      return "domain error";
    case SGG_ERR_RANGE:
      return "range error";
    case SGG_ERR_DATA:
      return "data error";
    case SGG_ERR_CONFIG:
      return "config error";
    case SGG_ERR_NUMERICAL:
      return "numerical error";
    case SGG_ERR_IO:
      return "i/o error";
    case SGG_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* sgg_last_error_message(void) { return last_message.c_str(); }

void sgg_string_free(char* s) { std::free(s); }

sgg_status sgg_config_effective(const char* overlay_json, const char* const* assignments,
                                size_t num_assignments, char** out_json) {
  sgg_status s = Guard([&] {
    Require(out_json != nullptr, "out_json is NULL");
    Require(num_assignments == 0 || assignments != nullptr, "assignments is NULL");
    sgg::Json overlay;
    if (overlay_json != nullptr && overlay_json[0] != '\0') {
      try {
        overlay = sgg::Json::parse(overlay_json);
      } catch (const sgg::Json::exception& e) {
        throw sgg::ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    std::vector<std::string> list;
    for (size_t k = 0; k < num_assignments; ++k) list.emplace_back(assignments[k]);
    *out_json = Dup(sgg::EffectiveConfig(overlay, list).dump(2));
  });
  return s;
}

sgg_status sgg_corpus_generate(const char* config_json, sgg_corpus** out) {
  return Guard([&] {
    Require(out != nullptr, "out is NULL");
    const sgg::RunConfig rc = Config(config_json);
    auto handle = std::make_unique<sgg_corpus>();
    handle->corpus = sgg::GenCorpus(rc.gen);
    *out = handle.release();
  });
}

sgg_status sgg_corpus_read(const char* dir, sgg_corpus** out) {
  return Guard([&] {
    Require(dir != nullptr && out != nullptr, "dir or out is NULL");
    auto handle = std::make_unique<sgg_corpus>();
    handle->corpus = sgg::ReadCorpus(dir);
    *out = handle.release();
  });
}

sgg_status sgg_corpus_write(const sgg_corpus* corpus, const char* dir) {
  return Guard([&] {
    Require(corpus != nullptr && dir != nullptr, "corpus or dir is NULL");
    sgg::WriteCorpus(corpus->corpus, dir);
  });
}

size_t sgg_corpus_size(const sgg_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.size();
}

sgg_status sgg_corpus_stats(const sgg_corpus* corpus, char** out_json) {
  return Guard([&] {
    Require(corpus != nullptr && out_json != nullptr, "corpus or out_json is NULL");
    const sgg::Corpus& c = corpus->corpus;
    size_t nodes = 0;
    size_t triplets = 0;
    for (const sgg::SceneGraph& g : c.graphs) {
      nodes += g.nodes.size();
      triplets += g.triplets.size();
    }
    sgg::Json j{{"images", c.size()},
                {"nodes", nodes},
                {"triplets", triplets},
                {"num_object_classes", c.num_object_classes},
                {"num_predicate_classes", c.num_predicate_classes},
                {"feature_dim", c.feature_dim},
                {"union_dim", c.union_dim},
                {"predicate_histogram", sgg::PredicateHistogram(c)},
                {"predicate_names", c.vocab.predicate_classes}};
    *out_json = Dup(j.dump(2));
  });
}

sgg_status sgg_corpus_split(const sgg_corpus* corpus, double train_fraction, uint64_t seed,
                            sgg_corpus** out_train, sgg_corpus** out_test) {
  return Guard([&] {
    Require(corpus != nullptr && out_train != nullptr && out_test != nullptr,
            "corpus or outputs are NULL");
    auto parts = sgg::Split(corpus->corpus, train_fraction, seed);
    auto train = std::make_unique<sgg_corpus>();
    auto test = std::make_unique<sgg_corpus>();
    train->corpus = std::move(parts.first);
    test->corpus = std::move(parts.second);
    *out_train = train.release();
    *out_test = test.release();
  });
}

sgg_status sgg_corpus_split_config(const sgg_corpus* corpus, const char* config_json,
                                   sgg_corpus** out_train, sgg_corpus** out_test) {
  double fraction = 0.0;
  uint64_t seed = 0;
  const sgg_status s = Guard([&] {
    const sgg::RunConfig rc = Config(config_json);
    fraction = rc.train_fraction;
    seed = sgg::SplitSeed(rc);
  });
  if (s != SGG_OK) return s;
  return sgg_corpus_split(corpus, fraction, seed, out_train, out_test);
}

void sgg_corpus_free(sgg_corpus* corpus) { delete corpus; }

sgg_status sgg_prior_write(const sgg_corpus* corpus, const char* path) {
  return Guard([&] {
    Require(corpus != nullptr && path != nullptr, "corpus or path is NULL");
    const sgg::Corpus& c = corpus->corpus;
    const sgg::FrequencyPrior prior =
        sgg::BuildFrequencyPrior(c.graphs, c.num_object_classes, c.num_predicate_classes);
    sgg::Json probs = sgg::Json::array();
    for (int s = 0; s < c.num_object_classes; ++s) {
      for (int o = 0; o < c.num_object_classes; ++o) {
        const auto p = prior.Lookup(s, o);
        probs.push_back(std::vector<double>(p.begin(), p.end()));
      }
    }
    sgg::Json j{{"num_object_classes", c.num_object_classes},
                {"num_predicate_classes", c.num_predicate_classes},
                {"smoothing", prior.smoothing()},
                {"counts", prior.counts()},
                {"probabilities", probs}};
    sgg::WriteTextFile(path, j.dump() + "\n");
  });
}

sgg_status sgg_model_init(const char* config_json, const sgg_corpus* corpus, sgg_model** out) {
  return Guard([&] {
    Require(corpus != nullptr && out != nullptr, "corpus or out is NULL");
    const sgg::RunConfig rc = Config(config_json);
    auto handle = std::make_unique<sgg_model>();
    handle->config = ModelConfigFor(rc, corpus->corpus);
    handle->seed = rc.seed;
    std::mt19937_64 rng(sgg::DeriveSeed(rc.seed, sgg::SeedTag::kInit));
    handle->params = sgg::InitModel(handle->config, rng);
    *out = handle.release();
  });
}

sgg_status sgg_model_read(const char* path, sgg_model** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "path or out is NULL");
    const sgg::Json j = sgg::ReadJsonFile(path);
    auto handle = std::make_unique<sgg_model>();
    auto [params, config] = sgg::WeightsFromJson(j);
    handle->params = std::move(params);
    handle->config = config;
    handle->seed = j.value("seed", uint64_t{0});
    *out = handle.release();
  });
}

sgg_status sgg_model_write(const sgg_model* model, const char* path) {
  return Guard([&] {
    Require(model != nullptr && path != nullptr, "model or path is NULL");
    sgg::WriteTextFile(path,
                       sgg::WeightsToJson(model->params, model->config, model->seed).dump() + "\n");
  });
}

void sgg_model_free(sgg_model* model) { delete model; }

sgg_status sgg_train(sgg_model* model, const sgg_corpus* train, const char* config_json,
                     const char* loss_csv_path, sgg_epoch_callback callback, void* user_data,
                     char** out_summary_json) {
  return Guard([&] {
    Require(model != nullptr && train != nullptr, "model or corpus is NULL");
    const sgg::RunConfig rc = Config(config_json);
    CheckCompatible(*model, train->corpus);
    sgg::EpochCallback cb;
    if (callback != nullptr) {
      cb = [callback, user_data](const sgg::EpochLoss& e) {
        callback(user_data, e.epoch, e.obj_loss, e.rel_loss, e.total);
      };
    }
    const auto start = std::chrono::steady_clock::now();
    sgg::TrainResult result = sgg::Train(train->corpus, model->params, model->config, rc.train, cb);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    model->params = std::move(result.params);
    model->seed = rc.seed;
    if (loss_csv_path != nullptr) {
      sgg::WriteTextFile(loss_csv_path, sgg::LossCurveCsv(result.curve));
    }
    if (out_summary_json != nullptr) {
      sgg::Json j{{"epochs", result.curve.size()},
                  {"images", train->corpus.size()},
                  {"seconds", seconds},
                  {"train", sgg::TrainConfigToJson(rc.train)}};
      if (!result.curve.empty()) {
        j["first_total"] = result.curve.front().total;
        j["final_total"] = result.curve.back().total;
        j["final_obj_loss"] = result.curve.back().obj_loss;
        j["final_rel_loss"] = result.curve.back().rel_loss;
      }
      *out_summary_json = Dup(j.dump(2));
    }
  });
}

sgg_status sgg_evaluate(const sgg_model* model, const sgg_corpus* prior_corpus,
                        const sgg_corpus* eval_corpus, const char* config_json,
                        const char* predictions_path, char** out_report_json,
                        char** out_report_text) {
  return Guard([&] {
    Require(model != nullptr && prior_corpus != nullptr && eval_corpus != nullptr,
            "model or corpus is NULL");
    const sgg::RunConfig rc = Config(config_json);
    CheckCompatible(*model, eval_corpus->corpus);
    CheckCompatible(*model, prior_corpus->corpus);
    const sgg::Corpus& pc = prior_corpus->corpus;
    const sgg::FrequencyPrior prior =
        sgg::BuildFrequencyPrior(pc.graphs, pc.num_object_classes, pc.num_predicate_classes);
    const auto preds = sgg::MakePredictions(model->params, model->config, prior,
                                            eval_corpus->corpus, rc.eval.mode);
    if (predictions_path != nullptr) sgg::WritePredictions(preds, predictions_path);
    const sgg::Corpus& ec = eval_corpus->corpus;
    EmitReport(sgg::ComputeMetrics(preds, ec.graphs, ec.num_predicate_classes, rc.eval,
                                   ec.vocab.predicate_classes),
               out_report_json, out_report_text);
  });
}

sgg_status sgg_evaluate_predictions(const char* predictions_path, const sgg_corpus* gt,
                                    const char* config_json, char** out_report_json,
                                    char** out_report_text) {
  return Guard([&] {
    Require(predictions_path != nullptr && gt != nullptr, "path or corpus is NULL");
    const sgg::RunConfig rc = Config(config_json);
    const auto preds = sgg::ReadPredictions(predictions_path);
    const sgg::Corpus& c = gt->corpus;
    EmitReport(sgg::ComputeMetrics(preds, c.graphs, c.num_predicate_classes, rc.eval,
                                   c.vocab.predicate_classes),
               out_report_json, out_report_text);
  });
}

sgg_status sgg_gradcheck(const char* config_json, char** out_report_json, char** out_report_text,
                         int* out_all_passed) {
  return Guard([&] {
    const sgg::RunConfig rc = Config(config_json);
    const sgg::GradcheckResult r = sgg::RunGradcheckSuite(rc.gradcheck);
    if (out_all_passed != nullptr) *out_all_passed = r.all_passed ? 1 : 0;
    if (out_report_json != nullptr) *out_report_json = Dup(sgg::GradcheckResultToJson(r).dump(2));
    if (out_report_text != nullptr) *out_report_text = Dup(sgg::GradcheckResultText(r));
  });
}

sgg_status sgg_attention(const sgg_model* model, const sgg_corpus* corpus, const char* image_id,
                         const char* out_dir, const char* config_json, char** out_json) {
  return Guard([&] {
    Require(corpus != nullptr && image_id != nullptr && out_dir != nullptr,
            "corpus, image_id or out_dir is NULL");
    const sgg::RunConfig rc = Config(config_json);
    const sgg::Corpus& c = corpus->corpus;
    const size_t idx = c.Find(image_id);
    const sgg::ImageFeatures& f = c.features[idx];

    sgg::ModelParams params;
    sgg::ModelConfig mc;
    if (model != nullptr) {
      CheckCompatible(*model, c);
      params = model->params;
      mc = model->config;
    } else {
      mc = ModelConfigFor(rc, c);
      std::mt19937_64 rng(sgg::DeriveSeed(rc.seed, sgg::SeedTag::kInit));
      params = sgg::InitModel(mc, rng);
    }
    std::mt19937_64 rng(sgg::DeriveSeed(rc.seed, sgg::SeedTag::kAttention));
    const sgg::GCMPParams gcmp = sgg::InitGCMP(c.feature_dim, rng);
    const sgg::SGCMPParams sgcmp = sgg::InitSGCMP(c.feature_dim, rng);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw sgg::IoError("cannot create '" + std::string(out_dir) + "': " + ec.message());
    const std::string dir(out_dir);
    const sgg::Mat a_gcmp = sgg::GcmpForward(f.x, gcmp).attention;
    const sgg::Mat a_sgcmp = sgg::SgcmpForward(f.x, sgcmp).attention;
    const sgg::Mat s_sgcmp = sgg::SgcmpScores(f.x, sgcmp);
    const sgg::ImageForward fwd = sgg::ForwardNodes(params, mc, f.x, f.u);
    sgg::ExportAttention(a_gcmp, dir + "/gcmp.csv");
    sgg::ExportAttention(a_sgcmp, dir + "/sgcmp.csv");
    sgg::ExportAttention(s_sgcmp, dir + "/sgcmp_scores.csv");
    sgg::ExportAttention(fwd.attention, dir + "/dmp.csv");
    if (out_json != nullptr) {
      sgg::Json j{{"image_id", image_id},
                  {"nodes", f.x.rows()},
                  {"dmp_weights", model != nullptr ? "model" : "seeded"},
                  {"files",
                   {{"gcmp", dir + "/gcmp.csv"},
                    {"sgcmp", dir + "/sgcmp.csv"},
                    {"sgcmp_scores", dir + "/sgcmp_scores.csv"},
                    {"dmp", dir + "/dmp.csv"}}}};
      *out_json = Dup(j.dump(2));
    }
  });
}

sgg_status sgg_gamma_map(double theta, double mu, double* out) {
  return Guard([&] {
    Require(out != nullptr, "out is NULL");
    *out = sgg::GammaMap(theta, mu);
  });
}

double sgg_score_wtd(double r50, double wmap_rel, double wmap_phr) {
  return sgg::ScoreWtd(r50, wmap_rel, wmap_phr);
}

}  // extern "C"
