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
#include "corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "errors.h"

namespace sgg {
namespace {

namespace fs = std::filesystem;

std::vector<Json> ReadJsonLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<Json> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void WriteJsonLines(const std::string& path, const std::vector<Json>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const Json& row : rows) out << row.dump() << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

Json FeaturesToJson(const std::string& image_id, const ImageFeatures& f) {
  Json j{{"image_id", image_id}, {"X", MatToJson(f.x)}, {"U", MatToJson(f.u.dense())}};
  if (!f.spatial_codes.empty()) j["spatial_codes"] = f.spatial_codes;
  return j;
}

ImageFeatures FeaturesFromJson(const Json& j, size_t num_nodes) {
  ImageFeatures f;
  f.x = MatFromJson(j.at("X"));
  if (f.x.rows() != num_nodes) {
    throw DataError("features for '" + j.at("image_id").get<std::string>() + "' have " +
                    std::to_string(f.x.rows()) + " rows for " + std::to_string(num_nodes) +
                    " nodes");
  }
  Mat dense = MatFromJson(j.at("U"));
  if (num_nodes == 1) {
    f.u = UnionFeatures(1, dense.cols());
  } else {
    f.u = UnionFeatures::FromDense(num_nodes, std::move(dense));
  }
  if (j.contains("spatial_codes")) f.spatial_codes = j.at("spatial_codes").get<std::vector<int>>();
  return f;
}

}  // namespace

int RuleTable::At(int subject_class, int object_class, int code) const {
  if (subject_class < 0 || subject_class >= num_object_classes || object_class < 0 ||
      object_class >= num_object_classes || code < 0 || code >= num_codes) {
    throw RangeError("rule table: lookup (" + std::to_string(subject_class) + ", " +
                     std::to_string(object_class) + ", " + std::to_string(code) +
                     ") out of range");
  }
  return predicates[(static_cast<size_t>(subject_class) * num_object_classes + object_class) *
                        num_codes +
                    code];
}

size_t Corpus::Find(const std::string& image_id) const {
  for (size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].image_id == image_id) return i;
  }
  throw DataError("unknown image id '" + image_id + "'");
}

Vocab DefaultVocab(int num_object_classes, int num_predicate_classes) {
  Vocab v;
  v.object_classes.push_back("__background__");
  for (int i = 1; i < num_object_classes; ++i) v.object_classes.push_back("object_" + std::to_string(i));
  v.predicate_classes.push_back("__background__");
  for (int i = 1; i < num_predicate_classes; ++i) {
    v.predicate_classes.push_back("predicate_" + std::to_string(i));
  }
  return v;
}

void ValidateCorpus(const Corpus& corpus) {
  if (corpus.graphs.size() != corpus.features.size()) {
    throw DataError("corpus has " + std::to_string(corpus.graphs.size()) + " graphs but " +
                    std::to_string(corpus.features.size()) + " feature records");
  }
  for (size_t k = 0; k < corpus.graphs.size(); ++k) {
    const SceneGraph& g = corpus.graphs[k];
    ValidateGraph(g, corpus.num_object_classes, corpus.num_predicate_classes, true);
    const ImageFeatures& f = corpus.features[k];
    if (g.nodes.empty()) throw DataError("graph '" + g.image_id + "' has no nodes");
    if (f.x.rows() != g.nodes.size() || f.x.cols() != corpus.feature_dim) {
      throw DataError("graph '" + g.image_id + "': node features " + f.x.ShapeString() +
                      " do not match " + std::to_string(g.nodes.size()) + " nodes of width " +
                      std::to_string(corpus.feature_dim));
    }
    if (f.u.num_nodes() != g.nodes.size() || f.u.dim() != corpus.union_dim) {
      throw DataError("graph '" + g.image_id + "': union features do not match");
    }
  }
}

std::pair<Corpus, Corpus> Split(const Corpus& corpus, double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train fraction must lie in (0, 1)");
  }
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t n_train =
      static_cast<size_t>(std::llround(train_fraction * static_cast<double>(corpus.size())));
  std::vector<size_t> first(order.begin(), order.begin() + static_cast<long>(n_train));
  std::vector<size_t> second(order.begin() + static_cast<long>(n_train), order.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());

  auto take = [&corpus](const std::vector<size_t>& idx) {
    Corpus c;
    c.num_object_classes = corpus.num_object_classes;
    c.num_predicate_classes = corpus.num_predicate_classes;
    c.feature_dim = corpus.feature_dim;
    c.union_dim = corpus.union_dim;
    c.vocab = corpus.vocab;
    c.rules = corpus.rules;
    c.meta = corpus.meta;
    for (size_t i : idx) {
      c.graphs.push_back(corpus.graphs[i]);
      c.features.push_back(corpus.features[i]);
    }
    return c;
  };
  return {take(first), take(second)};
}

std::vector<long> PredicateHistogram(const Corpus& corpus) {
  std::vector<long> hist(static_cast<size_t>(corpus.num_predicate_classes), 0);
  for (const SceneGraph& g : corpus.graphs) {
    for (const Triplet& t : g.triplets) ++hist.at(static_cast<size_t>(t.predicate));
  }
  return hist;
}

Json GraphToJson(const SceneGraph& graph) {
  Json nodes = Json::array();
  for (const Node& n : graph.nodes) {
    Json node{{"class_id", n.class_id},
              {"bbox", {n.bbox.x1, n.bbox.y1, n.bbox.x2, n.bbox.y2}}};
    if (n.scores) node["scores"] = *n.scores;
    nodes.push_back(std::move(node));
  }
  Json triplets = Json::array();
  for (const Triplet& t : graph.triplets) {
    Json row{t.subject, t.predicate, t.object};
    if (t.confidence) row.push_back(*t.confidence);
    triplets.push_back(std::move(row));
  }
  return Json{{"image_id", graph.image_id}, {"nodes", nodes}, {"triplets", triplets}};
}

SceneGraph GraphFromJson(const Json& j) {
  try {
    SceneGraph g;
    const Json& id = j.at("image_id");
    g.image_id = id.is_string() ? id.get<std::string>() : id.dump();
    for (const Json& node : j.at("nodes")) {
      Node n;
      n.class_id = node.at("class_id").get<int>();
      const auto box = node.at("bbox").get<std::vector<double>>();
      if (box.size() != 4) throw DataError("bbox must have four coordinates");
      n.bbox = {box[0], box[1], box[2], box[3]};
      if (node.contains("scores")) n.scores = node.at("scores").get<std::vector<double>>();
      g.nodes.push_back(std::move(n));
    }
    for (const Json& row : j.at("triplets")) {
      if (row.size() != 3 && row.size() != 4) {
        throw DataError("triplet rows must be [subject, predicate, object(, confidence)]");
      }
      Triplet t;
      const long s = row[0].get<long>();
      const long o = row[2].get<long>();
      if (s < 0 || o < 0) throw RangeError("negative triplet node index");
      t.subject = static_cast<size_t>(s);
      t.predicate = row[1].get<int>();
      t.object = static_cast<size_t>(o);
      if (row.size() == 4) t.confidence = row[3].get<double>();
      g.triplets.push_back(t);
    }
    return g;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed scene graph JSON: ") + e.what());
  }
}

void WriteCorpus(const Corpus& corpus, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  std::vector<Json> graphs;
  std::vector<Json> features;
  for (size_t i = 0; i < corpus.size(); ++i) {
    graphs.push_back(GraphToJson(corpus.graphs[i]));
    features.push_back(FeaturesToJson(corpus.graphs[i].image_id, corpus.features[i]));
  }
  WriteJsonLines(dir + "/graphs.jsonl", graphs);
  WriteJsonLines(dir + "/features.jsonl", features);
  Json vocab{{"object_classes", corpus.vocab.object_classes},
             {"predicate_classes", corpus.vocab.predicate_classes}};
  WriteTextFile(dir + "/vocab.json", vocab.dump(2) + "\n");
  Json meta = corpus.meta.is_null() ? Json::object() : corpus.meta;
  meta["feature_dim"] = corpus.feature_dim;
  meta["union_dim"] = corpus.union_dim;
  if (corpus.rules) {
    meta["rule_table"] = {{"num_object_classes", corpus.rules->num_object_classes},
                          {"num_codes", corpus.rules->num_codes},
                          {"predicates", corpus.rules->predicates}};
  }
  WriteTextFile(dir + "/meta.json", meta.dump(2) + "\n");
}

Corpus ReadCorpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("corpus directory '" + dir + "' does not exist");
  Corpus c;
  const Json vocab = ReadJsonFile(dir + "/vocab.json");
  try {
    c.vocab.object_classes = vocab.at("object_classes").get<std::vector<std::string>>();
    c.vocab.predicate_classes = vocab.at("predicate_classes").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw DataError("malformed vocab.json: " + std::string(e.what()));
  }
  c.num_object_classes = static_cast<int>(c.vocab.object_classes.size());
  c.num_predicate_classes = static_cast<int>(c.vocab.predicate_classes.size());
  if (fs::exists(dir + "/meta.json")) {
    c.meta = ReadJsonFile(dir + "/meta.json");
    if (c.meta.contains("rule_table")) {
      const Json& rt = c.meta["rule_table"];
      RuleTable rules;
      rules.num_object_classes = rt.at("num_object_classes").get<int>();
      rules.num_codes = rt.at("num_codes").get<int>();
      rules.predicates = rt.at("predicates").get<std::vector<int>>();
      c.rules = std::move(rules);
      c.meta.erase("rule_table");
    }
  }
  const auto graphs = ReadJsonLines(dir + "/graphs.jsonl");
  const auto features = ReadJsonLines(dir + "/features.jsonl");
  if (graphs.size() != features.size()) {
    throw DataError("corpus '" + dir + "': " + std::to_string(graphs.size()) + " graphs but " +
                    std::to_string(features.size()) + " feature records");
  }
  for (size_t i = 0; i < graphs.size(); ++i) {
    SceneGraph g = GraphFromJson(graphs[i]);
    if (features[i].at("image_id").get<std::string>() != g.image_id) {
      throw DataError("corpus '" + dir + "': features line " + std::to_string(i + 1) +
                      " does not belong to image '" + g.image_id + "'");
    }
    c.features.push_back(FeaturesFromJson(features[i], g.nodes.size()));
    c.graphs.push_back(std::move(g));
  }
  if (c.meta.contains("feature_dim")) {
    c.feature_dim = c.meta["feature_dim"].get<size_t>();
    c.union_dim = c.meta["union_dim"].get<size_t>();
    c.meta.erase("feature_dim");
    c.meta.erase("union_dim");
  } else if (!c.features.empty()) {
    c.feature_dim = c.features[0].x.cols();
    c.union_dim = c.features[0].u.dim();
  }
  ValidateCorpus(c);
  return c;
}

void WritePredictions(const std::vector<SceneGraph>& predictions, const std::string& path) {
  std::vector<Json> rows;
  rows.reserve(predictions.size());
  for (const SceneGraph& g : predictions) rows.push_back(GraphToJson(g));
  WriteJsonLines(path, rows);
}

std::vector<SceneGraph> ReadPredictions(const std::string& path) {
  std::vector<SceneGraph> out;
  for (const Json& row : ReadJsonLines(path)) out.push_back(GraphFromJson(row));
  return out;
}

}  // namespace sgg
