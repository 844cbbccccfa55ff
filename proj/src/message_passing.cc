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
#include "message_passing.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.h"

namespace sgg {
namespace {

void RequireShape(const Mat& m, size_t rows, size_t cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(name + " has shape " + m.ShapeString() + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

// Rows of x mapped through w: row i = w x_i.
Mat ProjectRows(const Mat& x, const Mat& w) { return MatMul(x, w.Transposed()); }

// Shared implementation of GCMP / S-GCMP. `w_self` may be empty (S-GCMP).
MpOutput GlobalContextForward(const Mat& x, const Mat& w_z, const Mat& w_v,
                              std::span<const double> w_self,
                              std::span<const double> w_other, GlobalContextCache* cache) {
  const size_t n = x.rows();
  const size_t d = x.cols();
  RequireShape(w_z, d, d, "W_z");
  RequireShape(w_v, d, d, "W_v");
  if (w_other.size() != d || (!w_self.empty() && w_self.size() != d)) {
    throw DimensionError("context projection vector does not match feature dim " +
                         std::to_string(d));
  }

  Mat values = ProjectRows(x, w_v);
  Mat scores(n, n);
  Mat attention(n, n);
  Mat context(n, d);
  if (n >= 2) {
    Vec other(n);
    for (size_t j = 0; j < n; ++j) other[j] = Dot(w_other, x.row(j));
    for (size_t i = 0; i < n; ++i) {
      const double self = w_self.empty() ? 0.0 : Dot(w_self, x.row(i));
      for (size_t j = 0; j < n; ++j) {
        if (j != i) scores(i, j) = self + other[j];
      }
      const size_t mask[] = {i};
      const Vec c = SoftmaxRow(scores.row(i), mask);
      for (size_t j = 0; j < n; ++j) {
        attention(i, j) = c[j];
        if (j != i) Axpy(c[j], values.row(j), context.row(i));
      }
    }
  }
  Mat hidden(n, d);
  for (size_t i = 0; i < n; ++i) {
    const Vec h = Relu(context.row(i));
    std::copy(h.begin(), h.end(), hidden.row(i).begin());
  }
  Mat z = x + ProjectRows(hidden, w_z);
  if (cache != nullptr) {
    cache->values = std::move(values);
    cache->attention = attention;
    cache->context = std::move(context);
    cache->hidden = std::move(hidden);
    cache->scores = std::move(scores);
  }
  return {std::move(z), std::move(attention)};
}

// Returns dx; accumulates into the parameter gradients. `dw_self` is ignored
// when empty.
Mat GlobalContextBackward(const Mat& x, const Mat& w_z, const Mat& w_v,
                          std::span<const double> w_self, std::span<const double> w_other,
                          const GlobalContextCache& cache, const Mat& dz, Mat& dw_z,
                          Mat& dw_v, std::span<double> dw_self, std::span<double> dw_other) {
  const size_t n = x.rows();
  const size_t d = x.cols();
  RequireShape(dz, n, d, "dZ");
  Mat dx = dz;
  dw_z += MatMul(dz.Transposed(), cache.hidden);
  if (n < 2) return dx;

  Mat dvalues(n, d);
  for (size_t i = 0; i < n; ++i) {
    const Vec dh = MatTVec(w_z, dz.row(i));
    const Vec dm = ReluBackward(cache.context.row(i), dh);
    Vec dc(n, 0.0);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dc[j] = Dot(dm, cache.values.row(j));
      Axpy(cache.attention(i, j), dm, dvalues.row(j));
    }
    const size_t mask[] = {i};
    const Vec ds = SoftmaxRowBackward(cache.attention.row(i), dc, mask);
    double ds_total = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      ds_total += ds[j];
      Axpy(ds[j], x.row(j), dw_other);
      Axpy(ds[j], w_other, dx.row(j));
    }
    if (!w_self.empty()) {
      Axpy(ds_total, x.row(i), dw_self);
      Axpy(ds_total, w_self, dx.row(i));
    }
  }
  dw_v += MatMul(dvalues.Transposed(), x);
  dx += MatMul(dvalues, w_v);
  return dx;
}

MpOutput DmpForwardImpl(const Mat& x, const UnionFeatures& u, const DMPParams& params,
                        DmpCache* cache) {
  ValidateShapes(params);
  const size_t n = x.rows();
  const size_t d = x.cols();
  if (d != params.feature_dim()) {
    throw DimensionError("DMP: features have width " + std::to_string(d) +
                         " but params expect " + std::to_string(params.feature_dim()));
  }
  if (n == 1) {
    // Empty neighborhood: the contextual sum is zero and the block is skipped.
    if (cache != nullptr) *cache = DmpCache{};
    return {x, Mat(1, 1)};
  }

  DmpCache local;
  DmpCache& c = cache != nullptr ? *cache : local;
  c.subj = ProjectRows(x, params.w_s);
  c.obj = ProjectRows(x, params.w_o);
  if (u.num_nodes() != n || u.dim() != params.union_dim()) {
    throw DimensionError("DMP: union features cover " + std::to_string(u.num_nodes()) +
                         " nodes of width " + std::to_string(u.dim()) + ", expected " +
                         std::to_string(n) + " of width " + std::to_string(params.union_dim()));
  }
  c.union_proj = Mat(n * n, d);
  Mat e(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec cu = MatVec(params.w_u, u.At(i, j));
      std::copy(cu.begin(), cu.end(), c.union_proj.row(i * n + j).begin());
      double s = 0.0;
      auto a = c.subj.row(i);
      auto b = c.obj.row(j);
      for (size_t k = 0; k < d; ++k) s += (a[k] * b[k]) * (params.w_e[k] * cu[k]);
      e(i, j) = s;
    }
  }
  c.attention = DmpNormalize(e);
  c.messages = ProjectRows(x, params.w_t3);
  c.aggregate = DmpAggregate(c.attention, x, params);
  c.pre_norm = ProjectRows(c.aggregate, params.w_t2);
  const size_t h = params.hidden_dim();
  c.norm.assign(n, LayerNormCache{});
  c.normed = Mat(n, h);
  c.hidden = Mat(n, h);
  for (size_t i = 0; i < n; ++i) {
    const Vec l = LayerNorm(c.pre_norm.row(i), params.ln_gain.data(), params.ln_bias.data(),
                            kLayerNormEps, &c.norm[i]);
    std::copy(l.begin(), l.end(), c.normed.row(i).begin());
    const Vec r = Relu(l);
    std::copy(r.begin(), r.end(), c.hidden.row(i).begin());
  }
  Mat z = x + ProjectRows(c.hidden, params.w_t1);
  return {std::move(z), c.attention};
}

}  // namespace

UnionFeatures::UnionFeatures(size_t num_nodes, size_t dim)
    : n_(num_nodes),
      dim_(dim),
      dense_(std::max<size_t>(1, num_nodes * num_nodes), dim),
      present_(num_nodes * num_nodes, 0) {}

UnionFeatures UnionFeatures::FromDense(size_t num_nodes, Mat dense) {
  if (dense.rows() != num_nodes * num_nodes) {
    throw DimensionError("union features: dense block has " + std::to_string(dense.rows()) +
                         " rows, expected " + std::to_string(num_nodes * num_nodes));
  }
  UnionFeatures u(num_nodes, dense.cols());
  u.dense_ = std::move(dense);
  for (size_t i = 0; i < num_nodes; ++i)
    for (size_t j = 0; j < num_nodes; ++j) u.present_[i * num_nodes + j] = i != j;
  return u;
}

bool UnionFeatures::Has(size_t i, size_t j) const {
  return i < n_ && j < n_ && present_[i * n_ + j] != 0;
}

std::span<const double> UnionFeatures::At(size_t i, size_t j) const {
  if (!Has(i, j)) {
    throw DataError("missing union feature for pair (" + std::to_string(i) + ", " +
                    std::to_string(j) + ")");
  }
  return dense_.row(i * n_ + j);
}

void UnionFeatures::SetSymmetric(size_t i, size_t j, std::span<const double> value) {
  if (i >= n_ || j >= n_ || i == j) {
    throw RangeError("union features: invalid pair (" + std::to_string(i) + ", " +
                     std::to_string(j) + ")");
  }
  if (value.size() != dim_) {
    throw DimensionError("union features: value of length " + std::to_string(value.size()) +
                         ", expected " + std::to_string(dim_));
  }
  std::copy(value.begin(), value.end(), dense_.row(i * n_ + j).begin());
  std::copy(value.begin(), value.end(), dense_.row(j * n_ + i).begin());
  present_[i * n_ + j] = 1;
  present_[j * n_ + i] = 1;
}

std::vector<std::pair<std::string, Mat*>> DMPParams::Named() {
  return {{"W_s", &w_s},   {"W_o", &w_o},   {"W_u", &w_u},
          {"w_e", &w_e},   {"W_t3", &w_t3}, {"W_t2", &w_t2},
          {"W_t1", &w_t1}, {"ln_gain", &ln_gain}, {"ln_bias", &ln_bias}};
}

std::vector<std::pair<std::string, const Mat*>> DMPParams::Named() const {
  std::vector<std::pair<std::string, const Mat*>> out;
  for (auto& [name, m] : const_cast<DMPParams*>(this)->Named()) out.emplace_back(name, m);
  return out;
}

GCMPParams InitGCMP(size_t d, std::mt19937_64& rng) {
  GCMPParams p;
  p.w_z = UniformInit(d, d, rng);
  p.w_v = UniformInit(d, d, rng);
  p.w = UniformInit(2 * d, 1, rng);
  return p;
}

SGCMPParams InitSGCMP(size_t d, std::mt19937_64& rng) {
  SGCMPParams p;
  p.w_z = UniformInit(d, d, rng);
  p.w_v = UniformInit(d, d, rng);
  p.w_e = UniformInit(d, 1, rng);
  return p;
}

DMPParams InitDMP(size_t d, size_t d_u, size_t h, bool stacked, std::mt19937_64& rng) {
  if (stacked && d % 2 != 0) {
    throw ConfigError("DMP: feature dim must be even for stacking, got " + std::to_string(d));
  }
  DMPParams p;
  p.stacked = stacked;
  p.w_s = UniformInit(d, d, rng);
  p.w_o = UniformInit(d, d, rng);
  p.w_u = UniformInit(d, d_u, rng);
  // Vector params use their length as fan-in, matching the scalar they feed.
  p.w_e = RandomUniform(d, 1, -1.0 / std::sqrt(double(d)), 1.0 / std::sqrt(double(d)), rng);
  p.w_t3 = UniformInit(stacked ? d / 2 : d, d, rng);
  p.w_t2 = UniformInit(h, d, rng);
  p.w_t1 = UniformInit(d, h, rng);
  p.ln_gain = Mat(h, 1, 1.0);
  p.ln_bias = Mat(h, 1, 0.0);
  return p;
}

DMPParams ZerosLike(const DMPParams& p) {
  DMPParams z = p;
  for (auto& [name, m] : z.Named()) m->Fill(0.0);
  return z;
}

GCMPParams ZerosLike(const GCMPParams& p) {
  return {Mat::ZerosLike(p.w_z), Mat::ZerosLike(p.w_v), Mat::ZerosLike(p.w)};
}

SGCMPParams ZerosLike(const SGCMPParams& p) {
  return {Mat::ZerosLike(p.w_z), Mat::ZerosLike(p.w_v), Mat::ZerosLike(p.w_e)};
}

void ValidateShapes(const DMPParams& p) {
  const size_t d = p.w_s.rows();
  const size_t d_u = p.w_u.cols();
  const size_t h = p.w_t2.rows();
  if (d == 0 || h == 0 || d_u == 0) throw DimensionError("DMP: uninitialized parameters");
  if (p.stacked && d % 2 != 0) throw DimensionError("DMP: stacked variant needs even d");
  RequireShape(p.w_s, d, d, "W_s");
  RequireShape(p.w_o, d, d, "W_o");
  RequireShape(p.w_u, d, d_u, "W_u");
  RequireShape(p.w_e, d, 1, "w_e");
  RequireShape(p.w_t3, p.stacked ? d / 2 : d, d, "W_t3");
  RequireShape(p.w_t2, h, d, "W_t2");
  RequireShape(p.w_t1, d, h, "W_t1");
  RequireShape(p.ln_gain, h, 1, "ln_gain");
  RequireShape(p.ln_bias, h, 1, "ln_bias");
}

MpOutput GcmpForward(const Mat& x, const GCMPParams& params, GlobalContextCache* cache) {
  const size_t d = x.cols();
  RequireShape(params.w, 2 * d, 1, "w");
  auto w = params.w.data();
  return GlobalContextForward(x, params.w_z, params.w_v, w.first(d), w.subspan(d), cache);
}

MpOutput SgcmpForward(const Mat& x, const SGCMPParams& params, GlobalContextCache* cache) {
  RequireShape(params.w_e, x.cols(), 1, "w_e");
  return GlobalContextForward(x, params.w_z, params.w_v, {}, params.w_e.data(), cache);
}

Mat SgcmpScores(const Mat& x, const SGCMPParams& params) {
  RequireShape(params.w_e, x.cols(), 1, "w_e");
  const size_t n = x.rows();
  Mat s(n, n);
  for (size_t j = 0; j < n; ++j) {
    const double v = Dot(params.w_e.data(), x.row(j));
    for (size_t i = 0; i < n; ++i) s(i, j) = v;
  }
  return s;
}

Mat GcmpBackward(const Mat& x, const GCMPParams& params, const GlobalContextCache& cache,
                 const Mat& dz, GCMPParams& grads) {
  const size_t d = x.cols();
  auto w = params.w.data();
  auto dw = grads.w.data();
  return GlobalContextBackward(x, params.w_z, params.w_v, w.first(d), w.subspan(d), cache, dz,
                               grads.w_z, grads.w_v, dw.first(d), dw.subspan(d));
}

Mat SgcmpBackward(const Mat& x, const SGCMPParams& params, const GlobalContextCache& cache,
                  const Mat& dz, SGCMPParams& grads) {
  return GlobalContextBackward(x, params.w_z, params.w_v, {}, params.w_e.data(), cache, dz,
                               grads.w_z, grads.w_v, {}, grads.w_e.data());
}

Mat DmpCoefficients(const Mat& x, const UnionFeatures& u, const DMPParams& params) {
  ValidateShapes(params);
  const size_t n = x.rows();
  const size_t d = params.feature_dim();
  if (x.cols() != d) throw DimensionError("DMP coefficients: feature width mismatch");
  const Mat subj = ProjectRows(x, params.w_s);
  const Mat obj = ProjectRows(x, params.w_o);
  Mat e(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec cu = MatVec(params.w_u, u.At(i, j));
      double s = 0.0;
      for (size_t k = 0; k < d; ++k) s += (subj(i, k) * obj(j, k)) * (params.w_e[k] * cu[k]);
      e(i, j) = s;
    }
  }
  return e;
}

Mat DmpNormalize(const Mat& e) {
  const size_t n = e.rows();
  if (e.cols() != n) throw DimensionError("DMP normalize: square matrix required");
  if (n < 2) throw DomainError("DMP normalize: empty neighborhood for a single node");
  Mat a(n, n);
  for (size_t i = 0; i < n; ++i) {
    const size_t mask[] = {i};
    const Vec row = SoftmaxRow(e.row(i), mask);
    std::copy(row.begin(), row.end(), a.row(i).begin());
  }
  return a;
}

Mat DmpAggregate(const Mat& attention, const Mat& x, const DMPParams& params) {
  const size_t n = x.rows();
  const size_t d = x.cols();
  RequireShape(attention, n, n, "attention");
  if (params.w_t3.cols() != d) throw DimensionError("DMP aggregate: W_t3 width mismatch");
  const Mat messages = ProjectRows(x, params.w_t3);
  const size_t m = messages.cols();
  const size_t width = params.stacked ? 2 * m : m;
  Mat out(n, width);
  for (size_t i = 0; i < n; ++i) {
    auto row = out.row(i);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (params.stacked) {
        const Vec block = KronStack2(attention(i, j), attention(j, i), messages.row(j));
        for (size_t k = 0; k < width; ++k) row[k] += block[k];
      } else {
        Axpy(attention(i, j), messages.row(j), row);
      }
    }
  }
  return out;
}

MpOutput DmpForward(const Mat& x, const UnionFeatures& u, const DMPParams& params,
                    DmpCache* cache) {
  if (!params.stacked) throw ConfigError("dmp_forward: params are for the unstacked variant");
  return DmpForwardImpl(x, u, params, cache);
}

MpOutput NoStackForward(const Mat& x, const UnionFeatures& u, const DMPParams& params,
                        DmpCache* cache) {
  if (params.stacked) throw ConfigError("no_stack_forward: params are for the stacked variant");
  return DmpForwardImpl(x, u, params, cache);
}

DmpInputGrads DmpBackward(const Mat& x, const UnionFeatures& u, const DMPParams& params,
                          const DmpCache& c, const Mat& dz, DMPParams& grads,
                          bool want_union_grad) {
  const size_t n = x.rows();
  const size_t d = x.cols();
  RequireShape(dz, n, d, "dZ");
  DmpInputGrads out;
  out.dx = dz;
  if (want_union_grad) out.du = Mat(std::max<size_t>(1, n * n), params.union_dim());
  if (n == 1) return out;

  const size_t h = params.hidden_dim();
  const size_t m = c.messages.cols();

  // Transformer block.
  Mat daggregate(n, c.aggregate.cols());
  for (size_t i = 0; i < n; ++i) {
    AddOuter(grads.w_t1, dz.row(i), c.hidden.row(i));
    const Vec dhidden = MatTVec(params.w_t1, dz.row(i));
    const Vec dnormed = ReluBackward(c.normed.row(i), dhidden);
    const LayerNormGrad ln = LayerNormBackward(c.norm[i], params.ln_gain.data(), dnormed);
    for (size_t k = 0; k < h; ++k) {
      grads.ln_gain[k] += ln.dgain[k];
      grads.ln_bias[k] += ln.dbias[k];
    }
    AddOuter(grads.w_t2, ln.dv, c.aggregate.row(i));
    const Vec dagg = MatTVec(params.w_t2, ln.dv);
    std::copy(dagg.begin(), dagg.end(), daggregate.row(i).begin());
  }

  // Stacked aggregation.
  Mat dattention(n, n);
  Mat dmessages(n, m);
  for (size_t i = 0; i < n; ++i) {
    auto g = daggregate.row(i);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (params.stacked) {
        const KronStack2Grad kg =
            KronStack2Backward(c.attention(i, j), c.attention(j, i), c.messages.row(j), g);
        dattention(i, j) += kg.dalpha_fwd;
        dattention(j, i) += kg.dalpha_bwd;
        Axpy(1.0, kg.dm, dmessages.row(j));
      } else {
        dattention(i, j) += Dot(g, c.messages.row(j));
        Axpy(c.attention(i, j), g, dmessages.row(j));
      }
    }
  }
  grads.w_t3 += MatMul(dmessages.Transposed(), x);
  out.dx += MatMul(dmessages, params.w_t3);

  // Tri-linear coefficients.
  Mat dsubj(n, d);
  Mat dobj(n, d);
  auto w_e = params.w_e.data();
  for (size_t i = 0; i < n; ++i) {
    const size_t mask[] = {i};
    const Vec de = SoftmaxRowBackward(c.attention.row(i), dattention.row(i), mask);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double g = de[j];
      if (g == 0.0) continue;
      auto a = c.subj.row(i);
      auto b = c.obj.row(j);
      auto cu = c.union_proj.row(i * n + j);
      Vec dcu(d);
      for (size_t k = 0; k < d; ++k) {
        grads.w_e[k] += g * a[k] * b[k] * cu[k];
        dsubj(i, k) += g * w_e[k] * b[k] * cu[k];
        dobj(j, k) += g * w_e[k] * a[k] * cu[k];
        dcu[k] = g * w_e[k] * a[k] * b[k];
      }
      AddOuter(grads.w_u, dcu, u.At(i, j));
      if (want_union_grad) {
        const Vec du = MatTVec(params.w_u, dcu);
        Axpy(1.0, du, out.du.row(i * n + j));
      }
    }
  }
  grads.w_s += MatMul(dsubj.Transposed(), x);
  grads.w_o += MatMul(dobj.Transposed(), x);
  out.dx += MatMul(dsubj, params.w_s);
  out.dx += MatMul(dobj, params.w_o);
  return out;
}

std::string AttentionCsv(const Mat& attention) {
  std::ostringstream os;
  char buf[32];
  for (size_t i = 0; i < attention.rows(); ++i) {
    for (size_t j = 0; j < attention.cols(); ++j) {
      if (j > 0) os << ',';
      std::snprintf(buf, sizeof(buf), "%.6g", attention(i, j));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

void ExportAttention(const Mat& attention, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << AttentionCsv(attention);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Mat ReadAttentionCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<double> values;
  size_t rows = 0;
  size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++c;
    }
    if (rows > 0 && c != cols) throw DataError("attention CSV '" + path + "' is ragged");
    cols = c;
    ++rows;
  }
  if (rows == 0) throw DataError("attention CSV '" + path + "' is empty");
  return Mat(rows, cols, std::move(values));
}

}  // namespace sgg
