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
#include "linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.h"

namespace sgg {
namespace {

void RequireSameShape(const Mat& a, const Mat& b, const char* what) {
  if (!a.SameShape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.ShapeString() +
                         " vs " + b.ShapeString());
  }
}

void RequireSameLength(size_t a, size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

bool IsMasked(std::span<const size_t> masked, size_t i) {
  return std::find(masked.begin(), masked.end(), i) != masked.end();
}

}  // namespace

Mat::Mat(size_t rows, size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("Mat: extents must be positive, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
}

Mat::Mat(size_t rows, size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("Mat: extents must be positive, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  if (data_.size() != rows * cols) {
    throw DimensionError("Mat: data length " + std::to_string(data_.size()) +
                         " does not match " + ShapeString());
  }
}

Mat Mat::FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  const size_t r = rows.size();
  const size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Mat::FromRows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Mat(r, c, std::move(data));
}

Mat Mat::Identity(size_t n) {
  Mat m(n, n);
  for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::Column(std::span<const double> v) {
  return Mat(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

std::string Mat::ShapeString() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Mat::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Mat Mat::Transposed() const {
  Mat t(cols_, rows_);
  for (size_t r = 0; r < rows_; ++r)
    for (size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void Mat::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Mat& Mat::operator+=(const Mat& o) {
  RequireSameShape(*this, o, "Mat::operator+=");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  RequireSameShape(*this, o, "Mat::operator-=");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  RequireSameLength(a.size(), b.size(), "MaxAbsDiff");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double MaxAbsDiff(const Mat& a, const Mat& b) {
  RequireSameShape(a, b, "MaxAbsDiff");
  return MaxAbsDiff(a.data(), b.data());
}

double SquaredNorm(std::span<const double> v) { return Dot(v, v); }

double Dot(std::span<const double> a, std::span<const double> b) {
  RequireSameLength(a.size(), b.size(), "Dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Mat MatMul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.ShapeString() + " by " +
                         b.ShapeString());
  }
  Mat out(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      auto orow = out.row(i);
      for (size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

MatMulGrad MatMulBackward(const Mat& a, const Mat& b, const Mat& upstream) {
  if (upstream.rows() != a.rows() || upstream.cols() != b.cols()) {
    throw DimensionError("matmul backward: upstream " + upstream.ShapeString() +
                         " does not match product of " + a.ShapeString() + " and " +
                         b.ShapeString());
  }
  return {MatMul(upstream, b.Transposed()), MatMul(a.Transposed(), upstream)};
}

Vec MatVec(const Mat& w, std::span<const double> x) {
  if (w.cols() != x.size()) {
    throw DimensionError("matvec: cannot multiply " + w.ShapeString() + " by vector of length " +
                         std::to_string(x.size()));
  }
  Vec out(w.rows(), 0.0);
  for (size_t r = 0; r < w.rows(); ++r) {
    auto wr = w.row(r);
    double s = 0.0;
    for (size_t c = 0; c < wr.size(); ++c) s += wr[c] * x[c];
    out[r] = s;
  }
  return out;
}

Vec MatTVec(const Mat& w, std::span<const double> g) {
  if (w.rows() != g.size()) {
    throw DimensionError("matvec (transposed): " + w.ShapeString() +
                         " against vector of length " + std::to_string(g.size()));
  }
  Vec out(w.cols(), 0.0);
  for (size_t r = 0; r < w.rows(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    auto wr = w.row(r);
    for (size_t c = 0; c < wr.size(); ++c) out[c] += gr * wr[c];
  }
  return out;
}

void AddOuter(Mat& grad, std::span<const double> g, std::span<const double> x, double scale) {
  if (grad.rows() != g.size() || grad.cols() != x.size()) {
    throw DimensionError("outer product: " + std::to_string(g.size()) + "x" +
                         std::to_string(x.size()) + " into " + grad.ShapeString());
  }
  for (size_t r = 0; r < g.size(); ++r) {
    const double gr = scale * g[r];
    if (gr == 0.0) continue;
    auto row = grad.row(r);
    for (size_t c = 0; c < x.size(); ++c) row[c] += gr * x[c];
  }
}

void Axpy(double a, std::span<const double> x, std::span<double> y) {
  RequireSameLength(x.size(), y.size(), "axpy");
  for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Mat Hadamard(const Mat& a, const Mat& b) {
  RequireSameShape(a, b, "hadamard");
  Mat out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

HadamardGrad HadamardBackward(const Mat& a, const Mat& b, const Mat& upstream) {
  RequireSameShape(a, b, "hadamard backward");
  RequireSameShape(a, upstream, "hadamard backward");
  return {Hadamard(upstream, b), Hadamard(upstream, a)};
}

double SigmoidScalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec Sigmoid(std::span<const double> v) {
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = SigmoidScalar(v[i]);
  return out;
}

Vec SigmoidBackward(std::span<const double> out, std::span<const double> upstream) {
  RequireSameLength(out.size(), upstream.size(), "sigmoid backward");
  Vec g(out.size());
  for (size_t i = 0; i < out.size(); ++i) g[i] = upstream[i] * out[i] * (1.0 - out[i]);
  return g;
}

Vec Relu(std::span<const double> v) {
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

Vec ReluBackward(std::span<const double> in, std::span<const double> upstream) {
  RequireSameLength(in.size(), upstream.size(), "relu backward");
  Vec g(in.size());
  for (size_t i = 0; i < in.size(); ++i) g[i] = in[i] > 0.0 ? upstream[i] : 0.0;
  return g;
}

Vec SoftmaxRow(std::span<const double> v, std::span<const size_t> masked) {
  Vec out(v.size(), 0.0);
  double max_value = -std::numeric_limits<double>::infinity();
  size_t live = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (IsMasked(masked, i)) continue;
    max_value = std::max(max_value, v[i]);
    ++live;
  }
  if (live == 0) {
    throw DomainError("softmax: empty neighborhood (all " + std::to_string(v.size()) +
                      " entries masked)");
  }
  double total = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (IsMasked(masked, i)) continue;
    out[i] = std::exp(v[i] - max_value);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

Vec SoftmaxRowBackward(std::span<const double> out, std::span<const double> upstream,
                       std::span<const size_t> masked) {
  RequireSameLength(out.size(), upstream.size(), "softmax backward");
  double weighted = 0.0;
  for (size_t i = 0; i < out.size(); ++i) {
    if (!IsMasked(masked, i)) weighted += out[i] * upstream[i];
  }
  Vec g(out.size(), 0.0);
  for (size_t i = 0; i < out.size(); ++i) {
    if (!IsMasked(masked, i)) g[i] = out[i] * (upstream[i] - weighted);
  }
  return g;
}

Vec LogSoftmax(std::span<const double> v) {
  if (v.empty()) throw DimensionError("log_softmax: empty vector");
  const double max_value = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) total += std::exp(x - max_value);
  const double log_norm = max_value + std::log(total);
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] - log_norm;
  return out;
}

Vec LogSoftmaxBackward(std::span<const double> out, std::span<const double> upstream) {
  RequireSameLength(out.size(), upstream.size(), "log_softmax backward");
  double total = 0.0;
  for (double g : upstream) total += g;
  Vec g(out.size());
  for (size_t i = 0; i < out.size(); ++i) g[i] = upstream[i] - std::exp(out[i]) * total;
  return g;
}

Vec LayerNorm(std::span<const double> v, std::span<const double> gain,
              std::span<const double> bias, double eps, LayerNormCache* cache) {
  RequireSameLength(v.size(), gain.size(), "layer_norm gain");
  RequireSameLength(v.size(), bias.size(), "layer_norm bias");
  if (!(eps > 0.0)) throw DomainError("layer_norm: eps must be positive");
  if (v.empty()) throw DimensionError("layer_norm: empty vector");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  const double inv_std = 1.0 / std::sqrt(var + eps);
  Vec normalized(v.size());
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    normalized[i] = (v[i] - mean) * inv_std;
    out[i] = normalized[i] * gain[i] + bias[i];
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = inv_std;
  }
  return out;
}

LayerNormGrad LayerNormBackward(const LayerNormCache& cache, std::span<const double> gain,
                                std::span<const double> upstream) {
  const size_t n = cache.normalized.size();
  RequireSameLength(n, upstream.size(), "layer_norm backward");
  RequireSameLength(n, gain.size(), "layer_norm backward gain");
  LayerNormGrad grad{Vec(n), Vec(n), Vec(upstream.begin(), upstream.end())};
  Vec dnorm(n);
  double mean_dnorm = 0.0;
  double mean_dnorm_x = 0.0;
  for (size_t i = 0; i < n; ++i) {
    grad.dgain[i] = upstream[i] * cache.normalized[i];
    dnorm[i] = upstream[i] * gain[i];
    mean_dnorm += dnorm[i];
    mean_dnorm_x += dnorm[i] * cache.normalized[i];
  }
  mean_dnorm /= static_cast<double>(n);
  mean_dnorm_x /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    grad.dv[i] =
        cache.inv_std * (dnorm[i] - mean_dnorm - cache.normalized[i] * mean_dnorm_x);
  }
  return grad;
}

Vec KronStack2(double alpha_fwd, double alpha_bwd, std::span<const double> m) {
  Vec out(2 * m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    out[i] = alpha_fwd * m[i];
    out[m.size() + i] = alpha_bwd * m[i];
  }
  return out;
}

KronStack2Grad KronStack2Backward(double alpha_fwd, double alpha_bwd,
                                  std::span<const double> m,
                                  std::span<const double> upstream) {
  RequireSameLength(2 * m.size(), upstream.size(), "kron_stack2 backward");
  const size_t h = m.size();
  KronStack2Grad g;
  g.dm.assign(h, 0.0);
  for (size_t i = 0; i < h; ++i) {
    g.dalpha_fwd += upstream[i] * m[i];
    g.dalpha_bwd += upstream[h + i] * m[i];
    g.dm[i] = alpha_fwd * upstream[i] + alpha_bwd * upstream[h + i];
  }
  return g;
}

Mat UniformInit(size_t rows, size_t cols, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  return RandomUniform(rows, cols, -bound, bound, rng);
}

Mat RandomUniform(size_t rows, size_t cols, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Mat m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

GradCheckReport FiniteDiffCheck(const DiffOp& op, const std::vector<Mat>& inputs,
                                const GradCheckOptions& options) {
  GradCheckReport report;
  report.op_name = op.name;

  const Mat out = op.forward(inputs);
  if (!out.AllFinite()) {
    throw NumericalError("gradient check '" + op.name + "': non-finite forward value");
  }
  // Random reduction weights turn the output into a scalar; they also serve as
  // the upstream gradient.
  Mat weights(out.rows(), out.cols(), 1.0);
  if (out.size() > 1) {
    std::mt19937_64 rng(options.reduction_seed);
    weights = RandomUniform(out.rows(), out.cols(), -1.0, 1.0, rng);
  }
  auto scalar = [&](const std::vector<Mat>& in) {
    const Mat o = op.forward(in);
    if (!o.AllFinite()) {
      throw NumericalError("gradient check '" + op.name +
                           "': non-finite forward value at probe point");
    }
    return Dot(o.data(), weights.data());
  };

  const std::vector<Mat> analytic = op.backward(inputs, weights);
  if (analytic.size() != inputs.size()) {
    throw DimensionError("gradient check '" + op.name + "': backward returned " +
                         std::to_string(analytic.size()) + " gradients for " +
                         std::to_string(inputs.size()) + " inputs");
  }

  std::vector<Mat> probe = inputs;
  for (size_t k = 0; k < inputs.size(); ++k) {
    if (!options.probe_inputs.empty() &&
        std::find(options.probe_inputs.begin(), options.probe_inputs.end(), k) ==
            options.probe_inputs.end()) {
      continue;
    }
    if (!analytic[k].SameShape(inputs[k])) {
      throw DimensionError("gradient check '" + op.name + "': gradient for input " +
                           std::to_string(k) + " has shape " + analytic[k].ShapeString() +
                           ", expected " + inputs[k].ShapeString());
    }
    InputCheck check;
    check.name = k < op.input_names.size() ? op.input_names[k] : "input" + std::to_string(k);
    const double f0 = scalar(probe);
    for (size_t i = 0; i < inputs[k].size(); ++i) {
      const double x = inputs[k][i];
      const double h = 1e-6 * std::max(1.0, std::abs(x));
      probe[k][i] = x + h;
      const double fp = scalar(probe);
      probe[k][i] = x - h;
      const double fm = scalar(probe);
      probe[k][i] = x;

      const double slope_plus = (fp - f0) / h;
      const double slope_minus = (f0 - fm) / h;
      const double slope_scale =
          std::max({1.0, std::abs(slope_plus), std::abs(slope_minus)});
      if (std::abs(slope_plus - slope_minus) > options.kink_threshold * slope_scale) {
        ++check.kinks;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[k][i];
      const double rel =
          std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      ++check.entries;
      if (rel > check.max_rel_error) check.max_rel_error = rel;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_input = check.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
    report.entries_checked += check.entries;
    report.kinks_skipped += check.kinks;
    report.inputs.push_back(std::move(check));
  }
  report.passed = report.max_rel_error <= options.tolerance;
  return report;
}

}  // namespace sgg
