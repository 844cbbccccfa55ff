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
#ifndef SGG_LINALG_H_
#define SGG_LINALG_H_

// Dense double-precision matrices with paired forward / vector-Jacobian
// products. Every backward here is hand-written; there is no tape.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sgg {

using Vec = std::vector<double>;

// Row-major dense matrix. A default-constructed Mat is 0x0 and only serves as
// a placeholder; every other constructor requires positive extents.
class Mat {
 public:
  Mat() = default;
  Mat(size_t rows, size_t cols, double fill = 0.0);
  Mat(size_t rows, size_t cols, std::vector<double> data);

  static Mat FromRows(std::initializer_list<std::initializer_list<double>> rows);
  static Mat Identity(size_t n);
  static Mat Column(std::span<const double> v);
  static Mat ZerosLike(const Mat& m) { return Mat(m.rows(), m.cols()); }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  std::span<double> row(size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  std::string ShapeString() const;
  bool SameShape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool AllFinite() const;
  Mat Transposed() const;
  void Fill(double v);

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);

double MaxAbsDiff(const Mat& a, const Mat& b);
double MaxAbsDiff(std::span<const double> a, std::span<const double> b);
double SquaredNorm(std::span<const double> v);
double Dot(std::span<const double> a, std::span<const double> b);

// ---- matmul -----------------------------------------------------------------

Mat MatMul(const Mat& a, const Mat& b);

struct MatMulGrad {
  Mat da;
  Mat db;
};
// Given upstream = dL/d(a·b): da = upstream·bᵀ, db = aᵀ·upstream.
MatMulGrad MatMulBackward(const Mat& a, const Mat& b, const Mat& upstream);

// Matrix-vector helpers used by the per-node code paths.
Vec MatVec(const Mat& w, std::span<const double> x);
Vec MatTVec(const Mat& w, std::span<const double> g);
// grad += g·xᵀ
void AddOuter(Mat& grad, std::span<const double> g, std::span<const double> x,
              double scale = 1.0);
void Axpy(double a, std::span<const double> x, std::span<double> y);

// ---- elementwise ------------------------------------------------------------

Mat Hadamard(const Mat& a, const Mat& b);
struct HadamardGrad {
  Mat da;
  Mat db;
};
HadamardGrad HadamardBackward(const Mat& a, const Mat& b, const Mat& upstream);

Vec Sigmoid(std::span<const double> v);
Vec SigmoidBackward(std::span<const double> out, std::span<const double> upstream);
Vec Relu(std::span<const double> v);
// Subgradient 0 at exactly 0.
Vec ReluBackward(std::span<const double> in, std::span<const double> upstream);
double SigmoidScalar(double x);

// ---- normalizations ---------------------------------------------------------

// Softmax over the entries not listed in `masked`; masked entries are exactly
// zero and take no part in the normalizer. Throws DomainError when every
// entry is masked.
Vec SoftmaxRow(std::span<const double> v, std::span<const size_t> masked = {});
// `out` is the SoftmaxRow output. Masked entries (out == 0 by exclusion) get a
// zero gradient because they are passed again in `masked`.
Vec SoftmaxRowBackward(std::span<const double> out, std::span<const double> upstream,
                       std::span<const size_t> masked = {});

Vec LogSoftmax(std::span<const double> v);
Vec LogSoftmaxBackward(std::span<const double> out, std::span<const double> upstream);

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Vec normalized;  // (v - mean) / sqrt(var + eps)
  double inv_std = 0.0;
};
Vec LayerNorm(std::span<const double> v, std::span<const double> gain,
              std::span<const double> bias, double eps = kLayerNormEps,
              LayerNormCache* cache = nullptr);
struct LayerNormGrad {
  Vec dv;
  Vec dgain;
  Vec dbias;
};
LayerNormGrad LayerNormBackward(const LayerNormCache& cache, std::span<const double> gain,
                                std::span<const double> upstream);

// [alpha_fwd; alpha_bwd] ⊗ m, i.e. [alpha_fwd·m ; alpha_bwd·m].
Vec KronStack2(double alpha_fwd, double alpha_bwd, std::span<const double> m);
struct KronStack2Grad {
  double dalpha_fwd = 0.0;
  double dalpha_bwd = 0.0;
  Vec dm;
};
KronStack2Grad KronStack2Backward(double alpha_fwd, double alpha_bwd,
                                  std::span<const double> m,
                                  std::span<const double> upstream);

// ---- initialization ---------------------------------------------------------

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], fan_in = cols.
Mat UniformInit(size_t rows, size_t cols, std::mt19937_64& rng);
Mat RandomUniform(size_t rows, size_t cols, double lo, double hi, std::mt19937_64& rng);

// ---- gradient checking ------------------------------------------------------

// A differentiable operation over a list of matrix inputs.
struct DiffOp {
  std::string name;
  std::vector<std::string> input_names;
  std::function<Mat(std::span<const Mat>)> forward;
  // Returns one gradient per input, each shaped like that input.
  std::function<std::vector<Mat>(std::span<const Mat>, const Mat&)> backward;
};

struct GradCheckOptions {
  double tolerance = 1e-5;
  // Seed of the random weights that reduce the output to a scalar.
  uint64_t reduction_seed = 17;
  // One-sided slopes differing by more than this (relative) mark a kink.
  double kink_threshold = 1e-3;
  // Only these inputs are probed; empty means all of them.
  std::vector<size_t> probe_inputs;
};

struct InputCheck {
  std::string name;
  double max_rel_error = 0.0;
  size_t entries = 0;
  size_t kinks = 0;
};

struct GradCheckReport {
  std::string op_name;
  bool passed = true;
  double max_rel_error = 0.0;
  size_t entries_checked = 0;
  size_t kinks_skipped = 0;
  std::string worst_input;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::vector<InputCheck> inputs;
};

// Central differences with step 1e-6·max(1, |x|). Relative error per entry is
// |analytic - numeric| / max(1, |analytic|, |numeric|). Throws NumericalError
// if the forward value is non-finite at any probe point.
GradCheckReport FiniteDiffCheck(const DiffOp& op, const std::vector<Mat>& inputs,
                                const GradCheckOptions& options = {});

}  // namespace sgg

#endif  // SGG_LINALG_H_
