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
#ifndef SGG_TESTS_MP_ORACLE_H_
#define SGG_TESTS_MP_ORACLE_H_

// Straight-line reference implementations of the message-passing forward
// passes, written with raw loops and no library kernels.

#include <algorithm>
#include <cmath>
#include <vector>

#include "linalg.h"
#include "message_passing.h"

namespace sgg::test {

using Grid = std::vector<std::vector<double>>;

inline double MatEntry(const Mat& m, size_t r, size_t c) { return m.values()[r * m.cols() + c]; }

inline std::vector<double> Apply(const Mat& w, const double* x) {
  std::vector<double> out(w.rows(), 0.0);
  for (size_t r = 0; r < w.rows(); ++r) {
    for (size_t c = 0; c < w.cols(); ++c) out[r] += MatEntry(w, r, c) * x[c];
  }
  return out;
}

inline const double* RowPtr(const Mat& m, size_t r) { return m.values().data() + r * m.cols(); }

inline Grid SoftmaxOffDiagonal(const Grid& s) {
  const size_t n = s.size();
  Grid a(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    double hi = -1e300;
    for (size_t j = 0; j < n; ++j) if (j != i) hi = std::max(hi, s[i][j]);
    double z = 0.0;
    for (size_t j = 0; j < n; ++j) if (j != i) z += std::exp(s[i][j] - hi);
    for (size_t j = 0; j < n; ++j) if (j != i) a[i][j] = std::exp(s[i][j] - hi) / z;
  }
  return a;
}

// z_i = x_i + W_z relu(sum_j c_ij W_v x_j), c_ij = softmax_j (w_a·x_i + w_b·x_j).
inline Grid GlobalContextOracle(const Mat& x, const Mat& w_z, const Mat& w_v, const Vec& w_a,
                         const Vec& w_b, Grid* attention) {
  const size_t n = x.rows(), d = x.cols();
  Grid s(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (size_t k = 0; k < d; ++k) {
        v += (w_a.empty() ? 0.0 : w_a[k] * MatEntry(x, i, k)) + w_b[k] * MatEntry(x, j, k);
      }
      s[i][j] = v;
    }
  }
  const Grid a = SoftmaxOffDiagonal(s);
  if (attention != nullptr) *attention = a;
  Grid z(n, std::vector<double>(d));
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> ctx(d, 0.0);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto v = Apply(w_v, RowPtr(x, j));
      for (size_t k = 0; k < d; ++k) ctx[k] += a[i][j] * v[k];
    }
    for (double& c : ctx) c = std::max(0.0, c);
    const auto out = Apply(w_z, ctx.data());
    for (size_t k = 0; k < d; ++k) z[i][k] = MatEntry(x, i, k) + out[k];
  }
  return z;
}

inline Grid CoefficientOracle(const Mat& x, const UnionFeatures& u, const DMPParams& p) {
  const size_t n = x.rows(), d = x.cols();
  Grid e(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto s = Apply(p.w_s, RowPtr(x, i));
      const auto o = Apply(p.w_o, RowPtr(x, j));
      const auto un = Apply(p.w_u, u.At(i, j).data());
      double v = 0.0;
      for (size_t k = 0; k < d; ++k) v += p.w_e[k] * s[k] * o[k] * un[k];
      e[i][j] = v;
    }
  }
  return e;
}

inline Grid AggregateOracle(const Grid& a, const Mat& x, const DMPParams& p) {
  const size_t n = x.rows();
  const size_t m = p.w_t3.rows();
  Grid agg(n, std::vector<double>(2 * m, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto msg = Apply(p.w_t3, RowPtr(x, j));
      for (size_t k = 0; k < m; ++k) {
        agg[i][k] += a[i][j] * msg[k];
        agg[i][m + k] += a[j][i] * msg[k];
      }
    }
  }
  return agg;
}

inline Grid DmpOracle(const Mat& x, const UnionFeatures& u, const DMPParams& p) {
  const size_t n = x.rows(), d = x.cols(), h = p.hidden_dim();
  const Grid agg = AggregateOracle(SoftmaxOffDiagonal(CoefficientOracle(x, u, p)), x, p);
  Grid z(n, std::vector<double>(d));
  for (size_t i = 0; i < n; ++i) {
    const auto pre = Apply(p.w_t2, agg[i].data());
    double mean = 0.0;
    for (double v : pre) mean += v / static_cast<double>(h);
    double var = 0.0;
    for (double v : pre) var += (v - mean) * (v - mean) / static_cast<double>(h);
    std::vector<double> hid(h);
    for (size_t k = 0; k < h; ++k) {
      const double ln = (pre[k] - mean) / std::sqrt(var + 1e-5) * p.ln_gain[k] + p.ln_bias[k];
      hid[k] = std::max(0.0, ln);
    }
    const auto out = Apply(p.w_t1, hid.data());
    for (size_t k = 0; k < d; ++k) z[i][k] = MatEntry(x, i, k) + out[k];
  }
  return z;
}

inline double MaxDiff(const Mat& m, const Grid& g) {
  double worst = 0.0;
  for (size_t r = 0; r < m.rows(); ++r) {
    for (size_t c = 0; c < m.cols(); ++c) worst = std::max(worst, std::abs(m(r, c) - g[r][c]));
  }
  return worst;
}

}  // namespace sgg::test

#endif  // SGG_TESTS_MP_ORACLE_H_
