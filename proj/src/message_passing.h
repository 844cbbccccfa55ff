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
#ifndef SGG_MESSAGE_PASSING_H_
#define SGG_MESSAGE_PASSING_H_

// Message passing over a fully connected proposal graph. The neighborhood of
// node i is every other node. Three variants:
//
//   global context (GCMP):   c_ij = softmax_j w·[x_i, x_j]
//   simplified (S-GCMP):     c_ij = softmax_j w_e·x_j
//   direction-aware (DMP):   e_ij = w_e·(W_s x_i ⊙ W_o x_j ⊙ W_u u_ij),
//                            both α_ij and α_ji stacked per neighbor, then a
//                            two-layer transformer block with layer norm.
//
// All variants keep a residual path, so zeroing the output projection makes
// the module the identity.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "linalg.h"

namespace sgg {

// Features of the union box of every ordered pair (i, j), i != j. Setting a
// pair writes both orders, so U(i, j) == U(j, i) holds for data built this way.
class UnionFeatures {
 public:
  UnionFeatures() = default;
  UnionFeatures(size_t num_nodes, size_t dim);
  // `dense` holds row i*n + j for pair (i, j); all off-diagonal pairs present.
  static UnionFeatures FromDense(size_t num_nodes, Mat dense);

  size_t num_nodes() const { return n_; }
  size_t dim() const { return dim_; }
  bool Has(size_t i, size_t j) const;
  // Throws DataError naming the pair when it was never set.
  std::span<const double> At(size_t i, size_t j) const;
  void SetSymmetric(size_t i, size_t j, std::span<const double> value);
  const Mat& dense() const { return dense_; }

 private:
  size_t n_ = 0;
  size_t dim_ = 0;
  Mat dense_;
  std::vector<char> present_;
};

struct GCMPParams {
  Mat w_z;  // d x d
  Mat w_v;  // d x d
  Mat w;    // 2d x 1, split as [w_self; w_other]
};

struct SGCMPParams {
  Mat w_z;  // d x d
  Mat w_v;  // d x d
  Mat w_e;  // d x 1
};

struct DMPParams {
  Mat w_s;      // d x d
  Mat w_o;      // d x d
  Mat w_u;      // d x d_u
  Mat w_e;      // d x 1
  Mat w_t3;     // (d/2) x d when stacked, d x d otherwise
  Mat w_t2;     // h x d
  Mat w_t1;     // d x h
  Mat ln_gain;  // h x 1
  Mat ln_bias;  // h x 1
  bool stacked = true;

  size_t feature_dim() const { return w_s.rows(); }
  size_t union_dim() const { return w_u.cols(); }
  size_t hidden_dim() const { return w_t2.rows(); }

  std::vector<std::pair<std::string, Mat*>> Named();
  std::vector<std::pair<std::string, const Mat*>> Named() const;
};

GCMPParams InitGCMP(size_t d, std::mt19937_64& rng);
SGCMPParams InitSGCMP(size_t d, std::mt19937_64& rng);
// d must be even when stacked.
DMPParams InitDMP(size_t d, size_t d_u, size_t h, bool stacked, std::mt19937_64& rng);

DMPParams ZerosLike(const DMPParams& p);
GCMPParams ZerosLike(const GCMPParams& p);
SGCMPParams ZerosLike(const SGCMPParams& p);

void ValidateShapes(const DMPParams& p);

struct MpOutput {
  Mat z;          // n x d refined features
  Mat attention;  // n x n, zero diagonal, rows sum to 1 when n >= 2
};

// ---- global context variants -------------------------------------------------

struct GlobalContextCache {
  Mat values;     // row j = W_v x_j
  Mat attention;  // c_ij
  Mat context;    // row i = sum_j c_ij W_v x_j (pre-ReLU)
  Mat hidden;     // ReLU(context)
  Mat scores;     // unnormalized scores, diagonal unused
};

MpOutput GcmpForward(const Mat& x, const GCMPParams& params,
                     GlobalContextCache* cache = nullptr);
MpOutput SgcmpForward(const Mat& x, const SGCMPParams& params,
                      GlobalContextCache* cache = nullptr);

// Unnormalized S-GCMP scores; entry (i, j) = w_e·x_j for every row i.
Mat SgcmpScores(const Mat& x, const SGCMPParams& params);

Mat GcmpBackward(const Mat& x, const GCMPParams& params, const GlobalContextCache& cache,
                 const Mat& dz, GCMPParams& grads);
Mat SgcmpBackward(const Mat& x, const SGCMPParams& params, const GlobalContextCache& cache,
                  const Mat& dz, SGCMPParams& grads);

// ---- direction-aware message passing -------------------------------------

// E(i, j) = w_e·(W_s x_i ⊙ W_o x_j ⊙ W_u u_ij); the diagonal is left at 0.
Mat DmpCoefficients(const Mat& x, const UnionFeatures& u, const DMPParams& params);
// Row-wise softmax over j != i. Throws DomainError for a single node.
Mat DmpNormalize(const Mat& e);
// Row i = sum_{j != i} [α_ij; α_ji] ⊗ (W_t3 x_j), or α_ij W_t3 x_j when the
// params are not stacked.
Mat DmpAggregate(const Mat& attention, const Mat& x, const DMPParams& params);

struct DmpCache {
  Mat subj;        // row i = W_s x_i
  Mat obj;         // row j = W_o x_j
  Mat union_proj;  // row i*n + j = W_u u_ij
  Mat attention;
  Mat messages;    // row j = W_t3 x_j
  Mat aggregate;
  Mat pre_norm;    // row i = W_t2 aggregate_i
  std::vector<LayerNormCache> norm;
  Mat normed;
  Mat hidden;      // ReLU(normed)
};

// z_i = x_i + W_t1 ReLU(LN(W_t2 aggregate_i)). Requires stacked params.
MpOutput DmpForward(const Mat& x, const UnionFeatures& u, const DMPParams& params,
                    DmpCache* cache = nullptr);
// Same pipeline with only the forward coefficient α_ij and a d x d W_t3.
MpOutput NoStackForward(const Mat& x, const UnionFeatures& u, const DMPParams& params,
                        DmpCache* cache = nullptr);

struct DmpInputGrads {
  Mat dx;
  Mat du;  // dense layout of UnionFeatures; only filled when requested
};

// Accumulates parameter gradients into `grads`; works for both stacked and
// unstacked params.
DmpInputGrads DmpBackward(const Mat& x, const UnionFeatures& u, const DMPParams& params,
                          const DmpCache& cache, const Mat& dz, DMPParams& grads,
                          bool want_union_grad = false);

// ---- attention export -----------------------------------------------------

// One CSV row per attention row, six significant digits.
std::string AttentionCsv(const Mat& attention);
void ExportAttention(const Mat& attention, const std::string& path);
Mat ReadAttentionCsv(const std::string& path);

}  // namespace sgg

#endif  // SGG_MESSAGE_PASSING_H_
