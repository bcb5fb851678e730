// Copyright 2026 The sscd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <vector>

#include "sscd/encoder.hpp"

namespace sscd {

using Vec = std::vector<double>;

/// Row-major double matrix; rows are samples.
struct DMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DMatrix() = default;
  DMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  static DMatrix from(const FeatureMatrix& f);

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
};

/// One anchor, its positive, and N-1 negatives (all unit-norm).
struct CandidateSet {
  Vec anchor;
  Vec positive;
  std::vector<Vec> negatives;

  int n() const { return static_cast<int>(negatives.size()) + 1; }
};

struct CandidateGrad {
  Vec anchor;
  Vec positive;
  std::vector<Vec> negatives;
};

/// exp(<a,b> / temperature).
double similarity(std::span<const double> a, std::span<const double> b, double temperature);

/// w_j = score_j^beta / sum_k score_k^beta.
std::vector<double> hard_negative_weights(std::span<const double> neg_scores, double beta);

/// -log[h(a,b+) / (h(a,b+) + (N-1) * sum_j w_j h(a,b_j-))]; zero when N = 1.
/// Gradients flow through the weights as well.
double info_nce_loss(const CandidateSet& set, double temperature, double beta, CandidateGrad* grad = nullptr);

/// Same objective written on cosines: returns the loss and d loss / d cosine.
double info_nce_from_cosines(double pos_cos, std::span<const double> neg_cos, double temperature, double beta,
                             double* d_pos = nullptr, std::span<double> d_neg = {});

/// Mean over i of info_nce(batch_a[i]) + info_nce(batch_b[i]).
double symmetric_contrastive_loss(const std::vector<CandidateSet>& batch_a, const std::vector<CandidateSet>& batch_b,
                                  double temperature, double beta);

/// In-batch form of the symmetric loss: row i of `z1` and `z2` is a positive
/// pair, every other row of the opposite matrix is a negative.
double symmetric_in_batch_loss(const DMatrix& z1, const DMatrix& z2, double temperature, double beta,
                               DMatrix* grad_z1 = nullptr, DMatrix* grad_z2 = nullptr);

/// Builds the two candidate batches used by symmetric_in_batch_loss.
void in_batch_candidates(const DMatrix& z1, const DMatrix& z2, std::vector<CandidateSet>& batch_a,
                         std::vector<CandidateSet>& batch_b);

/// Mean over rows of ||q - t||^2. `target` is treated as a constant.
double byol_loss(const DMatrix& online, const DMatrix& target, DMatrix* grad_online = nullptr);

}  // namespace sscd
