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

#include "sscd/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sscd/error.hpp"

namespace sscd {
namespace {

constexpr double kNormTolerance = 1e-3;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_unit(std::span<const double> v, const char* what) {
  const double norm = std::sqrt(dot(v, v));
  require(std::abs(norm - 1.0) <= kNormTolerance, ErrorKind::Contract,
          std::string(what) + " is not unit-norm (norm " + std::to_string(norm) + ")");
}

double log_sum_exp(std::span<const double> x, double scale) {
  double m = -INFINITY;
  for (double v : x) m = std::max(m, scale * v);
  double s = 0.0;
  for (double v : x) s += std::exp(scale * v - m);
  return m + std::log(s);
}

}  // namespace

DMatrix DMatrix::from(const FeatureMatrix& f) {
  DMatrix m(f.rows, f.cols);
  std::copy(f.data.begin(), f.data.end(), m.data.begin());
  return m;
}

double similarity(std::span<const double> a, std::span<const double> b, double temperature) {
  require(temperature > 0.0, ErrorKind::Parameter, "temperature must be positive");
  require(a.size() == b.size(), ErrorKind::Contract, "similarity of vectors with different lengths");
  return std::exp(dot(a, b) / temperature);
}

std::vector<double> hard_negative_weights(std::span<const double> neg_scores, double beta) {
  require(beta >= 0.0, ErrorKind::Parameter, "beta must be non-negative");
  std::vector<double> w(neg_scores.size());
  if (neg_scores.empty()) return w;
  std::vector<double> logs(neg_scores.size());
  for (std::size_t j = 0; j < neg_scores.size(); ++j) {
    require(neg_scores[j] > 0.0, ErrorKind::Contract, "negative scores must be positive");
    logs[j] = std::log(neg_scores[j]);
  }
  const double lse = log_sum_exp(logs, beta);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::exp(beta * logs[j] - lse);
  return w;
}

double info_nce_from_cosines(double pos_cos, std::span<const double> neg_cos, double temperature, double beta,
                             double* d_pos, std::span<double> d_neg) {
  require(temperature > 0.0, ErrorKind::Parameter, "temperature must be positive");
  require(beta >= 0.0, ErrorKind::Parameter, "beta must be non-negative");
  if (neg_cos.empty()) {
    if (d_pos) *d_pos = 0.0;
    return 0.0;
  }
  const double inv_t = 1.0 / temperature;
  const auto count = static_cast<double>(neg_cos.size());
  // log of (N-1) * sum_j w_j h_j with w_j = h_j^beta / sum_k h_k^beta.
  const double lse_hi = log_sum_exp(neg_cos, (beta + 1.0) * inv_t);
  const double lse_lo = log_sum_exp(neg_cos, beta * inv_t);
  const double log_neg = std::log(count) + lse_hi - lse_lo;
  const double pos_logit = pos_cos * inv_t;
  const double top = std::max(pos_logit, log_neg);
  const double log_den = top + std::log(std::exp(pos_logit - top) + std::exp(log_neg - top));
  const double loss = log_den - pos_logit;

  if (d_pos || !d_neg.empty()) {
    const double p_neg = std::exp(log_neg - log_den);
    if (d_pos) *d_pos = -p_neg * inv_t;
    if (!d_neg.empty()) {
      for (std::size_t j = 0; j < neg_cos.size(); ++j) {
        const double soft_hi = std::exp((beta + 1.0) * inv_t * neg_cos[j] - lse_hi);
        const double soft_lo = std::exp(beta * inv_t * neg_cos[j] - lse_lo);
        d_neg[j] = p_neg * ((beta + 1.0) * soft_hi - beta * soft_lo) * inv_t;
      }
    }
  }
  return std::max(loss, 0.0);
}

double info_nce_loss(const CandidateSet& set, double temperature, double beta, CandidateGrad* grad) {
  require(set.anchor.size() == set.positive.size(), ErrorKind::Contract, "anchor/positive length mismatch");
  require_unit(set.anchor, "anchor");
  require_unit(set.positive, "positive");
  for (const auto& neg : set.negatives) {
    require(neg.size() == set.anchor.size(), ErrorKind::Contract, "negative length mismatch");
    require_unit(neg, "negative");
  }
  const double pos_cos = dot(set.anchor, set.positive);
  std::vector<double> neg_cos(set.negatives.size());
  for (std::size_t j = 0; j < neg_cos.size(); ++j) neg_cos[j] = dot(set.anchor, set.negatives[j]);

  double d_pos = 0.0;
  std::vector<double> d_neg(neg_cos.size());
  const double loss = info_nce_from_cosines(pos_cos, neg_cos, temperature, beta, grad ? &d_pos : nullptr,
                                            grad ? std::span<double>(d_neg) : std::span<double>());
  if (grad) {
    const std::size_t d = set.anchor.size();
    grad->anchor.assign(d, 0.0);
    grad->positive.assign(d, 0.0);
    grad->negatives.assign(set.negatives.size(), Vec(d, 0.0));
    for (std::size_t k = 0; k < d; ++k) {
      grad->anchor[k] = d_pos * set.positive[k];
      grad->positive[k] = d_pos * set.anchor[k];
    }
    for (std::size_t j = 0; j < set.negatives.size(); ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        grad->anchor[k] += d_neg[j] * set.negatives[j][k];
        grad->negatives[j][k] = d_neg[j] * set.anchor[k];
      }
    }
  }
  return loss;
}

double symmetric_contrastive_loss(const std::vector<CandidateSet>& batch_a, const std::vector<CandidateSet>& batch_b,
                                  double temperature, double beta) {
  require(batch_a.size() == batch_b.size(), ErrorKind::Contract, "symmetric loss needs equally sized batches");
  require(!batch_a.empty(), ErrorKind::Contract, "symmetric loss of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < batch_a.size(); ++i)
    total += info_nce_loss(batch_a[i], temperature, beta) + info_nce_loss(batch_b[i], temperature, beta);
  return total / static_cast<double>(batch_a.size());
}

void in_batch_candidates(const DMatrix& z1, const DMatrix& z2, std::vector<CandidateSet>& batch_a,
                         std::vector<CandidateSet>& batch_b) {
  require(z1.rows == z2.rows && z1.cols == z2.cols, ErrorKind::Contract, "in-batch views must have equal shapes");
  const int b = z1.rows;
  auto row = [](const DMatrix& m, int i) { return Vec(m.row(i), m.row(i) + m.cols); };
  batch_a.assign(static_cast<std::size_t>(b), {});
  batch_b.assign(static_cast<std::size_t>(b), {});
  for (int i = 0; i < b; ++i) {
    auto& a = batch_a[static_cast<std::size_t>(i)];
    auto& s = batch_b[static_cast<std::size_t>(i)];
    a.anchor = row(z1, i);
    a.positive = row(z2, i);
    s.anchor = row(z2, i);
    s.positive = row(z1, i);
    for (int j = 0; j < b; ++j) {
      if (j == i) continue;
      a.negatives.push_back(row(z2, j));
      s.negatives.push_back(row(z1, j));
    }
  }
}

double symmetric_in_batch_loss(const DMatrix& z1, const DMatrix& z2, double temperature, double beta,
                               DMatrix* grad_z1, DMatrix* grad_z2) {
  require(z1.rows == z2.rows && z1.cols == z2.cols, ErrorKind::Contract, "in-batch views must have equal shapes");
  require(z1.rows >= 1, ErrorKind::Contract, "empty batch");
  const int b = z1.rows;
  const int d = z1.cols;
  for (int i = 0; i < b; ++i) {
    require_unit({z1.row(i), static_cast<std::size_t>(d)}, "view-1 feature");
    require_unit({z2.row(i), static_cast<std::size_t>(d)}, "view-2 feature");
  }
  // cos[i][j] = <z1_i, z2_j>
  std::vector<double> cos(static_cast<std::size_t>(b) * b);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j)
      cos[static_cast<std::size_t>(i) * b + j] = dot({z1.row(i), static_cast<std::size_t>(d)},
                                                     {z2.row(j), static_cast<std::size_t>(d)});
  const bool want_grad = grad_z1 || grad_z2;
  // dcos accumulates d loss / d cos[i][j] from both sides.
  std::vector<double> side_a(static_cast<std::size_t>(b) * b, 0.0), side_b(static_cast<std::size_t>(b) * b, 0.0);
  std::vector<double> neg(static_cast<std::size_t>(b - 1)), dneg(static_cast<std::size_t>(b - 1));
  double total = 0.0;
  for (int i = 0; i < b; ++i) {
    double loss_a, loss_b, dpos;
    // z1_i anchors against row i of cos.
    for (int j = 0, k = 0; j < b; ++j)
      if (j != i) neg[static_cast<std::size_t>(k++)] = cos[static_cast<std::size_t>(i) * b + j];
    loss_a = info_nce_from_cosines(cos[static_cast<std::size_t>(i) * b + i], neg, temperature, beta,
                                   want_grad ? &dpos : nullptr, want_grad ? std::span<double>(dneg) : std::span<double>());
    if (want_grad) {
      side_a[static_cast<std::size_t>(i) * b + i] += dpos;
      for (int j = 0, k = 0; j < b; ++j)
        if (j != i) side_a[static_cast<std::size_t>(i) * b + j] += dneg[static_cast<std::size_t>(k++)];
    }
    // z2_i anchors against column i of cos.
    for (int j = 0, k = 0; j < b; ++j)
      if (j != i) neg[static_cast<std::size_t>(k++)] = cos[static_cast<std::size_t>(j) * b + i];
    loss_b = info_nce_from_cosines(cos[static_cast<std::size_t>(i) * b + i], neg, temperature, beta,
                                   want_grad ? &dpos : nullptr, want_grad ? std::span<double>(dneg) : std::span<double>());
    if (want_grad) {
      side_b[static_cast<std::size_t>(i) * b + i] += dpos;
      for (int j = 0, k = 0; j < b; ++j)
        if (j != i) side_b[static_cast<std::size_t>(j) * b + i] += dneg[static_cast<std::size_t>(k++)];
    }
    total += loss_a + loss_b;
  }
  const double inv_b = 1.0 / b;
  if (want_grad) {
    std::vector<double> dcos(static_cast<std::size_t>(b) * b);
    // Each side's contribution is summed in a fixed order so that swapping
    // the views mirrors the gradient bit for bit.
    for (std::size_t k = 0; k < dcos.size(); ++k) dcos[k] = (side_a[k] + side_b[k]) * inv_b;
    if (grad_z1) {
      *grad_z1 = DMatrix(b, d);
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
          const double g = dcos[static_cast<std::size_t>(i) * b + j];
          for (int k = 0; k < d; ++k) grad_z1->row(i)[k] += g * z2.row(j)[k];
        }
    }
    if (grad_z2) {
      *grad_z2 = DMatrix(b, d);
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
          const double g = dcos[static_cast<std::size_t>(i) * b + j];
          for (int k = 0; k < d; ++k) grad_z2->row(j)[k] += g * z1.row(i)[k];
        }
    }
  }
  return total * inv_b;
}

double byol_loss(const DMatrix& online, const DMatrix& target, DMatrix* grad_online) {
  require(online.rows == target.rows && online.cols == target.cols, ErrorKind::Contract,
          "byol_loss shape mismatch: " + std::to_string(online.rows) + "x" + std::to_string(online.cols) + " vs " +
              std::to_string(target.rows) + "x" + std::to_string(target.cols));
  require(online.rows >= 1, ErrorKind::Contract, "byol_loss of an empty batch");
  const int b = online.rows;
  const int d = online.cols;
  if (grad_online) *grad_online = DMatrix(b, d);
  double total = 0.0;
  for (int i = 0; i < b; ++i) {
    double row_sum = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = online.row(i)[k] - target.row(i)[k];
      row_sum += diff * diff;
      if (grad_online) grad_online->row(i)[k] = 2.0 * diff / b;
    }
    total += row_sum;
  }
  return total / b;
}

}  // namespace sscd
