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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sscd/archive.hpp"
#include "sscd/encoder.hpp"
#include "sscd/rng.hpp"

namespace sscd {

struct TrainConfig {
  TrainingMode mode = TrainingMode::Homogeneous;
  int patch_side = 16;
  int batch_size = 64;
  int steps = 500;
  double learning_rate = 1e-3;
  double temperature = 0.1;
  double beta = 0.5;
  double ema_tau = 0.99;
  std::uint64_t seed = 0;
  int patches_per_image = 32;
  /// Homogeneous: the single modality. Heterogeneous: branch-1 modality.
  std::string modality = "pseudo_optical";
  /// Heterogeneous only: branch-2 modality.
  std::string modality_b = "pseudo_sar";

  void validate() const;
};

struct PairInfo {
  int scene = 0;
  int date1 = 0;
  int date2 = 0;
  int row = 0;
  int col = 0;
};

/// Co-located patch pairs; row k of view1 and view2 form a positive pair.
struct PairBatch {
  PatchBatch view1;
  PatchBatch view2;
  std::vector<PairInfo> info;
};

/// Archive copy with every raster band-standardized.
Archive standardize_archive(const Archive& archive);

/// Draws `batch_size` pairs in groups of `patches_per_image` locations per
/// sampled image pair. Homogeneous pairs: one scene, one modality, two
/// distinct dates. Heterogeneous pairs: one scene, the two modalities,
/// acquisitions from the same calendar month.
PairBatch sample_pairs(const Archive& archive, const TrainConfig& config, Rng& rng);

/// phi' = tau * phi + (1 - tau) * theta over trainable encoder/projector
/// tensors. Running statistics and predictors are left alone.
BranchParams ema_update(const BranchParams& target, const BranchParams& online, double tau);

struct AdamState {
  BranchParams m;
  BranchParams v;
  std::uint64_t t = 0;

  static AdamState for_params(const BranchParams& params);
};

void adam_step(BranchParams& params, const BranchParams& grads, AdamState& state, double learning_rate);

struct StepGradients {
  double loss = 0.0;
  BranchParams grad1;
  BranchParams grad2;  // empty in homogeneous mode (target takes no gradient)
};

/// Symmetrized regression loss 0.5 * (|q(v1) - t(v2)|^2 + |q(v2) - t(v1)|^2)
/// and its gradient w.r.t. the online branch. Both branches run with batch
/// statistics and update their running estimates.
StepGradients homogeneous_gradients(BranchParams& online, BranchParams& target, const EncoderConfig& config,
                                    const PairBatch& batch);

/// Symmetric in-batch contrastive loss and gradients for both branches.
StepGradients heterogeneous_gradients(BranchParams& branch1, BranchParams& branch2, const EncoderConfig& config,
                                      const PairBatch& batch, double temperature, double beta);

/// The sampling stream used by the training loops.
Rng sampling_rng(const TrainConfig& config);

struct TrainResult {
  ModelCheckpoint checkpoint;
  std::vector<double> losses;  // one per step, evaluated before the update
};

/// Branch init seeds come from encoder.seed; in_channels come from the archive.
TrainResult train_homogeneous(const Archive& archive, const TrainConfig& config, const EncoderConfig& encoder);
TrainResult train_heterogeneous(const Archive& archive, const TrainConfig& config, const EncoderConfig& encoder);

/// Heterogeneous training from explicit initial branches.
TrainResult train_heterogeneous(const Archive& archive, const TrainConfig& config, const EncoderConfig& encoder,
                                BranchParams branch1, BranchParams branch2);

/// `step<TAB>loss` per line.
void write_loss_log(const std::vector<double>& losses, const std::filesystem::path& path);

}  // namespace sscd
