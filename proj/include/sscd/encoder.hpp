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
#include <optional>
#include <vector>

#include "sscd/nn.hpp"
#include "sscd/raster.hpp"

namespace sscd {

/// Residual encoder + heads. Stage k has blocks_per_stage[k] basic blocks of
/// width widths[k]; its first block uses stage_strides[k].
struct EncoderConfig {
  int in_channels = 4;
  std::vector<int> widths{16, 32, 64};
  std::vector<int> blocks_per_stage{2, 2, 2};
  std::vector<int> stage_strides{1, 2, 2};
  int embed_dim = 64;
  int projector_hidden = 128;
  int predictor_hidden = 128;
  std::uint64_t seed = 0;

  void validate() const;

  bool operator==(const EncoderConfig&) const = default;

  /// Desk-scale default used by the trainer and tests.
  static EncoderConfig desk(int in_channels, std::uint64_t seed = 0);

  /// ResNet-34 stage layout (3,4,6,3 blocks; 64..512 wide) with the last two
  /// stages kept at stride 1 for small patches.
  static EncoderConfig resnet34_small_input(int in_channels, std::uint64_t seed = 0);

  /// Unmodified ResNet-34 stage strides (1,2,2,2); reference for counting.
  static EncoderConfig resnet34(int in_channels, std::uint64_t seed = 0);
};

enum class BranchRole { Online, Target, ModalityA, ModalityB };

/// Learnable state of one branch: encoder, projector and (online only) predictor.
struct BranchParams {
  int in_channels = 0;
  nn::ParamGroup encoder;
  nn::ParamGroup projector;
  std::optional<nn::ParamGroup> predictor;

  bool has_predictor() const { return predictor.has_value(); }
  std::size_t trainable_count() const;
  bool all_finite() const;
  BranchParams zeros_like() const;

  bool operator==(const BranchParams&) const = default;
};

enum class TrainingMode : std::uint8_t { Homogeneous = 0, Heterogeneous = 1 };

struct TrainMeta {
  std::uint64_t steps = 0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const TrainMeta&) const = default;
};

struct ModelCheckpoint {
  EncoderConfig config;
  BranchParams branch1;
  BranchParams branch2;
  TrainingMode mode = TrainingMode::Homogeneous;
  int patch_side = 16;
  TrainMeta meta;

  /// Structural invariants; throws ErrorKind::Corruption.
  void validate() const;

  bool operator==(const ModelCheckpoint&) const = default;
};

/// Batch of equally sized patches in sample-major NCHW order.
struct PatchBatch {
  int count = 0;
  int bands = 0;
  int side = 0;
  std::vector<float> data;

  static PatchBatch from_patches(const std::vector<Patch>& patches);
  std::size_t sample_size() const { return static_cast<std::size_t>(bands) * side * side; }
  PatchBatch slice(int first, int n) const;
};

/// Row-major matrix; rows are samples.
struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  const float* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
};

BranchParams init_branch(const EncoderConfig& config, BranchRole role);

/// Unit-norm features from the projector, or the predictor when requested.
/// Batch normalization runs on its running statistics.
FeatureMatrix encode(const BranchParams& params, const EncoderConfig& config, const PatchBatch& patches,
                     bool use_predictor);

/// Layer graph bound to a parameter layout; reusable for any BranchParams
/// with the same layout.
class BranchNet {
 public:
  struct Tape {
    std::vector<nn::Cache> encoder, projector, predictor;
    std::vector<nn::Cache> normalize;
    bool used_predictor = false;
  };

  /// Binds against existing params (ErrorKind::Corruption on layout mismatch).
  BranchNet(const EncoderConfig& config, const BranchParams& params);

  /// Returns unit-norm features as (embed_dim x batch). In Train mode, running
  /// statistics are updated in `params` when `update_stats` is set.
  nn::Act forward(const nn::Act& input, BranchParams& params, nn::Mode mode, bool use_predictor, Tape* tape,
                  bool update_stats) const;
  nn::Act infer(const nn::Act& input, const BranchParams& params, bool use_predictor) const;

  void backward(const nn::Act& grad_out, const BranchParams& params, const Tape& tape, BranchParams& grads) const;

 private:
  BranchNet() = default;
  friend BranchParams init_branch(const EncoderConfig&, BranchRole);
  friend std::size_t parameter_count(const EncoderConfig&);

  void build(const EncoderConfig& config, BranchParams& params, Rng* enc_rng, Rng* pred_rng, bool with_predictor);

  nn::Sequential encoder_, projector_, predictor_, normalize_;
  bool has_predictor_ = false;
};

/// Trainable parameters of encoder + projector for config.in_channels.
std::size_t parameter_count(const EncoderConfig& config);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& ckpt);
ModelCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace sscd
