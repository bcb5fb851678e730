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

#include "sscd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sscd/error.hpp"
#include "sscd/fileio.hpp"
#include "sscd/losses.hpp"

namespace sscd {
namespace {

constexpr std::uint64_t kSamplingStream = 101;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct ImagePair {
  const Raster* first;
  const Raster* second;
  int date1;
  int date2;
};

// Candidate image pairs for one scene.
std::vector<ImagePair> scene_pairs(const SceneSeries& scene, const TrainConfig& config) {
  std::vector<ImagePair> pairs;
  if (config.mode == TrainingMode::Homogeneous) {
    const auto acq = scene.training(config.modality);
    for (std::size_t i = 0; i < acq.size(); ++i)
      for (std::size_t j = 0; j < acq.size(); ++j)
        if (i != j && acq[i]->date != acq[j]->date)
          pairs.push_back({&acq[i]->raster, &acq[j]->raster, acq[i]->date, acq[j]->date});
  } else {
    const auto a = scene.training(config.modality);
    const auto b = scene.training(config.modality_b);
    // Ordered by month, then by the date of each side, so that swapping the
    // two modalities enumerates the same months in the same order.
    std::vector<std::pair<std::tuple<int, int, int>, ImagePair>> keyed;
    for (const auto* x : a)
      for (const auto* y : b)
        if (x->month_key() == y->month_key())
          keyed.push_back({{x->month_key(), std::min(x->date, y->date), std::max(x->date, y->date)},
                           {&x->raster, &y->raster, x->date, y->date}});
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    for (auto& k : keyed) pairs.push_back(k.second);
  }
  return pairs;
}

nn::Act batch_act(const PatchBatch& b) { return nn::from_nchw(b.data.data(), b.count, b.bands, b.side, b.side); }

nn::Act concat_samples(const nn::Act& a, const nn::Act& b) {
  nn::Act out(a.c, a.n + b.n, a.h, a.w);
  const std::size_t pa = static_cast<std::size_t>(a.n) * a.h * a.w;
  const std::size_t pb = static_cast<std::size_t>(b.n) * b.h * b.w;
  for (int c = 0; c < a.c; ++c) {
    std::copy_n(a.v.data() + c * pa, pa, out.v.data() + c * (pa + pb));
    std::copy_n(b.v.data() + c * pb, pb, out.v.data() + c * (pa + pb) + pa);
  }
  return out;
}

DMatrix act_rows(const nn::Act& a) {
  DMatrix m(a.n, a.c);
  for (int i = 0; i < a.c; ++i)
    for (int j = 0; j < a.n; ++j) m.row(j)[i] = a.v[static_cast<std::size_t>(i) * a.n + j];
  return m;
}

nn::Act rows_act(const DMatrix& m) {
  nn::Act a(m.cols, m.rows, 1, 1);
  for (int i = 0; i < m.cols; ++i)
    for (int j = 0; j < m.rows; ++j) a.v[static_cast<std::size_t>(i) * m.rows + j] = static_cast<float>(m.row(j)[i]);
  return a;
}

template <class Fn>
void for_each_trainable(BranchParams& p, const BranchParams& other, Fn fn) {
  auto run = [&](nn::ParamGroup& g, const nn::ParamGroup& o) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[static_cast<int>(i)].trainable) fn(g[static_cast<int>(i)].value.data, o[static_cast<int>(i)].value.data);
  };
  run(p.encoder, other.encoder);
  run(p.projector, other.projector);
  if (p.predictor && other.predictor) run(*p.predictor, *other.predictor);
}

void check_finite(const BranchParams& p, int step, double lr, const char* which) {
  if (!p.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite parameters in " << which << " after step " << step << " (lr " << lr << ")";
    fail(ErrorKind::Numeric, msg.str());
  }
}

void check_loss(double loss, int step, double lr) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "loss is " << loss << " at step " << step << " (lr " << lr << ")";
    fail(ErrorKind::Numeric, msg.str());
  }
}

}  // namespace

void TrainConfig::validate() const {
  require(patch_side >= 4 && patch_side % 2 == 0, ErrorKind::Parameter, "patch_side must be even and >= 4");
  require(batch_size >= 1, ErrorKind::Parameter, "batch_size must be >= 1");
  require(mode != TrainingMode::Heterogeneous || batch_size >= 2, ErrorKind::Parameter,
          "heterogeneous training needs batch_size >= 2 for in-batch negatives");
  require(mode != TrainingMode::Homogeneous || batch_size >= 1, ErrorKind::Parameter, "batch_size must be >= 1");
  require(steps >= 0, ErrorKind::Parameter, "steps must be >= 0");
  require(learning_rate > 0.0, ErrorKind::Parameter, "learning_rate must be positive");
  require(temperature > 0.0, ErrorKind::Parameter, "temperature must be positive");
  require(beta >= 0.0, ErrorKind::Parameter, "beta must be non-negative");
  require(ema_tau >= 0.0 && ema_tau <= 1.0, ErrorKind::Parameter, "ema_tau must lie in [0,1]");
  require(patches_per_image >= 1, ErrorKind::Parameter, "patches_per_image must be >= 1");
  require(!modality.empty(), ErrorKind::Parameter, "modality must be set");
  require(mode == TrainingMode::Homogeneous || (!modality_b.empty() && modality_b != modality), ErrorKind::Parameter,
          "heterogeneous training needs two distinct modalities");
}

Archive standardize_archive(const Archive& archive) {
  Archive out = archive;
  for (auto& s : out.scenes)
    for (auto& a : s.acquisitions) a.raster = standardize_bands(a.raster);
  return out;
}

Rng sampling_rng(const TrainConfig& config) { return Rng(mix_seed(config.seed, kSamplingStream)); }

PairBatch sample_pairs(const Archive& archive, const TrainConfig& config, Rng& rng) {
  config.validate();
  require(!archive.scenes.empty(), ErrorKind::Data, "archive has no scenes");
  std::vector<std::vector<ImagePair>> per_scene;
  per_scene.reserve(archive.scenes.size());
  for (const auto& s : archive.scenes) {
    per_scene.push_back(scene_pairs(s, config));
    if (per_scene.back().empty()) {
      if (config.mode == TrainingMode::Homogeneous)
        fail(ErrorKind::Data, "scene " + s.scene_id + " has fewer than two training dates of modality " + config.modality);
      fail(ErrorKind::Data, "scene " + s.scene_id + " has no " + config.modality + "/" + config.modality_b +
                                " acquisitions from the same month");
    }
  }

  const int bands1 = archive.band_count(config.modality);
  const int bands2 = config.mode == TrainingMode::Homogeneous ? bands1 : archive.band_count(config.modality_b);
  const int side = config.patch_side;
  PairBatch batch;
  batch.view1 = {config.batch_size, bands1, side, {}};
  batch.view2 = {config.batch_size, bands2, side, {}};
  batch.view1.data.resize(batch.view1.sample_size() * static_cast<std::size_t>(config.batch_size));
  batch.view2.data.resize(batch.view2.sample_size() * static_cast<std::size_t>(config.batch_size));
  batch.info.reserve(static_cast<std::size_t>(config.batch_size));

  int filled = 0;
  while (filled < config.batch_size) {
    const int scene = static_cast<int>(rng.below(archive.scenes.size()));
    const auto& pairs = per_scene[static_cast<std::size_t>(scene)];
    const ImagePair& pair = pairs[rng.below(pairs.size())];
    const int group = std::min(config.patches_per_image, config.batch_size - filled);
    for (int k = 0; k < group; ++k, ++filled) {
      const int row = static_cast<int>(rng.below(static_cast<std::uint64_t>(pair.first->height())));
      const int col = static_cast<int>(rng.below(static_cast<std::uint64_t>(pair.first->width())));
      extract_patch_into(*pair.first, row, col, side,
                         batch.view1.data.data() + batch.view1.sample_size() * static_cast<std::size_t>(filled));
      extract_patch_into(*pair.second, row, col, side,
                         batch.view2.data.data() + batch.view2.sample_size() * static_cast<std::size_t>(filled));
      batch.info.push_back({scene, pair.date1, pair.date2, row, col});
    }
  }
  return batch;
}

BranchParams ema_update(const BranchParams& target, const BranchParams& online, double tau) {
  require(tau >= 0.0 && tau <= 1.0, ErrorKind::Parameter, "ema tau must lie in [0,1]");
  require(target.encoder.same_layout(online.encoder) && target.projector.same_layout(online.projector),
          ErrorKind::Contract, "ema_update: target and online shapes differ");
  BranchParams out = target;
  auto blend = [tau](nn::ParamGroup& t, const nn::ParamGroup& o) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      auto& te = t[static_cast<int>(i)];
      if (!te.trainable) continue;
      const auto& oe = o[static_cast<int>(i)].value.data;
      for (std::size_t k = 0; k < te.value.data.size(); ++k)
        te.value.data[k] = static_cast<float>(tau * te.value.data[k] + (1.0 - tau) * oe[k]);
    }
  };
  blend(out.encoder, online.encoder);
  blend(out.projector, online.projector);
  return out;
}

AdamState AdamState::for_params(const BranchParams& params) {
  AdamState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  return s;
}

void adam_step(BranchParams& params, const BranchParams& grads, AdamState& state, double learning_rate) {
  ++state.t;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  auto update = [&](nn::ParamGroup& p, const nn::ParamGroup& g, nn::ParamGroup& m, nn::ParamGroup& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const int idx = static_cast<int>(i);
      if (!p[idx].trainable) continue;
      auto& w = p[idx].value.data;
      const auto& gr = g[idx].value.data;
      auto& mm = m[idx].value.data;
      auto& vv = v[idx].value.data;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double gk = gr[k];
        mm[k] = static_cast<float>(kAdamBeta1 * mm[k] + (1.0 - kAdamBeta1) * gk);
        vv[k] = static_cast<float>(kAdamBeta2 * vv[k] + (1.0 - kAdamBeta2) * gk * gk);
        const double mh = mm[k] / c1;
        const double vh = vv[k] / c2;
        w[k] = static_cast<float>(w[k] - learning_rate * mh / (std::sqrt(vh) + kAdamEps));
      }
    }
  };
  update(params.encoder, grads.encoder, state.m.encoder, state.v.encoder);
  update(params.projector, grads.projector, state.m.projector, state.v.projector);
  if (params.predictor) update(*params.predictor, *grads.predictor, *state.m.predictor, *state.v.predictor);
}

StepGradients homogeneous_gradients(BranchParams& online, BranchParams& target, const EncoderConfig& config,
                                    const PairBatch& batch) {
  require(batch.view1.bands == online.in_channels && batch.view2.bands == target.in_channels, ErrorKind::Contract,
          "batch bands do not match the branches");
  const BranchNet online_net(config, online);
  const BranchNet target_net(config, target);
  const nn::Act v1 = batch_act(batch.view1);
  const nn::Act v2 = batch_act(batch.view2);

  // Column k of q pairs with column k of t: q = [q(v1) q(v2)], t = [t(v2) t(v1)].
  BranchNet::Tape tape;
  const nn::Act q = online_net.forward(concat_samples(v1, v2), online, nn::Mode::Train, true, &tape, true);
  const nn::Act t = target_net.forward(concat_samples(v2, v1), target, nn::Mode::Train, false, nullptr, true);

  DMatrix grad_q;
  StepGradients out;
  out.loss = byol_loss(act_rows(q), act_rows(t), &grad_q);
  out.grad1 = online.zeros_like();
  online_net.backward(rows_act(grad_q), online, tape, out.grad1);
  return out;
}

StepGradients heterogeneous_gradients(BranchParams& branch1, BranchParams& branch2, const EncoderConfig& config,
                                      const PairBatch& batch, double temperature, double beta) {
  require(batch.view1.bands == branch1.in_channels && batch.view2.bands == branch2.in_channels, ErrorKind::Contract,
          "batch bands do not match the branches");
  const BranchNet net1(config, branch1);
  const BranchNet net2(config, branch2);
  BranchNet::Tape tape1, tape2;
  const nn::Act z1 = net1.forward(batch_act(batch.view1), branch1, nn::Mode::Train, false, &tape1, true);
  const nn::Act z2 = net2.forward(batch_act(batch.view2), branch2, nn::Mode::Train, false, &tape2, true);

  DMatrix g1, g2;
  StepGradients out;
  out.loss = symmetric_in_batch_loss(act_rows(z1), act_rows(z2), temperature, beta, &g1, &g2);
  out.grad1 = branch1.zeros_like();
  out.grad2 = branch2.zeros_like();
  net1.backward(rows_act(g1), branch1, tape1, out.grad1);
  net2.backward(rows_act(g2), branch2, tape2, out.grad2);
  return out;
}

TrainResult train_homogeneous(const Archive& archive, const TrainConfig& config, const EncoderConfig& encoder) {
  config.validate();
  require(config.mode == TrainingMode::Homogeneous, ErrorKind::Parameter, "train_homogeneous needs mode=homogeneous");
  archive.validate();
  const Archive data = standardize_archive(archive);

  EncoderConfig enc = encoder;
  enc.in_channels = data.band_count(config.modality);
  BranchParams online = init_branch(enc, BranchRole::Online);
  BranchParams target = init_branch(enc, BranchRole::Target);
  AdamState adam = AdamState::for_params(online);
  Rng rng = sampling_rng(config);

  TrainResult result;
  result.losses.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    const PairBatch batch = sample_pairs(data, config, rng);
    StepGradients g = homogeneous_gradients(online, target, enc, batch);
    check_loss(g.loss, step, config.learning_rate);
    adam_step(online, g.grad1, adam, config.learning_rate);
    target = ema_update(target, online, config.ema_tau);
    check_finite(online, step, config.learning_rate, "online branch");
    check_finite(target, step, config.learning_rate, "target branch");
    result.losses.push_back(g.loss);
  }

  auto& ck = result.checkpoint;
  ck.config = enc;
  ck.mode = TrainingMode::Homogeneous;
  ck.patch_side = config.patch_side;
  ck.branch1 = std::move(online);
  ck.branch2 = std::move(target);
  ck.meta = {static_cast<std::uint64_t>(config.steps), result.losses.empty() ? 0.0 : result.losses.back(),
             config.seed};
  return result;
}

TrainResult train_heterogeneous(const Archive& archive, const TrainConfig& config, const EncoderConfig& encoder) {
  EncoderConfig enc1 = encoder;
  EncoderConfig enc2 = encoder;
  enc1.in_channels = archive.band_count(config.modality);
  enc2.in_channels = archive.band_count(config.modality_b);
  return train_heterogeneous(archive, config, encoder, init_branch(enc1, BranchRole::ModalityA),
                             init_branch(enc2, BranchRole::ModalityB));
}

TrainResult train_heterogeneous(const Archive& archive, const TrainConfig& config, const EncoderConfig& encoder,
                                BranchParams branch1, BranchParams branch2) {
  config.validate();
  require(config.mode == TrainingMode::Heterogeneous, ErrorKind::Parameter,
          "train_heterogeneous needs mode=heterogeneous");
  archive.validate();
  const Archive data = standardize_archive(archive);
  require(branch1.in_channels == data.band_count(config.modality) &&
              branch2.in_channels == data.band_count(config.modality_b),
          ErrorKind::Contract, "initial branches do not match the archive band counts");
  require(!branch1.has_predictor() && !branch2.has_predictor(), ErrorKind::Contract,
          "heterogeneous branches carry no predictor");

  EncoderConfig enc = encoder;
  enc.in_channels = branch1.in_channels;
  AdamState adam1 = AdamState::for_params(branch1);
  AdamState adam2 = AdamState::for_params(branch2);
  Rng rng = sampling_rng(config);

  TrainResult result;
  result.losses.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    const PairBatch batch = sample_pairs(data, config, rng);
    StepGradients g = heterogeneous_gradients(branch1, branch2, enc, batch, config.temperature, config.beta);
    check_loss(g.loss, step, config.learning_rate);
    adam_step(branch1, g.grad1, adam1, config.learning_rate);
    adam_step(branch2, g.grad2, adam2, config.learning_rate);
    check_finite(branch1, step, config.learning_rate, "branch 1");
    check_finite(branch2, step, config.learning_rate, "branch 2");
    result.losses.push_back(g.loss);
  }

  auto& ck = result.checkpoint;
  ck.config = enc;
  ck.mode = TrainingMode::Heterogeneous;
  ck.patch_side = config.patch_side;
  ck.branch1 = std::move(branch1);
  ck.branch2 = std::move(branch2);
  ck.meta = {static_cast<std::uint64_t>(config.steps), result.losses.empty() ? 0.0 : result.losses.back(),
             config.seed};
  return result;
}

void write_loss_log(const std::vector<double>& losses, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(9);
  for (std::size_t i = 0; i < losses.size(); ++i) out << i << '\t' << losses[i] << '\n';
  io::write_text_atomic(path, out.str());
}

}  // namespace sscd
