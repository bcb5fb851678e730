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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "sscd/losses.hpp"
#include "sscd/synthgen.hpp"
#include "sscd/trainer.hpp"
#include "test_util.hpp"

using namespace sscd;
using namespace sscd::testing;

namespace {

Archive small_archive(std::vector<std::string> modalities, int scenes = 2, int dates = 3, int size = 32) {
  SynthParams p;
  p.seed = 21;
  p.n_scenes = scenes;
  p.n_dates = dates;
  p.size = size;
  p.modalities = std::move(modalities);
  p.change.n_objects = 1;
  p.change.min_size = 4;
  p.change.max_size = 6;
  return generate_archive(p).archive;
}

TrainConfig small_config(TrainingMode mode) {
  TrainConfig c;
  c.mode = mode;
  c.patch_side = 8;
  c.batch_size = 8;
  c.steps = 3;
  c.patches_per_image = 4;
  c.seed = 5;
  return c;
}

// Applies f to each pair of matching trainable tensors.
template <typename F>
void for_trainable(const BranchParams& a, const BranchParams& b, F&& f) {
  auto walk = [&](const nn::ParamGroup& x, const nn::ParamGroup& y) {
    REQUIRE(x.same_layout(y));
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[static_cast<int>(i)].trainable) f(x[static_cast<int>(i)].value.data, y[static_cast<int>(i)].value.data);
  };
  walk(a.encoder, b.encoder);
  walk(a.projector, b.projector);
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("ema_update fixed point, copy and arithmetic") {
    const EncoderConfig c = tiny_config(2);
    const BranchParams target = init_branch(c, BranchRole::Target);
    BranchParams online = init_branch(c, BranchRole::ModalityA);
    CHECK(ema_update(target, online, 1.0) == target);
    const BranchParams copy = ema_update(target, online, 0.0);
    for_trainable(copy, online, [](const auto& x, const auto& y) { CHECK(x == y); });

    BranchParams zero = target;
    BranchParams one = target;
    for (auto* g : {&zero.encoder, &zero.projector})
      for (auto& e : g->entries()) std::fill(e.value.data.begin(), e.value.data.end(), 0.0f);
    for (auto* g : {&one.encoder, &one.projector})
      for (auto& e : g->entries()) std::fill(e.value.data.begin(), e.value.data.end(), 1.0f);
    const BranchParams mixed = ema_update(zero, one, 0.99);
    for_trainable(mixed, mixed, [](const auto& x, const auto&) {
      for (float v : x) CHECK(v == static_cast<float>(0.01));
    });

    CHECK(error_kind_of([&] { ema_update(target, online, 1.5); }) == ErrorKind::Parameter);
    CHECK(error_kind_of([&] { ema_update(target, init_branch(tiny_config(3), BranchRole::Target), 0.5); }) ==
          ErrorKind::Contract);
  }

  TEST_CASE("ema_update is affine: twice with tau equals once with tau squared") {
    const EncoderConfig c = tiny_config(2);
    const BranchParams phi = init_branch(c, BranchRole::ModalityA);
    const BranchParams theta = init_branch(c, BranchRole::ModalityB);
    const BranchParams twice = ema_update(ema_update(phi, theta, 0.9), theta, 0.9);
    const BranchParams once = ema_update(phi, theta, 0.81);
    for_trainable(twice, once, [](const auto& x, const auto& y) {
      for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(x[k] - y[k]) <= 1e-6f * (1 + std::abs(y[k])));
    });
    // Non-trainable statistics are not blended.
    const BranchParams blended = ema_update(phi, theta, 0.5);
    for (std::size_t i = 0; i < phi.encoder.size(); ++i)
      if (!phi.encoder[static_cast<int>(i)].trainable)
        CHECK(blended.encoder[static_cast<int>(i)].value.data == phi.encoder[static_cast<int>(i)].value.data);
  }

  TEST_CASE("homogeneous sampling contract and determinism") {
    const Archive a = standardize_archive(small_archive({"pseudo_optical"}, 3, 4));
    TrainConfig c = small_config(TrainingMode::Homogeneous);
    c.batch_size = 64;
    Rng r1(7), r2(7);
    const PairBatch b1 = sample_pairs(a, c, r1);
    const PairBatch b2 = sample_pairs(a, c, r2);
    CHECK(b1.view1.data == b2.view1.data);
    CHECK(b1.view2.data == b2.view2.data);
    REQUIRE(b1.info.size() == 64u);
    std::set<int> scenes;
    for (const auto& info : b1.info) {
      CHECK(info.date1 != info.date2);
      scenes.insert(info.scene);
      // Held-out acquisitions never enter training.
      const auto& s = a.scenes[static_cast<std::size_t>(info.scene)];
      CHECK(s.find("pseudo_optical", info.date1)->split == Split::Train);
      CHECK(s.find("pseudo_optical", info.date2)->split == Split::Train);
      const Patch p = extract_patch(s.find("pseudo_optical", info.date1)->raster, info.row, info.col, 8);
      const auto k = static_cast<std::size_t>(&info - b1.info.data());
      CHECK(std::equal(p.pixels.begin(), p.pixels.end(), b1.view1.data.begin() + k * b1.view1.sample_size()));
    }
    CHECK(scenes.size() > 1);
  }

  TEST_CASE("heterogeneous sampling pairs modalities within a month and keeps band counts") {
    const Archive a = standardize_archive(small_archive({"pseudo_optical", "pseudo_sar"}));
    const TrainConfig c = small_config(TrainingMode::Heterogeneous);
    Rng rng(3);
    const PairBatch b = sample_pairs(a, c, rng);
    CHECK(b.view1.bands == 4);
    CHECK(b.view2.bands == 2);
    for (const auto& info : b.info) {
      CHECK(info.date1 / 100 == info.date2 / 100);
      CHECK(info.date1 != info.date2);
    }
  }

  TEST_CASE("sampling errors name the scene") {
    Archive a = small_archive({"pseudo_optical"}, 2, 2);  // one training date per scene
    TrainConfig c = small_config(TrainingMode::Homogeneous);
    Rng rng(1);
    try {
      sample_pairs(a, c, rng);
      FAIL("expected a data error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Data);
      CHECK(std::string(e.what()).find("scene 0") != std::string::npos);
    }
    c.mode = TrainingMode::Heterogeneous;
    CHECK(error_kind_of([&] { sample_pairs(small_archive({"pseudo_optical"}), c, rng); }) == ErrorKind::Data);
    c.batch_size = 1;
    CHECK(error_kind_of([&] { c.validate(); }) == ErrorKind::Parameter);
  }

  TEST_CASE("steps=0 returns the initialization") {
    const Archive a = small_archive({"pseudo_optical", "pseudo_sar"});
    TrainConfig c = small_config(TrainingMode::Homogeneous);
    c.steps = 0;
    const EncoderConfig enc = tiny_config(4, 9);
    const TrainResult hom = train_homogeneous(a, c, enc);
    CHECK(hom.checkpoint.branch1 == init_branch(enc, BranchRole::Online));
    CHECK(hom.checkpoint.branch2 == init_branch(enc, BranchRole::Target));
    CHECK(hom.losses.empty());
    c.mode = TrainingMode::Heterogeneous;
    const TrainResult het = train_heterogeneous(a, c, enc);
    EncoderConfig enc2 = enc;
    enc2.in_channels = 2;
    CHECK(het.checkpoint.branch1 == init_branch(enc, BranchRole::ModalityA));
    CHECK(het.checkpoint.branch2 == init_branch(enc2, BranchRole::ModalityB));
  }

  TEST_CASE("one homogeneous step: online moves and the target follows the EMA rule") {
    const Archive a = small_archive({"pseudo_optical"});
    TrainConfig c = small_config(TrainingMode::Homogeneous);
    c.steps = 1;
    const EncoderConfig enc = tiny_config(4, 9);
    const TrainResult r = train_homogeneous(a, c, enc);
    const BranchParams init_online = init_branch(enc, BranchRole::Online);
    const BranchParams init_target = init_branch(enc, BranchRole::Target);
    CHECK_FALSE(r.checkpoint.branch1.encoder == init_online.encoder);
    const double tau = c.ema_tau;
    // target' = tau * target + (1 - tau) * online', evaluated independently.
    auto check_group = [&](const nn::ParamGroup& t1, const nn::ParamGroup& t0, const nn::ParamGroup& o1) {
      for (std::size_t i = 0; i < t1.size(); ++i) {
        const auto& e = t1[static_cast<int>(i)];
        if (!e.trainable) continue;
        for (std::size_t k = 0; k < e.value.data.size(); ++k) {
          const double expect = tau * t0[static_cast<int>(i)].value.data[k] +
                                (1 - tau) * o1[static_cast<int>(i)].value.data[k];
          CHECK(std::abs(e.value.data[k] - expect) <= 1e-7 * (1 + std::abs(expect)));
        }
      }
    };
    check_group(r.checkpoint.branch2.encoder, init_target.encoder, r.checkpoint.branch1.encoder);
    check_group(r.checkpoint.branch2.projector, init_target.projector, r.checkpoint.branch1.projector);
    CHECK(r.checkpoint.meta.steps == 1);
    CHECK(r.checkpoint.meta.final_loss == r.losses.back());
  }

  TEST_CASE("the target branch receives no gradient") {
    const Archive a = standardize_archive(small_archive({"pseudo_optical"}));
    const TrainConfig c = small_config(TrainingMode::Homogeneous);
    const EncoderConfig enc = tiny_config(4);
    BranchParams online = init_branch(enc, BranchRole::Online);
    BranchParams target = init_branch(enc, BranchRole::Target);
    Rng rng(2);
    const StepGradients g = homogeneous_gradients(online, target, enc, sample_pairs(a, c, rng));
    CHECK(g.grad2.encoder.empty());
    CHECK(g.grad2.projector.empty());
    CHECK(g.grad1.trainable_count() == online.trainable_count());
    CHECK(std::isfinite(g.loss));
  }

  TEST_CASE("training is deterministic bitwise") {
    const Archive a = small_archive({"pseudo_optical", "pseudo_sar"});
    const TrainConfig hom = small_config(TrainingMode::Homogeneous);
    CHECK(train_homogeneous(a, hom, tiny_config(4)).checkpoint ==
          train_homogeneous(a, hom, tiny_config(4)).checkpoint);
    const TrainConfig het = small_config(TrainingMode::Heterogeneous);
    const TrainResult x = train_heterogeneous(a, het, tiny_config(4));
    const TrainResult y = train_heterogeneous(a, het, tiny_config(4));
    CHECK(x.checkpoint == y.checkpoint);
    CHECK(x.losses == y.losses);
  }

  TEST_CASE("heterogeneous B=2 first-step loss is close to 2 log 2") {
    const Archive a = small_archive({"pseudo_optical", "pseudo_sar"});
    TrainConfig c = small_config(TrainingMode::Heterogeneous);
    c.batch_size = 2;
    c.steps = 1;
    const TrainResult r = train_heterogeneous(a, c, tiny_config(4));
    CHECK(std::abs(r.losses[0] - 2 * std::log(2.0)) < 0.5);
  }

  TEST_CASE("swapping modality roles mirrors the loss trajectory") {
    const Archive a = small_archive({"pseudo_optical", "pseudo_sar"});
    TrainConfig c = small_config(TrainingMode::Heterogeneous);
    c.steps = 4;
    EncoderConfig e1 = tiny_config(4, 2), e2 = tiny_config(2, 2);
    const BranchParams opt = init_branch(e1, BranchRole::ModalityA);
    const BranchParams sar = init_branch(e2, BranchRole::ModalityB);
    const TrainResult fwd = train_heterogeneous(a, c, e1, opt, sar);
    TrainConfig swapped = c;
    std::swap(swapped.modality, swapped.modality_b);
    const TrainResult bwd = train_heterogeneous(a, swapped, e2, sar, opt);
    CHECK(fwd.losses == bwd.losses);
    CHECK(fwd.checkpoint.branch1 == bwd.checkpoint.branch2);
    CHECK(fwd.checkpoint.branch2 == bwd.checkpoint.branch1);
  }

  TEST_CASE("heterogeneous step 1: branch 2 moves by exactly one Adam step") {
    const Archive a = small_archive({"pseudo_optical", "pseudo_sar"});
    TrainConfig c = small_config(TrainingMode::Heterogeneous);
    c.steps = 1;
    EncoderConfig e1 = tiny_config(4, 2), e2 = tiny_config(2, 2);
    const BranchParams b1 = init_branch(e1, BranchRole::ModalityA);
    const BranchParams b2 = init_branch(e2, BranchRole::ModalityB);
    const TrainResult r = train_heterogeneous(a, c, e1, b1, b2);

    const Archive data = standardize_archive(a);
    Rng rng = sampling_rng(c);
    BranchParams w1 = b1, w2 = b2;
    const StepGradients g = heterogeneous_gradients(w1, w2, e1, sample_pairs(data, c, rng), c.temperature, c.beta);
    // First Adam step with bias correction: delta = -lr * g / (|g| + eps).
    auto check_group = [&](const nn::ParamGroup& after, const nn::ParamGroup& before, const nn::ParamGroup& grad) {
      for (std::size_t i = 0; i < after.size(); ++i) {
        if (!after[static_cast<int>(i)].trainable) continue;
        const auto& x1 = after[static_cast<int>(i)].value.data;
        const auto& x0 = before[static_cast<int>(i)].value.data;
        const auto& gg = grad[static_cast<int>(i)].value.data;
        for (std::size_t k = 0; k < x1.size(); ++k) {
          const double gk = gg[k];
          const double expect = x0[k] - c.learning_rate * gk / (std::abs(gk) + 1e-8);
          CHECK(std::abs(x1[k] - expect) <= 1e-6 * (1 + std::abs(expect)));
        }
      }
    };
    check_group(r.checkpoint.branch2.encoder, b2.encoder, g.grad2.encoder);
    check_group(r.checkpoint.branch2.projector, b2.projector, g.grad2.projector);
  }

  TEST_CASE("200 homogeneous steps reduce the windowed loss") {
    const Archive a = small_archive({"pseudo_optical"}, 4, 4, 32);
    TrainConfig c = small_config(TrainingMode::Homogeneous);
    c.steps = 200;
    c.batch_size = 16;
    const TrainResult r = train_homogeneous(a, c, tiny_config(4));
    REQUIRE(r.losses.size() == 200u);
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 20; ++i) {
      first += r.losses[static_cast<std::size_t>(i)];
      last += r.losses[r.losses.size() - 1 - static_cast<std::size_t>(i)];
    }
    CHECK(last < first);
    CHECK(r.checkpoint.branch1.all_finite());
    CHECK(r.checkpoint.branch2.all_finite());
  }

  TEST_CASE("loss log format") {
    TempDir dir("losslog");
    write_loss_log({0.5, 0.25}, dir / "loss.tsv");
    std::ifstream in(dir / "loss.tsv");
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l1 == "0\t0.5");
    CHECK(l2 == "1\t0.25");
  }
}
