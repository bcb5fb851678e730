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

// Acceptance checks. `sscd_acceptance N` runs criterion N; without an argument
// every criterion runs. Each prints one line: "criterion N: PASS|FAIL <details>".

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sscd/change_map.hpp"
#include "sscd/error.hpp"
#include "sscd/losses.hpp"
#include "sscd/metrics.hpp"
#include "sscd/synthgen.hpp"
#include "sscd/threshold.hpp"
#include "sscd/trainer.hpp"

using namespace sscd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Collects failed sub-checks of one criterion.
struct Checks {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::vector<double> random_unit(Rng& rng, int d) {
  std::vector<double> v(static_cast<std::size_t>(d));
  double n = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    n += x * x;
  }
  for (auto& x : v) x /= std::sqrt(n);
  return v;
}

DMatrix random_rows(Rng& rng, int rows, int d) {
  DMatrix m(rows, d);
  for (int i = 0; i < rows; ++i) {
    const auto v = random_unit(rng, d);
    std::copy(v.begin(), v.end(), m.row(i));
  }
  return m;
}

Raster random_raster(Rng& rng, int w, int h, int bands) {
  std::vector<float> v(static_cast<std::size_t>(w) * h * bands);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return Raster::from_f32(w, h, bands, std::move(v));
}

Raster random_mask(Rng& rng, int w, int h, double p) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) x = rng.uniform() < p ? 1 : 0;
  return Raster::from_u8(w, h, 1, std::move(v));
}

double max_rel_fd_error(std::vector<double*> coords, const std::vector<double>& analytic,
                        const std::function<double()>& loss) {
  const double h = 1e-6;
  double num_max = 0.0, diff_max = 0.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double saved = *coords[k];
    *coords[k] = saved + h;
    const double up = loss();
    *coords[k] = saved - h;
    const double down = loss();
    *coords[k] = saved;
    const double numeric = (up - down) / (2 * h);
    num_max = std::max(num_max, std::abs(numeric));
    diff_max = std::max(diff_max, std::abs(numeric - analytic[k]));
  }
  return diff_max / std::max(num_max, 1e-12);
}

// ---------------------------------------------------------------------------

Checks criterion_1() {
  Checks c;
  Rng rng(101);

  EncoderConfig enc = EncoderConfig::desk(4, 3);
  const BranchParams online = init_branch(enc, BranchRole::Online);
  std::vector<Patch> patches;
  const Raster img = random_raster(rng, 32, 32, 4);
  for (int i = 0; i < 64; ++i) patches.push_back(extract_patch(img, rng.range(0, 31), rng.range(0, 31), 16));
  double worst = 0.0;
  for (bool pred : {false, true}) {
    const FeatureMatrix f = encode(online, enc, PatchBatch::from_patches(patches), pred);
    for (int i = 0; i < f.rows; ++i) {
      double n = 0.0;
      for (int k = 0; k < f.cols; ++k) n += static_cast<double>(f.row(i)[k]) * f.row(i)[k];
      worst = std::max(worst, std::abs(std::sqrt(n) - 1.0));
    }
  }
  c.expect(worst <= 1e-5, "encode unit norm");
  c.note("norm_err=" + fmt("%.2e", worst));

  DMatrix q(2, 2);
  q.data = {1, 0, 0, 1};
  DMatrix anti = q, ortho(2, 2);
  for (auto& v : anti.data) v = -v;
  ortho.data = {0, 1, 1, 0};
  c.expect(byol_loss(q, q) == 0.0, "byol anchor 0");
  c.expect(std::abs(byol_loss(q, ortho) - 2.0) <= 1e-12, "byol anchor 2");
  c.expect(std::abs(byol_loss(q, anti) - 4.0) <= 1e-12, "byol anchor 4");
  for (int i = 0; i < 200; ++i) {
    const double l = byol_loss(random_rows(rng, 4, 8), random_rows(rng, 4, 8));
    if (l < 0.0 || l > 4.0) {
      c.expect(false, "byol range");
      break;
    }
  }

  for (int n : {2, 5, 16}) {
    CandidateSet s;
    s.anchor = {1, 0, 0};
    s.positive = {0, 1, 0};
    for (int j = 1; j < n; ++j) s.negatives.push_back({0, 0, 1});
    for (double beta : {0.0, 0.5, 1.0})
      c.expect(std::abs(info_nce_loss(s, 0.1, beta) - std::log(n)) <= 1e-6, "info_nce log N for N=" + std::to_string(n));
  }

  for (int t = 0; t < 20; ++t) {
    const DMatrix a = random_rows(rng, 6, 8), b = random_rows(rng, 6, 8);
    std::vector<CandidateSet> sa, sb;
    in_batch_candidates(a, b, sa, sb);
    if (symmetric_contrastive_loss(sa, sb, 0.1, 0.5) != symmetric_contrastive_loss(sb, sa, 0.1, 0.5) ||
        symmetric_in_batch_loss(a, b, 0.1, 0.5) != symmetric_in_batch_loss(b, a, 0.1, 0.5)) {
      c.expect(false, "symmetric loss swap invariance");
      break;
    }
  }

  const EncoderConfig tiny = [] {
    EncoderConfig e;
    e.in_channels = 2;
    e.widths = {4, 8};
    e.blocks_per_stage = {1, 1};
    e.stage_strides = {1, 2};
    e.embed_dim = 8;
    e.projector_hidden = 16;
    e.predictor_hidden = 16;
    return e;
  }();
  const BranchParams phi = init_branch(tiny, BranchRole::Target);
  const BranchParams theta = init_branch(tiny, BranchRole::ModalityA);
  c.expect(ema_update(phi, theta, 1.0) == phi, "ema tau=1 fixed point");
  const BranchParams copy = ema_update(phi, theta, 0.0);
  bool copied = true, arithmetic = true;
  BranchParams zeros = phi, ones = phi;
  for (auto* g : {&zeros.encoder, &zeros.projector})
    for (auto& e : g->entries()) std::fill(e.value.data.begin(), e.value.data.end(), 0.0f);
  for (auto* g : {&ones.encoder, &ones.projector})
    for (auto& e : g->entries()) std::fill(e.value.data.begin(), e.value.data.end(), 1.0f);
  const BranchParams mixed = ema_update(zeros, ones, 0.99);
  for (std::size_t i = 0; i < phi.encoder.size(); ++i) {
    const auto& e = copy.encoder[static_cast<int>(i)];
    if (!e.trainable) continue;
    copied &= e.value.data == theta.encoder[static_cast<int>(i)].value.data;
    for (float v : mixed.encoder[static_cast<int>(i)].value.data) arithmetic &= v == static_cast<float>(0.01);
  }
  c.expect(copied, "ema tau=0 copy");
  c.expect(arithmetic, "ema 0.99*0 + 0.01*1");
  return c;
}

Checks criterion_2() {
  Checks c;
  Rng rng(202);
  double worst_nce = 0.0, worst_byol = 0.0;
  for (double beta : {0.0, 0.5, 1.0}) {
    for (int t = 0; t < 20; ++t) {
      CandidateSet s;
      s.anchor = random_unit(rng, 8);
      s.positive = random_unit(rng, 8);
      for (int j = 0; j < 4; ++j) s.negatives.push_back(random_unit(rng, 8));
      CandidateGrad g;
      info_nce_loss(s, 0.1, beta, &g);
      std::vector<double*> coords;
      std::vector<double> analytic;
      auto add = [&](Vec& v, const Vec& gv) {
        for (std::size_t k = 0; k < v.size(); ++k) {
          coords.push_back(&v[k]);
          analytic.push_back(gv[k]);
        }
      };
      add(s.anchor, g.anchor);
      add(s.positive, g.positive);
      for (std::size_t j = 0; j < s.negatives.size(); ++j) add(s.negatives[j], g.negatives[j]);
      worst_nce = std::max(worst_nce, max_rel_fd_error(coords, analytic, [&] { return info_nce_loss(s, 0.1, beta); }));
    }
  }
  for (int t = 0; t < 20; ++t) {
    DMatrix q = random_rows(rng, 5, 8);
    const DMatrix tg = random_rows(rng, 5, 8);
    DMatrix g;
    byol_loss(q, tg, &g);
    std::vector<double*> coords;
    for (auto& v : q.data) coords.push_back(&v);
    worst_byol = std::max(worst_byol, max_rel_fd_error(coords, g.data, [&] { return byol_loss(q, tg); }));
  }
  c.expect(worst_nce < 1e-4, "info_nce gradient");
  c.expect(worst_byol < 1e-4, "byol gradient");
  c.note("info_nce_rel_err=" + fmt("%.2e", worst_nce));
  c.note("byol_rel_err=" + fmt("%.2e", worst_byol));
  return c;
}

Checks criterion_3() {
  Checks c;
  Rng rng(303);
  int rosin_mismatch = 0;
  for (int t = 0; t < 1000; ++t) {
    const int bins = rng.range(8, 256);
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    const int last = rng.range(bins / 2, bins - 1);
    for (int i = 0; i <= last; ++i) h[static_cast<std::size_t>(i)] = std::floor(rng.uniform() * 1000.0);
    h[static_cast<std::size_t>(rng.range(0, last / 3))] = 5000.0;
    h[static_cast<std::size_t>(last)] = std::max(1.0, h[static_cast<std::size_t>(last)]);
    rosin_mismatch += rosin_corner_bin(h) != oracle::rosin_bin(h);
  }
  c.expect(rosin_mismatch == 0, "rosin brute-force match");
  c.note("rosin_mismatches=" + std::to_string(rosin_mismatch));

  int count_mismatch = 0;
  double metric_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Raster p = random_mask(rng, 32, 32, rng.uniform(0.05, 0.6));
    const Raster g = random_mask(rng, 32, 32, rng.uniform(0.05, 0.6));
    const ConfusionCounts cc = confusion_counts(p, g);
    count_mismatch += !(cc == oracle::confusion(p, g));
    const MetricReport r = compute_metrics(cc);
    const oracle::Metrics o = oracle::metrics(cc);
    for (double d : {r.pre - o.pre, r.rec - o.rec, r.oa - o.oa, r.f1 - o.f1, r.pe - o.pe, r.kappa - o.kappa})
      metric_err = std::max(metric_err, std::abs(d));
  }
  c.expect(count_mismatch == 0, "confusion counts");
  c.expect(metric_err <= 1e-12, "metrics vs hand oracle");
  c.note("metric_err=" + fmt("%.1e", metric_err));

  ModelCheckpoint ck;
  ck.config = EncoderConfig::desk(4, 5);
  ck.mode = TrainingMode::Homogeneous;
  ck.patch_side = 8;
  ck.branch1 = init_branch(ck.config, BranchRole::Online);
  ck.branch2 = init_branch(ck.config, BranchRole::Target);
  const Raster a = random_raster(rng, 24, 24, 4), b = random_raster(rng, 24, 24, 4);
  const IntensityMap m = compute_intensity_map(ck, a, b);
  const Raster sa = standardize_bands(a), sb = standardize_bands(b);
  double map_err = 0.0;
  for (int r = 0; r < 24; ++r)
    for (int col = 0; col < 24; ++col)
      map_err = std::max(map_err, std::abs(m.at(r, col) - oracle::pixel_intensity(ck, sa, sb, r, col)));
  c.expect(map_err <= 1e-5, "intensity map vs per-pixel encode");
  c.note("map_err=" + fmt("%.1e", map_err));
  return c;
}

Checks criterion_4() {
  Checks c;
  Rng rng(404);
  IntensityMap raw;
  raw.width = raw.height = 32;
  raw.scales = {8};
  raw.values.resize(32 * 32);
  for (auto& v : raw.values) v = static_cast<float>(4.0 * rng.uniform());
  const IntensityMap s = standardize_map(raw);
  double affine_err = 0.0;
  for (auto [scale, shift] : {std::pair{2.0, 0.5}, std::pair{0.3, -1.0}, std::pair{10.0, 3.0}}) {
    IntensityMap t = raw;
    for (auto& v : t.values) v = static_cast<float>(scale * v + shift);
    const IntensityMap st = standardize_map(t);
    for (std::size_t i = 0; i < s.values.size(); ++i)
      affine_err = std::max(affine_err, static_cast<double>(std::abs(st.values[i] - s.values[i])));
  }
  c.expect(affine_err <= 1e-5, "standardize affine invariance");
  c.note("affine_err=" + fmt("%.1e", affine_err));

  std::vector<IntensityMap> maps;
  for (int k = 0; k < 3; ++k) {
    IntensityMap m = raw;
    m.scales = {8 * (k + 1)};
    for (auto& v : m.values) v = static_cast<float>(rng.normal());
    maps.push_back(standardize_map(m));
  }
  const IntensityMap f = fuse_scales(maps);
  bool perm = true;
  std::vector<int> order{0, 1, 2};
  while (std::next_permutation(order.begin(), order.end())) {
    const IntensityMap g = fuse_scales({maps[order[0]], maps[order[1]], maps[order[2]]});
    perm &= g.values == f.values && g.scales == f.scales;
  }
  c.expect(perm, "fuse permutation invariance");

  const ThresholdDecision d1 = select_threshold(2.0, 2.2), d2 = select_threshold(1.0, 3.0),
                          d3 = select_threshold(1.5, 1.5);
  c.expect(d1.chosen == 2.0 && d1.method == ThresholdMethod::OppositeMin, "rule example 2.0/2.2");
  c.expect(d2.chosen == 3.0 && d2.method == ThresholdMethod::Rosin, "rule example 1.0/3.0");
  c.expect(d3.chosen == 1.5 && d3.method == ThresholdMethod::OppositeMin, "rule example 1.5/1.5");

  bool monotone = true;
  for (int t = 0; t < 50; ++t) {
    double lo = rng.normal(), hi = rng.normal();
    if (lo > hi) std::swap(lo, hi);
    const Raster a = binarize(f, lo), b = binarize(f, hi);
    for (std::size_t i = 0; i < a.u8().size(); ++i) monotone &= b.u8()[i] <= a.u8()[i];
  }
  c.expect(monotone, "binarize monotonicity");
  return c;
}

// ---------------------------------------------------------------------------

constexpr std::uint64_t kArchiveSeed = 7;
constexpr std::uint64_t kModelSeed = 1;
constexpr int kSteps = 300;
constexpr int kBatch = 32;
const std::vector<int> kScales{8, 16};

struct EndToEnd {
  double auc = 0.0;
  double baseline_auc = 0.0;
  MetricReport report;
  bool losses_decrease = true;
  double min_feature_std = 1e9;
  std::string loss_summary;
};

EndToEnd run_end_to_end(bool heterogeneous) {
  SynthParams sp;
  sp.seed = kArchiveSeed;
  sp.n_scenes = 4;
  sp.n_dates = 8;
  sp.size = 64;
  sp.modalities = heterogeneous ? std::vector<std::string>{"pseudo_optical", "pseudo_sar"}
                                : std::vector<std::string>{"pseudo_optical"};
  const GeneratedArchive gen = generate_archive(sp);
  const std::string m2 = heterogeneous ? "pseudo_sar" : "pseudo_optical";
  const auto pairs = test_pairs(gen.archive, "pseudo_optical", m2);
  const Archive standardized = standardize_archive(gen.archive);

  EndToEnd out;
  std::vector<std::vector<IntensityMap>> per_scene(pairs.size());
  for (int p : kScales) {
    TrainConfig tc;
    tc.mode = heterogeneous ? TrainingMode::Heterogeneous : TrainingMode::Homogeneous;
    tc.modality = "pseudo_optical";
    tc.modality_b = "pseudo_sar";
    tc.patch_side = p;
    tc.steps = kSteps;
    tc.batch_size = kBatch;
    tc.seed = kModelSeed;
    tc.patches_per_image = heterogeneous ? 8 : 4;
    const EncoderConfig enc = EncoderConfig::desk(4, kModelSeed);
    const TrainResult res =
        heterogeneous ? train_heterogeneous(gen.archive, tc, enc) : train_homogeneous(gen.archive, tc, enc);

    const std::size_t w = 20;
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      first += res.losses[i] / w;
      last += res.losses[res.losses.size() - 1 - i] / w;
    }
    out.losses_decrease &= last < first;
    out.loss_summary += " loss_p" + std::to_string(p) + "=" + fmt("%.3f", first) + "->" + fmt("%.3f", last);

    // Target-branch features of 256 random training patches.
    Rng rng(mix_seed(kArchiveSeed, 0xfea7u + static_cast<std::uint64_t>(p)));
    std::vector<Patch> patches;
    for (int k = 0; k < 256; ++k) {
      const auto& scene = standardized.scenes[rng.below(standardized.scenes.size())];
      const auto train = scene.training("pseudo_optical");
      const Raster& r = train[rng.below(train.size())]->raster;
      patches.push_back(extract_patch(r, rng.range(0, r.height() - 1), rng.range(0, r.width() - 1), p));
    }
    const BranchParams& feat_branch = heterogeneous ? res.checkpoint.branch1 : res.checkpoint.branch2;
    const FeatureMatrix f = encode(feat_branch, res.checkpoint.config, PatchBatch::from_patches(patches), false);
    for (int d = 0; d < f.cols; ++d) {
      double s1 = 0.0, s2 = 0.0;
      for (int i = 0; i < f.rows; ++i) {
        s1 += f.row(i)[d];
        s2 += static_cast<double>(f.row(i)[d]) * f.row(i)[d];
      }
      const double mean = s1 / f.rows;
      out.min_feature_std = std::min(out.min_feature_std, std::sqrt(std::max(0.0, s2 / f.rows - mean * mean)));
    }

    for (std::size_t i = 0; i < pairs.size(); ++i)
      per_scene[i].push_back(standardize_map(compute_intensity_map(res.checkpoint, *pairs[i].image1, *pairs[i].image2)));
  }

  std::vector<float> scores, baseline;
  std::vector<std::uint8_t> labels;
  ConfusionCounts counts;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const IntensityMap fused = fuse_scales(per_scene[i]);
    const auto gt = pairs[i].gt->u8();
    scores.insert(scores.end(), fused.values.begin(), fused.values.end());
    labels.insert(labels.end(), gt.begin(), gt.end());
    const ThresholdDecision d = decide_threshold(fused, ThresholdStrategy::Auto);
    counts += confusion_counts(binarize(fused, d.chosen), *pairs[i].gt);

    const Raster s1 = standardize_bands(pairs[i].image1->as_f32());
    const Raster s2 = standardize_bands(pairs[i].image2->as_f32());
    const int nb = std::min(s1.bands(), s2.bands());
    for (std::size_t k = 0; k < s1.plane_size(); ++k) {
      double q = 0.0;
      for (int b = 0; b < nb; ++b) {
        const double diff = s1.band(b)[k] - s2.band(b)[k];
        q += diff * diff;
      }
      baseline.push_back(static_cast<float>(std::sqrt(q)));
    }
  }
  out.auc = roc_auc(scores, labels);
  out.baseline_auc = roc_auc(baseline, labels);
  out.report = compute_metrics(counts);
  return out;
}

Checks criterion_5() {
  Checks c;
  const auto t0 = Clock::now();
  const EndToEnd r = run_end_to_end(false);
  const double elapsed = seconds_since(t0);
  c.expect(r.auc >= 0.85, "fused AUC >= 0.85");
  c.expect(r.report.f1 >= 0.40, "F1 >= 0.40");
  c.expect(r.losses_decrease, "loss decreases");
  c.expect(r.min_feature_std > 0.01, "target features not collapsed");
  c.expect(elapsed <= 900.0, "runtime <= 15 min");
  c.note("auc=" + fmt("%.4f", r.auc));
  c.note("f1=" + fmt("%.4f", r.report.f1));
  c.note("kappa=" + fmt("%.4f", r.report.kappa));
  c.note("min_feature_std=" + fmt("%.4f", r.min_feature_std));
  c.note(r.loss_summary.substr(1));
  c.note("runtime_s=" + fmt("%.0f", elapsed));
  return c;
}

Checks criterion_6() {
  Checks c;
  const auto t0 = Clock::now();
  const EndToEnd r = run_end_to_end(true);
  const double elapsed = seconds_since(t0);
  c.expect(r.auc >= 0.75, "fused AUC >= 0.75");
  c.expect(r.auc > r.baseline_auc, "AUC above difference baseline");
  c.expect(elapsed <= 900.0, "runtime <= 15 min");
  c.note("auc=" + fmt("%.4f", r.auc));
  c.note("baseline_auc=" + fmt("%.4f", r.baseline_auc));
  c.note("f1=" + fmt("%.4f", r.report.f1));
  c.note(r.loss_summary.substr(1));
  c.note("runtime_s=" + fmt("%.0f", elapsed));
  return c;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_pipeline(const fs::path& out) {
  const std::string cmd = std::string(SSCD_CLI_PATH) + " pipeline --out " + out.string() +
                          " --seed 42 --steps 40 --scales 8 --set batch_size=32 --set patches_per_image=4"
                          " > " + (out.string() + ".log") + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Checks criterion_7() {
  Checks c;
  const fs::path root = fs::temp_directory_path() / ("sscd_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path a = root / "run_a", b = root / "run_b";
  const int ca = run_pipeline(a), cb = run_pipeline(b);
  c.expect(ca == 0 && cb == 0, "pipeline exit status");
  if (ca == 0 && cb == 0) {
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(a / "masks")) {
      const fs::path other = b / "masks" / entry.path().filename();
      c.expect(fs::exists(other) && read_file(entry.path()) == read_file(other),
               "mask " + entry.path().filename().string());
      ++compared;
    }
    c.expect(compared > 0, "masks present");
    c.expect(read_file(a / "metrics.json") == read_file(b / "metrics.json"), "metrics.json identical");
    c.note("mask_files=" + std::to_string(compared));
  }
  fs::remove_all(root);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Checks()>>> criteria{
      {"unit invariants", criterion_1},          {"gradient checks", criterion_2},
      {"oracle equivalences", criterion_3},      {"map and threshold identities", criterion_4},
      {"homogeneous end-to-end", criterion_5},   {"heterogeneous end-to-end", criterion_6},
      {"pipeline reproducibility", criterion_7}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto& [name, fn] = criteria[static_cast<std::size_t>(id - 1)];
    const auto t0 = Clock::now();
    Checks c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    std::string line = "criterion " + std::to_string(id) + ": " + (c.failures.empty() ? "PASS" : "FAIL") + " " + name;
    line += " (" + fmt("%.1fs", seconds_since(t0));
    for (const auto& n : c.notes) line += ", " + n;
    line += ")";
    for (const auto& f : c.failures) line += " [failed: " + f + "]";
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    failed += !c.failures.empty();
  }
  return failed == 0 ? 0 : 1;
}
