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

#include "sscd/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "sscd/error.hpp"
#include "sscd/rng.hpp"

namespace sscd {
namespace {

constexpr double kOpticalNoise = 0.02;
constexpr int kSpeckleLooks = 4;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Value noise with lattice spacing `cell`, bilinear with smoothstep weights.
std::vector<double> value_noise(Rng& rng, int size, int cell) {
  const int lattice = size / cell + 2;
  std::vector<double> grid(static_cast<std::size_t>(lattice) * lattice);
  for (auto& v : grid) v = rng.uniform();
  const double off_r = rng.uniform(0.0, cell);
  const double off_c = rng.uniform(0.0, cell);
  std::vector<double> out(static_cast<std::size_t>(size) * size);
  for (int r = 0; r < size; ++r) {
    const double fr = (r + off_r) / cell;
    const int r0 = static_cast<int>(fr);
    const double tr = smoothstep(fr - r0);
    for (int c = 0; c < size; ++c) {
      const double fc = (c + off_c) / cell;
      const int c0 = static_cast<int>(fc);
      const double tc = smoothstep(fc - c0);
      auto g = [&](int i, int j) { return grid[static_cast<std::size_t>(i) * lattice + j]; };
      const double top = g(r0, c0) * (1 - tc) + g(r0, c0 + 1) * tc;
      const double bot = g(r0 + 1, c0) * (1 - tc) + g(r0 + 1, c0 + 1) * tc;
      out[static_cast<std::size_t>(r) * size + c] = top * (1 - tr) + bot * tr;
    }
  }
  return out;
}

std::vector<double> box_blur(const LatentField& f, int radius) {
  const int n = f.size;
  std::vector<double> tmp(static_cast<std::size_t>(n) * n), out(tmp.size());
  const double norm = 1.0 / (2 * radius + 1);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += f.at(r, reflect_index(c + k, n));
      tmp[static_cast<std::size_t>(r) * n + c] = s * norm;
    }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += tmp[static_cast<std::size_t>(reflect_index(r + k, n)) * n + c];
      out[static_cast<std::size_t>(r) * n + c] = s * norm;
    }
  return out;
}

bool overlaps(const PlacedObject& a, const PlacedObject& b) {
  return a.row < b.row + b.height && b.row < a.row + a.height && a.col < b.col + b.width && b.col < a.col + a.width;
}

}  // namespace

std::string to_string(Modality m) { return m == Modality::PseudoOptical ? "pseudo_optical" : "pseudo_sar"; }

Modality modality_from_string(const std::string& s) {
  if (s == "pseudo_optical") return Modality::PseudoOptical;
  if (s == "pseudo_sar") return Modality::PseudoSar;
  fail(ErrorKind::Parameter, "unknown modality '" + s + "' (expected pseudo_optical or pseudo_sar)");
}

LatentField generate_base(std::uint64_t seed, int size) {
  require(size >= 32, ErrorKind::Parameter, "latent field size must be >= 32");
  std::vector<double> sum(static_cast<std::size_t>(size) * size, 0.0);
  double amplitude = 1.0;
  for (int octave = 0; octave < 3; ++octave) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(octave)));
    const int cell = std::max(2, size / (4 << octave));
    const auto layer = value_noise(rng, size, cell);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += amplitude * layer[i];
    amplitude *= 0.5;
  }
  const auto [lo, hi] = std::minmax_element(sum.begin(), sum.end());
  const double range = *hi - *lo;
  LatentField f;
  f.size = size;
  f.values.resize(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i)
    f.values[i] = static_cast<float>(std::clamp(range > 0 ? (sum[i] - *lo) / range : 0.0, 0.0, 1.0));
  return f;
}

Raster modality_transform(const LatentField& base, Modality modality, std::uint64_t date_seed, Raster* pre_log) {
  const int n = base.size;
  const auto smooth = box_blur(base, 2);
  Rng rng(date_seed);
  // Seasonal nuisance: a smooth field shared by all bands plus per-band offsets.
  const auto season = value_noise(rng, n, std::max(2, n / 2));
  const std::size_t plane = static_cast<std::size_t>(n) * n;

  if (modality == Modality::PseudoOptical) {
    // Rows: coefficients of (base, base^2, smoothed base, constant).
    static constexpr double kMix[4][4] = {
        {0.9, 0.0, 0.1, 0.0},
        {0.6, 0.5, 0.0, 0.0},
        {-0.7, 0.0, 0.2, 0.8},
        {0.3, -0.6, 0.5, 0.4},
    };
    Raster out = Raster::zeros(n, n, 4, DType::Float32);
    for (int b = 0; b < 4; ++b) {
      const double offset = rng.uniform(-0.15, 0.15);
      const double season_gain = rng.uniform(0.05, 0.15);
      auto band = out.band(b);
      for (std::size_t i = 0; i < plane; ++i) {
        const double x = base.values[i];
        const double v = kMix[b][0] * x + kMix[b][1] * x * x + kMix[b][2] * smooth[i] + kMix[b][3] + offset +
                         season_gain * (season[i] - 0.5) + kOpticalNoise * rng.normal();
        band[i] = static_cast<float>(v);
      }
    }
    return out;
  }

  Raster out = Raster::zeros(n, n, 2, DType::Float32);
  Raster intensity = Raster::zeros(n, n, 2, DType::Float32);
  for (int b = 0; b < 2; ++b) {
    const double moisture = rng.uniform(-0.2, 0.2);
    auto band = out.band(b);
    auto raw = intensity.band(b);
    for (std::size_t i = 0; i < plane; ++i) {
      const double x = base.values[i];
      // VV grows with the latent value; VH responds to its distance from mid-range.
      const double backscatter = b == 0 ? 2.5 * x * x : 2.0 * std::abs(2.0 * x - 1.0);
      const double mean = std::exp(backscatter + moisture + 0.3 * (season[i] - 0.5));
      const double value = mean * rng.unit_mean_gamma(kSpeckleLooks);
      raw[i] = static_cast<float>(value);
      band[i] = static_cast<float>(std::log(value));
    }
  }
  if (pre_log) *pre_log = std::move(intensity);
  return out;
}

PlantedChange plant_changes(const Raster& raster, const ChangeSpec& spec, std::uint64_t seed) {
  require(raster.dtype() == DType::Float32, ErrorKind::Type, "plant_changes needs a float32 raster");
  require(spec.n_objects >= 0 && spec.min_size >= 1 && spec.max_size >= spec.min_size, ErrorKind::Spec,
          "change spec needs n_objects >= 0 and 1 <= min_size <= max_size");
  require(spec.max_size <= raster.width() && spec.max_size <= raster.height(), ErrorKind::Spec,
          "change objects larger than the raster");
  const double worst_area = static_cast<double>(spec.n_objects) * spec.max_size * spec.max_size;
  require(worst_area <= 0.25 * static_cast<double>(raster.plane_size()), ErrorKind::Spec,
          "change spec could cover more than 25% of the raster");

  Rng rng(seed);
  PlantedChange out;
  int attempts = 0;
  while (static_cast<int>(out.objects.size()) < spec.n_objects) {
    require(attempts++ < 1000, ErrorKind::Spec,
            "could not place " + std::to_string(spec.n_objects) + " non-overlapping objects in 1000 attempts");
    PlacedObject o;
    o.height = rng.range(spec.min_size, spec.max_size);
    o.width = spec.shape == ChangeShape::Square ? o.height : rng.range(spec.min_size, spec.max_size);
    o.row = rng.range(0, raster.height() - o.height);
    o.col = rng.range(0, raster.width() - o.width);
    if (std::any_of(out.objects.begin(), out.objects.end(), [&](const auto& p) { return overlaps(o, p); })) continue;
    out.objects.push_back(o);
  }

  out.raster = raster;
  out.mask = Raster::zeros(raster.width(), raster.height(), 1, DType::UInt8);
  auto mask = out.mask.u8();
  for (const auto& o : out.objects)
    for (int r = o.row; r < o.row + o.height; ++r)
      for (int c = o.col; c < o.col + o.width; ++c) mask[static_cast<std::size_t>(r) * raster.width() + c] = 1;

  const int w = raster.width();
  for (int b = 0; b < raster.bands(); ++b) {
    const auto src = raster.band(b);
    double sum = 0.0;
    for (float v : src) sum += v;
    const double mean = sum / static_cast<double>(src.size());
    double sq = 0.0;
    for (float v : src) sq += (v - mean) * (v - mean);
    const double shift = spec.magnitude * std::sqrt(sq / static_cast<double>(src.size()));
    auto dst = out.raster.band(b);
    // Each object moves toward the far side of the band mean, keeping the
    // changed values inside the band's dynamic range.
    for (const auto& o : out.objects) {
      double region = 0.0;
      for (int r = o.row; r < o.row + o.height; ++r)
        for (int c = o.col; c < o.col + o.width; ++c) region += src[static_cast<std::size_t>(r) * w + c];
      region /= static_cast<double>(o.height) * o.width;
      const double signed_shift = region > mean ? -shift : shift;
      for (int r = o.row; r < o.row + o.height; ++r)
        for (int c = o.col; c < o.col + o.width; ++c) {
          float& v = dst[static_cast<std::size_t>(r) * w + c];
          v = static_cast<float>(v + signed_shift);
        }
    }
  }
  return out;
}

int acquisition_date(int k, Modality modality) {
  const int year = 2019 + k / 12;
  const int month = k % 12 + 1;
  const int day = modality == Modality::PseudoOptical ? 5 : 17;
  return year * 10000 + month * 100 + day;
}

GeneratedArchive generate_archive(const SynthParams& params) {
  require(params.n_dates >= 2, ErrorKind::Parameter, "n_dates must be >= 2");
  require(params.n_scenes >= 1, ErrorKind::Parameter, "n_scenes must be >= 1");
  require(!params.modalities.empty(), ErrorKind::Parameter, "at least one modality is required");
  std::vector<Modality> mods;
  for (const auto& m : params.modalities) mods.push_back(modality_from_string(m));

  GeneratedArchive out;
  const int last = params.n_dates - 1;
  for (int s = 0; s < params.n_scenes; ++s) {
    const std::uint64_t scene_seed = mix_seed(params.seed, 1000 + static_cast<std::uint64_t>(s));
    SceneSeries scene;
    scene.scene_id = std::to_string(s);
    LatentField base = generate_base(mix_seed(scene_seed, 1), params.size);
    const std::uint64_t change_seed = mix_seed(scene_seed, 2);
    Raster gt;
    std::vector<PlacedObject> objects;
    for (std::size_t m = 0; m < mods.size(); ++m) {
      for (int k = 0; k < params.n_dates; ++k) {
        const std::uint64_t date_seed = mix_seed(scene_seed, 16 + static_cast<std::uint64_t>(k) * 8 + m);
        Acquisition a;
        a.modality = params.modalities[m];
        a.date = acquisition_date(k, mods[m]);
        a.raster = modality_transform(base, mods[m], date_seed);
        if (k == last) {
          PlantedChange planted = plant_changes(a.raster, params.change, change_seed);
          a.raster = std::move(planted.raster);
          a.split = Split::Test;
          gt = std::move(planted.mask);
          objects = std::move(planted.objects);
        }
        scene.acquisitions.push_back(std::move(a));
      }
    }
    scene.ground_truth.push_back({acquisition_date(last - 1, mods[0]), acquisition_date(last, mods[0]), gt});
    out.archive.scenes.push_back(std::move(scene));
    out.bases.push_back(std::move(base));
    out.objects.push_back(std::move(objects));
  }
  return out;
}

}  // namespace sscd
