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

#include "sscd/change_map.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "sscd/error.hpp"
#include "sscd/fileio.hpp"

namespace sscd {
namespace {

int nearest_sample(int i, int stride, int last) {
  const int snapped = (i + stride / 2) / stride * stride;
  return std::min(snapped, last);
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string to_string(MapState state) {
  switch (state) {
    case MapState::Raw: return "raw";
    case MapState::Standardized: return "standardized";
    case MapState::Fused: return "fused";
  }
  return "raw";
}

MapState map_state_from_string(const std::string& s) {
  if (s == "raw") return MapState::Raw;
  if (s == "standardized") return MapState::Standardized;
  if (s == "fused") return MapState::Fused;
  fail(ErrorKind::Format, "unknown map state '" + s + "'");
}

IntensityMap compute_intensity_map(std::span<const ModelCheckpoint> ensemble, const Raster& image1,
                                   const Raster& image2, const InferenceOptions& options) {
  require(!ensemble.empty(), ErrorKind::Contract, "no checkpoints given");
  require(options.stride >= 1 && options.batch_size >= 1, ErrorKind::Parameter, "stride and batch size must be >= 1");
  require(image1.width() == image2.width() && image1.height() == image2.height(), ErrorKind::Contract,
          "images differ in size: " + std::to_string(image1.width()) + "x" + std::to_string(image1.height()) + " vs " +
              std::to_string(image2.width()) + "x" + std::to_string(image2.height()));
  const int side = ensemble.front().patch_side;
  for (const auto& ck : ensemble) {
    require(ck.patch_side == side, ErrorKind::Contract, "ensemble members must share the patch side");
    require(image1.bands() == ck.branch1.in_channels, ErrorKind::Contract,
            "branch1 expects " + std::to_string(ck.branch1.in_channels) + " bands, image1 has " +
                std::to_string(image1.bands()));
    require(image2.bands() == ck.branch2.in_channels, ErrorKind::Contract,
            "branch2 expects " + std::to_string(ck.branch2.in_channels) + " bands, image2 has " +
                std::to_string(image2.bands()));
  }

  const Raster std1 = standardize_bands(image1.as_f32());
  const Raster std2 = standardize_bands(image2.as_f32());
  const int w = image1.width();
  const int h = image1.height();
  const int s = options.stride;

  std::vector<std::pair<BranchNet, BranchNet>> nets;
  nets.reserve(ensemble.size());
  for (const auto& ck : ensemble) nets.emplace_back(BranchNet(ck.config, ck.branch1), BranchNet(ck.config, ck.branch2));

  std::vector<std::pair<int, int>> points;
  for (int r = 0; r < h; r += s)
    for (int c = 0; c < w; c += s) points.emplace_back(r, c);

  IntensityMap map;
  map.width = w;
  map.height = h;
  map.values.assign(static_cast<std::size_t>(w) * h, 0.0f);
  map.state = MapState::Raw;
  map.scales = {side};
  map.stride = s;

  const std::size_t size1 = static_cast<std::size_t>(std1.bands()) * side * side;
  const std::size_t size2 = static_cast<std::size_t>(std2.bands()) * side * side;
  const double inv_models = 1.0 / static_cast<double>(ensemble.size());
  std::vector<float> buf1, buf2;
  for (std::size_t first = 0; first < points.size(); first += static_cast<std::size_t>(options.batch_size)) {
    const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.batch_size),
                                                         points.size() - first));
    buf1.resize(size1 * static_cast<std::size_t>(n));
    buf2.resize(size2 * static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const auto [r, c] = points[first + static_cast<std::size_t>(k)];
      extract_patch_into(std1, r, c, side, buf1.data() + size1 * static_cast<std::size_t>(k));
      extract_patch_into(std2, r, c, side, buf2.data() + size2 * static_cast<std::size_t>(k));
    }
    const nn::Act in1 = nn::from_nchw(buf1.data(), n, std1.bands(), side, side);
    const nn::Act in2 = nn::from_nchw(buf2.data(), n, std2.bands(), side, side);

    std::vector<double> diff;  // embed_dim x n, averaged over the ensemble
    for (std::size_t m = 0; m < ensemble.size(); ++m) {
      const auto& ck = ensemble[m];
      const bool use_pred = ck.mode == TrainingMode::Homogeneous;
      const nn::Act t1 = nets[m].first.infer(in1, ck.branch1, use_pred);
      const nn::Act t2 = nets[m].second.infer(in2, ck.branch2, false);
      if (diff.empty()) diff.assign(t1.v.size(), 0.0);
      require(t1.v.size() == diff.size(), ErrorKind::Contract, "ensemble members differ in embedding size");
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] += (static_cast<double>(t1.v[i]) - t2.v[i]) * inv_models;
    }
    const int dim = static_cast<int>(diff.size() / static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      double e = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double d = diff[static_cast<std::size_t>(i) * n + k];
        e += d * d;
      }
      const auto [r, c] = points[first + static_cast<std::size_t>(k)];
      map.values[static_cast<std::size_t>(r) * w + c] = static_cast<float>(e);
    }
  }

  if (s > 1) {
    const int last_r = (h - 1) / s * s;
    const int last_c = (w - 1) / s * s;
    for (int r = 0; r < h; ++r) {
      const int sr = nearest_sample(r, s, last_r);
      for (int c = 0; c < w; ++c) {
        if (r % s == 0 && c % s == 0) continue;
        map.values[static_cast<std::size_t>(r) * w + c] =
            map.values[static_cast<std::size_t>(sr) * w + nearest_sample(c, s, last_c)];
      }
    }
  }
  return map;
}

IntensityMap compute_intensity_map(const ModelCheckpoint& checkpoint, const Raster& image1, const Raster& image2,
                                   const InferenceOptions& options) {
  return compute_intensity_map(std::span<const ModelCheckpoint>(&checkpoint, 1), image1, image2, options);
}

IntensityMap standardize_map(const IntensityMap& map) {
  require(map.state == MapState::Raw, ErrorKind::State, "standardize_map needs a raw map, got " + to_string(map.state));
  require(!map.values.empty(), ErrorKind::Contract, "empty map");
  IntensityMap out = map;
  const double n = static_cast<double>(map.values.size());
  double sum = 0.0;
  for (float v : map.values) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (float v : map.values) sq += (v - mean) * (v - mean);
  const double sigma = std::sqrt(sq / n);
  out.state = MapState::Standardized;
  out.mean = mean;
  if (!(sigma > 1e-12 * std::max(1.0, std::abs(mean)))) {
    out.sigma = 0.0;
    std::fill(out.values.begin(), out.values.end(), 0.0f);
    return out;
  }
  out.sigma = sigma;
  for (auto& v : out.values) v = static_cast<float>((v - mean) / sigma);
  return out;
}

IntensityMap fuse_scales(const std::vector<IntensityMap>& maps) {
  require(!maps.empty(), ErrorKind::Contract, "fuse_scales needs at least one map");
  const auto& first = maps.front();
  std::set<int> scales;
  for (const auto& m : maps) {
    require(m.width == first.width && m.height == first.height, ErrorKind::Contract, "fuse_scales: dimension mismatch");
    require(m.state == MapState::Standardized, ErrorKind::Contract, "fuse_scales: every input must be standardized");
    scales.insert(m.scales.begin(), m.scales.end());
  }
  IntensityMap out;
  out.width = first.width;
  out.height = first.height;
  out.state = MapState::Fused;
  out.scales.assign(scales.begin(), scales.end());
  out.stride = first.stride;
  for (const auto& m : maps) out.stride = std::max(out.stride, m.stride);
  out.values.resize(first.values.size());
  // Summing in sorted order makes the result independent of input order.
  std::vector<double> px(maps.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    for (std::size_t k = 0; k < maps.size(); ++k) px[k] = maps[k].values[i];
    std::sort(px.begin(), px.end());
    double sum = 0.0;
    for (double v : px) sum += v;
    out.values[i] = static_cast<float>(sum / static_cast<double>(maps.size()));
  }
  return out;
}

Sidecar read_sidecar(const std::filesystem::path& path) {
  std::istringstream in(io::read_text(path));
  Sidecar out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Format, path.string() + ": line without '=': " + line);
    set_key(out, line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

void write_sidecar(const Sidecar& sidecar, const std::filesystem::path& path) {
  std::string text;
  for (const auto& [k, v] : sidecar) text += k + "=" + v + "\n";
  io::write_text_atomic(path, text);
}

void set_key(Sidecar& sidecar, const std::string& key, const std::string& value) {
  for (auto& [k, v] : sidecar)
    if (k == key) {
      v = value;
      return;
    }
  sidecar.emplace_back(key, value);
}

const std::string* find_key(const Sidecar& sidecar, const std::string& key) {
  for (const auto& [k, v] : sidecar)
    if (k == key) return &v;
  return nullptr;
}

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path) {
  auto p = raster_path;
  p.replace_extension(".meta");
  return p;
}

Raster map_to_raster(const IntensityMap& map) { return Raster::from_f32(map.width, map.height, 1, map.values); }

Sidecar map_metadata(const IntensityMap& map) {
  Sidecar meta;
  set_key(meta, "state", to_string(map.state));
  set_key(meta, "e_mu", format_double(map.mean));
  set_key(meta, "e_sigma", format_double(map.sigma));
  set_key(meta, "scales", join_ints(map.scales));
  set_key(meta, "stride", std::to_string(map.stride));
  return meta;
}

void save_map(const IntensityMap& map, const std::filesystem::path& raster_path) {
  write_raster(map_to_raster(map), raster_path);
  write_sidecar(map_metadata(map), sidecar_path(raster_path));
}

IntensityMap load_map(const std::filesystem::path& raster_path) {
  const Raster r = read_raster(raster_path);
  require(r.bands() == 1 && r.dtype() == DType::Float32, ErrorKind::Format,
          raster_path.string() + ": intensity maps are 1-band float32");
  const Sidecar meta = read_sidecar(sidecar_path(raster_path));
  IntensityMap map;
  map.width = r.width();
  map.height = r.height();
  map.values.assign(r.f32().begin(), r.f32().end());
  auto get = [&](const char* key) -> const std::string& {
    const auto* v = find_key(meta, key);
    require(v != nullptr, ErrorKind::Format, sidecar_path(raster_path).string() + ": missing key '" + key + "'");
    return *v;
  };
  try {
    map.state = map_state_from_string(get("state"));
    map.mean = std::stod(get("e_mu"));
    map.sigma = std::stod(get("e_sigma"));
    map.scales = parse_ints(get("scales"));
    map.stride = std::stoi(get("stride"));
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::Format, sidecar_path(raster_path).string() + ": malformed value");
  }
  return map;
}

}  // namespace sscd
