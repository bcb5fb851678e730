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

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sscd/encoder.hpp"
#include "sscd/raster.hpp"

namespace sscd {

enum class MapState { Raw, Standardized, Fused };

std::string to_string(MapState state);
MapState map_state_from_string(const std::string& s);

/// Per-pixel change score grid (height x width, row-major).
struct IntensityMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;
  MapState state = MapState::Raw;
  double mean = 0.0;   // stats recorded by standardize_map
  double sigma = 0.0;
  std::vector<int> scales;
  int stride = 1;

  float at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
};

struct InferenceOptions {
  int stride = 1;
  int batch_size = 256;
};

/// e(r,c) = |T1(r,c) - T2(r,c)|^2 with T1 from branch1 on image1 (predictor
/// output in homogeneous mode) and T2 from branch2 on image2. Both images are
/// band-standardized first. With several checkpoints of the same patch side
/// the per-model feature differences are averaged before the norm.
IntensityMap compute_intensity_map(std::span<const ModelCheckpoint> ensemble, const Raster& image1,
                                   const Raster& image2, const InferenceOptions& options = {});
IntensityMap compute_intensity_map(const ModelCheckpoint& checkpoint, const Raster& image1, const Raster& image2,
                                   const InferenceOptions& options = {});

/// (e - mean) / sigma; a constant map becomes all zeros with sigma 0.
IntensityMap standardize_map(const IntensityMap& map);

/// Elementwise mean of standardized maps.
IntensityMap fuse_scales(const std::vector<IntensityMap>& maps);

/// Ordered key=value metadata file.
using Sidecar = std::vector<std::pair<std::string, std::string>>;

Sidecar read_sidecar(const std::filesystem::path& path);
void write_sidecar(const Sidecar& sidecar, const std::filesystem::path& path);
void set_key(Sidecar& sidecar, const std::string& key, const std::string& value);
const std::string* find_key(const Sidecar& sidecar, const std::string& key);

/// `<raster path with .meta extension>`
std::filesystem::path sidecar_path(const std::filesystem::path& raster_path);

Raster map_to_raster(const IntensityMap& map);
Sidecar map_metadata(const IntensityMap& map);

/// 1-band float32 RSRB plus sidecar.
void save_map(const IntensityMap& map, const std::filesystem::path& raster_path);
IntensityMap load_map(const std::filesystem::path& raster_path);

}  // namespace sscd
