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
#include <string>
#include <utility>
#include <vector>

#include "sscd/archive.hpp"
#include "sscd/raster.hpp"

namespace sscd {

/// Square latent field with values in [0,1].
struct LatentField {
  int size = 0;
  std::vector<float> values;

  float at(int r, int c) const { return values[static_cast<std::size_t>(r) * size + c]; }
};

enum class Modality { PseudoOptical, PseudoSar };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

enum class ChangeShape { Square, Rect };

struct ChangeSpec {
  int n_objects = 2;
  int min_size = 6;
  int max_size = 12;
  double magnitude = 2.0;  // in band standard deviations
  ChangeShape shape = ChangeShape::Square;
};

struct PlacedObject {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;
};

struct PlantedChange {
  Raster raster;
  Raster mask;
  std::vector<PlacedObject> objects;
};

/// Sum of three octaves of value noise, rescaled to [0,1].
LatentField generate_base(std::uint64_t seed, int size);

/// 4-band pseudo-optical or 2-band log-compressed pseudo-SAR rendering of the
/// latent field with date-dependent nuisance. `pre_log`, when given, receives
/// the SAR intensities before log compression.
Raster modality_transform(const LatentField& base, Modality modality, std::uint64_t date_seed,
                          Raster* pre_log = nullptr);

/// Shifts every band inside n non-overlapping shapes by magnitude band-stds,
/// upward where the shape's mean lies at or below the band mean and downward
/// otherwise.
PlantedChange plant_changes(const Raster& raster, const ChangeSpec& spec, std::uint64_t seed);

struct SynthParams {
  std::uint64_t seed = 0;
  int n_scenes = 4;
  int n_dates = 8;
  int size = 64;
  std::vector<std::string> modalities{"pseudo_optical"};
  ChangeSpec change;
};

struct GeneratedArchive {
  Archive archive;
  std::vector<LatentField> bases;
  std::vector<std::vector<PlacedObject>> objects;  // per scene
};

/// Per scene: one latent field, n_dates monthly acquisitions per modality,
/// and one test pair (the last two dates) with changes planted in the last
/// acquisition, which is held out of training.
GeneratedArchive generate_archive(const SynthParams& params);

/// yyyymmdd of the k-th monthly acquisition for a modality.
int acquisition_date(int k, Modality modality);

}  // namespace sscd
