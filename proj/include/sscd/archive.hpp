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
#include <optional>
#include <string>
#include <vector>

#include "sscd/raster.hpp"

namespace sscd {

enum class Split { Train, Test };

struct Acquisition {
  std::string modality;
  int date = 0;  // yyyymmdd
  Raster raster;
  Split split = Split::Train;

  int month_key() const { return date / 100; }
};

struct GroundTruth {
  int date1 = 0;
  int date2 = 0;
  Raster mask;
};

struct SceneSeries {
  std::string scene_id;
  std::vector<Acquisition> acquisitions;
  std::vector<GroundTruth> ground_truth;

  /// Acquisitions of one modality in the training split, in date order.
  std::vector<const Acquisition*> training(const std::string& modality) const;
  const Acquisition* find(const std::string& modality, int date) const;
};

struct Archive {
  std::vector<SceneSeries> scenes;

  /// Scene sizes agree per scene and band counts agree per modality.
  void validate() const;
  int band_count(const std::string& modality) const;
  std::vector<std::string> modalities() const;
};

/// Held-out evaluation pair resolved from a ground-truth entry.
struct TestPair {
  std::string scene_id;
  int date1 = 0;
  int date2 = 0;
  const Raster* image1 = nullptr;
  const Raster* image2 = nullptr;
  const Raster* gt = nullptr;
};

/// One pair per ground-truth entry: modality1 at date1 and modality2 at date2.
std::vector<TestPair> test_pairs(const Archive& archive, const std::string& modality1, const std::string& modality2);

/// Layout: scene_<id>/<modality>_<date>.rsrb, scene_<id>/gt_<d1>_<d2>.rsrb and
/// manifest.txt with tab-separated `scene modality date path split` lines.
void write_archive(const Archive& archive, const std::filesystem::path& dir);
Archive read_archive(const std::filesystem::path& dir);

}  // namespace sscd
