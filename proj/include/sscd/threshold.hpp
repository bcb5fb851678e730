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

#include <span>
#include <string>
#include <vector>

#include "sscd/change_map.hpp"
#include "sscd/raster.hpp"

namespace sscd {

enum class ThresholdMethod { OppositeMin, Rosin };

std::string to_string(ThresholdMethod method);

struct ThresholdDecision {
  double t_min = 0.0;
  double t_rosin = 0.0;  // NaN when the histogram had no usable corner
  double chosen = 0.0;
  ThresholdMethod method = ThresholdMethod::OppositeMin;
};

/// Which rule decide_threshold applies.
enum class ThresholdStrategy { Auto, Min, Rosin };

ThresholdStrategy threshold_strategy_from_string(const std::string& s);

/// -min(values).
double opposite_min_threshold(const IntensityMap& map);

/// Corner bin of a unimodal histogram: the bin between the peak and the last
/// non-empty bin farthest from the straight line joining them. Bin positions
/// and counts are both scaled to [0,1] before measuring distances. Throws
/// ErrorKind::Degenerate when no bin lies strictly between the two anchors.
int rosin_corner_bin(std::span<const double> counts);

/// Histogram with `bins` equal bins over [min, max] of the map values.
std::vector<double> value_histogram(const IntensityMap& map, int bins);

/// Center value of the corner bin of the map's histogram.
double rosin_threshold(const IntensityMap& map, int bins = 256);

/// opposite-min wins iff |t_min - t_rosin| < half their average; a
/// non-positive average always selects rosin.
ThresholdDecision select_threshold(double t_min, double t_rosin);

/// Computes both candidates and applies `strategy`. In Auto mode a
/// degenerate histogram falls back to opposite-min.
ThresholdDecision decide_threshold(const IntensityMap& map, ThresholdStrategy strategy, int bins = 256);

/// 1 where value > t.
Raster binarize(const IntensityMap& map, double t);

void append_decision(Sidecar& sidecar, const ThresholdDecision& decision);

}  // namespace sscd
