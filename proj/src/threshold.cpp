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

#include "sscd/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sscd/error.hpp"

namespace sscd {
namespace {

void require_scored(const IntensityMap& map) {
  require(map.state == MapState::Standardized || map.state == MapState::Fused, ErrorKind::State,
          "thresholding needs a standardized or fused map, got " + to_string(map.state));
  require(!map.values.empty(), ErrorKind::Contract, "empty map");
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string to_string(ThresholdMethod method) {
  return method == ThresholdMethod::OppositeMin ? "opposite_min" : "rosin";
}

ThresholdStrategy threshold_strategy_from_string(const std::string& s) {
  if (s == "auto") return ThresholdStrategy::Auto;
  if (s == "min") return ThresholdStrategy::Min;
  if (s == "rosin") return ThresholdStrategy::Rosin;
  fail(ErrorKind::Parameter, "unknown threshold method '" + s + "' (expected auto, min or rosin)");
}

double opposite_min_threshold(const IntensityMap& map) {
  require(!map.values.empty(), ErrorKind::Contract, "empty map");
  return -static_cast<double>(*std::min_element(map.values.begin(), map.values.end()));
}

int rosin_corner_bin(std::span<const double> counts) {
  const int n = static_cast<int>(counts.size());
  require(n >= 2, ErrorKind::Degenerate, "histogram needs at least two bins");
  const int peak = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  int last = n - 1;
  while (last > 0 && !(counts[static_cast<std::size_t>(last)] > 0.0)) --last;
  require(counts[static_cast<std::size_t>(peak)] > 0.0, ErrorKind::Degenerate, "empty histogram");
  require(last - peak >= 2, ErrorKind::Degenerate, "no bins between histogram peak and tail end");

  const double top = counts[static_cast<std::size_t>(peak)];
  auto x = [n](int i) { return static_cast<double>(i) / (n - 1); };
  auto y = [&](int i) { return counts[static_cast<std::size_t>(i)] / top; };
  // Line a*x + b*y + c = 0 through the peak and tail points.
  const double a = y(last) - y(peak);
  const double b = x(peak) - x(last);
  const double c = x(last) * y(peak) - x(peak) * y(last);
  const double norm = std::hypot(a, b);
  int best = peak + 1;
  double best_dist = -1.0;
  for (int i = peak + 1; i < last; ++i) {
    const double d = std::abs(a * x(i) + b * y(i) + c) / norm;
    if (d > best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

std::vector<double> value_histogram(const IntensityMap& map, int bins) {
  require(bins >= 1, ErrorKind::Parameter, "bins must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  const double width = (hi - lo) / bins;
  for (float v : map.values) {
    int k = width > 0.0 ? static_cast<int>((v - lo) / width) : 0;
    k = std::clamp(k, 0, bins - 1);
    counts[static_cast<std::size_t>(k)] += 1.0;
  }
  return counts;
}

double rosin_threshold(const IntensityMap& map, int bins) {
  require_scored(map);
  require(bins >= 8, ErrorKind::Parameter, "rosin thresholding needs at least 8 bins");
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  require(hi > lo, ErrorKind::Degenerate, "constant map has no histogram corner");
  const auto counts = value_histogram(map, bins);
  const int k = rosin_corner_bin(counts);
  return lo + (k + 0.5) * (hi - lo) / bins;
}

ThresholdDecision select_threshold(double t_min, double t_rosin) {
  ThresholdDecision d;
  d.t_min = t_min;
  d.t_rosin = t_rosin;
  const double average = 0.5 * (t_min + t_rosin);
  if (average > 0.0 && std::abs(t_min - t_rosin) < 0.5 * average) {
    d.chosen = t_min;
    d.method = ThresholdMethod::OppositeMin;
  } else {
    d.chosen = t_rosin;
    d.method = ThresholdMethod::Rosin;
  }
  return d;
}

ThresholdDecision decide_threshold(const IntensityMap& map, ThresholdStrategy strategy, int bins) {
  require_scored(map);
  const double t_min = opposite_min_threshold(map);
  double t_rosin = std::numeric_limits<double>::quiet_NaN();
  try {
    t_rosin = rosin_threshold(map, bins);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate || strategy == ThresholdStrategy::Rosin) throw;
  }
  switch (strategy) {
    case ThresholdStrategy::Min:
      return {t_min, t_rosin, t_min, ThresholdMethod::OppositeMin};
    case ThresholdStrategy::Rosin:
      return {t_min, t_rosin, t_rosin, ThresholdMethod::Rosin};
    case ThresholdStrategy::Auto:
      if (std::isnan(t_rosin)) return {t_min, t_rosin, t_min, ThresholdMethod::OppositeMin};
      return select_threshold(t_min, t_rosin);
  }
  return select_threshold(t_min, t_rosin);
}

Raster binarize(const IntensityMap& map, double t) {
  require(map.width >= 1 && map.height >= 1, ErrorKind::Contract, "empty map");
  std::vector<std::uint8_t> mask(map.values.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = map.values[i] > t ? 1 : 0;
  return Raster::from_u8(map.width, map.height, 1, std::move(mask));
}

void append_decision(Sidecar& sidecar, const ThresholdDecision& decision) {
  set_key(sidecar, "t_min", format_double(decision.t_min));
  set_key(sidecar, "t_rosin", format_double(decision.t_rosin));
  set_key(sidecar, "chosen", format_double(decision.chosen));
  set_key(sidecar, "method", to_string(decision.method));
}

}  // namespace sscd
