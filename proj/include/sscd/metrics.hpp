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
#include <filesystem>
#include <span>
#include <string>

#include "sscd/raster.hpp"

namespace sscd {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Precision, recall, overall accuracy, F1 and Cohen's kappa with the
/// chance-agreement term. Any 0/0 ratio is reported as 0 and sets `degenerate`.
struct MetricReport {
  double pre = 0.0;
  double rec = 0.0;
  double oa = 0.0;
  double f1 = 0.0;
  double kappa = 0.0;
  double pe = 0.0;
  bool degenerate = false;
};

/// 1 = changed, 0 = unchanged.
ConfusionCounts confusion_counts(const Raster& pred, const Raster& gt);

MetricReport compute_metrics(const ConfusionCounts& counts);

/// Area under the ROC curve of `scores` against binary `labels`, by the
/// trapezoidal rule over every distinct score threshold.
double roc_auc(std::span<const float> scores, std::span<const std::uint8_t> labels);

std::string metrics_json(const MetricReport& report, const ConfusionCounts& counts);
void write_metrics_json(const MetricReport& report, const ConfusionCounts& counts, const std::filesystem::path& path);

}  // namespace sscd
