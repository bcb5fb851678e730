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

#include "sscd/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "json.hpp"
#include "sscd/error.hpp"
#include "sscd/fileio.hpp"

namespace sscd {
namespace {

double ratio(double num, double den, bool& degenerate) {
  if (den == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return num / den;
}

}  // namespace

ConfusionCounts confusion_counts(const Raster& pred, const Raster& gt) {
  require(pred.width() == gt.width() && pred.height() == gt.height() && pred.bands() == gt.bands(),
          ErrorKind::Contract,
          "mask sizes differ: " + std::to_string(pred.width()) + "x" + std::to_string(pred.height()) + " vs " +
              std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
  require_mask(pred, "prediction");
  require_mask(gt, "ground-truth");
  ConfusionCounts c;
  const auto p = pred.u8();
  const auto g = gt.u8();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i]) {
      if (g[i])
        ++c.tp;
      else
        ++c.fp;
    } else {
      if (g[i])
        ++c.fn;
      else
        ++c.tn;
    }
  }
  return c;
}

MetricReport compute_metrics(const ConfusionCounts& c) {
  require(c.total() > 0, ErrorKind::Contract, "metrics of an empty confusion matrix");
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double tn = static_cast<double>(c.tn);
  const double total = static_cast<double>(c.total());
  MetricReport r;
  r.pre = ratio(tp, tp + fp, r.degenerate);
  r.rec = ratio(tp, tp + fn, r.degenerate);
  r.f1 = ratio(2.0 * r.pre * r.rec, r.pre + r.rec, r.degenerate);
  r.oa = (tp + tn) / total;
  r.pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (total * total);
  r.kappa = ratio(r.oa - r.pe, 1.0 - r.pe, r.degenerate);
  return r;
}

double roc_auc(std::span<const float> scores, std::span<const std::uint8_t> labels) {
  require(scores.size() == labels.size(), ErrorKind::Contract, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double pos = 0.0, neg = 0.0;
  for (auto l : labels) (l ? pos : neg) += 1.0;
  require(pos > 0.0 && neg > 0.0, ErrorKind::Degenerate, "AUC needs both classes present");

  double area = 0.0;
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const float s = scores[order[i]];
    double dtp = 0.0, dfp = 0.0;
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? dtp : dfp) += 1.0;
      ++i;
    }
    area += dfp * (tp + 0.5 * dtp);
    tp += dtp;
    fp += dfp;
  }
  return area / (pos * neg);
}

std::string metrics_json(const MetricReport& r, const ConfusionCounts& c) {
  nlohmann::json j;
  j["pre"] = r.pre;
  j["rec"] = r.rec;
  j["oa"] = r.oa;
  j["f1"] = r.f1;
  j["kappa"] = r.kappa;
  j["pe"] = r.pe;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["tn"] = c.tn;
  j["degenerate"] = r.degenerate;
  return j.dump(2) + "\n";
}

void write_metrics_json(const MetricReport& report, const ConfusionCounts& counts, const std::filesystem::path& path) {
  io::write_text_atomic(path, metrics_json(report, counts));
}

}  // namespace sscd
