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

#include "sscd/archive.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "sscd/error.hpp"
#include "sscd/fileio.hpp"

namespace sscd {
namespace {

constexpr const char* kManifest = "manifest.txt";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) out.push_back(field);
  return out;
}

int parse_date(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Format, "bad date '" + s + "' in " + context);
}

}  // namespace

std::vector<const Acquisition*> SceneSeries::training(const std::string& modality) const {
  std::vector<const Acquisition*> out;
  for (const auto& a : acquisitions)
    if (a.modality == modality && a.split == Split::Train) out.push_back(&a);
  std::stable_sort(out.begin(), out.end(), [](const auto* x, const auto* y) { return x->date < y->date; });
  return out;
}

const Acquisition* SceneSeries::find(const std::string& modality, int date) const {
  for (const auto& a : acquisitions)
    if (a.modality == modality && a.date == date) return &a;
  return nullptr;
}

void Archive::validate() const {
  require(!scenes.empty(), ErrorKind::Data, "archive has no scenes");
  std::map<std::string, int> bands;
  for (const auto& s : scenes) {
    require(!s.acquisitions.empty(), ErrorKind::Data, "scene " + s.scene_id + " has no acquisitions");
    const int w = s.acquisitions.front().raster.width();
    const int h = s.acquisitions.front().raster.height();
    for (const auto& a : s.acquisitions) {
      require(a.raster.width() == w && a.raster.height() == h, ErrorKind::Data,
              "scene " + s.scene_id + ": acquisitions differ in size");
      require(a.raster.dtype() == DType::Float32, ErrorKind::Data,
              "scene " + s.scene_id + ": acquisition " + a.modality + "/" + std::to_string(a.date) + " is not float32");
      auto [it, inserted] = bands.emplace(a.modality, a.raster.bands());
      require(inserted || it->second == a.raster.bands(), ErrorKind::Data,
              "modality " + a.modality + " has inconsistent band counts (scene " + s.scene_id + ")");
    }
    for (const auto& g : s.ground_truth)
      require(g.mask.width() == w && g.mask.height() == h, ErrorKind::Data,
              "scene " + s.scene_id + ": ground truth size differs from acquisitions");
  }
}

int Archive::band_count(const std::string& modality) const {
  for (const auto& s : scenes)
    for (const auto& a : s.acquisitions)
      if (a.modality == modality) return a.raster.bands();
  fail(ErrorKind::Data, "archive has no modality '" + modality + "'");
}

std::vector<std::string> Archive::modalities() const {
  std::set<std::string> names;
  for (const auto& s : scenes)
    for (const auto& a : s.acquisitions) names.insert(a.modality);
  return {names.begin(), names.end()};
}

namespace {

const Acquisition* find_in_month(const SceneSeries& s, const std::string& modality, int date) {
  if (const auto* exact = s.find(modality, date)) return exact;
  for (const auto& a : s.acquisitions)
    if (a.modality == modality && a.month_key() == date / 100) return &a;
  return nullptr;
}

}  // namespace

std::vector<TestPair> test_pairs(const Archive& archive, const std::string& modality1, const std::string& modality2) {
  std::vector<TestPair> out;
  for (const auto& s : archive.scenes) {
    for (const auto& g : s.ground_truth) {
      TestPair p;
      p.scene_id = s.scene_id;
      p.date1 = g.date1;
      p.date2 = g.date2;
      const auto* a = find_in_month(s, modality1, g.date1);
      const auto* b = find_in_month(s, modality2, g.date2);
      require(a != nullptr, ErrorKind::Data,
              "scene " + s.scene_id + ": no " + modality1 + " acquisition in the month of " + std::to_string(g.date1));
      require(b != nullptr, ErrorKind::Data,
              "scene " + s.scene_id + ": no " + modality2 + " acquisition in the month of " + std::to_string(g.date2));
      p.image1 = &a->raster;
      p.image2 = &b->raster;
      p.gt = &g.mask;
      out.push_back(p);
    }
  }
  return out;
}

void write_archive(const Archive& archive, const std::filesystem::path& dir) {
  std::ostringstream manifest;
  manifest << "# scene\tmodality\tdate\tpath\tsplit\n";
  for (const auto& s : archive.scenes) {
    const std::string sub = "scene_" + s.scene_id;
    for (const auto& a : s.acquisitions) {
      const std::string rel = sub + "/" + a.modality + "_" + std::to_string(a.date) + ".rsrb";
      write_raster(a.raster, dir / rel);
      manifest << s.scene_id << '\t' << a.modality << '\t' << a.date << '\t' << rel << '\t'
               << (a.split == Split::Train ? "train" : "test") << '\n';
    }
    for (const auto& g : s.ground_truth) {
      const std::string rel = sub + "/gt_" + std::to_string(g.date1) + "_" + std::to_string(g.date2) + ".rsrb";
      write_raster(g.mask, dir / rel);
      manifest << s.scene_id << "\tgt\t" << g.date1 << '-' << g.date2 << '\t' << rel << "\tgt\n";
    }
  }
  io::write_text_atomic(dir / kManifest, manifest.str());
}

Archive read_archive(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifest;
  require(std::filesystem::exists(manifest_path), ErrorKind::Io, "missing archive manifest " + manifest_path.string());
  std::istringstream in(io::read_text(manifest_path));
  Archive archive;
  std::map<std::string, std::size_t> index;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_tabs(line);
    const std::string where = manifest_path.string() + ":" + std::to_string(lineno);
    require(f.size() == 5, ErrorKind::Format, where + ": expected 5 tab-separated fields");
    auto [it, inserted] = index.emplace(f[0], archive.scenes.size());
    if (inserted) {
      archive.scenes.emplace_back();
      archive.scenes.back().scene_id = f[0];
    }
    auto& scene = archive.scenes[it->second];
    if (f[4] == "gt") {
      const auto dash = f[2].find('-');
      require(dash != std::string::npos, ErrorKind::Format, where + ": ground truth date must be d1-d2");
      GroundTruth g;
      g.date1 = parse_date(f[2].substr(0, dash), where);
      g.date2 = parse_date(f[2].substr(dash + 1), where);
      g.mask = read_raster(dir / f[3]);
      require_mask(g.mask, "ground-truth");
      scene.ground_truth.push_back(std::move(g));
    } else {
      require(f[4] == "train" || f[4] == "test", ErrorKind::Format, where + ": unknown split '" + f[4] + "'");
      Acquisition a;
      a.modality = f[1];
      a.date = parse_date(f[2], where);
      a.split = f[4] == "train" ? Split::Train : Split::Test;
      a.raster = read_raster(dir / f[3]);
      scene.acquisitions.push_back(std::move(a));
    }
  }
  archive.validate();
  return archive;
}

}  // namespace sscd
