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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sscd/archive.hpp"
#include "sscd/synthgen.hpp"
#include "test_util.hpp"

using namespace sscd;
using namespace sscd::testing;

namespace {

double correlation(std::span<const float> a, std::span<const float> b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

SynthParams both_modalities(int scenes, int dates) {
  SynthParams p;
  p.seed = 99;
  p.n_scenes = scenes;
  p.n_dates = dates;
  p.size = 32;
  p.modalities = {"pseudo_optical", "pseudo_sar"};
  p.change.min_size = 4;
  p.change.max_size = 8;
  return p;
}

}  // namespace

TEST_SUITE("synthgen") {
  TEST_CASE("base field is deterministic, seed dependent and within [0, 1]") {
    const LatentField a = generate_base(1, 48);
    CHECK(a.values == generate_base(1, 48).values);
    const LatentField b = generate_base(2, 48);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) differ += a.values[i] != b.values[i];
    CHECK(differ >= a.values.size() / 100);
    const auto [lo, hi] = std::minmax_element(a.values.begin(), a.values.end());
    CHECK(*lo >= 0.0f);
    CHECK(*hi <= 1.0f);
    CHECK(error_kind_of([] { generate_base(1, 31); }) == ErrorKind::Parameter);
  }

  TEST_CASE("modality transforms") {
    const LatentField base = generate_base(3, 32);
    const Raster opt = modality_transform(base, Modality::PseudoOptical, 10);
    CHECK(opt.bands() == 4);
    CHECK(opt == modality_transform(base, Modality::PseudoOptical, 10));
    const Raster later = modality_transform(base, Modality::PseudoOptical, 11);
    for (int b = 0; b < 4; ++b) CHECK(correlation(opt.band(b), later.band(b)) > 0.5);

    Raster pre;
    const Raster sar = modality_transform(base, Modality::PseudoSar, 10, &pre);
    CHECK(sar.bands() == 2);
    CHECK(pre.bands() == 2);
    for (float v : pre.f32()) CHECK(v > 0.0f);
    for (std::size_t i = 0; i < sar.size(); ++i) CHECK(sar.f32()[i] == doctest::Approx(std::log(pre.f32()[i])));
    CHECK(modality_from_string("pseudo_sar") == Modality::PseudoSar);
    CHECK(to_string(Modality::PseudoOptical) == "pseudo_optical");
    CHECK(error_kind_of([] { modality_from_string("lidar"); }) == ErrorKind::Parameter);
  }

  TEST_CASE("plant_changes bookkeeping") {
    const Raster img = modality_transform(generate_base(5, 64), Modality::PseudoOptical, 1);
    ChangeSpec none;
    none.n_objects = 0;
    const PlantedChange z = plant_changes(img, none, 1);
    CHECK(z.raster == img);
    for (auto v : z.mask.u8()) CHECK(v == 0);

    for (ChangeShape shape : {ChangeShape::Square, ChangeShape::Rect}) {
      ChangeSpec spec;
      spec.n_objects = 3;
      spec.shape = shape;
      const PlantedChange pc = plant_changes(img, spec, 7);
      CHECK(pc.raster.bands() == img.bands());
      REQUIRE(pc.objects.size() == 3u);
      std::size_t area = 0;
      for (const auto& o : pc.objects) {
        area += static_cast<std::size_t>(o.height) * o.width;
        CHECK(o.row >= 0);
        CHECK(o.col >= 0);
        CHECK(o.row + o.height <= 64);
        CHECK(o.col + o.width <= 64);
        if (shape == ChangeShape::Square) CHECK(o.height == o.width);
      }
      std::size_t marked = 0;
      for (auto v : pc.mask.u8()) marked += v;
      CHECK(marked == area);  // also rules out overlaps

      for (int b = 0; b < img.bands(); ++b) {
        const auto band = img.band(b);
        double mean = 0, sq = 0;
        for (float v : band) mean += v;
        mean /= static_cast<double>(band.size());
        for (float v : band) sq += (v - mean) * (v - mean);
        const double sd = std::sqrt(sq / static_cast<double>(band.size()));
        for (const auto& o : pc.objects) {
          double before = 0, after = 0;
          for (int r = o.row; r < o.row + o.height; ++r)
            for (int c = o.col; c < o.col + o.width; ++c) {
              before += img.at(b, r, c);
              after += pc.raster.at(b, r, c);
            }
          const double shift = std::abs(after - before) / (o.height * o.width);
          CHECK(shift == doctest::Approx(spec.magnitude * sd).epsilon(0.05));
        }
      }
    }
    CHECK(plant_changes(img, ChangeSpec{}, 7).mask == plant_changes(img, ChangeSpec{}, 7).mask);
  }

  TEST_CASE("plant_changes errors") {
    const Raster img = modality_transform(generate_base(5, 32), Modality::PseudoOptical, 1);
    ChangeSpec big;
    big.min_size = big.max_size = 40;
    CHECK(error_kind_of([&] { plant_changes(img, big, 1); }) == ErrorKind::Spec);
    ChangeSpec crowded;
    crowded.n_objects = 20;
    crowded.min_size = crowded.max_size = 8;
    CHECK(error_kind_of([&] { plant_changes(img, crowded, 1); }) == ErrorKind::Spec);
    ChangeSpec inverted;
    inverted.min_size = 9;
    inverted.max_size = 4;
    CHECK(error_kind_of([&] { plant_changes(img, inverted, 1); }) == ErrorKind::Spec);
    Rng rng(1);
    const Raster mask = random_mask(rng, 32, 32, 0.5);
    CHECK(error_kind_of([&] { plant_changes(mask, ChangeSpec{}, 1); }) == ErrorKind::Type);
  }

  TEST_CASE("generated archive structure") {
    const GeneratedArchive g = generate_archive(both_modalities(4, 6));
    const Archive& a = g.archive;
    REQUIRE(a.scenes.size() == 4u);
    std::size_t rasters = 0, gts = 0;
    for (std::size_t s = 0; s < a.scenes.size(); ++s) {
      const auto& sc = a.scenes[s];
      rasters += sc.acquisitions.size();
      gts += sc.ground_truth.size();
      REQUIRE(sc.ground_truth.size() == 1u);
      const GroundTruth& gt = sc.ground_truth.front();
      for (const auto& acq : sc.acquisitions) {
        const bool held_out = acq.date == gt.date2 || acq.month_key() == gt.date2 / 100;
        CHECK((acq.split == Split::Test) == held_out);
      }
      // Every marked pixel lies inside a planted object.
      std::size_t changed = 0;
      for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
          if (!gt.mask.u8()[static_cast<std::size_t>(r) * 32 + c]) continue;
          ++changed;
          const bool inside = std::any_of(g.objects[s].begin(), g.objects[s].end(), [&](const PlacedObject& o) {
            return r >= o.row && r < o.row + o.height && c >= o.col && c < o.col + o.width;
          });
          CHECK(inside);
        }
      CHECK(changed > 0);
      CHECK(changed * 4 <= 32u * 32u);
    }
    CHECK(rasters == 4u * 6u * 2u);
    CHECK(gts == 4u);
    CHECK(a.band_count("pseudo_optical") == 4);
    CHECK(a.band_count("pseudo_sar") == 2);

    const GeneratedArchive again = generate_archive(both_modalities(4, 6));
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t k = 0; k < a.scenes[s].acquisitions.size(); ++k)
        CHECK(again.archive.scenes[s].acquisitions[k].raster == a.scenes[s].acquisitions[k].raster);
  }

  TEST_CASE("irrelevant variation keeps scenes recognisable") {
    SynthParams p = both_modalities(3, 4);
    p.modalities = {"pseudo_optical"};
    const Archive a = generate_archive(p).archive;
    double worst_same = 1.0, best_cross = -1.0;
    for (std::size_t s = 0; s < a.scenes.size(); ++s) {
      const auto train = a.scenes[s].training("pseudo_optical");
      for (std::size_t i = 0; i < train.size(); ++i)
        for (std::size_t j = i + 1; j < train.size(); ++j)
          worst_same = std::min(worst_same, correlation(train[i]->raster.f32(), train[j]->raster.f32()));
      for (std::size_t t = s + 1; t < a.scenes.size(); ++t)
        best_cross = std::max(best_cross, correlation(train[0]->raster.f32(),
                                                      a.scenes[t].training("pseudo_optical")[0]->raster.f32()));
    }
    CHECK(worst_same > best_cross);
  }

  TEST_CASE("generate_archive parameter errors") {
    SynthParams p = both_modalities(1, 1);
    CHECK(error_kind_of([&] { generate_archive(p); }) == ErrorKind::Parameter);
    p = both_modalities(0, 3);
    CHECK(error_kind_of([&] { generate_archive(p); }) == ErrorKind::Parameter);
    p = both_modalities(1, 3);
    p.modalities = {"radar"};
    CHECK(error_kind_of([&] { generate_archive(p); }) == ErrorKind::Parameter);
  }
}

TEST_SUITE("archive") {
  TEST_CASE("archive round trip through the on-disk layout") {
    TempDir dir("archive");
    const Archive a = generate_archive(both_modalities(2, 3)).archive;
    write_archive(a, dir.path());
    CHECK(std::filesystem::exists(dir / "manifest.txt"));
    CHECK(std::filesystem::exists(dir / "scene_0"));
    const Archive b = read_archive(dir.path());
    REQUIRE(b.scenes.size() == a.scenes.size());
    for (std::size_t s = 0; s < a.scenes.size(); ++s) {
      CHECK(b.scenes[s].scene_id == a.scenes[s].scene_id);
      REQUIRE(b.scenes[s].acquisitions.size() == a.scenes[s].acquisitions.size());
      for (std::size_t k = 0; k < a.scenes[s].acquisitions.size(); ++k) {
        const auto& x = a.scenes[s].acquisitions[k];
        const auto* y = b.scenes[s].find(x.modality, x.date);
        REQUIRE(y != nullptr);
        CHECK(y->raster == x.raster);
        CHECK(y->split == x.split);
      }
      REQUIRE(b.scenes[s].ground_truth.size() == 1u);
      CHECK(b.scenes[s].ground_truth[0].mask == a.scenes[s].ground_truth[0].mask);
    }
  }

  TEST_CASE("test pairs resolve across modalities by month") {
    const Archive a = generate_archive(both_modalities(2, 3)).archive;
    const auto same = test_pairs(a, "pseudo_optical", "pseudo_optical");
    REQUIRE(same.size() == 2u);
    CHECK(same[0].image1->bands() == 4);
    CHECK(same[0].date1 < same[0].date2);
    const auto cross = test_pairs(a, "pseudo_optical", "pseudo_sar");
    REQUIRE(cross.size() == 2u);
    CHECK(cross[0].image2->bands() == 2);
    CHECK(cross[0].gt == same[0].gt);
    CHECK(error_kind_of([&] { test_pairs(a, "pseudo_optical", "lidar"); }) == ErrorKind::Data);
  }

  TEST_CASE("manifest errors") {
    TempDir dir("badarchive");
    CHECK(error_kind_of([&] { read_archive(dir.path()); }) == ErrorKind::Io);
    std::ofstream(dir / "manifest.txt") << "0\tpseudo_optical\t20190105\tmissing.rsrb\ttrain\n";
    CHECK(error_kind_of([&] { read_archive(dir.path()); }) == ErrorKind::Io);
    std::ofstream(dir / "manifest.txt") << "only two\n";
    CHECK(error_kind_of([&] { read_archive(dir.path()); }) == ErrorKind::Format);
  }
}
