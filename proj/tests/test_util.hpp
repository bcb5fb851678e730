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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "sscd/encoder.hpp"
#include "sscd/error.hpp"
#include "sscd/raster.hpp"
#include "sscd/rng.hpp"

namespace sscd::testing {

inline Raster random_raster(Rng& rng, int w, int h, int bands) {
  std::vector<float> v(static_cast<std::size_t>(w) * h * bands);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return Raster::from_f32(w, h, bands, std::move(v));
}

inline Raster random_mask(Rng& rng, int w, int h, double p) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) x = rng.uniform() < p ? 1 : 0;
  return Raster::from_u8(w, h, 1, std::move(v));
}

inline std::vector<double> random_unit(Rng& rng, int d) {
  std::vector<double> v(static_cast<std::size_t>(d));
  double n = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    n += x * x;
  }
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("sscd_test_" + tag + "_" + std::to_string(std::hash<std::string>{}(tag) ^ counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static std::uint64_t& counter() {
    static std::uint64_t c = static_cast<std::uint64_t>(::getpid()) << 20;
    return c;
  }
  std::filesystem::path path_;
};

/// Small encoder used where capacity is irrelevant.
inline EncoderConfig tiny_config(int in_channels, std::uint64_t seed = 3) {
  EncoderConfig c;
  c.in_channels = in_channels;
  c.widths = {4, 8};
  c.blocks_per_stage = {1, 1};
  c.stage_strides = {1, 2};
  c.embed_dim = 8;
  c.projector_hidden = 16;
  c.predictor_hidden = 16;
  c.seed = seed;
  return c;
}

template <typename F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected an sscd::Error");
}

}  // namespace sscd::testing
