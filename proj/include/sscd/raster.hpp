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
#include <vector>

namespace sscd {

enum class DType : std::uint8_t { Float32 = 0, UInt8 = 1 };

/// Multi-band image, band-major then row-major. Exactly one of the two
/// payload vectors is populated, matching dtype().
class Raster {
 public:
  Raster() = default;

  static Raster zeros(int width, int height, int bands, DType dtype);
  static Raster from_f32(int width, int height, int bands, std::vector<float> data);
  static Raster from_u8(int width, int height, int bands, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int bands() const noexcept { return bands_; }
  DType dtype() const noexcept { return dtype_; }
  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const noexcept { return plane_size() * static_cast<std::size_t>(bands_); }

  std::span<float> f32();
  std::span<const float> f32() const;
  std::span<std::uint8_t> u8();
  std::span<const std::uint8_t> u8() const;

  std::span<float> band(int b);
  std::span<const float> band(int b) const;

  float at(int b, int r, int c) const {
    return f32_[static_cast<std::size_t>(b) * plane_size() +
                static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(c)];
  }
  float& at(int b, int r, int c) {
    return f32_[static_cast<std::size_t>(b) * plane_size() +
                static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(c)];
  }

  /// Float copy of any raster.
  Raster as_f32() const;

  bool operator==(const Raster& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int bands_ = 0;
  DType dtype_ = DType::Float32;
  std::vector<float> f32_;
  std::vector<std::uint8_t> u8_;
};

/// Square window of side `side` whose center pixel (index side/2) is (row, col).
struct Patch {
  int bands = 0;
  int side = 0;
  int row = 0;
  int col = 0;
  std::vector<float> pixels;  // bands x side x side

  float at(int b, int i, int j) const {
    return pixels[(static_cast<std::size_t>(b) * side + i) * side + j];
  }
};

// RSRB v1 file format.
Raster read_raster(const std::filesystem::path& path);
void write_raster(const Raster& raster, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_raster(const Raster& raster);
Raster decode_raster(const std::vector<std::uint8_t>& bytes);

/// Throws unless `mask` is a uint8 raster holding only 0 and 1.
void require_mask(const Raster& mask, const char* what);

/// Per-band zero-mean unit-variance copy; constant bands become all zeros.
Raster standardize_bands(const Raster& raster);

/// Reflect index into [0, n) without repeating the edge sample.
int reflect_index(int i, int n) noexcept;

Patch extract_patch(const Raster& raster, int row, int col, int side);

/// Writes the bands x side x side window into `out` (no bounds check on out).
void extract_patch_into(const Raster& raster, int row, int col, int side, float* out);

}  // namespace sscd
