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

#include "sscd/raster.hpp"

#include <cmath>
#include <string>

#include "sscd/error.hpp"
#include "sscd/fileio.hpp"

namespace sscd {
namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'S', 'R', 'B'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 17;

void check_dims(int width, int height, int bands) {
  require(width >= 1 && height >= 1 && bands >= 1, ErrorKind::Shape,
          "raster dimensions must be positive (" + std::to_string(width) + "x" +
              std::to_string(height) + "x" + std::to_string(bands) + ")");
}

}  // namespace

Raster Raster::zeros(int width, int height, int bands, DType dtype) {
  check_dims(width, height, bands);
  Raster r;
  r.width_ = width;
  r.height_ = height;
  r.bands_ = bands;
  r.dtype_ = dtype;
  if (dtype == DType::Float32)
    r.f32_.assign(r.size(), 0.0f);
  else
    r.u8_.assign(r.size(), 0);
  return r;
}

Raster Raster::from_f32(int width, int height, int bands, std::vector<float> data) {
  Raster r = zeros(width, height, bands, DType::Float32);
  require(data.size() == r.size(), ErrorKind::Shape, "float payload length does not match dimensions");
  r.f32_ = std::move(data);
  return r;
}

Raster Raster::from_u8(int width, int height, int bands, std::vector<std::uint8_t> data) {
  Raster r = zeros(width, height, bands, DType::UInt8);
  require(data.size() == r.size(), ErrorKind::Shape, "uint8 payload length does not match dimensions");
  r.u8_ = std::move(data);
  return r;
}

std::span<float> Raster::f32() {
  require(dtype_ == DType::Float32, ErrorKind::Type, "raster is not float32");
  return f32_;
}

std::span<const float> Raster::f32() const {
  require(dtype_ == DType::Float32, ErrorKind::Type, "raster is not float32");
  return f32_;
}

std::span<std::uint8_t> Raster::u8() {
  require(dtype_ == DType::UInt8, ErrorKind::Type, "raster is not uint8");
  return u8_;
}

std::span<const std::uint8_t> Raster::u8() const {
  require(dtype_ == DType::UInt8, ErrorKind::Type, "raster is not uint8");
  return u8_;
}

std::span<float> Raster::band(int b) { return f32().subspan(static_cast<std::size_t>(b) * plane_size(), plane_size()); }

std::span<const float> Raster::band(int b) const {
  return f32().subspan(static_cast<std::size_t>(b) * plane_size(), plane_size());
}

Raster Raster::as_f32() const {
  if (dtype_ == DType::Float32) return *this;
  std::vector<float> data(u8_.begin(), u8_.end());
  return from_f32(width_, height_, bands_, std::move(data));
}

std::vector<std::uint8_t> encode_raster(const Raster& raster) {
  io::ByteWriter w;
  w.raw(kMagic, 4);
  w.u16(kVersion);
  w.u8(static_cast<std::uint8_t>(raster.dtype()));
  w.u16(static_cast<std::uint16_t>(raster.bands()));
  w.u32(static_cast<std::uint32_t>(raster.width()));
  w.u32(static_cast<std::uint32_t>(raster.height()));
  if (raster.dtype() == DType::Float32) {
    for (float v : raster.f32()) w.f32(v);
  } else {
    const auto px = raster.u8();
    w.raw(px.data(), px.size());
  }
  return std::move(w.bytes());
}

Raster decode_raster(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 4 && std::equal(kMagic, kMagic + 4, bytes.begin()), ErrorKind::Format,
          "bad raster magic (expected RSRB)");
  require(bytes.size() >= kHeaderBytes, ErrorKind::Truncation, "raster header truncated");
  io::ByteReader rd(bytes);
  std::uint8_t magic[4];
  rd.raw(magic, 4);
  const auto version = rd.u16();
  require(version == kVersion, ErrorKind::Format, "unsupported raster version " + std::to_string(version));
  const auto dtype_code = rd.u8();
  require(dtype_code <= 1, ErrorKind::Format, "unknown raster dtype " + std::to_string(dtype_code));
  const int bands = rd.u16();
  const std::uint32_t width = rd.u32();
  const std::uint32_t height = rd.u32();
  require(width >= 1 && height >= 1 && bands >= 1 && width <= (1u << 24) && height <= (1u << 24),
          ErrorKind::Format, "invalid raster dimensions in header");
  const auto dtype = static_cast<DType>(dtype_code);
  const std::size_t count = static_cast<std::size_t>(width) * height * static_cast<std::size_t>(bands);
  const std::size_t payload = count * (dtype == DType::Float32 ? 4 : 1);
  require(rd.remaining() >= payload, ErrorKind::Truncation,
          "raster payload truncated: header promises " + std::to_string(payload) + " bytes, found " +
              std::to_string(rd.remaining()));
  require(rd.remaining() == payload, ErrorKind::Format, "trailing bytes after raster payload");

  if (dtype == DType::Float32) {
    std::vector<float> data(count);
    for (auto& v : data) v = rd.f32();
    return Raster::from_f32(static_cast<int>(width), static_cast<int>(height), bands, std::move(data));
  }
  std::vector<std::uint8_t> data(count);
  rd.raw(data.data(), count);
  return Raster::from_u8(static_cast<int>(width), static_cast<int>(height), bands, std::move(data));
}

Raster read_raster(const std::filesystem::path& path) {
  try {
    return decode_raster(io::read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_raster(const Raster& raster, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_raster(raster));
}

void require_mask(const Raster& mask, const char* what) {
  require(mask.dtype() == DType::UInt8, ErrorKind::Data, std::string(what) + " mask must be uint8");
  for (auto v : mask.u8())
    require(v <= 1, ErrorKind::Data, std::string(what) + " mask holds a value other than 0/1");
}

Raster standardize_bands(const Raster& raster) {
  require(raster.dtype() == DType::Float32, ErrorKind::Type, "standardize_bands needs a float32 raster");
  Raster out = raster;
  const double n = static_cast<double>(raster.plane_size());
  for (int b = 0; b < raster.bands(); ++b) {
    auto band = out.band(b);
    double sum = 0.0;
    for (float v : band) sum += v;
    const double mean = sum / n;
    double sq = 0.0;
    for (float v : band) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / n);
    if (!(sd > 1e-12)) {
      std::fill(band.begin(), band.end(), 0.0f);
      continue;
    }
    for (auto& v : band) v = static_cast<float>((v - mean) / sd);
  }
  return out;
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void extract_patch_into(const Raster& raster, int row, int col, int side, float* out) {
  const int half = side / 2;
  const int w = raster.width();
  const int h = raster.height();
  const auto data = raster.f32();
  // Column lookup is shared across rows and bands.
  int cols_stack[64];
  std::vector<int> cols_heap;
  int* cols = cols_stack;
  if (side > 64) {
    cols_heap.resize(static_cast<std::size_t>(side));
    cols = cols_heap.data();
  }
  for (int j = 0; j < side; ++j) cols[j] = reflect_index(col - half + j, w);
  for (int b = 0; b < raster.bands(); ++b) {
    const float* plane = data.data() + static_cast<std::size_t>(b) * raster.plane_size();
    for (int i = 0; i < side; ++i) {
      const float* src = plane + static_cast<std::size_t>(reflect_index(row - half + i, h)) * w;
      for (int j = 0; j < side; ++j) *out++ = src[cols[j]];
    }
  }
}

Patch extract_patch(const Raster& raster, int row, int col, int side) {
  require(row >= 0 && row < raster.height() && col >= 0 && col < raster.width(), ErrorKind::Bounds,
          "patch center (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
              std::to_string(raster.height()) + "x" + std::to_string(raster.width()) + " raster");
  require(side >= 4 && side % 2 == 0, ErrorKind::Parameter, "patch side must be even and >= 4, got " + std::to_string(side));
  const Raster src = raster.dtype() == DType::Float32 ? Raster() : raster.as_f32();
  const Raster& f = raster.dtype() == DType::Float32 ? raster : src;
  Patch p;
  p.bands = raster.bands();
  p.side = side;
  p.row = row;
  p.col = col;
  p.pixels.resize(static_cast<std::size_t>(p.bands) * side * side);
  extract_patch_into(f, row, col, side, p.pixels.data());
  return p;
}

}  // namespace sscd
