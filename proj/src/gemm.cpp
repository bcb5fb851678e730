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

#include "gemm.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace sscd::nn {
namespace {

using Vec = float __attribute__((vector_size(32)));
constexpr int kLanes = 8;
constexpr int kRows = 4;
constexpr std::size_t kCols = 2 * kLanes;

inline Vec load(const float* p) {
  Vec v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store(float* p, Vec v) { std::memcpy(p, &v, sizeof v); }

// 4 x 16 tile of C; rows of A are `lda` apart, rows of B `ldb` apart.
void tile(const float* a, std::size_t lda, int k, const float* b, std::size_t ldb, float* c, std::size_t ldc) {
  Vec acc[kRows][2] = {};
  for (int p = 0; p < k; ++p) {
    const float* bp = b + static_cast<std::size_t>(p) * ldb;
    const Vec b0 = load(bp);
    const Vec b1 = load(bp + kLanes);
    for (int r = 0; r < kRows; ++r) {
      const float av = a[static_cast<std::size_t>(r) * lda + p];
      acc[r][0] += av * b0;
      acc[r][1] += av * b1;
    }
  }
  for (int r = 0; r < kRows; ++r) {
    store(c + static_cast<std::size_t>(r) * ldc, acc[r][0]);
    store(c + static_cast<std::size_t>(r) * ldc + kLanes, acc[r][1]);
  }
}

}  // namespace

void gemm_columnwise(const float* a, int m, int k, const float* b, std::size_t n, float* c) {
  const auto ku = static_cast<std::size_t>(k);
  const int full_rows = m / kRows * kRows;
  std::vector<float> a_pad(kRows * ku, 0.0f);
  if (full_rows < m) std::copy_n(a + static_cast<std::size_t>(full_rows) * ku, (m - full_rows) * ku, a_pad.data());
  std::vector<float> b_pad;
  float c_pad[kRows * kCols];

  for (std::size_t j0 = 0; j0 < n; j0 += kCols) {
    const std::size_t cols = std::min(kCols, n - j0);
    const float* bj = b + j0;
    std::size_t ldb = n;
    if (cols < kCols) {
      b_pad.assign(ku * kCols, 0.0f);
      for (std::size_t p = 0; p < ku; ++p) std::copy_n(b + p * n + j0, cols, b_pad.data() + p * kCols);
      bj = b_pad.data();
      ldb = kCols;
    }
    for (int i0 = 0; i0 < m; i0 += kRows) {
      const int rows = std::min(kRows, m - i0);
      const float* ai = rows == kRows ? a + static_cast<std::size_t>(i0) * ku : a_pad.data();
      float* ci = c + static_cast<std::size_t>(i0) * n + j0;
      if (rows == kRows && cols == kCols) {
        tile(ai, ku, k, bj, ldb, ci, n);
      } else {
        tile(ai, ku, k, bj, ldb, c_pad, kCols);
        for (int r = 0; r < rows; ++r) std::copy_n(c_pad + r * kCols, cols, ci + static_cast<std::size_t>(r) * n);
      }
    }
  }
}

}  // namespace sscd::nn
