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

#include <cstddef>

namespace sscd::nn {

/// C = A * B for row-major A (m x k), B (k x n) and C (m x n).
///
/// Every output element is accumulated over k in increasing order with fused
/// multiply-adds where the target supports them, whatever its position in C. A column of C therefore depends
/// only on the matching column of B, which keeps inference results
/// independent of how samples are grouped into batches.
void gemm_columnwise(const float* a, int m, int k, const float* b, std::size_t n, float* c);

}  // namespace sscd::nn
