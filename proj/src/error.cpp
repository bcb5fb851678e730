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

#include "sscd/error.hpp"

namespace sscd {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Format: return "format";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Type: return "type";
    case ErrorKind::Bounds: return "bounds";
    case ErrorKind::Config: return "config";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Corruption: return "corruption";
    case ErrorKind::Data: return "data";
    case ErrorKind::State: return "state";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Spec: return "spec";
    case ErrorKind::Numeric: return "numeric";
  }
  return "unknown";
}

}  // namespace sscd
