// Copyright 2026 The beamlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace beamlab {

enum class ErrorKind {
  kLength,
  kConstraint,
  kShape,
  kConfig,
  kModel,
  kGeometry,
  kStability,
  kInput,
  kEstimation,
  kSolver,
  kDegenerate,
  kFormat,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + " error: " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kLength: return "length";
    case ErrorKind::kConstraint: return "constraint";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kConfig: return "configuration";
    case ErrorKind::kModel: return "model";
    case ErrorKind::kGeometry: return "geometry";
    case ErrorKind::kStability: return "stability";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kEstimation: return "estimation";
    case ErrorKind::kSolver: return "solver";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace beamlab
