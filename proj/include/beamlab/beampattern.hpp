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

#include <optional>
#include <string>
#include <vector>

#include "beamlab/beamformer.hpp"
#include "beamlab/mixer.hpp"
#include "beamlab/room.hpp"

namespace beamlab {

inline constexpr double kBeampowerFloorDb = -80.0;

// B(k, theta) = w1(k)^H h(k, theta) and P(theta) = sum_k |B(k, theta)|^2.
struct BeampatternGrid {
  std::size_t bins = 0;
  std::vector<double> thetas;
  std::vector<cd> B;        // a * bins + k
  std::vector<double> P;
  std::string order_tag;    // "zero_order" or "full_order"

  const cd& at(std::size_t k, std::size_t a) const { return B[a * bins + k]; }
};

std::vector<cd> Narrowband(const StageWeights& w, const AtfGrid& atf);
namespace serial {
std::vector<cd> Narrowband(const StageWeights& w, const AtfGrid& atf);
}  // namespace serial

std::vector<double> Wideband(const std::vector<cd>& B, std::size_t bins);

// 10 log10(P / max P), max exactly 0, cells below `floor_db` (and zeros)
// set to `floor_db`. All-zero P throws kDegenerate.
std::vector<double> ToPolarDb(const std::vector<double>& P, double floor_db = kBeampowerFloorDb);

BeampatternGrid ComputeBeampattern(const StageWeights& w, const AtfGrid& atf, int order);

// Default probe grid: 0..180 deg in 1 deg steps.
std::vector<double> DefaultThetaGrid();

struct BeampatternRequest {
  Provenance method = Provenance::kMvdr;
  std::optional<StageWeights> learned;  // required for kLearned
  std::vector<double> thetas = DefaultThetaGrid();
  int order = 0;                        // 0 or kFullOrder
  StftConfig stft;
};

// Weights from the chosen method on this mixture, probed on a circle of the
// scenario's source radius. For learned weights only stage 1 is analyzed.
BeampatternGrid AnalyzeExample(const Mixture& mix, const ArrayGeometry& g,
                               const BeampatternRequest& req);

void WriteBeampatternCsv(const BeampatternGrid& grid, const std::string& path);
void WriteMagnitudeCsv(const BeampatternGrid& grid, const std::string& path);
void WritePolarSvg(const BeampatternGrid& grid, const std::string& path,
                   const std::string& title = "");

}  // namespace beamlab
