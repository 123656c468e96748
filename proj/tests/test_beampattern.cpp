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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "beamlab/beampattern.hpp"
#include "beamlab/error.hpp"
#include "beamlab/pipeline.hpp"
#include "test_util.hpp"

using namespace beamlab;
using namespace beamlab::testing;
namespace fs = std::filesystem;

namespace {

Scenario ProbeRoom(double t60 = 0.0) {
  Scenario s;
  s.Lx = 7.0;
  s.Ly = 7.0;
  s.T60 = t60;
  s.mic_center = {3.5, 3.5, 1.0};
  s.tilt_phi = 0.0;
  s.source_theta = 350.0;
  s.noise_theta = 330.0;
  s.source_R = 2.0;
  s.noise_R = 2.0;
  s.seed = 5;
  return s;
}

std::vector<double> Range(double start, double stop, double step) {
  std::vector<double> out;
  for (double t = start; t <= stop + 1e-9; t += step) out.push_back(t);
  return out;
}

StageWeights ConstantWeights(const CVector& w, std::size_t bins) {
  return StageWeights::FromBins(std::vector<CVector>(bins, w), 1, Provenance::kMvdr);
}

StageWeights RandomWeights(std::size_t m, std::size_t bins, std::mt19937_64& rng) {
  std::vector<CVector> w;
  for (std::size_t k = 0; k < bins; ++k) w.push_back(RandomComplex(m, 1, rng));
  return StageWeights::FromBins(w, 1, Provenance::kLearned);
}

std::vector<cd> NaiveNarrowband(const StageWeights& w, const AtfGrid& atf) {
  std::vector<cd> B(atf.bins * atf.angles());
  for (std::size_t a = 0; a < atf.angles(); ++a)
    for (std::size_t k = 0; k < atf.bins; ++k) {
      cd acc = 0.0;
      for (std::size_t m = 0; m < atf.mics; ++m) acc += std::conj(w.w1_at(m, k)) * atf.at(m, k, a);
      B[a * atf.bins + k] = acc;
    }
  return B;
}

}  // namespace

TEST_CASE("single-mic weights select that mic's ATF, flat in frequency at zero order") {
  const Scenario s = ProbeRoom();
  const ArrayGeometry g = ArrayGeometry::Default();
  const AtfGrid atf = ComputeAtfGrid(s, g, Range(0, 180, 15), s.source_R, 0);
  const StageWeights w = ConstantWeights(CVector::Unit(4, 2), atf.bins);
  const auto B = Narrowband(w, atf);
  for (std::size_t a = 0; a < atf.angles(); ++a) {
    const double d = Distance(MicWorldPositions(s, g)[2], ProbePosition(s, atf.thetas[a], s.source_R));
    for (std::size_t k = 0; k < atf.bins; ++k) CHECK(std::abs(B[a * atf.bins + k]) == std::abs(atf.at(2, k, a)));
    for (std::size_t k = 0; k <= 192; ++k)
      CHECK(std::abs(B[a * atf.bins + k]) == doctest::Approx(1.0 / (4.0 * std::numbers::pi * d)).epsilon(0.01));
  }
}

TEST_CASE("MVDR steered with a probe ATF is distortionless at that probe") {
  const Scenario s = ProbeRoom();
  const ArrayGeometry g = ArrayGeometry::Default();
  const AtfGrid atf = ComputeAtfGrid(s, g, {40.0, 75.0, 120.0}, s.source_R, 0);
  std::mt19937_64 rng(1);
  std::vector<CMatrix> phi;
  RtfVector steer, rtf;
  for (std::size_t k = 0; k < atf.bins; ++k) {
    CMatrix p = RandomSpd(4, rng);
    if (k == 0 || k + 1 == atf.bins) p = p.real().cast<cd>();
    phi.push_back(p);
    CVector h = Eigen::Map<const CVector>(atf.vec(k, 1), 4);
    steer.h.push_back(h);
    rtf.h.push_back(h / h(0));
  }
  steer.degenerate.assign(atf.bins, false);
  rtf.degenerate = steer.degenerate;
  const auto B_abs = Narrowband(StageWeights::FromBins(MvdrWeights(phi, steer), 1, Provenance::kMvdr), atf);
  const auto B_rel = Narrowband(StageWeights::FromBins(MvdrWeights(phi, rtf), 1, Provenance::kMvdr), atf);
  for (std::size_t k = 1; k + 1 < atf.bins; ++k) {
    CHECK(std::abs(B_abs[1 * atf.bins + k] - 1.0) < 1e-10);
    CHECK(std::abs(B_rel[1 * atf.bins + k] - atf.at(0, k, 1)) < 1e-10 * std::abs(atf.at(0, k, 1)));
  }
}

TEST_CASE("narrowband matches the naive oracle and the serial reference") {
  std::mt19937_64 rng(2);
  for (double t60 : {0.0, 0.3}) {
    const Scenario s = ProbeRoom(t60);
    const ArrayGeometry g = ArrayGeometry::Linear({0.04, 0.04, 0.04, 0.04, 0.04});
    const AtfGrid atf = ComputeAtfGrid(s, g, Range(0, 350, 10), 1.5, t60 > 0 ? kFullOrder : 0);
    const StageWeights w = RandomWeights(6, atf.bins, rng);
    const auto B = Narrowband(w, atf);
    const auto naive = NaiveNarrowband(w, atf);
    const auto ser = serial::Narrowband(w, atf);
    double worst = 0.0;
    for (std::size_t i = 0; i < B.size(); ++i)
      worst = std::max({worst, std::abs(B[i] - naive[i]) / std::max(std::abs(naive[i]), 1e-300),
                        std::abs(B[i] - ser[i]) / std::max(std::abs(naive[i]), 1e-300)});
    CHECK(worst < 1e-12);
    const auto P = Wideband(B, atf.bins);
    for (std::size_t a = 0; a < atf.angles(); ++a) {
      double acc = 0.0;
      for (std::size_t k = 0; k < atf.bins; ++k) acc += std::norm(naive[a * atf.bins + k]);
      CHECK(std::abs(P[a] - acc) <= 1e-12 * acc);
      CHECK(P[a] >= 0.0);
    }
  }
}

TEST_CASE("shape mismatch is reported") {
  const Scenario s = ProbeRoom();
  const AtfGrid atf = ComputeAtfGrid(s, ArrayGeometry::Default(), {0.0, 90.0}, 2.0, 0);
  std::mt19937_64 rng(3);
  try {
    Narrowband(RandomWeights(3, atf.bins, rng), atf);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kShape);
  }
}

TEST_CASE("single nonzero cell") {
  std::vector<cd> B(5 * 4, cd(0.0, 0.0));
  B[2 * 5 + 3] = cd(2.0, 0.0);
  const auto P = Wideband(B, 5);
  CHECK(P == std::vector<double>{0.0, 0.0, 4.0, 0.0});
  const auto db = ToPolarDb(P);
  CHECK(db == std::vector<double>{kBeampowerFloorDb, kBeampowerFloorDb, 0.0, kBeampowerFloorDb});
}

TEST_CASE("normalization and non-finite errors") {
  try {
    ToPolarDb({0.0, 0.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerate);
  }
  std::vector<cd> B(4, cd(1.0, 0.0));
  B[1] = cd(std::nan(""), 0.0);
  CHECK_THROWS_AS(Wideband(B, 2), Error);
  const auto db = ToPolarDb({1.0, 3.0, 2.0});
  CHECK(*std::max_element(db.begin(), db.end()) == 0.0);
  CHECK(db[0] == doctest::Approx(-10.0 * std::log10(3.0)));
}

TEST_CASE("broadside delay-and-sum peaks at 90 degrees") {
  Scenario s = ProbeRoom();
  s.Lx = 40.0;
  s.Ly = 40.0;
  s.mic_center = {20.0, 20.0, 1.0};
  const ArrayGeometry g = ArrayGeometry::Default();
  const AtfGrid atf = ComputeAtfGrid(s, g, Range(0, 180, 1), 15.0, 0);
  const StageWeights w = ConstantWeights(CVector::Constant(4, 0.25), atf.bins);
  const auto P = Wideband(Narrowband(w, atf), atf.bins);
  const auto best = std::max_element(P.begin(), P.end()) - P.begin();
  CHECK(std::abs(atf.thetas[best] - 90.0) <= 2.0);
}

TEST_CASE("normalized pattern is invariant to weight scaling") {
  const Scenario s = ProbeRoom();
  const AtfGrid atf = ComputeAtfGrid(s, ArrayGeometry::Default(), Range(0, 180, 5), 2.0, 0);
  std::mt19937_64 rng(4);
  StageWeights w = RandomWeights(4, atf.bins, rng);
  const auto a = ToPolarDb(Wideband(Narrowband(w, atf), atf.bins));
  for (cd& v : w.w1) v *= -37.5;
  const auto b = ToPolarDb(Wideband(Narrowband(w, atf), atf.bins));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9);
}

TEST_CASE("grid values do not depend on probe ordering") {
  const Mixture mix = SynthesizeForScenario(ProbeRoom(), ArrayGeometry::Default());
  BeampatternRequest req;
  req.thetas = Range(0, 180, 20);
  const BeampatternGrid fwd = AnalyzeExample(mix, ArrayGeometry::Default(), req);
  std::reverse(req.thetas.begin(), req.thetas.end());
  const BeampatternGrid rev = AnalyzeExample(mix, ArrayGeometry::Default(), req);
  const std::size_t n = fwd.thetas.size();
  for (std::size_t a = 0; a < n; ++a) {
    CHECK(fwd.P[a] == rev.P[n - 1 - a]);
    for (std::size_t k = 0; k < fwd.bins; ++k) CHECK(fwd.at(k, a) == rev.at(k, n - 1 - a));
  }
  CHECK(fwd.order_tag == "zero_order");
}

TEST_CASE("zero-order and full-order probes differ in a reverberant room") {
  const Scenario s = ProbeRoom(0.4);
  const Mixture mix = SynthesizeForScenario(s, ArrayGeometry::Default());
  BeampatternRequest req;
  req.thetas = {0.0, 60.0, 120.0, 180.0};
  const BeampatternGrid zero = AnalyzeExample(mix, ArrayGeometry::Default(), req);
  req.order = kFullOrder;
  const BeampatternGrid full = AnalyzeExample(mix, ArrayGeometry::Default(), req);
  CHECK(zero.order_tag == "zero_order");
  CHECK(full.order_tag == "full_order");
  double diff = 0.0;
  for (std::size_t a = 0; a < 4; ++a) diff = std::max(diff, std::abs(10 * std::log10(full.P[a] / zero.P[a])));
  CHECK(diff > 0.5);
  req.order = 3;
  CHECK_THROWS_AS(AnalyzeExample(mix, ArrayGeometry::Default(), req), Error);
}

TEST_CASE("learned analysis needs weights and ignores the mask") {
  const Mixture mix = SynthesizeForScenario(ProbeRoom(), ArrayGeometry::Default());
  BeampatternRequest req;
  req.method = Provenance::kLearned;
  req.thetas = {0.0, 90.0};
  try {
    AnalyzeExample(mix, ArrayGeometry::Default(), req);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  std::mt19937_64 rng(5);
  StageWeights w = RandomWeights(4, 257, rng);
  const BeampatternGrid plain = [&] {
    req.learned = w;
    return AnalyzeExample(mix, ArrayGeometry::Default(), req);
  }();
  w.frames = 3;
  w.w2.assign(257 * 3, cd(0.5, 0.0));
  req.learned = w;
  const BeampatternGrid masked = AnalyzeExample(mix, ArrayGeometry::Default(), req);
  CHECK(plain.P == masked.P);
}

TEST_CASE("MVDR on the probe setup nulls the interferer with a wide aperture") {
  const ArrayGeometry g = ArrayGeometry::Linear({0.2, 0.2, 0.2});
  const Mixture mix = SynthesizeForScenario(ProbeRoom(), g);
  BeampatternRequest req;
  req.thetas = Range(0, 359, 1);
  const BeampatternGrid grid = AnalyzeExample(mix, g, req);
  const auto db = ToPolarDb(grid.P);
  CHECK(db[330] <= db[350] - 10.0);
  CHECK(db[350] >= -3.0);
}

TEST_CASE("CSV and SVG writers") {
  const fs::path dir = fs::temp_directory_path() / "beamlab_bp_writers";
  fs::create_directories(dir);
  const Mixture mix = SynthesizeForScenario(ProbeRoom(), ArrayGeometry::Default());
  BeampatternRequest req;
  req.thetas = Range(0, 180, 45);
  const BeampatternGrid grid = AnalyzeExample(mix, ArrayGeometry::Default(), req);
  WriteBeampatternCsv(grid, dir / "p.csv");
  WriteMagnitudeCsv(grid, dir / "m.csv");
  WritePolarSvg(grid, dir / "p.svg", "probe");
  std::ifstream csv(dir / "p.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "theta_deg,P_db");
  int rows = 0;
  double peak = -1e9;
  while (std::getline(csv, line)) {
    ++rows;
    peak = std::max(peak, std::stod(line.substr(line.find(',') + 1)));
  }
  CHECK(rows == 5);
  CHECK(peak == 0.0);
  std::ifstream mag(dir / "m.csv");
  int mag_rows = 0;
  while (std::getline(mag, line)) ++mag_rows;
  CHECK(mag_rows == 258);
  std::ifstream svg(dir / "p.svg");
  const std::string text((std::istreambuf_iterator<char>(svg)), {});
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("</svg>") != std::string::npos);
  fs::remove_all(dir);
}
