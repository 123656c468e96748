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

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "beamlab/covariance.hpp"
#include "beamlab/error.hpp"
#include "beamlab/json_io.hpp"
#include "beamlab/mixer.hpp"
#include "beamlab/room.hpp"
#include "test_util.hpp"

using namespace beamlab;
using namespace beamlab::testing;

namespace {

Spectrogram RandomSpectrogram(std::size_t m, std::size_t k, std::size_t l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrogram s(m, k, l);
  for (cd& v : s.data()) v = cd(normal(rng), normal(rng));
  return s;
}

void CheckHermitianPsd(const CMatrix& a) {
  CHECK((a - a.adjoint()).norm() <= 1e-12 * std::max(1.0, a.norm()));
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
  const double trace = a.trace().real();
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * trace);
}

double Rayleigh(const CMatrix& a, const CVector& v) { return (v.adjoint() * a * v)(0, 0).real() / v.squaredNorm(); }

}  // namespace

TEST_CASE("frame-range covariance matches a brute-force sum") {
  const Spectrogram s = RandomSpectrogram(4, 9, 30, 1);
  const auto phi = NoisyCovariance(s, 7);
  for (std::size_t k = 0; k < 9; ++k) {
    CMatrix ref = CMatrix::Zero(4, 4);
    for (std::size_t l = 7; l < 30; ++l)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) ref(i, j) += s.at(i, k, l) * std::conj(s.at(j, k, l));
    ref /= 23.0;
    CHECK((phi[k] - ref).norm() <= 1e-13 * ref.norm());
    CheckHermitianPsd(phi[k]);
  }
  const auto serial_phi = serial::FrameRangeCovariance(s, 7, 30);
  for (std::size_t k = 0; k < 9; ++k) CHECK((phi[k] - serial_phi[k]).norm() <= 1e-13 * phi[k].norm());
}

TEST_CASE("white noise covariance converges to sigma^2 I") {
  const double sigma2 = 2.5;
  const std::size_t frames = 4000;
  TimeSignal x = RandomSignal(3, 511 + 128 * frames, 2);
  for (double& v : x.data()) v *= std::sqrt(sigma2);
  const Spectrogram s = Analyze(x);
  REQUIRE(s.frames() >= frames);
  const auto phi = NoiseCovariance(s, frames);
  const auto wa = AnalysisWindow({});
  double energy = 0.0;
  for (double v : wa) energy += v * v;
  for (std::size_t k : {5u, 64u, 128u, 250u}) {
    const CMatrix expected = sigma2 * energy * CMatrix::Identity(3, 3);
    CHECK((phi[k] - expected).norm() <= 0.05 * expected.norm());
  }
}

TEST_CASE("single-frame covariance is the rank-1 outer product") {
  const Spectrogram s = RandomSpectrogram(3, 5, 4, 3);
  const auto phi = NoiseCovariance(s, 1);
  for (std::size_t k = 0; k < 5; ++k) {
    CVector v(3);
    for (int m = 0; m < 3; ++m) v(m) = s.at(m, k, 0);
    CHECK((phi[k] - v * v.adjoint()).norm() <= 1e-15 * phi[k].norm());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(phi[k]);
    CHECK(std::abs(eig.eigenvalues()(1)) <= 1e-12 * eig.eigenvalues()(2));
  }
}

TEST_CASE("constant frame vector gives v v^H") {
  Spectrogram s(2, 3, 10);
  const CVector v = (CVector(2) << cd(1, 2), cd(-0.5, 0.25)).finished();
  for (std::size_t l = 0; l < 10; ++l)
    for (std::size_t k = 0; k < 3; ++k)
      for (int m = 0; m < 2; ++m) s.at(m, k, l) = v(m);
  const auto phi = NoisyCovariance(s, 4);
  for (const auto& p : phi) CHECK((p - v * v.adjoint()).norm() <= 1e-15);
}

TEST_CASE("noise-only utterance gives matching statistics") {
  const Spectrogram s = RandomSpectrogram(2, 4, 8000, 4);
  const auto set = EstimateCovariances(s, 4000);
  for (std::size_t k = 0; k < 4; ++k) CHECK((set.phi_yy[k] - set.phi_nn[k]).norm() <= 0.1 * set.phi_nn[k].norm());
  CHECK(set.noise_frames == 4000);
  CHECK(set.frames == 8000);
}

TEST_CASE("noise-only head length at 512/128 within 0.5 s") {
  CHECK(FramesWithin(8000, {}) == 59);
}

TEST_CASE("covariance frame-range errors") {
  const Spectrogram s = RandomSpectrogram(2, 3, 10, 5);
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::kIo;
  };
  CHECK(kind_of([&] { NoiseCovariance(s, 0); }) == ErrorKind::kEstimation);
  CHECK(kind_of([&] { NoiseCovariance(s, 11); }) == ErrorKind::kEstimation);
  CHECK(kind_of([&] { NoisyCovariance(s, 10); }) == ErrorKind::kEstimation);
  CHECK_NOTHROW(NoiseCovariance(s, 10));
}

TEST_CASE("inverse square root hand cases") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const CMatrix w = InverseSqrt(d);
  CHECK(std::abs(w(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(w(1, 1) - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(w(0, 1)) < 1e-15);
  CHECK(std::abs(Sqrt(d)(1, 1) - 3.0) < 1e-14);
  const CMatrix eye = CMatrix::Identity(4, 4);
  CHECK((InverseSqrt(eye) - eye).norm() < 1e-15);
}

TEST_CASE("inverse square root reconstructs identity on random SPD matrices") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = 2 + trial % 7;
    const CMatrix phi = RandomSpd(m, rng);
    const auto roots = HermitianRoots(phi);
    const CMatrix eye = CMatrix::Identity(m, m);
    CHECK((roots.inv_sqrt * phi * roots.inv_sqrt.adjoint() - eye).norm() <= 1e-8);
    CHECK((roots.sqrt * roots.sqrt - phi).norm() <= 1e-10 * phi.norm());
    CHECK((roots.sqrt * roots.inv_sqrt - eye).norm() <= 1e-10);
  }
}

TEST_CASE("non-Hermitian input is rejected") {
  CMatrix a = CMatrix::Identity(3, 3);
  a(0, 1) = cd(0.5, 0.0);
  try {
    InverseSqrt(a);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
  }
  CHECK_THROWS_AS(InverseSqrt(CMatrix::Identity(2, 3)), Error);
}

TEST_CASE("eigenvalue floor keeps rank-deficient noise invertible") {
  std::mt19937_64 rng(7);
  const CVector v = RandomComplex(3, 1, rng);
  const CMatrix rank1 = v * v.adjoint();
  const CMatrix w = InverseSqrt(rank1);
  CHECK(std::isfinite(w.norm()));
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(w.adjoint() * w);
  CHECK(eig.eigenvalues().maxCoeff() <= 1.0 / (kEigenFloor * v.squaredNorm()) * (1 + 1e-6));
}

TEST_CASE("whitened covariance trivial cases") {
  std::mt19937_64 rng(8);
  const CMatrix phi = RandomSpd(4, rng);
  CHECK((WhitenedCovariance(phi, phi) - CMatrix::Identity(4, 4)).norm() <= 1e-10);
  CHECK((WhitenedCovariance(phi, CMatrix::Identity(4, 4)) - phi).norm() <= 1e-14 * phi.norm());
  CheckHermitianPsd(WhitenedCovariance(phi, RandomSpd(4, rng)));
}

TEST_CASE("whitened covariance equals covariance of whitened data") {
  const Spectrogram s = RandomSpectrogram(3, 6, 400, 9);
  const auto set = EstimateCovariances(s, 150);
  const auto white = WhitenedCovariance(set.phi_yy, set.phi_nn);
  for (std::size_t k = 0; k < 6; ++k) {
    const CMatrix w = InverseSqrt(set.phi_nn[k]);
    CMatrix acc = CMatrix::Zero(3, 3);
    for (std::size_t l = 150; l < 400; ++l) {
      CVector y(3);
      for (int m = 0; m < 3; ++m) y(m) = s.at(m, k, l);
      const CVector z = w * y;
      acc += z * z.adjoint();
    }
    acc /= 250.0;
    CHECK((acc - white[k]).norm() <= 1e-8);
  }
}

TEST_CASE("rank-1 plus white model recovers the closed-form RTF") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 2 + trial % 7;
    const std::size_t ref = trial % m;
    const CVector a = RandomComplex(m, 1, rng);
    const double sigma2 = 0.3 + trial * 0.01, p = 2.0;
    const CMatrix nn = sigma2 * CMatrix::Identity(m, m);
    const CMatrix yy = nn + p * a * a.adjoint();
    bool degenerate = true;
    const CVector h = EstimateRtfBin(yy, nn, ref, &degenerate);
    CHECK_FALSE(degenerate);
    CHECK((h - a / a(ref)).norm() <= 1e-6 * (a / a(ref)).norm());
    CHECK(h(ref) == cd(1.0, 0.0));
  }
}

TEST_CASE("RTF matches a Rayleigh-quotient grid search for M=2") {
  CMatrix nn(2, 2), yy(2, 2);
  nn << 2.0, cd(0.3, 0.4), cd(0.3, -0.4), 1.0;
  yy << 5.0, cd(1.0, -2.0), cd(1.0, 2.0), 4.0;
  const CMatrix white = WhitenedCovariance(yy, nn);
  double best = -1.0;
  CVector best_f(2);
  const int steps = 2000;
  for (int i = 0; i <= steps; ++i) {
    const double t = 0.5 * std::numbers::pi * i / steps;
    for (int j = 0; j < steps; ++j) {
      const double ph = 2.0 * std::numbers::pi * j / steps;
      CVector f(2);
      f << std::cos(t), std::sin(t) * std::polar(1.0, ph);
      const double q = Rayleigh(white, f);
      if (q > best) {
        best = q;
        best_f = f;
      }
    }
  }
  const CVector ft = Sqrt(nn) * best_f;
  const CVector oracle = ft / ft(0);
  const CVector h = EstimateRtfBin(yy, nn, 0);
  CHECK((h - oracle).norm() <= 5e-3 * oracle.norm());
}

TEST_CASE("RTF is invariant to positive scaling of either covariance") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix nn = RandomSpd(4, rng);
    const CMatrix yy = nn + RandomSpd(4, rng, 0.0);
    const CVector h = EstimateRtfBin(yy, nn, 1);
    CHECK((EstimateRtfBin(10.0 * yy, nn, 1) - h).norm() <= 1e-9 * h.norm());
    CHECK((EstimateRtfBin(yy, 0.25 * nn, 1) - h).norm() <= 1e-9 * h.norm());
  }
}

TEST_CASE("degenerate reference bins fall back to the unit vector") {
  CMatrix nn = CMatrix::Identity(3, 3);
  CMatrix yy = CMatrix::Identity(3, 3);
  yy(1, 1) = 10.0;
  bool degenerate = false;
  const CVector h = EstimateRtfBin(yy, nn, 0, &degenerate);
  CHECK(degenerate);
  CHECK(h == CVector::Unit(3, 0));

  const RtfVector rtf = EstimateRtf({yy, nn + CMatrix::Ones(3, 3)}, {nn, nn}, 0);
  CHECK(rtf.degenerate_count() == 1);
  CHECK(rtf.degenerate[0]);
  CHECK_FALSE(rtf.degenerate[1]);
}

TEST_CASE("RTF input validation") {
  const BinCovariances one(3, CMatrix::Identity(1, 1));
  const BinCovariances two(3, CMatrix::Identity(2, 2));
  CHECK_THROWS_AS(EstimateRtf(one, one, 0), Error);
  CHECK_THROWS_AS(EstimateRtf(two, two, 2), Error);
  CHECK_THROWS_AS(EstimateRtf(two, BinCovariances(2, CMatrix::Identity(2, 2)), 0), Error);
}

TEST_CASE("reference entry is exactly one and output stays Hermitian PSD on data") {
  const Spectrogram s = RandomSpectrogram(4, 12, 300, 12);
  const auto set = EstimateCovariances(s, 100);
  for (std::size_t k = 0; k < 12; ++k) {
    CheckHermitianPsd(set.phi_nn[k]);
    CheckHermitianPsd(set.phi_yy[k]);
  }
  const RtfVector rtf = EstimateRtf(set.phi_yy, set.phi_nn, 2);
  for (const auto& h : rtf.h) CHECK(h(2) == cd(1.0, 0.0));
}

TEST_CASE("anechoic mixture RTF is close to the direct-path ratio") {
  Scenario s;
  s.Lx = 6.0;
  s.Ly = 6.5;
  s.mic_center = {3.0, 3.0, 1.0};
  s.source_theta = 60.0;
  s.noise_theta = 150.0;
  s.source_R = 1.5;
  s.noise_R = 1.5;
  s.seed = 21;
  const ArrayGeometry g = ArrayGeometry::Default();
  const MixtureSpec spec;
  std::mt19937_64 rng(21);
  const TimeSignal target = SpeechLikeSignal(spec.total_samples() - spec.head_samples(), rng);
  const TimeSignal noise = Ar1Noise(spec.total_samples(), -0.7, rng);
  const Mixture mix = Mix(s, g, spec, target, noise);
  const Spectrogram y = Analyze(PadToFrames(mix.y));
  const auto set = EstimateCovariances(y, FramesWithin(spec.head_samples(), {}));
  const RtfVector rtf = EstimateRtf(set.phi_yy, set.phi_nn, 0);
  const AtfGrid atf = ComputeAtfGrid(s, g, {s.source_theta}, s.source_R, 0);
  std::vector<double> err;
  for (std::size_t k = 1; k + 1 < y.bins(); ++k) {
    CVector truth(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) truth(m) = atf.at(m, k, 0) / atf.at(0, k, 0);
    err.push_back((rtf.h[k] - truth).norm() / truth.norm());
  }
  std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
  CHECK(err[err.size() / 2] < 0.1);
}

TEST_CASE("covariance and RTF JSON roundtrip") {
  std::mt19937_64 rng(13);
  const BinCovariances phi = {RandomSpd(3, rng), RandomSpd(3, rng)};
  const BinCovariances back = CovariancesFromJson(CovariancesToJson(phi));
  REQUIRE(back.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) CHECK(back[k] == phi[k]);
  const RtfVector rtf = EstimateRtf(phi, {CMatrix::Identity(3, 3), CMatrix::Identity(3, 3)}, 1);
  const RtfVector rtf_back = RtfFromJson(RtfToJson(rtf));
  CHECK(rtf_back.reference_index == 1);
  CHECK(rtf_back.h == rtf.h);
  CHECK(rtf_back.degenerate == rtf.degenerate);
}
