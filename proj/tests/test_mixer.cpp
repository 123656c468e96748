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

#include "beamlab/covariance.hpp"
#include "beamlab/error.hpp"
#include "beamlab/mixer.hpp"
#include "test_util.hpp"

using namespace beamlab;
using namespace beamlab::testing;

namespace {

Scenario Anechoic() {
  Scenario s;
  s.Lx = 7.5;
  s.Ly = 7.0;
  s.mic_center = {3.6, 2.2, 1.0};
  s.tilt_phi = -12.0;
  s.source_theta = 75.0;
  s.noise_theta = 140.0;
  s.source_R = 1.9;
  s.noise_R = 1.9;
  s.seed = 99;
  return s;
}

struct Sources {
  TimeSignal target;
  TimeSignal noise;
};

Sources Draw(const MixtureSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {SpeechLikeSignal(spec.total_samples() - spec.head_samples(), rng),
          Ar1Noise(spec.total_samples(), -0.7, rng)};
}

double Lag1(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i > 0) num += (x[i] - mean) * (x[i - 1] - mean);
  }
  return num / den;
}

std::vector<double> NaiveConvolve(std::span<const double> a, const std::vector<double>& h,
                                  std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  for (std::size_t t = 0; t < out_len; ++t)
    for (std::size_t j = 0; j < h.size() && j <= t; ++j)
      if (t - j < a.size()) out[t] += h[j] * a[t - j];
  return out;
}

// Mean over bins of |<v_head, v_tail>| between principal eigenvectors of the
// noise covariance before the head ends and after the switch.
double SpatialSimilarity(const TimeSignal& n, const MixtureSpec& spec) {
  const Spectrogram s = Analyze(n);
  const std::size_t head_frames = FramesWithin(spec.head_samples(), {});
  const std::size_t sw_frame = spec.switch_sample() / 128 + 4;
  const auto a = FrameRangeCovariance(s, 0, head_frames);
  const auto b = FrameRangeCovariance(s, sw_frame, s.frames());
  double acc = 0.0;
  int count = 0;
  for (std::size_t k = 20; k < 200; ++k) {
    Eigen::SelfAdjointEigenSolver<CMatrix> ea(a[k]), eb(b[k]);
    const CVector va = ea.eigenvectors().col(ea.eigenvalues().size() - 1);
    const CVector vb = eb.eigenvectors().col(eb.eigenvalues().size() - 1);
    acc += std::abs(va.dot(vb));
    ++count;
  }
  return acc / count;
}

}  // namespace

TEST_CASE("AR(1) lag-1 autocorrelation matches the coefficient") {
  std::mt19937_64 rng(1);
  const TimeSignal n = Ar1Noise(1000000, -0.7, rng);
  CHECK(Lag1(n.channel(0)) == doctest::Approx(-0.7).epsilon(0.01 / 0.7));
  CHECK(std::abs(Lag1(n.channel(0)) + 0.7) <= 0.01);
}

TEST_CASE("AR(1) with zero coefficient is white") {
  std::mt19937_64 rng(2);
  const TimeSignal n = Ar1Noise(400000, 0.0, rng);
  CHECK(std::abs(Lag1(n.channel(0))) < 0.01);
  const Spectrogram s = Analyze(n);
  std::vector<double> psd(s.bins(), 0.0);
  for (std::size_t l = 0; l < s.frames(); ++l)
    for (std::size_t k = 0; k < s.bins(); ++k) psd[k] += std::norm(s.at(0, k, l));
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 8; k < 64; ++k) lo += psd[k];
  for (std::size_t k = 192; k < 248; ++k) hi += psd[k];
  CHECK(lo / hi == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("unstable AR coefficient is a stability error") {
  std::mt19937_64 rng(3);
  for (double c : {1.0, -1.0, 1.5}) {
    try {
      Ar1Noise(100, c, rng);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kStability);
    }
  }
}

TEST_CASE("AR(1) is reproducible under a fixed seed") {
  std::mt19937_64 a(4), b(4);
  CHECK(Ar1Noise(5000, -0.7, a) == Ar1Noise(5000, -0.7, b));
}

TEST_CASE("mixture SNR, head and additivity contracts") {
  const MixtureSpec spec;
  const Sources src = Draw(spec, 5);
  const Mixture mix = Mix(Anechoic(), ArrayGeometry::Default(), spec, src.target, src.noise);
  const std::size_t ref = mix.reference_index, head = spec.head_samples(), total = spec.total_samples();
  REQUIRE(mix.y.length() == total);
  REQUIRE(head == 8000);

  const double snr = SegmentVariance(mix.x.channel(ref), head, total) /
                     SegmentVariance(mix.n_directional.channel(ref), head, total);
  CHECK(snr == doctest::Approx(std::pow(10.0, 0.3)).epsilon(0.02));

  for (std::size_t m = 0; m < mix.x.channels(); ++m)
    for (std::size_t t = 0; t < head; ++t) REQUIRE(mix.x(m, t) == 0.0);

  for (std::size_t i = 0; i < mix.y.data().size(); ++i)
    REQUIRE(mix.y.data()[i] == mix.x.data()[i] + mix.n.data()[i]);

  std::vector<double> sensor(total);
  for (std::size_t t = 0; t < total; ++t) sensor[t] = mix.n(ref, t) - mix.n_directional(ref, t);
  const double sensor_snr = SegmentVariance(mix.x.channel(ref), head, total) / SegmentVariance(sensor, 0, total);
  CHECK(10.0 * std::log10(sensor_snr) == doctest::Approx(30.0).epsilon(0.01));
}

TEST_CASE("anechoic mixture is the direct-path convolution") {
  const MixtureSpec spec;
  const Sources src = Draw(spec, 6);
  const Scenario s = Anechoic();
  const ArrayGeometry g = ArrayGeometry::Default();
  const Mixture mix = Mix(s, g, spec, src.target, src.noise);
  const RirSet h = SimulateRir(s, g, ProbePosition(s, s.source_theta, s.source_R), 0);
  const std::size_t head = spec.head_samples(), total = spec.total_samples();
  for (std::size_t m = 0; m < g.size(); ++m) {
    const auto oracle = NaiveConvolve(src.target.channel(0), h.filters[m], total - head);
    double err = 0.0, scale = 0.0;
    for (std::size_t t = 0; t < oracle.size(); ++t) {
      err = std::max(err, std::abs(mix.x(m, head + t) - oracle[t]));
      scale = std::max(scale, std::abs(oracle[t]));
    }
    CHECK(err <= 1e-10 * scale);
  }
}

TEST_CASE("mixing is deterministic") {
  const MixtureSpec spec;
  const Sources src = Draw(spec, 7);
  const Mixture a = Mix(Anechoic(), ArrayGeometry::Default(), spec, src.target, src.noise);
  const Mixture b = Mix(Anechoic(), ArrayGeometry::Default(), spec, src.target, src.noise);
  CHECK(a.y == b.y);
  CHECK(a.n == b.n);
}

TEST_CASE("silent or short targets are rejected") {
  const MixtureSpec spec;
  const Sources src = Draw(spec, 8);
  const TimeSignal silent(1, spec.total_samples() - spec.head_samples(), 16000);
  try {
    Mix(Anechoic(), ArrayGeometry::Default(), spec, silent, src.noise);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
  }
  const TimeSignal short_target = FitLength(src.target, 1000);
  CHECK_THROWS_AS(Mix(Anechoic(), ArrayGeometry::Default(), spec, short_target, src.noise), Error);
}

TEST_CASE("mixture spec validation") {
  MixtureSpec spec;
  spec.switch_time_s = 0.3;
  CHECK_THROWS_AS(spec.Validate(), Error);
  spec = MixtureSpec{};
  spec.noise_head_s = 5.0;
  CHECK_THROWS_AS(spec.Validate(), Error);
}

TEST_CASE("fast convolution matches the direct sum") {
  const TimeSignal a = RandomSignal(1, 3000, 9);
  const TimeSignal h = RandomSignal(1, 700, 10);
  const std::vector<double> hv(h.channel(0).begin(), h.channel(0).end());
  const auto fast = Convolve(a.channel(0), hv, 3699);
  const auto slow = NaiveConvolve(a.channel(0), hv, 3699);
  CHECK(RelativeL2(fast, slow) < 1e-12);
}

TEST_CASE("time-varying noise changes the spatial signature after 2 s") {
  const MixtureSpec spec;
  const Sources src = Draw(spec, 11);
  const Scenario s = Anechoic();
  const ArrayGeometry g = ArrayGeometry::Default();
  VariantInputs in{{src.target}, {src.noise}, 20.0};
  const Mixture stat = MakeVariant(NoiseType::kStationary, s, g, spec, in);
  const Mixture tv = MakeVariant(NoiseType::kTimeVaryingNoise, s, g, spec, in);
  const double sim_stat = SpatialSimilarity(stat.n, spec);
  const double sim_tv = SpatialSimilarity(tv.n, spec);
  CHECK(sim_stat > 0.95);
  CHECK(sim_tv < sim_stat - 0.1);
  CHECK(tv.extra_sources.size() == 1);
  const double ratio = tv.n_directional(0, 20000) / stat.n_directional(0, 20000);
  for (std::size_t t = 0; t < spec.switch_sample(); t += 101)
    REQUIRE(tv.n_directional(0, t) == doctest::Approx(ratio * stat.n_directional(0, t)).epsilon(1e-9));
}

TEST_CASE("babble keeps the aggregate SNR") {
  MixtureSpec spec;
  std::mt19937_64 rng(12);
  VariantInputs in;
  in.targets.push_back(SpeechLikeSignal(spec.total_samples() - spec.head_samples(), rng));
  for (int b = 0; b < spec.babble_count; ++b) in.noises.push_back(Ar1Noise(spec.total_samples(), -0.7, rng));
  for (NoiseType t : {NoiseType::kBabbleNoise, NoiseType::kBabbleVoice}) {
    const Mixture mix = MakeVariant(t, Anechoic(), ArrayGeometry::Default(), spec, in);
    const double snr = SegmentVariance(mix.x.channel(0), 8000, 64000) /
                       SegmentVariance(mix.n_directional.channel(0), 8000, 64000);
    CHECK(snr == doctest::Approx(std::pow(10.0, 0.3)).epsilon(0.02));
    CHECK(mix.extra_sources.size() == 10);
    CHECK(mix.scenario.noise_type == t);
    for (std::size_t i = 0; i < mix.y.data().size(); ++i)
      REQUIRE(mix.y.data()[i] == mix.x.data()[i] + mix.n.data()[i]);
  }
  in.noises.pop_back();
  try {
    MakeVariant(NoiseType::kBabbleNoise, Anechoic(), ArrayGeometry::Default(), spec, in);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
  }
}

TEST_CASE("speaker switch with the same talker and position equals the stationary mixture") {
  const MixtureSpec spec;
  const Sources src = Draw(spec, 13);
  const Scenario s = Anechoic();
  const ArrayGeometry g = ArrayGeometry::Default();
  const Mixture stat = Mix(s, g, spec, src.target, src.noise);
  VariantInputs in{{src.target, src.target}, {src.noise}, s.source_theta};
  const Mixture sw = MakeVariant(NoiseType::kSpeakerSwitch, s, g, spec, in);
  CHECK(sw.y == stat.y);
  CHECK(sw.x == stat.x);
  CHECK(sw.n == stat.n);
}

TEST_CASE("speaker switch swaps the talker at exactly 2 s") {
  const MixtureSpec spec;
  const Sources a = Draw(spec, 14);
  const Sources b = Draw(spec, 15);
  const Scenario s = Anechoic();
  const ArrayGeometry g = ArrayGeometry::Default();
  VariantInputs in{{a.target, b.target}, {a.noise}, 120.0};
  const Mixture sw = MakeVariant(NoiseType::kSpeakerSwitch, s, g, spec, in);
  const Mixture stat = Mix(s, g, spec, a.target, a.noise);
  const std::size_t k = spec.switch_sample();
  CHECK(k == 32000);
  const double pre_scale = sw.x(0, 20000) / stat.x(0, 20000);
  for (std::size_t t = 8000; t < k; t += 997) CHECK(sw.x(0, t) == doctest::Approx(pre_scale * stat.x(0, t)));
  bool differs = false;
  for (std::size_t t = k; t < k + 100; ++t) differs |= std::abs(sw.x(0, t) - pre_scale * stat.x(0, t)) > 1e-6;
  CHECK(differs);
}
