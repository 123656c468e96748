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

#include "beamlab/mixer.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include "beamlab/error.hpp"

namespace beamlab {
namespace {

std::mutex& PlanMutex() {
  static std::mutex m;
  return m;
}

constexpr std::uint64_t kSensorStream = 0x5e4507ULL;
constexpr std::uint64_t kVariantStream = 0xa11a7eULL;

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Multichannel convolution of a mono source with per-mic filters, with the
// source placed to start at `offset`.
TimeSignal Render(const TimeSignal& source, std::size_t src_len, const RirSet& rir,
                  std::size_t offset, std::size_t total, int fs) {
  TimeSignal out(rir.filters.size(), total, fs);
  if (offset >= total) return out;
  const auto src = source.channel(0).first(std::min(src_len, source.length()));
  for (std::size_t m = 0; m < rir.filters.size(); ++m) {
    const auto conv = Convolve(src, rir.filters[m], total - offset);
    auto ch = out.channel(m);
    std::copy(conv.begin(), conv.end(), ch.begin() + static_cast<std::ptrdiff_t>(offset));
  }
  return out;
}

void CheckSource(const TimeSignal& w, std::size_t need, int fs, const char* what) {
  if (w.sample_rate() != fs)
    throw Error(ErrorKind::kConfig, std::string(what) + " sample rate mismatch");
  if (w.channels() == 0 || w.length() < need)
    throw Error(ErrorKind::kInput, std::string(what) + " is shorter than required (" +
                                       std::to_string(need) + " samples)");
}

// Picks a direction on the scenario circle at least 20 deg from `avoid`
// that stays inside the room.
double SampleDirection(std::mt19937_64& rng, const Scenario& s, double radius, double avoid) {
  std::uniform_real_distribution<double> u(0.0, 180.0);
  for (int i = 0; i < 10000; ++i) {
    const double th = u(rng);
    if (std::abs(th - avoid) < 20.0) continue;
    if (InsideRoom(s, ProbePosition(s, th, radius))) return th;
  }
  throw Error(ErrorKind::kGeometry, "could not place an additional source");
}

// Scales the directional noise to the requested SNR, adds sensor noise and
// forms y = x + n.
Mixture Assemble(const Scenario& s, const ArrayGeometry& g, const MixtureSpec& spec,
                 TimeSignal x, TimeSignal n_dir_raw) {
  const std::size_t total = spec.total_samples();
  const std::size_t head = spec.head_samples();
  const std::size_t ref = g.reference_index;
  const double var_x = SegmentVariance(x.channel(ref), head, total);
  if (!(var_x > 0.0)) throw Error(ErrorKind::kInput, "silent target: SNR undefined");
  const double var_n = SegmentVariance(n_dir_raw.channel(ref), head, total);
  if (!(var_n > 0.0)) throw Error(ErrorKind::kInput, "silent directional noise: SNR undefined");
  const double gain = std::sqrt(var_x / (var_n * std::pow(10.0, spec.directional_snr_db / 10.0)));
  for (double& v : n_dir_raw.data()) v *= gain;

  Mixture mix;
  mix.scenario = s;
  mix.reference_index = ref;
  mix.head_samples = head;
  const int fs = spec.sample_rate;
  const double sensor_sd = std::sqrt(var_x / std::pow(10.0, spec.sensor_snr_db / 10.0));
  std::mt19937_64 rng(s.seed ^ kSensorStream);
  std::normal_distribution<double> normal(0.0, sensor_sd);
  mix.n = TimeSignal(g.size(), total, fs);
  for (std::size_t m = 0; m < g.size(); ++m)
    for (std::size_t t = 0; t < total; ++t) mix.n(m, t) = n_dir_raw(m, t) + normal(rng);
  mix.y = TimeSignal(g.size(), total, fs);
  for (std::size_t i = 0; i < mix.y.data().size(); ++i)
    mix.y.data()[i] = x.data()[i] + mix.n.data()[i];
  mix.x = std::move(x);
  mix.n_directional = std::move(n_dir_raw);
  return mix;
}

}  // namespace

std::size_t MixtureSpec::total_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}
std::size_t MixtureSpec::head_samples() const {
  return static_cast<std::size_t>(std::llround(noise_head_s * sample_rate));
}
std::size_t MixtureSpec::switch_sample() const {
  return static_cast<std::size_t>(std::llround(switch_time_s * sample_rate));
}

void MixtureSpec::Validate() const {
  if (sample_rate <= 0) throw Error(ErrorKind::kConfig, "sample rate must be positive");
  if (!(duration_s > noise_head_s) || noise_head_s < 0.0)
    throw Error(ErrorKind::kConfig, "duration must exceed the noise-only head");
  if (!(switch_time_s > noise_head_s && switch_time_s < duration_s))
    throw Error(ErrorKind::kConfig, "switch time must lie inside the speech segment");
  if (babble_count < 1) throw Error(ErrorKind::kConfig, "babble_count must be positive");
}

TimeSignal Ar1Noise(std::size_t length, double coeff, std::mt19937_64& rng, int sample_rate) {
  if (!(std::abs(coeff) < 1.0)) throw Error(ErrorKind::kStability, "AR(1) needs |coeff| < 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(length);
  double prev = length ? normal(rng) / std::sqrt(1.0 - coeff * coeff) : 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    out[t] = t == 0 ? prev : coeff * prev + normal(rng);
    prev = out[t];
  }
  return TimeSignal::Mono(std::move(out), sample_rate);
}

TimeSignal SpeechLikeSignal(std::size_t length, std::mt19937_64& rng, int sample_rate) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  // Kellet's pink filter.
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  std::vector<double> pink(length);
  for (auto& p : pink) {
    const double w = normal(rng);
    b0 = 0.99886 * b0 + w * 0.0555179;
    b1 = 0.99332 * b1 + w * 0.0750759;
    b2 = 0.96900 * b2 + w * 0.1538520;
    b3 = 0.86650 * b3 + w * 0.3104856;
    b4 = 0.55000 * b4 + w * 0.5329522;
    b5 = -0.7616 * b5 - w * 0.0168980;
    p = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
    b6 = w * 0.115926;
  }
  // Words of 0.2-0.6 s separated by 0.05-0.25 s pauses; 4 Hz syllables inside.
  std::vector<double> env(length, 0.0);
  std::size_t t = 0;
  while (t < length) {
    const auto word = static_cast<std::size_t>((0.2 + 0.4 * uni(rng)) * sample_rate);
    const double level = 0.5 + uni(rng);
    const double phase = 2.0 * std::numbers::pi * uni(rng);
    for (std::size_t i = 0; i < word && t + i < length; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(word);
      const double shape = std::sin(std::numbers::pi * u);
      const double syl = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 4.0 * i / sample_rate + phase);
      env[t + i] = level * shape * syl;
    }
    t += word + static_cast<std::size_t>((0.05 + 0.2 * uni(rng)) * sample_rate);
  }
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = 0.1 * pink[i] * env[i];
  return TimeSignal::Mono(std::move(out), sample_rate);
}

std::vector<double> Convolve(std::span<const double> a, std::span<const double> h,
                             std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  if (a.empty() || h.empty() || out_len == 0) return out;
  if (h.size() <= 64 || a.size() <= 64) {
    for (std::size_t i = 0; i < std::min(a.size(), out_len); ++i) {
      const std::size_t jmax = std::min(h.size(), out_len - i);
      for (std::size_t j = 0; j < jmax; ++j) out[i + j] += a[i] * h[j];
    }
    return out;
  }
  const std::size_t full = std::min(a.size() + h.size() - 1, out_len);
  const std::size_t p = NextPow2(a.size() + h.size() - 1);
  std::vector<double> ra(p, 0.0), rh(p, 0.0);
  std::copy(a.begin(), a.end(), ra.begin());
  std::copy(h.begin(), h.end(), rh.begin());
  std::vector<cd> fa(p / 2 + 1), fh(p / 2 + 1);
  fftw_plan pa, ph, inv;
  {
    std::lock_guard<std::mutex> lock(PlanMutex());
    pa = fftw_plan_dft_r2c_1d(static_cast<int>(p), ra.data(),
                              reinterpret_cast<fftw_complex*>(fa.data()), FFTW_ESTIMATE);
    ph = fftw_plan_dft_r2c_1d(static_cast<int>(p), rh.data(),
                              reinterpret_cast<fftw_complex*>(fh.data()), FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(p), reinterpret_cast<fftw_complex*>(fa.data()),
                               ra.data(), FFTW_ESTIMATE);
  }
  fftw_execute(pa);
  fftw_execute(ph);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fh[i];
  fftw_execute(inv);
  {
    std::lock_guard<std::mutex> lock(PlanMutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(ph);
    fftw_destroy_plan(inv);
  }
  const double scale = 1.0 / static_cast<double>(p);
  for (std::size_t i = 0; i < full; ++i) out[i] = ra[i] * scale;
  return out;
}

double SegmentVariance(std::span<const double> x, std::size_t begin, std::size_t end) {
  end = std::min(end, x.size());
  if (end <= begin) return 0.0;
  const auto seg = x.subspan(begin, end - begin);
  const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / seg.size();
  double acc = 0.0;
  for (double v : seg) acc += (v - mean) * (v - mean);
  return acc / seg.size();
}

Mixture Mix(const Scenario& s, const ArrayGeometry& g, const MixtureSpec& spec,
            const TimeSignal& target, const TimeSignal& noise) {
  spec.Validate();
  const std::size_t total = spec.total_samples();
  const std::size_t head = spec.head_samples();
  const int fs = spec.sample_rate;
  CheckSource(target, total - head, fs, "target");
  CheckSource(noise, total, fs, "noise");
  if (SegmentVariance(target.channel(0), 0, total - head) == 0.0)
    throw Error(ErrorKind::kInput, "silent target: SNR undefined");

  RirOptions opt;
  opt.sample_rate = fs;
  const auto h_t = SimulateRir(s, g, ProbePosition(s, s.source_theta, s.source_R), spec.rir_order, opt);
  const auto h_n = SimulateRir(s, g, ProbePosition(s, s.noise_theta, s.noise_R), spec.rir_order, opt);
  TimeSignal x = Render(target, total - head, h_t, head, total, fs);
  TimeSignal n = Render(noise, total, h_n, 0, total, fs);
  return Assemble(s, g, spec, std::move(x), std::move(n));
}

Mixture MakeVariant(NoiseType type, const Scenario& s, const ArrayGeometry& g,
                    const MixtureSpec& spec, const VariantInputs& in) {
  spec.Validate();
  const std::size_t total = spec.total_samples();
  const std::size_t head = spec.head_samples();
  const std::size_t sw = spec.switch_sample();
  const int fs = spec.sample_rate;
  if (in.targets.empty()) throw Error(ErrorKind::kInput, "no target waveform supplied");
  CheckSource(in.targets[0], total - head, fs, "target");
  Scenario scen = s;
  scen.noise_type = type;

  RirOptions opt;
  opt.sample_rate = fs;
  std::mt19937_64 rng(s.seed ^ kVariantStream);
  const auto rir_at = [&](double theta, double radius) {
    return SimulateRir(s, g, ProbePosition(s, theta, radius), spec.rir_order, opt);
  };

  std::vector<Vec3> extra;
  TimeSignal x = Render(in.targets[0], total - head, rir_at(s.source_theta, s.source_R), head, total, fs);
  TimeSignal n(g.size(), total, fs);

  switch (type) {
    case NoiseType::kStationary:
    case NoiseType::kTimeVaryingNoise: {
      if (in.noises.empty()) throw Error(ErrorKind::kInput, "no noise waveform supplied");
      CheckSource(in.noises[0], total, fs, "noise");
      n = Render(in.noises[0], total, rir_at(s.noise_theta, s.noise_R), 0, total, fs);
      if (type == NoiseType::kTimeVaryingNoise) {
        const double th2 = in.second_theta.value_or(SampleDirection(rng, s, s.noise_R, s.source_theta));
        extra.push_back(ProbePosition(s, th2, s.noise_R));
        const auto n2 = Render(in.noises[0], total, rir_at(th2, s.noise_R), 0, total, fs);
        for (std::size_t m = 0; m < g.size(); ++m)
          for (std::size_t t = sw; t < total; ++t) n(m, t) = n2(m, t);
      }
      break;
    }
    case NoiseType::kSpeakerSwitch: {
      if (in.noises.empty()) throw Error(ErrorKind::kInput, "no noise waveform supplied");
      CheckSource(in.noises[0], total, fs, "noise");
      const TimeSignal& second = in.targets.size() > 1 ? in.targets[1] : in.targets[0];
      CheckSource(second, total - head, fs, "second target");
      const double th2 = in.second_theta.value_or(SampleDirection(rng, s, s.source_R, s.noise_theta));
      extra.push_back(ProbePosition(s, th2, s.source_R));
      const auto x2 = Render(second, total - head, rir_at(th2, s.source_R), head, total, fs);
      for (std::size_t m = 0; m < g.size(); ++m)
        for (std::size_t t = sw; t < total; ++t) x(m, t) = x2(m, t);
      n = Render(in.noises[0], total, rir_at(s.noise_theta, s.noise_R), 0, total, fs);
      break;
    }
    case NoiseType::kBabbleNoise:
    case NoiseType::kBabbleVoice: {
      const auto count = static_cast<std::size_t>(spec.babble_count);
      if (in.noises.size() < count)
        throw Error(ErrorKind::kInput, "babble needs " + std::to_string(count) +
                                           " source waveforms, got " + std::to_string(in.noises.size()));
      ScenarioRanges r;
      const double r_hi = RadiusUpperBound(s, r);
      std::uniform_real_distribution<double> radius(1.0, std::max(1.0, r_hi));
      for (std::size_t b = 0; b < count; ++b) {
        CheckSource(in.noises[b], total, fs, "babble source");
        const double rb = radius(rng);
        const double th = SampleDirection(rng, s, rb, s.source_theta);
        extra.push_back(ProbePosition(s, th, rb));
        const auto part = Render(in.noises[b], total, rir_at(th, rb), 0, total, fs);
        for (std::size_t i = 0; i < n.data().size(); ++i) n.data()[i] += part.data()[i];
      }
      break;
    }
  }
  Mixture mix = Assemble(scen, g, spec, std::move(x), std::move(n));
  mix.extra_sources = std::move(extra);
  return mix;
}

}  // namespace beamlab
