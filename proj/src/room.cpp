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

#include "beamlab/room.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <omp.h>

#include "beamlab/error.hpp"

namespace beamlab {
namespace {

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double Deg2Rad(double d) { return d * std::numbers::pi / 180.0; }

struct Image {
  double delay;  // samples
  double gain;
};

// Enumerates the images contributing to one source/mic pair.
std::vector<Image> CollectImages(const Scenario& s, const Vec3& src, const Vec3& mic,
                                 double beta, int order, const RirOptions& opt) {
  const double cts = opt.c / opt.sample_rate;
  const Vec3 room{s.Lx, s.Ly, s.Lz};
  const double d0 = Distance(src, mic);
  std::vector<Image> images;

  // Full order keeps every image arriving within the horizon, no order cap.
  const bool full = order == kFullOrder;
  const double max_dist = full ? d0 + opt.c * opt.full_order_horizon * s.T60 : 0.0;
  std::array<int, 3> n{};
  for (int a = 0; a < 3; ++a)
    n[a] = full ? static_cast<int>(std::ceil(max_dist / (2.0 * room[a]))) + 1 : order / 2 + 1;

  for (int mx = -n[0]; mx <= n[0]; ++mx)
    for (int my = -n[1]; my <= n[1]; ++my)
      for (int mz = -n[2]; mz <= n[2]; ++mz)
        for (int q = 0; q <= 1; ++q)
          for (int j = 0; j <= 1; ++j)
            for (int k = 0; k <= 1; ++k) {
              const int refl = std::abs(2 * mx - q) + std::abs(2 * my - j) + std::abs(2 * mz - k);
              if (!full && refl > order) continue;
              const double dx = (1 - 2 * q) * src[0] - mic[0] + 2 * mx * room[0];
              const double dy = (1 - 2 * j) * src[1] - mic[1] + 2 * my * room[1];
              const double dz = (1 - 2 * k) * src[2] - mic[2] + 2 * mz * room[2];
              const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
              if (full && dist > max_dist) continue;
              const double att = refl == 0 ? 1.0 : std::pow(beta, refl);
              if (att == 0.0) continue;
              images.push_back({dist / cts, att / (4.0 * std::numbers::pi * dist)});
            }
  return images;
}

void AddImage(std::vector<double>& h, const Image& im, int hw) {
  const int taps = 2 * hw;
  const double whole = std::floor(im.delay);
  const double frac = im.delay - whole;
  const long start = static_cast<long>(whole) - hw + 1;
  // sin(pi (i - frac)) = -(-1)^i sin(pi frac); the window phase advances by a
  // fixed rotation per tap.
  const double sin_frac = std::sin(std::numbers::pi * (frac <= 0.5 ? frac : 1.0 - frac));
  const double t0 = (1 - hw) - frac;
  const double step = 2.0 * std::numbers::pi / taps;
  const std::complex<double> rot(std::cos(step), std::sin(step));
  std::complex<double> phase(std::cos(step * t0), std::sin(step * t0));
  for (int n = 0; n < taps; ++n, phase *= rot) {
    const long idx = start + n;
    if (idx < 0 || idx >= static_cast<long>(h.size())) continue;
    const int i = n - hw + 1;
    const double t = i - frac;
    const double win = 0.5 * (1.0 + phase.real());
    const double sinc =
        t == 0.0 ? 1.0 : ((i % 2 == 0) ? -sin_frac : sin_frac) / (std::numbers::pi * t);
    h[idx] += im.gain * win * sinc;
  }
}

void CheckRirInputs(const Scenario& s, const ArrayGeometry& g, const Vec3& source) {
  g.Validate();
  if (s.T60 < 0.0) throw Error(ErrorKind::kModel, "T60 must be non-negative");
  if (!InsideRoom(s, source)) throw Error(ErrorKind::kGeometry, "source outside the room");
  for (const auto& p : MicWorldPositions(s, g))
    if (!InsideRoom(s, p)) throw Error(ErrorKind::kGeometry, "microphone outside the room");
}

std::size_t RirLength(const std::vector<std::vector<Image>>& per_mic, int hw) {
  double max_delay = 0.0;
  for (const auto& ims : per_mic)
    for (const auto& im : ims) max_delay = std::max(max_delay, im.delay);
  return static_cast<std::size_t>(std::floor(max_delay)) + hw + 1;
}

}  // namespace

std::string NoiseTypeName(NoiseType t) {
  switch (t) {
    case NoiseType::kStationary: return "stationary";
    case NoiseType::kTimeVaryingNoise: return "time_varying_noise";
    case NoiseType::kSpeakerSwitch: return "speaker_switch";
    case NoiseType::kBabbleNoise: return "babble_noise";
    case NoiseType::kBabbleVoice: return "babble_voice";
  }
  return "stationary";
}

NoiseType ParseNoiseType(const std::string& name) {
  for (auto t : {NoiseType::kStationary, NoiseType::kTimeVaryingNoise, NoiseType::kSpeakerSwitch,
                 NoiseType::kBabbleNoise, NoiseType::kBabbleVoice})
    if (NoiseTypeName(t) == name) return t;
  throw Error(ErrorKind::kConfig, "unknown noise type '" + name + "'");
}

void ScenarioRanges::Validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::kConfig, m); };
  if (room_min <= 0.0 || room_min > room_max) fail("bad room size range");
  if (height <= 0.0) fail("bad room height");
  if (reverberant && (t60_min <= 0.0 || t60_min > t60_max)) fail("bad T60 range");
  if (room_max < 2.0 * center_x_margin) fail("room too small for the array x range");
  if (center_y_min > room_max - center_y_top) fail("empty array y range");
  if (center_z <= 0.0 || center_z >= height) fail("array height outside the room");
  if (tilt_min > tilt_max || theta_min > theta_max) fail("bad angle range");
  if (min_separation > theta_max - theta_min) fail("angular separation cannot be met");
  if (radius_min > radius_cap) fail("empty radius interval");
  const double best = std::min({room_max / 2.0 - wall_clearance,
                                room_max - center_y_min - wall_clearance, radius_cap});
  if (best < radius_min) fail("empty radius interval for every room in range");
  if (max_attempts <= 0) fail("max_attempts must be positive");
}

double RadiusUpperBound(const Scenario& s, const ScenarioRanges& r) {
  const double x = s.mic_center[0], y = s.mic_center[1];
  return std::min({x - r.wall_clearance, s.Lx - x - r.wall_clearance,
                   s.Ly - y - r.wall_clearance, r.radius_cap});
}

Scenario SampleScenario(std::mt19937_64& rng, const ScenarioRanges& r) {
  r.Validate();
  const ArrayGeometry probe_geometry = ArrayGeometry::Default();
  for (int attempt = 0; attempt < r.max_attempts; ++attempt) {
    Scenario s;
    s.seed = rng();
    s.noise_type = r.noise_type;
    s.Lx = Uniform(rng, r.room_min, r.room_max);
    s.Ly = Uniform(rng, r.room_min, r.room_max);
    s.Lz = r.height;
    s.T60 = r.reverberant ? Uniform(rng, r.t60_min, r.t60_max) : 0.0;
    const double x_lo = r.center_x_margin, x_hi = s.Lx - r.center_x_margin;
    const double y_lo = r.center_y_min, y_hi = s.Ly - r.center_y_top;
    if (x_lo > x_hi || y_lo > y_hi) continue;
    s.mic_center = {Uniform(rng, x_lo, x_hi), Uniform(rng, y_lo, y_hi), r.center_z};
    s.tilt_phi = Uniform(rng, r.tilt_min, r.tilt_max);
    s.source_theta = Uniform(rng, r.theta_min, r.theta_max);
    s.noise_theta = Uniform(rng, r.theta_min, r.theta_max);
    if (std::abs(s.source_theta - s.noise_theta) < r.min_separation) continue;
    const double hi = RadiusUpperBound(s, r);
    if (hi < r.radius_min) continue;
    s.source_R = Uniform(rng, r.radius_min, hi);
    s.noise_R = s.source_R;
    if (!InsideRoom(s, ProbePosition(s, s.source_theta, s.source_R)) ||
        !InsideRoom(s, ProbePosition(s, s.noise_theta, s.noise_R)))
      continue;
    bool mics_inside = true;
    for (const auto& p : MicWorldPositions(s, probe_geometry)) mics_inside &= InsideRoom(s, p);
    if (!mics_inside) continue;
    if (s.T60 > 0.0) {
      try {
        ReflectionCoefficient(s);
      } catch (const Error&) {
        continue;
      }
    }
    return s;
  }
  throw Error(ErrorKind::kConfig, "no feasible scenario after max_attempts draws");
}

ArrayGeometry ArrayGeometry::Linear(const std::vector<double>& spacings_m,
                                    std::size_t reference_index) {
  ArrayGeometry g;
  std::vector<double> xs{0.0};
  for (double d : spacings_m) xs.push_back(xs.back() + d);
  const double mid = xs.back() / 2.0;
  for (double x : xs) g.mic_positions.push_back({x - mid, 0.0, 0.0});
  g.reference_index = reference_index;
  g.Validate();
  return g;
}

ArrayGeometry ArrayGeometry::Default() { return Linear({0.03, 0.05, 0.07}); }

void ArrayGeometry::Validate() const {
  if (mic_positions.size() < 2) throw Error(ErrorKind::kGeometry, "need at least 2 microphones");
  if (reference_index >= mic_positions.size())
    throw Error(ErrorKind::kGeometry, "reference index out of range");
  for (std::size_t i = 0; i < mic_positions.size(); ++i)
    for (std::size_t j = i + 1; j < mic_positions.size(); ++j)
      if (Distance(mic_positions[i], mic_positions[j]) < 1e-9)
        throw Error(ErrorKind::kGeometry, "duplicate microphone positions");
}

std::vector<Vec3> MicWorldPositions(const Scenario& s, const ArrayGeometry& g) {
  const double phi = Deg2Rad(s.tilt_phi);
  const double c = std::cos(phi), sn = std::sin(phi);
  std::vector<Vec3> out;
  out.reserve(g.size());
  for (const auto& p : g.mic_positions)
    out.push_back({s.mic_center[0] + c * p[0] - sn * p[1],
                   s.mic_center[1] + sn * p[0] + c * p[1], s.mic_center[2] + p[2]});
  return out;
}

Vec3 ProbePosition(const Scenario& s, double theta_deg, double radius) {
  const double a = Deg2Rad(theta_deg + s.tilt_phi);
  return {s.mic_center[0] + radius * std::cos(a), s.mic_center[1] + radius * std::sin(a),
          s.mic_center[2]};
}

bool InsideRoom(const Scenario& s, const Vec3& p) {
  return p[0] > 0.0 && p[0] < s.Lx && p[1] > 0.0 && p[1] < s.Ly && p[2] > 0.0 && p[2] < s.Lz;
}

double Distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double ReflectionCoefficient(const Scenario& s, double c) {
  if (s.T60 < 0.0) throw Error(ErrorKind::kModel, "T60 must be non-negative");
  if (s.T60 == 0.0) return 0.0;
  const double volume = s.Lx * s.Ly * s.Lz;
  const double surface = 2.0 * (s.Lx * s.Ly + s.Lx * s.Lz + s.Ly * s.Lz);
  const double alpha = 24.0 * std::log(10.0) * volume / (c * surface * s.T60);
  if (alpha > 1.0)
    throw Error(ErrorKind::kModel, "T60 too small for this room (Sabine absorption > 1)");
  return std::sqrt(1.0 - alpha);
}

namespace serial {

RirSet SimulateRir(const Scenario& s, const ArrayGeometry& g, const Vec3& source, int order,
                   const RirOptions& opt) {
  CheckRirInputs(s, g, source);
  if (order < kFullOrder) throw Error(ErrorKind::kConfig, "negative reflection order");
  const double beta = ReflectionCoefficient(s, opt.c);
  const auto mics = MicWorldPositions(s, g);
  std::vector<std::vector<Image>> per_mic;
  for (const auto& mic : mics) per_mic.push_back(CollectImages(s, source, mic, beta, order, opt));

  RirSet out;
  out.sample_rate = opt.sample_rate;
  out.order = order;
  const std::size_t len = RirLength(per_mic, opt.kernel_half_width);
  for (const auto& ims : per_mic) {
    std::vector<double> h(len, 0.0);
    for (const auto& im : ims) AddImage(h, im, opt.kernel_half_width);
    out.filters.push_back(std::move(h));
  }
  return out;
}

}  // namespace serial

RirSet SimulateRir(const Scenario& s, const ArrayGeometry& g, const Vec3& source, int order,
                   const RirOptions& opt) {
  CheckRirInputs(s, g, source);
  if (order < kFullOrder) throw Error(ErrorKind::kConfig, "negative reflection order");
  const double beta = ReflectionCoefficient(s, opt.c);
  const auto mics = MicWorldPositions(s, g);
  std::vector<std::vector<Image>> per_mic(mics.size());
  for (std::size_t m = 0; m < mics.size(); ++m)
    per_mic[m] = CollectImages(s, source, mics[m], beta, order, opt);

  RirSet out;
  out.sample_rate = opt.sample_rate;
  out.order = order;
  const std::size_t len = RirLength(per_mic, opt.kernel_half_width);
  out.filters.assign(mics.size(), std::vector<double>(len, 0.0));

  // Images are split across threads; each thread owns a private accumulator
  // that is merged in thread order.
  for (std::size_t m = 0; m < mics.size(); ++m) {
    const auto& ims = per_mic[m];
    auto& h = out.filters[m];
    const auto count = static_cast<std::ptrdiff_t>(ims.size());
#pragma omp parallel
    {
      std::vector<double> local(len, 0.0);
#pragma omp for schedule(static) nowait
      for (std::ptrdiff_t i = 0; i < count; ++i) AddImage(local, ims[i], opt.kernel_half_width);
#pragma omp for ordered schedule(static, 1)
      for (int t = 0; t < omp_get_num_threads(); ++t) {
#pragma omp ordered
        for (std::size_t n = 0; n < len; ++n) h[n] += local[n];
      }
    }
  }
  return out;
}

std::vector<cd> FrequencyResponse(const std::vector<double>& h, int frame_len) {
  const std::size_t bins = frame_len / 2 + 1;
  std::vector<cd> twiddle(frame_len);
  for (int i = 0; i < frame_len; ++i)
    twiddle[i] = std::polar(1.0, -2.0 * std::numbers::pi * i / frame_len);
  std::vector<cd> out(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    cd acc{0.0, 0.0};
    for (std::size_t t = 0; t < h.size(); ++t) acc += h[t] * twiddle[(k * t) % frame_len];
    out[k] = acc;
  }
  out.front().imag(0.0);
  if (frame_len % 2 == 0) out.back().imag(0.0);
  return out;
}

AtfGrid ComputeAtfGrid(const Scenario& s, const ArrayGeometry& g,
                       const std::vector<double>& thetas, double radius, int order,
                       int frame_len, const RirOptions& opt) {
  g.Validate();
  AtfGrid grid;
  grid.mics = g.size();
  grid.bins = frame_len / 2 + 1;
  grid.thetas = thetas;
  grid.data.assign(grid.mics * grid.bins * thetas.size(), cd{});
  for (double th : thetas)
    if (!InsideRoom(s, ProbePosition(s, th, radius)))
      throw Error(ErrorKind::kGeometry,
                  "probe at " + std::to_string(th) + " deg is outside the room");

  const auto count = static_cast<std::ptrdiff_t>(thetas.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t a = 0; a < count; ++a) {
    const auto rir = serial::SimulateRir(s, g, ProbePosition(s, thetas[a], radius), order, opt);
    for (std::size_t m = 0; m < grid.mics; ++m) {
      const auto resp = FrequencyResponse(rir.filters[m], frame_len);
      for (std::size_t k = 0; k < grid.bins; ++k) grid.at(m, k, a) = resp[k];
    }
  }
  return grid;
}

}  // namespace beamlab
