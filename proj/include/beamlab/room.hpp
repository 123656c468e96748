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

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "beamlab/signal.hpp"

namespace beamlab {

using Vec3 = std::array<double, 3>;

enum class NoiseType {
  kStationary,
  kTimeVaryingNoise,
  kSpeakerSwitch,
  kBabbleNoise,
  kBabbleVoice,
};

std::string NoiseTypeName(NoiseType t);
NoiseType ParseNoiseType(const std::string& name);

// One simulated acoustic scene. Angles in degrees, lengths in meters.
// Thetas are measured from the array axis; tilt_phi rotates the axis away
// from the room's x axis.
struct Scenario {
  double Lx = 7.0;
  double Ly = 7.0;
  double Lz = 3.0;
  double T60 = 0.0;
  Vec3 mic_center{3.5, 2.0, 1.0};
  double tilt_phi = 0.0;
  double source_theta = 90.0;
  double noise_theta = 30.0;
  double source_R = 2.0;
  double noise_R = 2.0;
  std::uint64_t seed = 0;
  NoiseType noise_type = NoiseType::kStationary;

  bool operator==(const Scenario&) const = default;
};

// Sampling ranges; defaults reproduce the dataset protocol table.
struct ScenarioRanges {
  double room_min = 6.0, room_max = 9.0;
  double height = 3.0;
  bool reverberant = false;
  double t60_min = 0.3, t60_max = 0.5;
  double center_x_margin = 2.5;  // x in [m, Lx - m]
  double center_y_min = 0.5;     // y in [y_min, Ly - y_top]
  double center_y_top = 2.5;
  double center_z = 1.0;
  double tilt_min = -45.0, tilt_max = 45.0;
  double theta_min = 0.0, theta_max = 180.0;
  double min_separation = 20.0;
  double radius_min = 1.8;
  double radius_cap = 2.2;
  double wall_clearance = 0.5;  // used in the radius upper bound
  int max_attempts = 10000;
  NoiseType noise_type = NoiseType::kStationary;

  // Throws kConfig when no scenario can satisfy the constraints.
  void Validate() const;
};

// Draws scenarios by rejection: a draw that violates the angular
// separation, the radius interval or room containment is discarded whole.
Scenario SampleScenario(std::mt19937_64& rng, const ScenarioRanges& ranges = {});

// Upper radius bound for a given draw.
double RadiusUpperBound(const Scenario& s, const ScenarioRanges& ranges);

struct ArrayGeometry {
  // Positions in the array frame; x is the array axis.
  std::vector<Vec3> mic_positions;
  std::size_t reference_index = 0;

  // Uniform or non-uniform linear array centered on its midpoint.
  static ArrayGeometry Linear(const std::vector<double>& spacings_m,
                              std::size_t reference_index = 0);
  // 4 mics with 3, 5 and 7 cm gaps.
  static ArrayGeometry Default();

  std::size_t size() const { return mic_positions.size(); }
  void Validate() const;
};

std::vector<Vec3> MicWorldPositions(const Scenario& s, const ArrayGeometry& g);
Vec3 ProbePosition(const Scenario& s, double theta_deg, double radius);
bool InsideRoom(const Scenario& s, const Vec3& p);
double Distance(const Vec3& a, const Vec3& b);

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr int kFullOrder = -1;

struct RirOptions {
  int sample_rate = 16000;
  double c = kSpeedOfSound;
  int kernel_half_width = 32;
  double full_order_horizon = 1.0;  // full order: images arriving within horizon * T60
};

struct RirSet {
  std::vector<std::vector<double>> filters;
  int sample_rate = 16000;
  int order = 0;
  std::size_t length() const { return filters.empty() ? 0 : filters.front().size(); }
};

// Uniform wall reflection coefficient from T60 via Sabine; 0 for T60 == 0.
double ReflectionCoefficient(const Scenario& s, double c = kSpeedOfSound);

// Image-source RIRs from `source` to every microphone. order == kFullOrder
// keeps every image arriving within full_order_horizon * T60 of the direct path.
RirSet SimulateRir(const Scenario& s, const ArrayGeometry& g, const Vec3& source,
                   int order, const RirOptions& opt = {});

namespace serial {
RirSet SimulateRir(const Scenario& s, const ArrayGeometry& g, const Vec3& source,
                   int order, const RirOptions& opt = {});
}  // namespace serial

// Frequency responses h(k, theta) on the one-sided `frame_len` bin grid,
// probe sources on a circle of `radius` around the array center.
struct AtfGrid {
  std::size_t mics = 0, bins = 0;
  std::vector<double> thetas;
  std::vector<cd> data;  // (a * bins + k) * mics + m

  std::size_t angles() const { return thetas.size(); }
  cd& at(std::size_t m, std::size_t k, std::size_t a) { return data[(a * bins + k) * mics + m]; }
  const cd& at(std::size_t m, std::size_t k, std::size_t a) const {
    return data[(a * bins + k) * mics + m];
  }
  const cd* vec(std::size_t k, std::size_t a) const { return data.data() + (a * bins + k) * mics; }
};

// One-sided DFT of an impulse response evaluated on the frame_len grid,
// using all taps (no truncation to frame_len).
std::vector<cd> FrequencyResponse(const std::vector<double>& h, int frame_len);

AtfGrid ComputeAtfGrid(const Scenario& s, const ArrayGeometry& g,
                       const std::vector<double>& thetas, double radius, int order,
                       int frame_len = 512, const RirOptions& opt = {});

}  // namespace beamlab
