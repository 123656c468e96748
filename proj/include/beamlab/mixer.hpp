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

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "beamlab/room.hpp"
#include "beamlab/signal.hpp"

namespace beamlab {

struct MixtureSpec {
  double directional_snr_db = 3.0;
  double sensor_snr_db = 30.0;
  double duration_s = 4.0;
  double noise_head_s = 0.5;
  double switch_time_s = 2.0;
  int babble_count = 10;
  int sample_rate = 16000;
  // Reflection order for scene RIRs; full order collapses to the direct
  // path when T60 == 0.
  int rir_order = kFullOrder;

  std::size_t total_samples() const;
  std::size_t head_samples() const;
  std::size_t switch_sample() const;
  void Validate() const;
};

// y = x + n, element for element. x is the reverberant target at the mics
// and is exactly zero over the noise-only head.
struct Mixture {
  TimeSignal y;
  TimeSignal x;
  TimeSignal n;
  TimeSignal n_directional;
  Scenario scenario;
  std::vector<Vec3> extra_sources;  // switch/babble positions
  std::size_t reference_index = 0;
  std::size_t head_samples = 0;
};

// n[t] = coeff * n[t-1] + e[t], e ~ N(0, 1), started from the stationary
// distribution.
TimeSignal Ar1Noise(std::size_t length, double coeff, std::mt19937_64& rng,
                    int sample_rate = 16000);

// Speech-shaped stand-in for a talker: pink noise under a random
// syllable/word gating envelope.
TimeSignal SpeechLikeSignal(std::size_t length, std::mt19937_64& rng, int sample_rate = 16000);

// First `out_len` samples of the linear convolution a * h.
std::vector<double> Convolve(std::span<const double> a, std::span<const double> h,
                             std::size_t out_len);

// Reference-channel variance over [begin, end).
double SegmentVariance(std::span<const double> x, std::size_t begin, std::size_t end);

// Stationary mixture: target from source_theta, directional noise from
// noise_theta. Sensor noise is drawn from the scenario seed.
Mixture Mix(const Scenario& s, const ArrayGeometry& g, const MixtureSpec& spec,
            const TimeSignal& target, const TimeSignal& noise);

struct VariantInputs {
  // targets[0] is the main talker, targets[1] the switched-in one.
  std::vector<TimeSignal> targets;
  // noises[0] is the directional noise; babble uses the first babble_count.
  std::vector<TimeSignal> noises;
  std::optional<double> second_theta;  // new noise / talker direction
};

Mixture MakeVariant(NoiseType type, const Scenario& s, const ArrayGeometry& g,
                    const MixtureSpec& spec, const VariantInputs& in);

}  // namespace beamlab
