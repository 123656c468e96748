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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamlab/beamformer.hpp"
#include "beamlab/signal.hpp"
#include "beamlab/stft.hpp"

namespace beamlab {

inline constexpr double kMetricClampDb = 60.0;

// Scale-invariant SDR in dB, clamped to [-60, 60]. No mean removal.
double SiSdr(std::span<const double> ref, std::span<const double> est);
double SiSdr(const TimeSignal& ref, const TimeSignal& est);

struct NrResult {
  double db = 0.0;
  bool clamped = false;  // noise head had zero variance
};

// 10 log10(var(est[head, head + tail)) / var(est[0, head))).
NrResult NoiseReduction(std::span<const double> est, int sample_rate, double head_s = 0.5,
                        double tail_s = 3.5);
NrResult NoiseReduction(const TimeSignal& est, double head_s = 0.5, double tail_s = 3.5);

double Mae(std::span<const double> a, std::span<const double> b);

struct LossWeights {
  double beta_mae = 0.9;
  double beta_reg = 0.1;
  void Validate() const;
};

struct Losses {
  double mae = 0.0;
  std::optional<double> reg;
  std::optional<double> combined;
};

// x_d = istft(w1^H stft(x_clean)), fitted to the length of x_ref.
TimeSignal DistortionlessOutput(const StageWeights& w, const TimeSignal& x_clean,
                                const StftConfig& cfg = {});

Losses ComputeLosses(const TimeSignal& x_ref, const TimeSignal& estimate,
                     const StageWeights* w = nullptr, const TimeSignal* x_clean = nullptr,
                     const LossWeights& betas = {}, const StftConfig& cfg = {});

struct UtteranceMetrics {
  std::string id;
  std::string method;
  std::optional<double> si_sdr_in_db;  // against the noisy reference channel
  double si_sdr_db = 0.0;
  std::optional<double> nr_in_db;
  double nr_db = 0.0;
  bool nr_clamped = false;
  Losses losses;
  std::size_t degenerate_bins = 0;

  std::optional<double> delta_si_sdr_db() const;
  std::optional<double> delta_nr_db() const;
};

struct Failure {
  std::string id;
  std::string kind;
  std::string message;
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
};

Summary Summarize(std::vector<double> values);

struct EvalReport {
  std::vector<UtteranceMetrics> utterances;
  std::vector<Failure> failures;
  LossWeights betas;

  nlohmann::json ToJson() const;
};

// `y_ref` (noisy reference channel) is optional; without it no deltas are
// reported. Regularization needs both `w` and `x_clean`.
UtteranceMetrics ScoreUtterance(const std::string& id, const TimeSignal& x_ref,
                                const TimeSignal* y_ref, const TimeSignal& estimate,
                                const StageWeights* w = nullptr,
                                const TimeSignal* x_clean = nullptr,
                                const LossWeights& betas = {}, const StftConfig& cfg = {});

void to_json(nlohmann::json& j, const UtteranceMetrics& u);
void from_json(const nlohmann::json& j, UtteranceMetrics& u);

}  // namespace beamlab
