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
#include <string>
#include <vector>

#include "beamlab/beamformer.hpp"
#include "beamlab/json_io.hpp"
#include "beamlab/metrics.hpp"
#include "beamlab/mixer.hpp"
#include "beamlab/postfilter.hpp"
#include "beamlab/room.hpp"

namespace beamlab {

enum class Method { kPassthrough, kMvdr, kMvdrPf, kMpdr, kLearned };

std::string MethodName(Method m);
Method ParseMethod(const std::string& name);

struct RunConfig {
  std::string manifest;
  Method method = Method::kMvdrPf;
  bool postfilter = false;  // adds LSA after mvdr, mpdr or learned stage 1
  std::string weights_dir;  // learned: <id>.exbf or <id>.json
  std::string out_dir;
  std::uint64_t seed = 0;
  std::optional<std::size_t> noise_frames;  // default: frames inside the noise head
  std::size_t reference_index = 0;
  StftConfig stft;
  PostfilterConfig pf;
  LossWeights betas;

  bool uses_postfilter() const { return method == Method::kMvdrPf || postfilter; }
  void Validate() const;
};

struct Enhanced {
  TimeSignal x_hat;
  std::size_t noise_frames = 0;
  std::size_t degenerate_bins = 0;
  std::optional<StageWeights> weights;
};

// y: multichannel noisy input whose first `head_samples` are noise only.
// Output has y's length and sample rate.
Enhanced EnhanceUtterance(const TimeSignal& y, std::size_t head_samples, const RunConfig& cfg,
                          const StageWeights* learned = nullptr);

struct DatasetConfig {
  std::size_t count = 20;
  bool reverberant = false;
  NoiseType noise_type = NoiseType::kStationary;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string speech_dir;  // optional WAV corpus; synthetic speech-like signals otherwise
  MixtureSpec mix;
  ArrayGeometry geometry = ArrayGeometry::Default();
};

// Draws the scenario and source material for one utterance from `seed`.
Mixture GenerateUtterance(std::uint64_t seed, const DatasetConfig& cfg,
                          const std::vector<std::string>& corpus = {});

// Stationary mixture for a fixed scenario with synthetic sources drawn from
// scenario.seed.
Mixture SynthesizeForScenario(const Scenario& s, const ArrayGeometry& g,
                              const MixtureSpec& spec = {});

std::uint64_t UtteranceSeed(std::uint64_t master_seed, std::size_t index);

// Writes <out>/{y,x,n,x_ref}/<id>.wav and <out>/manifest.jsonl.
std::vector<ManifestEntry> GenerateDataset(const DatasetConfig& cfg);

struct BatchResult {
  EvalReport report;
  std::size_t computed = 0;
  std::size_t reused = 0;
};

// Enhances every manifest entry into <out>/enhanced/<id>.wav, keeps
// per-utterance records in <out>/records/<id>.json (reused on rerun) and
// writes <out>/report.json.
BatchResult RunBatch(const RunConfig& cfg);

struct EvaluateConfig {
  std::string ref_dir;
  std::string est_dir;
  std::string noisy_dir;  // optional; enables deltas
  std::size_t reference_index = 0;
  LossWeights betas;
};

// Pairs files by name across the directories.
EvalReport Evaluate(const EvaluateConfig& cfg);

}  // namespace beamlab
