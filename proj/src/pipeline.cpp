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

#include "beamlab/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "beamlab/error.hpp"
#include "beamlab/wav.hpp"

namespace beamlab {
namespace fs = std::filesystem;

namespace {

constexpr double kArCoefficient = -0.7;

std::string EffectiveMethodName(const RunConfig& cfg) {
  std::string name = MethodName(cfg.method);
  if (cfg.postfilter && cfg.method != Method::kMvdrPf && cfg.method != Method::kPassthrough)
    name += "+pf";
  return name;
}

std::vector<std::string> ListWavs(const std::string& dir) {
  std::vector<std::string> out;
  if (dir.empty()) return out;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kConfig, "not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Picks a corpus file and loops it to `length` samples.
TimeSignal DrawSource(std::size_t length, std::mt19937_64& rng, int fs,
                      const std::vector<std::string>& corpus) {
  if (corpus.empty()) return SpeechLikeSignal(length, rng, fs);
  const auto& path = corpus[rng() % corpus.size()];
  const TimeSignal raw = ReadWav(path, fs);
  const auto ch = raw.channel(0);
  if (ch.empty()) throw Error(ErrorKind::kInput, path + ": empty recording");
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = ch[i % ch.size()];
  return TimeSignal::Mono(std::move(out), fs);
}

void WriteAtomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    f << text;
  }
  fs::rename(tmp, path);
}

TimeSignal ReferenceChannel(const TimeSignal& s, std::size_t ref, const std::string& what) {
  if (s.channels() == 1) return s;
  if (ref >= s.channels()) throw Error(ErrorKind::kShape, what + ": reference channel out of range");
  return s.Extract(ref);
}

StageWeights LoadLearned(const RunConfig& cfg, const std::string& id) {
  for (const char* ext : {".exbf", ".json"}) {
    const fs::path p = fs::path(cfg.weights_dir) / (id + ext);
    if (fs::exists(p)) return LoadWeightsAny(p.string());
  }
  throw Error(ErrorKind::kConfig, "no weight file for " + id + " in " + cfg.weights_dir);
}

}  // namespace

std::string MethodName(Method m) {
  switch (m) {
    case Method::kPassthrough: return "passthrough";
    case Method::kMvdr: return "mvdr";
    case Method::kMvdrPf: return "mvdr+pf";
    case Method::kMpdr: return "mpdr";
    case Method::kLearned: return "learned";
  }
  return "unknown";
}

Method ParseMethod(const std::string& name) {
  for (Method m : {Method::kPassthrough, Method::kMvdr, Method::kMvdrPf, Method::kMpdr,
                   Method::kLearned}) {
    if (MethodName(m) == name) return m;
  }
  throw Error(ErrorKind::kConfig, "unknown method '" + name + "'");
}

void RunConfig::Validate() const {
  stft.Validate();
  pf.Validate();
  betas.Validate();
  if (method == Method::kLearned && weights_dir.empty())
    throw Error(ErrorKind::kConfig, "learned method requires a weights directory");
  if (method == Method::kPassthrough && postfilter)
    throw Error(ErrorKind::kConfig, "passthrough takes no postfilter");
  if (noise_frames && *noise_frames == 0) throw Error(ErrorKind::kConfig, "L_n must be positive");
}

Enhanced EnhanceUtterance(const TimeSignal& y, std::size_t head_samples, const RunConfig& cfg,
                          const StageWeights* learned) {
  if (cfg.reference_index >= y.channels())
    throw Error(ErrorKind::kShape, "reference channel out of range");
  Enhanced out;
  if (cfg.method == Method::kPassthrough) {
    out.x_hat = y.Extract(cfg.reference_index);
    return out;
  }
  if (y.sample_rate() != cfg.stft.sample_rate)
    throw Error(ErrorKind::kConfig, "input sample rate does not match the STFT configuration");
  const Spectrogram spec = Analyze(PadToFrames(y, cfg.stft), cfg.stft);
  out.noise_frames = cfg.noise_frames.value_or(FramesWithin(head_samples, cfg.stft));
  const bool needs_head = cfg.method != Method::kLearned || cfg.uses_postfilter();
  if (needs_head && (out.noise_frames == 0 || out.noise_frames >= spec.frames())) {
    throw Error(ErrorKind::kEstimation, "noise head spans " + std::to_string(out.noise_frames) +
                                            " of " + std::to_string(spec.frames()) + " frames");
  }

  StageWeights w;
  switch (cfg.method) {
    case Method::kMvdr:
    case Method::kMvdrPf:
    case Method::kMpdr: {
      const Provenance p = cfg.method == Method::kMpdr ? Provenance::kMpdr : Provenance::kMvdr;
      BaselineResult base = EstimateBaseline(spec, p, out.noise_frames, cfg.reference_index);
      out.degenerate_bins = base.rtf.degenerate_count();
      w = std::move(base.weights);
      break;
    }
    case Method::kLearned:
      if (learned == nullptr) throw Error(ErrorKind::kConfig, "learned method without weights");
      w = *learned;
      break;
    case Method::kPassthrough:
      break;
  }
  Spectrogram x = ApplyStage1(w, spec);
  if (w.has_mask()) {
    x = ApplyStage2(w, x);
    DropEdgeImaginary(x);
  }
  if (cfg.uses_postfilter()) {
    const auto psd = NoisePsdFromHead(x, out.noise_frames);
    x = LsaEnhance(x, psd, cfg.pf);
  }
  out.x_hat = FitLength(Synthesize(x), y.length());
  out.weights = std::move(w);
  return out;
}

std::uint64_t UtteranceSeed(std::uint64_t master_seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> v{};
  seq.generate(v.begin(), v.end());
  return (static_cast<std::uint64_t>(v[0]) << 32) | v[1];
}

Mixture GenerateUtterance(std::uint64_t seed, const DatasetConfig& cfg,
                          const std::vector<std::string>& corpus) {
  cfg.mix.Validate();
  std::mt19937_64 rng(seed);
  ScenarioRanges ranges;
  ranges.reverberant = cfg.reverberant;
  ranges.noise_type = cfg.noise_type;
  const Scenario s = SampleScenario(rng, ranges);

  const int fs = cfg.mix.sample_rate;
  const std::size_t total = cfg.mix.total_samples();
  const std::size_t active = total - cfg.mix.head_samples();
  VariantInputs in;
  in.targets.push_back(DrawSource(active, rng, fs, corpus));
  switch (cfg.noise_type) {
    case NoiseType::kSpeakerSwitch:
      in.targets.push_back(DrawSource(active, rng, fs, corpus));
      in.noises.push_back(Ar1Noise(total, kArCoefficient, rng, fs));
      break;
    case NoiseType::kBabbleNoise:
      for (int b = 0; b < cfg.mix.babble_count; ++b)
        in.noises.push_back(Ar1Noise(total, kArCoefficient, rng, fs));
      break;
    case NoiseType::kBabbleVoice:
      for (int b = 0; b < cfg.mix.babble_count; ++b)
        in.noises.push_back(DrawSource(total, rng, fs, corpus));
      break;
    case NoiseType::kStationary:
    case NoiseType::kTimeVaryingNoise:
      in.noises.push_back(Ar1Noise(total, kArCoefficient, rng, fs));
      break;
  }
  return MakeVariant(cfg.noise_type, s, cfg.geometry, cfg.mix, in);
}

Mixture SynthesizeForScenario(const Scenario& s, const ArrayGeometry& g, const MixtureSpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(s.seed);
  const int fs = spec.sample_rate;
  const TimeSignal target = SpeechLikeSignal(spec.total_samples() - spec.head_samples(), rng, fs);
  const TimeSignal noise = Ar1Noise(spec.total_samples(), kArCoefficient, rng, fs);
  return Mix(s, g, spec, target, noise);
}

std::vector<ManifestEntry> GenerateDataset(const DatasetConfig& cfg) {
  if (cfg.count == 0) throw Error(ErrorKind::kConfig, "dataset count must be positive");
  if (cfg.out_dir.empty()) throw Error(ErrorKind::kConfig, "dataset needs an output directory");
  cfg.geometry.Validate();
  const std::vector<std::string> corpus = ListWavs(cfg.speech_dir);
  if (!cfg.speech_dir.empty() && corpus.empty())
    throw Error(ErrorKind::kConfig, "no WAV files in " + cfg.speech_dir);
  const fs::path root(cfg.out_dir);
  for (const char* sub : {"y", "x", "n", "x_ref"}) fs::create_directories(root / sub);

  std::vector<ManifestEntry> entries(cfg.count);
  std::vector<std::string> errors(cfg.count);
  const auto count = static_cast<std::ptrdiff_t>(cfg.count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    try {
      ManifestEntry e;
      char id[32];
      std::snprintf(id, sizeof(id), "utt_%05zu", ui);
      e.id = id;
      e.seed = UtteranceSeed(cfg.seed, ui);
      const Mixture mix = GenerateUtterance(e.seed, cfg, corpus);
      e.scenario = mix.scenario;
      e.geometry = cfg.geometry;
      e.sample_rate = cfg.mix.sample_rate;
      e.noise_head_s = cfg.mix.noise_head_s;
      e.y = "y/" + e.id + ".wav";
      e.x = "x/" + e.id + ".wav";
      e.n = "n/" + e.id + ".wav";
      e.x_ref = "x_ref/" + e.id + ".wav";
      WriteWav((root / e.y).string(), mix.y, WavFormat::kFloat32);
      WriteWav((root / e.x).string(), mix.x, WavFormat::kFloat32);
      WriteWav((root / e.n).string(), mix.n, WavFormat::kFloat32);
      WriteWav((root / e.x_ref).string(), mix.x.Extract(mix.reference_index), WavFormat::kFloat32);
      entries[ui] = std::move(e);
    } catch (const std::exception& ex) {
      errors[ui] = ex.what();
    }
  }
  for (std::size_t i = 0; i < cfg.count; ++i) {
    if (!errors[i].empty())
      throw Error(ErrorKind::kInput, "utterance " + std::to_string(i) + ": " + errors[i]);
  }
  WriteManifest(entries, (root / "manifest.jsonl").string());
  return entries;
}

BatchResult RunBatch(const RunConfig& cfg) {
  cfg.Validate();
  if (cfg.out_dir.empty()) throw Error(ErrorKind::kConfig, "batch needs an output directory");
  const auto entries = ReadManifest(cfg.manifest);
  if (entries.empty()) throw Error(ErrorKind::kInput, "manifest " + cfg.manifest + " is empty");
  const fs::path base = fs::path(cfg.manifest).parent_path();
  const fs::path out(cfg.out_dir);
  fs::create_directories(out / "enhanced");
  fs::create_directories(out / "records");
  const std::string method = EffectiveMethodName(cfg);

  const std::size_t n = entries.size();
  std::vector<std::optional<UtteranceMetrics>> results(n);
  std::vector<std::optional<Failure>> failures(n);
  std::vector<char> reused(n, 0);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const ManifestEntry& e = entries[ui];
    const fs::path record = out / "records" / (e.id + ".json");
    try {
      if (fs::exists(record)) {
        std::ifstream f(record);
        const auto j = nlohmann::json::parse(f, nullptr, false);
        if (!j.is_discarded() && j.value("method", "") == method) {
          results[ui] = j.get<UtteranceMetrics>();
          reused[ui] = 1;
          continue;
        }
      }
      const TimeSignal y = ReadWav((base / e.y).string(), e.sample_rate);
      const TimeSignal x_ref = e.x_ref.empty()
                                   ? ReadWav((base / e.x).string()).Extract(cfg.reference_index)
                                   : ReadWav((base / e.x_ref).string(), e.sample_rate);
      std::optional<StageWeights> learned;
      if (cfg.method == Method::kLearned) learned = LoadLearned(cfg, e.id);
      const auto head = static_cast<std::size_t>(std::llround(e.noise_head_s * e.sample_rate));
      const Enhanced enh = EnhanceUtterance(y, head, cfg, learned ? &*learned : nullptr);
      WriteWav((out / "enhanced" / (e.id + ".wav")).string(), enh.x_hat, WavFormat::kFloat32);

      std::optional<TimeSignal> x_clean;
      if (enh.weights && !e.x.empty()) x_clean = ReadWav((base / e.x).string(), e.sample_rate);
      const TimeSignal y_ref = y.Extract(cfg.reference_index);
      UtteranceMetrics u = ScoreUtterance(e.id, x_ref, &y_ref, enh.x_hat,
                                          x_clean ? &*enh.weights : nullptr,
                                          x_clean ? &*x_clean : nullptr, cfg.betas, cfg.stft);
      u.method = method;
      u.degenerate_bins = enh.degenerate_bins;
      WriteAtomically(record, nlohmann::json(u).dump(2) + "\n");
      results[ui] = std::move(u);
    } catch (const Error& ex) {
      failures[ui] = Failure{e.id, ErrorKindName(ex.kind()), ex.what()};
    } catch (const std::exception& ex) {
      failures[ui] = Failure{e.id, "internal", ex.what()};
    }
  }

  BatchResult result;
  result.report.betas = cfg.betas;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) {
      result.report.utterances.push_back(*results[i]);
      (reused[i] ? result.reused : result.computed) += 1;
    }
    if (failures[i]) result.report.failures.push_back(*failures[i]);
  }
  nlohmann::json j = result.report.ToJson();
  j["config"] = {{"method", method},
                 {"reference_index", cfg.reference_index},
                 {"noise_frames", cfg.noise_frames ? nlohmann::json(*cfg.noise_frames)
                                                   : nlohmann::json("head")},
                 {"seed", cfg.seed},
                 {"frame_len", cfg.stft.frame_len},
                 {"hop", cfg.stft.hop},
                 {"alpha_dd", cfg.pf.alpha_dd},
                 {"gain_floor_db", cfg.pf.gain_floor_db},
                 {"xi_min_db", cfg.pf.xi_min_db}};
  WriteAtomically(out / "report.json", DumpDeterministic(j));
  return result;
}

EvalReport Evaluate(const EvaluateConfig& cfg) {
  cfg.betas.Validate();
  const auto estimates = ListWavs(cfg.est_dir);
  if (estimates.empty()) throw Error(ErrorKind::kInput, "no WAV files in " + cfg.est_dir);
  if (!fs::is_directory(cfg.ref_dir)) throw Error(ErrorKind::kConfig, "not a directory: " + cfg.ref_dir);
  EvalReport report;
  report.betas = cfg.betas;
  for (const auto& est_path : estimates) {
    const std::string name = fs::path(est_path).filename().string();
    const std::string id = fs::path(est_path).stem().string();
    try {
      const fs::path ref_path = fs::path(cfg.ref_dir) / name;
      if (!fs::exists(ref_path)) throw Error(ErrorKind::kInput, "no reference " + ref_path.string());
      const TimeSignal ref = ReferenceChannel(ReadWav(ref_path.string()), cfg.reference_index, name);
      const TimeSignal est = ReferenceChannel(ReadWav(est_path, ref.sample_rate()), 0, name);
      std::optional<TimeSignal> noisy;
      if (!cfg.noisy_dir.empty()) {
        noisy = ReferenceChannel(ReadWav((fs::path(cfg.noisy_dir) / name).string(), ref.sample_rate()),
                                 cfg.reference_index, name);
      }
      report.utterances.push_back(
          ScoreUtterance(id, ref, noisy ? &*noisy : nullptr, est, nullptr, nullptr, cfg.betas));
    } catch (const Error& ex) {
      report.failures.push_back({id, ErrorKindName(ex.kind()), ex.what()});
    }
  }
  return report;
}

}  // namespace beamlab
