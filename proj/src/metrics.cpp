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

#include "beamlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "beamlab/error.hpp"
#include "beamlab/mixer.hpp"

namespace beamlab {
namespace {

double ClampDb(double v) { return std::clamp(v, -kMetricClampDb, kMetricClampDb); }

void CheckMono(const TimeSignal& s, const char* what) {
  if (s.channels() != 1) throw Error(ErrorKind::kShape, std::string(what) + " must be single-channel");
}

}  // namespace

double SiSdr(std::span<const double> ref, std::span<const double> est) {
  if (ref.size() != est.size()) throw Error(ErrorKind::kLength, "SI-SDR needs equal lengths");
  const double ref_energy = std::inner_product(ref.begin(), ref.end(), ref.begin(), 0.0);
  if (!(ref_energy > 0.0)) throw Error(ErrorKind::kInput, "SI-SDR undefined for a zero reference");
  const double alpha = std::inner_product(est.begin(), est.end(), ref.begin(), 0.0) / ref_energy;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = alpha * ref[i];
    target += t * t;
    residual += (est[i] - t) * (est[i] - t);
  }
  if (target == 0.0) return -kMetricClampDb;
  if (residual == 0.0) return kMetricClampDb;
  return ClampDb(10.0 * std::log10(target / residual));
}

double SiSdr(const TimeSignal& ref, const TimeSignal& est) {
  CheckMono(ref, "reference");
  CheckMono(est, "estimate");
  return SiSdr(ref.channel(0), est.channel(0));
}

NrResult NoiseReduction(std::span<const double> est, int sample_rate, double head_s,
                        double tail_s) {
  const auto head = static_cast<std::size_t>(std::llround(head_s * sample_rate));
  const auto tail = static_cast<std::size_t>(std::llround(tail_s * sample_rate));
  if (head == 0 || tail == 0) throw Error(ErrorKind::kConfig, "NR segments must be nonempty");
  if (est.size() < head + tail) {
    throw Error(ErrorKind::kLength, "signal shorter than head + tail for NR");
  }
  const double noise = SegmentVariance(est, 0, head);
  const double speech = SegmentVariance(est, head, head + tail);
  if (noise == 0.0) return {kMetricClampDb, true};
  if (speech == 0.0) return {-kMetricClampDb, true};
  const double db = 10.0 * std::log10(speech / noise);
  return {ClampDb(db), std::abs(db) > kMetricClampDb};
}

NrResult NoiseReduction(const TimeSignal& est, double head_s, double tail_s) {
  CheckMono(est, "estimate");
  return NoiseReduction(est.channel(0), est.sample_rate(), head_s, tail_s);
}

double Mae(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kLength, "MAE needs equal lengths");
  if (a.empty()) throw Error(ErrorKind::kLength, "MAE of empty signals");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

void LossWeights::Validate() const {
  if (beta_mae < 0.0 || beta_reg < 0.0 || std::abs(beta_mae + beta_reg - 1.0) > 1e-12) {
    throw Error(ErrorKind::kConfig, "loss weights must be nonnegative and sum to 1");
  }
}

TimeSignal DistortionlessOutput(const StageWeights& w, const TimeSignal& x_clean,
                                const StftConfig& cfg) {
  const Spectrogram spec = Analyze(PadToFrames(x_clean, cfg), cfg);
  return FitLength(Synthesize(ApplyStage1(w, spec)), x_clean.length());
}

Losses ComputeLosses(const TimeSignal& x_ref, const TimeSignal& estimate, const StageWeights* w,
                     const TimeSignal* x_clean, const LossWeights& betas, const StftConfig& cfg) {
  betas.Validate();
  CheckMono(x_ref, "reference");
  CheckMono(estimate, "estimate");
  Losses out;
  out.mae = Mae(x_ref.channel(0), estimate.channel(0));
  if ((w == nullptr) != (x_clean == nullptr)) {
    throw Error(ErrorKind::kConfig, "regularization needs both w1 and the clean multichannel target");
  }
  if (w != nullptr) {
    if (x_clean->length() != x_ref.length()) {
      throw Error(ErrorKind::kLength, "clean multichannel target and reference differ in length");
    }
    const TimeSignal xd = DistortionlessOutput(*w, *x_clean, cfg);
    out.reg = Mae(x_ref.channel(0), xd.channel(0));
    out.combined = betas.beta_mae * out.mae + betas.beta_reg * *out.reg;
  }
  return out;
}

Summary Summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

std::optional<double> UtteranceMetrics::delta_si_sdr_db() const {
  if (!si_sdr_in_db) return std::nullopt;
  return si_sdr_db - *si_sdr_in_db;
}

std::optional<double> UtteranceMetrics::delta_nr_db() const {
  if (!nr_in_db) return std::nullopt;
  return nr_db - *nr_in_db;
}

UtteranceMetrics ScoreUtterance(const std::string& id, const TimeSignal& x_ref,
                                const TimeSignal* y_ref, const TimeSignal& estimate,
                                const StageWeights* w, const TimeSignal* x_clean,
                                const LossWeights& betas, const StftConfig& cfg) {
  UtteranceMetrics u;
  u.id = id;
  if (y_ref != nullptr) {
    u.si_sdr_in_db = SiSdr(x_ref, *y_ref);
    u.nr_in_db = NoiseReduction(*y_ref).db;
  }
  u.si_sdr_db = SiSdr(x_ref, estimate);
  const NrResult nr = NoiseReduction(estimate);
  u.nr_db = nr.db;
  u.nr_clamped = nr.clamped;
  u.losses = ComputeLosses(x_ref, estimate, w, x_clean, betas, cfg);
  return u;
}

namespace {

nlohmann::json OrNull(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> GetOptional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const UtteranceMetrics& u) {
  j = nlohmann::json{{"id", u.id},
                     {"method", u.method},
                     {"si_sdr_in_db", OrNull(u.si_sdr_in_db)},
                     {"si_sdr_db", u.si_sdr_db},
                     {"delta_si_sdr_db", OrNull(u.delta_si_sdr_db())},
                     {"nr_in_db", OrNull(u.nr_in_db)},
                     {"nr_db", u.nr_db},
                     {"delta_nr_db", OrNull(u.delta_nr_db())},
                     {"nr_clamped", u.nr_clamped},
                     {"mae", u.losses.mae},
                     {"reg", OrNull(u.losses.reg)},
                     {"combined_loss", OrNull(u.losses.combined)},
                     {"degenerate_bins", u.degenerate_bins}};
}

void from_json(const nlohmann::json& j, UtteranceMetrics& u) {
  u.id = j.at("id").get<std::string>();
  u.method = j.value("method", "");
  u.si_sdr_in_db = GetOptional(j, "si_sdr_in_db");
  u.si_sdr_db = j.at("si_sdr_db").get<double>();
  u.nr_in_db = GetOptional(j, "nr_in_db");
  u.nr_db = j.at("nr_db").get<double>();
  u.nr_clamped = j.value("nr_clamped", false);
  u.losses.mae = j.at("mae").get<double>();
  u.losses.reg = GetOptional(j, "reg");
  u.losses.combined = GetOptional(j, "combined_loss");
  u.degenerate_bins = j.value("degenerate_bins", std::size_t{0});
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json j;
  j["betas"] = {{"beta_mae", betas.beta_mae}, {"beta_reg", betas.beta_reg}};
  j["utterances"] = nlohmann::json::array();
  for (const auto& u : utterances) j["utterances"].push_back(u);
  j["failures"] = nlohmann::json::array();
  for (const auto& f : failures)
    j["failures"].push_back({{"id", f.id}, {"kind", f.kind}, {"message", f.message}});

  auto collect = [&](auto getter) {
    std::vector<double> v;
    for (const auto& u : utterances) {
      if (auto x = getter(u)) v.push_back(*x);
    }
    return v;
  };
  auto add = [&](const char* name, auto getter) {
    const auto values = collect(getter);
    if (values.empty()) {
      j["aggregate"][name] = nullptr;
      return;
    }
    const Summary s = Summarize(values);
    j["aggregate"][name] = {{"mean", s.mean}, {"median", s.median}, {"count", values.size()}};
  };
  using Opt = std::optional<double>;
  j["aggregate"] = nlohmann::json::object();
  add("si_sdr_in_db", [](const UtteranceMetrics& u) { return u.si_sdr_in_db; });
  add("si_sdr_db", [](const UtteranceMetrics& u) { return Opt(u.si_sdr_db); });
  add("delta_si_sdr_db", [](const UtteranceMetrics& u) { return u.delta_si_sdr_db(); });
  add("nr_in_db", [](const UtteranceMetrics& u) { return u.nr_in_db; });
  add("nr_db", [](const UtteranceMetrics& u) { return Opt(u.nr_db); });
  add("delta_nr_db", [](const UtteranceMetrics& u) { return u.delta_nr_db(); });
  add("mae", [](const UtteranceMetrics& u) { return Opt(u.losses.mae); });
  add("reg", [](const UtteranceMetrics& u) { return u.losses.reg; });
  add("combined_loss", [](const UtteranceMetrics& u) { return u.losses.combined; });
  j["count"] = utterances.size();
  j["failed"] = failures.size();
  return j;
}

}  // namespace beamlab
