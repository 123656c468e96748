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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "beamlab/beampattern.hpp"
#include "beamlab/error.hpp"
#include "beamlab/json_io.hpp"
#include "beamlab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace beamlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

std::vector<double> ParseThetaRange(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0])
    throw Error(ErrorKind::kConfig, "theta range must be start:stop:step");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double t = parts[0] + static_cast<double>(i) * parts[2];
    if (t > parts[1] + 1e-9) break;
    out.push_back(t);
  }
  return out;
}

ArrayGeometry ParseSpacings(const std::vector<double>& spacings_cm, std::size_t ref) {
  if (spacings_cm.empty()) {
    ArrayGeometry g = ArrayGeometry::Default();
    g.reference_index = ref;
    g.Validate();
    return g;
  }
  std::vector<double> m;
  for (double cm : spacings_cm) m.push_back(cm / 100.0);
  return ArrayGeometry::Linear(m, ref);
}

void PrintReportSummary(const nlohmann::json& j) {
  const auto& agg = j.at("aggregate");
  for (const char* key : {"delta_si_sdr_db", "delta_nr_db", "si_sdr_db", "nr_db"}) {
    if (agg.contains(key) && !agg[key].is_null()) {
      std::cout << key << ": mean " << agg[key]["mean"].get<double>() << ", median "
                << agg[key]["median"].get<double>() << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beamlab: multichannel beamforming laboratory"};
  app.require_subcommand(1);

  DatasetConfig dcfg;
  std::string reverb = "off", noise_type = "stationary";
  auto* gen = app.add_subcommand("dataset-gen", "generate simulated noisy mixtures");
  gen->add_option("--count", dcfg.count, "number of utterances")->default_val(20);
  gen->add_option("--reverb", reverb, "on or off")->check(CLI::IsMember({"on", "off"}));
  gen->add_option("--noise-type", noise_type, "stationary, time_varying_noise, speaker_switch, "
                                              "babble_noise or babble_voice");
  gen->add_option("--out", dcfg.out_dir, "output directory")->required();
  gen->add_option("--seed", dcfg.seed, "master seed")->default_val(1);
  gen->add_option("--speech-dir", dcfg.speech_dir, "optional directory of 16 kHz speech WAVs");

  RunConfig rcfg;
  std::string method = "mvdr+pf", postfilter = "none";
  std::size_t ref = 0;
  std::size_t noise_frames = 0;
  auto* enh = app.add_subcommand("enhance", "enhance every utterance of a manifest");
  enh->add_option("--manifest", rcfg.manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
  enh->add_option("--method", method, "passthrough, mvdr, mvdr+pf, mpdr or learned");
  enh->add_option("--postfilter", postfilter, "none or lsa")->check(CLI::IsMember({"none", "lsa"}));
  enh->add_option("--weights-dir", rcfg.weights_dir, "directory of <id>.exbf weight files");
  enh->add_option("--out", rcfg.out_dir, "output directory")->required();
  enh->add_option("--ref", ref, "reference microphone index");
  enh->add_option("--noise-frames", noise_frames, "override L_n (default: frames inside the head)");
  enh->add_option("--seed", rcfg.seed, "recorded in the report");
  enh->add_option("--beta-mae", rcfg.betas.beta_mae, "loss weight of the MAE term");

  EvaluateConfig ecfg;
  std::string report_path;
  auto* ev = app.add_subcommand("evaluate", "score enhanced WAVs against references");
  ev->add_option("--ref-dir", ecfg.ref_dir, "clean reference WAVs")->required();
  ev->add_option("--est-dir", ecfg.est_dir, "estimated WAVs, same file names")->required();
  ev->add_option("--noisy-dir", ecfg.noisy_dir, "noisy inputs, enables deltas");
  ev->add_option("--ref", ecfg.reference_index, "reference channel for multichannel files");
  ev->add_option("--out", report_path, "report.json")->required();

  std::string bp_method = "mvdr", weights_file, scenario_file, order = "0", bp_out,
              thetas = "0:180:1";
  std::vector<double> spacings;
  auto* bp = app.add_subcommand("beampattern", "beampattern analysis of one example");
  bp->add_option("--method", bp_method, "mvdr, mpdr or learned")
      ->check(CLI::IsMember({"mvdr", "mpdr", "learned"}));
  bp->add_option("--weights", weights_file, "weight file for the learned method");
  bp->add_option("--scenario", scenario_file, "scenario JSON")->required()->check(CLI::ExistingFile);
  bp->add_option("--order", order, "0 or full")->check(CLI::IsMember({"0", "full"}));
  bp->add_option("--out", bp_out, "output directory")->required();
  bp->add_option("--thetas", thetas, "start:stop:step in degrees");
  bp->add_option("--spacings", spacings, "microphone spacings in cm (default 3 5 7)");
  bp->add_option("--ref", ref, "reference microphone index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) {
      dcfg.reverberant = reverb == "on";
      dcfg.noise_type = ParseNoiseType(noise_type);
      const auto entries = GenerateDataset(dcfg);
      std::cout << "wrote " << entries.size() << " utterances to " << dcfg.out_dir << "\n";
      return kExitOk;
    }
    if (*enh) {
      rcfg.method = ParseMethod(method);
      rcfg.postfilter = postfilter == "lsa" && rcfg.method != Method::kMvdrPf;
      rcfg.reference_index = ref;
      rcfg.betas.beta_reg = 1.0 - rcfg.betas.beta_mae;
      if (noise_frames > 0) rcfg.noise_frames = noise_frames;
      const BatchResult r = RunBatch(rcfg);
      std::cout << "computed " << r.computed << ", reused " << r.reused << ", failed "
                << r.report.failures.size() << "\n";
      PrintReportSummary(r.report.ToJson());
      for (const auto& f : r.report.failures)
        std::cerr << f.id << ": " << f.kind << ": " << f.message << "\n";
      return r.report.failures.empty() ? kExitOk : kExitPartial;
    }
    if (*ev) {
      const EvalReport report = Evaluate(ecfg);
      const auto j = report.ToJson();
      std::ofstream f(report_path);
      if (!f) throw Error(ErrorKind::kIo, "cannot write " + report_path);
      f << DumpDeterministic(j);
      PrintReportSummary(j);
      return report.failures.empty() ? kExitOk : kExitPartial;
    }
    if (*bp) {
      const Scenario s = LoadScenario(scenario_file);
      const ArrayGeometry g = ParseSpacings(spacings, ref);
      BeampatternRequest req;
      req.method = ParseProvenance(bp_method);
      req.thetas = ParseThetaRange(thetas);
      req.order = order == "full" ? kFullOrder : 0;
      if (req.method == Provenance::kLearned) {
        if (weights_file.empty()) throw Error(ErrorKind::kConfig, "learned method needs --weights");
        req.learned = LoadWeightsAny(weights_file);
      }
      const Mixture mix = SynthesizeForScenario(s, g);
      const BeampatternGrid grid = AnalyzeExample(mix, g, req);
      fs::create_directories(bp_out);
      const fs::path out(bp_out);
      WriteBeampatternCsv(grid, (out / "beampower.csv").string());
      WriteMagnitudeCsv(grid, (out / "magnitude.csv").string());
      WritePolarSvg(grid, (out / "beampower.svg").string(), bp_method + " " + grid.order_tag);
      std::cout << "wrote beampower.csv, magnitude.csv and beampower.svg to " << bp_out << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "beamlab: " << e.what() << "\n";
    return e.kind() == ErrorKind::kConfig ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "beamlab: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
