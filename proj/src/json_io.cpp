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

#include "beamlab/json_io.hpp"

#include <fstream>
#include <sstream>

#include "beamlab/error.hpp"

namespace beamlab {
namespace {

nlohmann::json Pair(const cd& c) { return nlohmann::json::array({c.real(), c.imag()}); }

cd FromPair(const nlohmann::json& p) {
  if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::kFormat, "expected [re, im] pair");
  return {p[0].get<double>(), p[1].get<double>()};
}

template <typename F>
auto Guard(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, where + ": " + e.what());
  }
}

}  // namespace

void to_json(nlohmann::json& j, const Scenario& s) {
  j = nlohmann::json{{"Lx", s.Lx},
                     {"Ly", s.Ly},
                     {"Lz", s.Lz},
                     {"T60", s.T60},
                     {"mic_center", s.mic_center},
                     {"tilt_phi", s.tilt_phi},
                     {"source_theta", s.source_theta},
                     {"noise_theta", s.noise_theta},
                     {"source_R", s.source_R},
                     {"noise_R", s.noise_R},
                     {"seed", s.seed},
                     {"noise_type", NoiseTypeName(s.noise_type)}};
}

void from_json(const nlohmann::json& j, Scenario& s) {
  s.Lx = j.at("Lx").get<double>();
  s.Ly = j.at("Ly").get<double>();
  s.Lz = j.at("Lz").get<double>();
  s.T60 = j.at("T60").get<double>();
  s.mic_center = j.at("mic_center").get<Vec3>();
  s.tilt_phi = j.at("tilt_phi").get<double>();
  s.source_theta = j.at("source_theta").get<double>();
  s.noise_theta = j.at("noise_theta").get<double>();
  s.source_R = j.at("source_R").get<double>();
  s.noise_R = j.at("noise_R").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.noise_type = ParseNoiseType(j.at("noise_type").get<std::string>());
}

void to_json(nlohmann::json& j, const ArrayGeometry& g) {
  j = nlohmann::json{{"mic_positions", g.mic_positions}, {"reference_index", g.reference_index}};
}

void from_json(const nlohmann::json& j, ArrayGeometry& g) {
  g.mic_positions = j.at("mic_positions").get<std::vector<Vec3>>();
  g.reference_index = j.at("reference_index").get<std::size_t>();
  g.Validate();
}

Scenario LoadScenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot open " + path);
  return Guard(path, [&] {
    nlohmann::json j;
    f >> j;
    return j.get<Scenario>();
  });
}

void SaveScenario(const Scenario& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path);
  f << nlohmann::json(s).dump(2) << '\n';
}

nlohmann::json CovariancesToJson(const BinCovariances& phi) {
  nlohmann::json out = nlohmann::json::array();
  for (const CMatrix& m : phi) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(Pair(m(r, c)));
      rows.push_back(std::move(row));
    }
    out.push_back(std::move(rows));
  }
  return out;
}

BinCovariances CovariancesFromJson(const nlohmann::json& j) {
  return Guard("covariances", [&] {
    BinCovariances out;
    for (const auto& rows : j) {
      const auto n = static_cast<Eigen::Index>(rows.size());
      CMatrix m(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != n)
          throw Error(ErrorKind::kShape, "covariance matrix is not square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = FromPair(rows[r][c]);
      }
      out.push_back(std::move(m));
    }
    return out;
  });
}

nlohmann::json RtfToJson(const RtfVector& rtf) {
  nlohmann::json h = nlohmann::json::array();
  for (const CVector& v : rtf.h) {
    nlohmann::json bin = nlohmann::json::array();
    for (Eigen::Index m = 0; m < v.size(); ++m) bin.push_back(Pair(v(m)));
    h.push_back(std::move(bin));
  }
  std::vector<std::size_t> degenerate;
  for (std::size_t k = 0; k < rtf.degenerate.size(); ++k)
    if (rtf.degenerate[k]) degenerate.push_back(k);
  return {{"reference_index", rtf.reference_index}, {"h_tilde", h}, {"degenerate_bins", degenerate}};
}

RtfVector RtfFromJson(const nlohmann::json& j) {
  return Guard("rtf", [&] {
    RtfVector r;
    r.reference_index = j.at("reference_index").get<std::size_t>();
    for (const auto& bin : j.at("h_tilde")) {
      CVector v(static_cast<Eigen::Index>(bin.size()));
      for (std::size_t m = 0; m < bin.size(); ++m) v(static_cast<Eigen::Index>(m)) = FromPair(bin[m]);
      r.h.push_back(std::move(v));
    }
    r.degenerate.assign(r.h.size(), false);
    for (auto k : j.value("degenerate_bins", std::vector<std::size_t>{})) {
      if (k >= r.h.size()) throw Error(ErrorKind::kShape, "degenerate bin index out of range");
      r.degenerate[k] = true;
    }
    return r;
  });
}

void to_json(nlohmann::json& j, const ManifestEntry& e) {
  j = nlohmann::json{{"id", e.id},
                     {"seed", e.seed},
                     {"scenario", e.scenario},
                     {"array", e.geometry},
                     {"y", e.y},
                     {"x", e.x},
                     {"n", e.n},
                     {"x_ref", e.x_ref},
                     {"sample_rate", e.sample_rate},
                     {"noise_head_s", e.noise_head_s}};
}

void from_json(const nlohmann::json& j, ManifestEntry& e) {
  e.id = j.at("id").get<std::string>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.scenario = j.at("scenario").get<Scenario>();
  if (j.contains("array")) e.geometry = j["array"].get<ArrayGeometry>();
  e.y = j.at("y").get<std::string>();
  e.x = j.value("x", "");
  e.n = j.value("n", "");
  e.x_ref = j.value("x_ref", "");
  e.sample_rate = j.value("sample_rate", 16000);
  e.noise_head_s = j.value("noise_head_s", 0.5);
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot open manifest " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Guard(path + ":" + std::to_string(lineno), [&] {
      out.push_back(nlohmann::json::parse(line).get<ManifestEntry>());
      return 0;
    });
  }
  return out;
}

void WriteManifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot write manifest " + path);
  for (const auto& e : entries) f << nlohmann::json(e).dump() << '\n';
}

std::string DumpDeterministic(const nlohmann::json& j) {
  return j.dump(2) + "\n";
}

}  // namespace beamlab
