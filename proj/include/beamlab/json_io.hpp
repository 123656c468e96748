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

#include <string>
#include <vector>

#include "json.hpp"

#include "beamlab/covariance.hpp"
#include "beamlab/room.hpp"

namespace beamlab {

void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

void to_json(nlohmann::json& j, const ArrayGeometry& g);
void from_json(const nlohmann::json& j, ArrayGeometry& g);

Scenario LoadScenario(const std::string& path);
void SaveScenario(const Scenario& s, const std::string& path);

// Per-bin complex matrices as nested [re, im] pairs: [k][row][col].
nlohmann::json CovariancesToJson(const BinCovariances& phi);
BinCovariances CovariancesFromJson(const nlohmann::json& j);

nlohmann::json RtfToJson(const RtfVector& rtf);
RtfVector RtfFromJson(const nlohmann::json& j);

// One line of the dataset manifest. Paths are relative to the manifest.
struct ManifestEntry {
  std::string id;
  std::uint64_t seed = 0;
  Scenario scenario;
  ArrayGeometry geometry = ArrayGeometry::Default();
  std::string y;
  std::string x;
  std::string n;
  std::string x_ref;
  int sample_rate = 16000;
  double noise_head_s = 0.5;
};

void to_json(nlohmann::json& j, const ManifestEntry& e);
void from_json(const nlohmann::json& j, ManifestEntry& e);

std::vector<ManifestEntry> ReadManifest(const std::string& path);
void WriteManifest(const std::vector<ManifestEntry>& entries, const std::string& path);

// Pretty-printed with sorted keys and round-trip doubles.
std::string DumpDeterministic(const nlohmann::json& j);

}  // namespace beamlab
