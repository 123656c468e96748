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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "beamlab/beamformer.hpp"
#include "beamlab/error.hpp"
#include "json.hpp"

namespace beamlab {
namespace {

constexpr char kMagic[4] = {'E', 'X', 'B', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 5 * 4;
constexpr double kLoadRealnessTol = 1e-6;

void PutU32(std::vector<char>& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);  // host is little-endian (x86/arm64)
  out.insert(out.end(), b, b + 4);
}

void PutComplex(std::vector<char>& out, cd v) {
  const float re = static_cast<float>(v.real()), im = static_cast<float>(v.imag());
  char b[8];
  std::memcpy(b, &re, 4);
  std::memcpy(b + 4, &im, 4);
  out.insert(out.end(), b, b + 8);
}

std::uint32_t GetU32(const std::vector<char>& in, std::size_t pos) {
  std::uint32_t v;
  std::memcpy(&v, in.data() + pos, 4);
  return v;
}

cd GetComplex(const std::vector<char>& in, std::size_t pos) {
  float re, im;
  std::memcpy(&re, in.data() + pos, 4);
  std::memcpy(&im, in.data() + pos + 4, 4);
  return {re, im};
}

// Small imaginary residue at DC/Nyquist is dropped; anything larger is
// left in place for Validate() to reject.
void FinishLoad(StageWeights& w) {
  for (std::size_t m = 0; m < w.mics; ++m)
    for (std::size_t k : {std::size_t{0}, w.bins - 1})
      if (std::abs(w.w1_at(m, k).imag()) <= kLoadRealnessTol) w.w1_at(m, k).imag(0.0);
  w.Validate(0.0);
}

}  // namespace

void SaveWeights(const StageWeights& w, const std::string& path) {
  w.Validate(kLoadRealnessTol);
  std::vector<char> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  PutU32(out, kVersion);
  PutU32(out, static_cast<std::uint32_t>(w.mics));
  PutU32(out, static_cast<std::uint32_t>(w.bins));
  PutU32(out, static_cast<std::uint32_t>(w.frames));
  PutU32(out, w.has_mask() ? 1u : 0u);
  for (const cd& v : w.w1) PutComplex(out, v);
  for (const cd& v : w.w2) PutComplex(out, v);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

StageWeights LoadWeights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::vector<char> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < kHeaderBytes || std::memcmp(in.data(), kMagic, 4) != 0)
    throw Error(ErrorKind::kFormat, path + ": bad magic");
  if (GetU32(in, 4) != kVersion)
    throw Error(ErrorKind::kFormat, path + ": unsupported version " + std::to_string(GetU32(in, 4)));
  StageWeights w;
  w.mics = GetU32(in, 8);
  w.bins = GetU32(in, 12);
  w.frames = GetU32(in, 16);
  const std::uint32_t flags = GetU32(in, 20);
  if (flags & ~1u) throw Error(ErrorKind::kFormat, path + ": unknown flag bits");
  if (w.mics == 0 || w.bins < 2) throw Error(ErrorKind::kShape, path + ": empty dimensions");
  const bool mask = flags & 1u;
  const std::size_t expect =
      kHeaderBytes + 8 * (w.mics * w.bins + (mask ? w.bins * w.frames : 0));
  if (in.size() != expect)
    throw Error(ErrorKind::kShape, path + ": payload is " + std::to_string(in.size()) +
                                       " bytes, header implies " + std::to_string(expect));
  std::size_t pos = kHeaderBytes;
  w.w1.resize(w.mics * w.bins);
  for (cd& v : w.w1) v = GetComplex(in, pos), pos += 8;
  if (mask) {
    w.w2.resize(w.bins * w.frames);
    for (cd& v : w.w2) v = GetComplex(in, pos), pos += 8;
  }
  w.provenance = Provenance::kLearned;
  FinishLoad(w);
  return w;
}

void SaveWeightsJson(const StageWeights& w, const std::string& path) {
  w.Validate(kLoadRealnessTol);
  nlohmann::json j;
  j["magic"] = "EXBF";
  j["version"] = kVersion;
  j["M"] = w.mics;
  j["K"] = w.bins;
  j["L"] = w.frames;
  j["flags"] = w.has_mask() ? 1 : 0;
  j["sample_rate"] = w.sample_rate;
  j["provenance"] = ProvenanceName(w.provenance);
  auto pairs = [](const std::vector<cd>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const cd& c : v) a.push_back({c.real(), c.imag()});
    return a;
  };
  j["w1"] = pairs(w.w1);
  if (w.has_mask()) j["w2"] = pairs(w.w2);
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path);
  f << j.dump(1) << '\n';
}

StageWeights LoadWeightsJson(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
    if (j.at("magic").get<std::string>() != "EXBF")
      throw Error(ErrorKind::kFormat, path + ": bad magic");
    if (j.at("version").get<std::uint32_t>() != kVersion)
      throw Error(ErrorKind::kFormat, path + ": unsupported version");
    StageWeights w;
    w.mics = j.at("M").get<std::size_t>();
    w.bins = j.at("K").get<std::size_t>();
    w.frames = j.at("L").get<std::size_t>();
    const auto flags = j.at("flags").get<std::uint32_t>();
    w.sample_rate = j.value("sample_rate", 16000);
    w.provenance = ParseProvenance(j.value("provenance", std::string("learned")));
    auto read = [&](const nlohmann::json& a, std::size_t n, const char* name) {
      if (a.size() != n)
        throw Error(ErrorKind::kShape, path + ": " + name + " has " + std::to_string(a.size()) +
                                           " entries, expected " + std::to_string(n));
      std::vector<cd> v;
      v.reserve(n);
      for (const auto& p : a) v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      return v;
    };
    if (w.mics == 0 || w.bins < 2) throw Error(ErrorKind::kShape, path + ": empty dimensions");
    w.w1 = read(j.at("w1"), w.mics * w.bins, "w1");
    if (flags & 1u) w.w2 = read(j.at("w2"), w.bins * w.frames, "w2");
    FinishLoad(w);
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, path + ": " + e.what());
  }
}

StageWeights LoadWeightsAny(const std::string& path) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return LoadWeightsJson(path);
  return LoadWeights(path);
}

}  // namespace beamlab
