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

#include "beamlab/beampattern.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "beamlab/error.hpp"

namespace beamlab {
namespace {

void CheckShapes(const StageWeights& w, const AtfGrid& atf) {
  if (w.mics != atf.mics || w.bins != atf.bins) {
    std::ostringstream os;
    os << "weights are " << w.mics << "x" << w.bins << " but ATFs are " << atf.mics << "x"
       << atf.bins;
    throw Error(ErrorKind::kShape, os.str());
  }
  if (w.w1.size() != w.mics * w.bins || atf.data.size() != atf.mics * atf.bins * atf.angles()) {
    throw Error(ErrorKind::kShape, "weight or ATF buffer size does not match its shape");
  }
}

cd InnerProduct(const StageWeights& w, const AtfGrid& atf, std::size_t k, std::size_t a) {
  const cd* h = atf.vec(k, a);
  cd acc = 0.0;
  for (std::size_t m = 0; m < w.mics; ++m) acc += std::conj(w.w1_at(m, k)) * h[m];
  return acc;
}

}  // namespace

std::vector<cd> Narrowband(const StageWeights& w, const AtfGrid& atf) {
  CheckShapes(w, atf);
  const std::size_t bins = atf.bins;
  const auto angles = static_cast<std::ptrdiff_t>(atf.angles());
  std::vector<cd> B(atf.bins * atf.angles());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t a = 0; a < angles; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    for (std::size_t k = 0; k < bins; ++k) B[ua * bins + k] = InnerProduct(w, atf, k, ua);
  }
  return B;
}

namespace serial {
std::vector<cd> Narrowband(const StageWeights& w, const AtfGrid& atf) {
  CheckShapes(w, atf);
  std::vector<cd> B(atf.bins * atf.angles());
  for (std::size_t a = 0; a < atf.angles(); ++a) {
    for (std::size_t k = 0; k < atf.bins; ++k) B[a * atf.bins + k] = InnerProduct(w, atf, k, a);
  }
  return B;
}
}  // namespace serial

std::vector<double> Wideband(const std::vector<cd>& B, std::size_t bins) {
  if (bins == 0 || B.size() % bins != 0) throw Error(ErrorKind::kShape, "B is not K x angles");
  const std::size_t angles = B.size() / bins;
  std::vector<double> P(angles, 0.0);
  for (std::size_t a = 0; a < angles; ++a) {
    double acc = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const cd b = B[a * bins + k];
      if (!std::isfinite(b.real()) || !std::isfinite(b.imag())) {
        throw Error(ErrorKind::kInput, "non-finite beampattern value");
      }
      acc += std::norm(b);
    }
    P[a] = acc;
  }
  return P;
}

std::vector<double> ToPolarDb(const std::vector<double>& P, double floor_db) {
  double peak = 0.0;
  for (double p : P) {
    if (p < 0.0 || !std::isfinite(p)) throw Error(ErrorKind::kInput, "beampower must be finite and nonnegative");
    peak = std::max(peak, p);
  }
  if (peak <= 0.0) throw Error(ErrorKind::kDegenerate, "all-zero beampower cannot be normalized");
  std::vector<double> db(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (P[i] == peak) {
      db[i] = 0.0;
    } else if (P[i] <= 0.0) {
      db[i] = floor_db;
    } else {
      db[i] = std::max(floor_db, 10.0 * std::log10(P[i] / peak));
    }
  }
  return db;
}

BeampatternGrid ComputeBeampattern(const StageWeights& w, const AtfGrid& atf, int order) {
  BeampatternGrid grid;
  grid.bins = atf.bins;
  grid.thetas = atf.thetas;
  grid.B = Narrowband(w, atf);
  grid.P = Wideband(grid.B, grid.bins);
  grid.order_tag = order == 0 ? "zero_order" : "full_order";
  return grid;
}

std::vector<double> DefaultThetaGrid() {
  std::vector<double> t(181);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return t;
}

BeampatternGrid AnalyzeExample(const Mixture& mix, const ArrayGeometry& g,
                               const BeampatternRequest& req) {
  if (req.order != 0 && req.order != kFullOrder) {
    throw Error(ErrorKind::kConfig, "beampattern order must be 0 or full");
  }
  if (req.thetas.empty()) throw Error(ErrorKind::kConfig, "empty theta grid");
  StageWeights w;
  if (req.method == Provenance::kLearned) {
    if (!req.learned) throw Error(ErrorKind::kConfig, "learned method requires a weight file");
    w = *req.learned;
    w.w2.clear();
  } else {
    const Spectrogram y = Analyze(mix.y, req.stft);
    const std::size_t noise_frames = FramesWithin(mix.head_samples, req.stft);
    w = EstimateBaseline(y, req.method, noise_frames, mix.reference_index).weights;
  }
  const AtfGrid atf = ComputeAtfGrid(mix.scenario, g, req.thetas, mix.scenario.source_R,
                                     req.order, req.stft.frame_len);
  return ComputeBeampattern(w, atf, req.order);
}

void WriteBeampatternCsv(const BeampatternGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  const auto db = ToPolarDb(grid.P);
  out << "theta_deg,P_db\n" << std::setprecision(10);
  for (std::size_t a = 0; a < grid.thetas.size(); ++a) out << grid.thetas[a] << "," << db[a] << "\n";
}

void WriteMagnitudeCsv(const BeampatternGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << "k";
  for (double t : grid.thetas) out << "," << t;
  out << "\n" << std::setprecision(10);
  for (std::size_t k = 0; k < grid.bins; ++k) {
    out << k;
    for (std::size_t a = 0; a < grid.thetas.size(); ++a) out << "," << std::abs(grid.at(k, a));
    out << "\n";
  }
}

void WritePolarSvg(const BeampatternGrid& grid, const std::string& path, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  const auto db = ToPolarDb(grid.P);
  constexpr double kSize = 400.0, kCenter = 200.0, kRadius = 170.0, kRange = 40.0;
  auto point = [&](double theta_deg, double value_db) {
    const double r = kRadius * std::clamp(1.0 + value_db / kRange, 0.0, 1.0);
    const double t = theta_deg * std::numbers::pi / 180.0;
    return std::pair{kCenter + r * std::cos(t), kCenter - r * std::sin(t)};
  };
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double ring = 0.0; ring >= -kRange; ring -= 10.0) {
    out << "<circle cx=\"" << kCenter << "\" cy=\"" << kCenter << "\" r=\""
        << kRadius * (1.0 + ring / kRange) << "\" fill=\"none\" stroke=\"#ccc\"/>\n";
  }
  out << "<polyline fill=\"none\" stroke=\"#c03\" stroke-width=\"1.5\" points=\"";
  for (std::size_t a = 0; a < db.size(); ++a) {
    const auto [x, y] = point(grid.thetas[a], db[a]);
    out << x << "," << y << " ";
  }
  out << "\"/>\n";
  if (!title.empty()) out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  out << "<text x=\"10\" y=\"" << kSize - 10 << "\" font-size=\"11\">" << grid.order_tag
      << ", rings every 10 dB</text>\n</svg>\n";
}

}  // namespace beamlab
