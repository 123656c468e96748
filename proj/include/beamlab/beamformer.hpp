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

#include <cstddef>
#include <string>
#include <vector>

#include "beamlab/covariance.hpp"
#include "beamlab/stft.hpp"

namespace beamlab {

enum class Provenance { kMvdr, kMpdr, kLearned };

std::string ProvenanceName(Provenance p);
Provenance ParseProvenance(const std::string& name);

// Stage-1 time-invariant beamformer plus an optional stage-2 mask.
//   w1: M values per bin, stored bin-major (k * M + m).
//   w2: K values per frame, stored frame-major (l * K + k).
struct StageWeights {
  std::size_t mics = 0;
  std::size_t bins = 0;
  std::size_t frames = 0;
  int sample_rate = 16000;
  Provenance provenance = Provenance::kLearned;
  std::vector<cd> w1;
  std::vector<cd> w2;

  bool has_mask() const { return !w2.empty(); }
  cd& w1_at(std::size_t m, std::size_t k) { return w1[k * mics + m]; }
  const cd& w1_at(std::size_t m, std::size_t k) const { return w1[k * mics + m]; }
  cd& w2_at(std::size_t k, std::size_t l) { return w2[l * bins + k]; }
  const cd& w2_at(std::size_t k, std::size_t l) const { return w2[l * bins + k]; }
  CVector w1_bin(std::size_t k) const;

  static StageWeights FromBins(const std::vector<CVector>& w, std::size_t frames,
                               Provenance provenance, int sample_rate = 16000);

  // Throws on shape mismatch, non-finite values, imaginary parts at
  // DC/Nyquist beyond `realness_tol`, or learned masks above unit magnitude.
  void Validate(double realness_tol = 1e-6) const;
  // Zeroes the imaginary parts of w1 at bins 0 and K-1.
  void ProjectRealEdges();
};

inline constexpr double kMaskMagnitudeSlack = 1e-6;

// w = phi^{-1} h / (h^H phi^{-1} h), via a Cholesky solve.
CVector DistortionlessBin(const CMatrix& phi, const CVector& h);

std::vector<CVector> MvdrWeights(const BinCovariances& phi_nn, const RtfVector& rtf);
std::vector<CVector> MpdrWeights(const BinCovariances& phi_yy, const RtfVector& rtf);

// RTF with the noise correlation replaced by a spatially white one; used
// by the MPDR baseline, which has no noise-only statistics.
RtfVector WhiteNoiseRtf(const BinCovariances& phi_yy, std::size_t reference_index);

// Full MVDR / MPDR chain from a multichannel spectrogram whose first
// `noise_frames` frames are noise only. MVDR steers with the GEVD RTF;
// MPDR steers with the white-noise RTF and solves against phi_yy.
struct BaselineResult {
  StageWeights weights;
  RtfVector rtf;
  CovarianceSet covariances;
};
BaselineResult EstimateBaseline(const Spectrogram& y, Provenance method, std::size_t noise_frames,
                                std::size_t reference_index);

// x~(l,k) = w1(k)^H y(l,k); returns 1 x K x L.
Spectrogram ApplyStage1(const StageWeights& w, const Spectrogram& y);
// x^(l,k) = conj(w2(l,k)) x~(l,k).
Spectrogram ApplyStage2(const StageWeights& w, const Spectrogram& x_tilde);

namespace serial {
Spectrogram ApplyStage1(const StageWeights& w, const Spectrogram& y);
}  // namespace serial

// Binary interchange: "EXBF", u32 version, u32 M, K, L, u32 flags
// (bit0: mask present), then M*K complex64 (bin-major) and optionally
// K*L complex64 (frame-major). Little-endian.
void SaveWeights(const StageWeights& w, const std::string& path);
StageWeights LoadWeights(const std::string& path);
// JSON mirror with the same field names.
void SaveWeightsJson(const StageWeights& w, const std::string& path);
StageWeights LoadWeightsJson(const std::string& path);
// Dispatches on a ".json" extension.
StageWeights LoadWeightsAny(const std::string& path);

}  // namespace beamlab
