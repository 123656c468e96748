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

#include "beamlab/beamformer.hpp"

#include <cmath>

#include "beamlab/error.hpp"

namespace beamlab {

std::string ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kMvdr: return "mvdr";
    case Provenance::kMpdr: return "mpdr";
    case Provenance::kLearned: return "learned";
  }
  return "learned";
}

Provenance ParseProvenance(const std::string& name) {
  if (name == "mvdr") return Provenance::kMvdr;
  if (name == "mpdr") return Provenance::kMpdr;
  if (name == "learned") return Provenance::kLearned;
  throw Error(ErrorKind::kFormat, "unknown provenance '" + name + "'");
}

CVector StageWeights::w1_bin(std::size_t k) const {
  CVector v(static_cast<Eigen::Index>(mics));
  for (std::size_t m = 0; m < mics; ++m) v(m) = w1_at(m, k);
  return v;
}

StageWeights StageWeights::FromBins(const std::vector<CVector>& w, std::size_t frames,
                                    Provenance provenance, int sample_rate) {
  if (w.empty()) throw Error(ErrorKind::kShape, "no bins");
  StageWeights out;
  out.mics = static_cast<std::size_t>(w.front().size());
  out.bins = w.size();
  out.frames = frames;
  out.sample_rate = sample_rate;
  out.provenance = provenance;
  out.w1.resize(out.mics * out.bins);
  for (std::size_t k = 0; k < out.bins; ++k) {
    if (static_cast<std::size_t>(w[k].size()) != out.mics)
      throw Error(ErrorKind::kShape, "ragged weight vectors");
    for (std::size_t m = 0; m < out.mics; ++m) out.w1_at(m, k) = w[k](m);
  }
  out.ProjectRealEdges();
  return out;
}

void StageWeights::ProjectRealEdges() {
  if (bins == 0) return;
  for (std::size_t m = 0; m < mics; ++m) {
    w1_at(m, 0).imag(0.0);
    w1_at(m, bins - 1).imag(0.0);
  }
}

void StageWeights::Validate(double realness_tol) const {
  if (mics == 0 || bins < 2) throw Error(ErrorKind::kShape, "empty weight set");
  if (w1.size() != mics * bins) throw Error(ErrorKind::kShape, "w1 size does not match M*K");
  if (has_mask() && w2.size() != bins * frames)
    throw Error(ErrorKind::kShape, "w2 size does not match K*L");
  for (const cd& v : w1)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorKind::kInput, "non-finite w1 entry");
  for (std::size_t m = 0; m < mics; ++m)
    for (std::size_t k : {std::size_t{0}, bins - 1})
      if (std::abs(w1_at(m, k).imag()) > realness_tol)
        throw Error(ErrorKind::kConstraint, "w1 not real at bin " + std::to_string(k) +
                                                ", mic " + std::to_string(m));
  for (const cd& v : w2) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorKind::kInput, "non-finite w2 entry");
    if (provenance == Provenance::kLearned && std::abs(v) > 1.0 + kMaskMagnitudeSlack)
      throw Error(ErrorKind::kConstraint, "learned mask magnitude exceeds 1");
  }
}

CVector DistortionlessBin(const CMatrix& phi, const CVector& h) {
  if (phi.rows() != h.size()) throw Error(ErrorKind::kShape, "covariance/steering size mismatch");
  const CMatrix a = Hermitianize(phi);
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14))
    throw Error(ErrorKind::kSolver, "covariance is singular or not positive definite");
  const CVector x = llt.solve(h);
  const cd denom = h.dot(x);  // h^H phi^{-1} h
  if (!(std::abs(denom) > 0.0) || !std::isfinite(std::abs(denom)))
    throw Error(ErrorKind::kSolver, "zero steering response");
  return x / denom.real();
}

namespace {

std::vector<CVector> SolveAll(const BinCovariances& phi, const RtfVector& rtf) {
  if (phi.size() != rtf.bins()) throw Error(ErrorKind::kShape, "covariance/RTF bin grids differ");
  std::vector<CVector> w(phi.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(phi.size()); ++k)
    w[k] = DistortionlessBin(phi[k], rtf.h[k]);
  return w;
}

void CheckApply(const StageWeights& w, const Spectrogram& y) {
  if (w.w1.size() != w.mics * w.bins) throw Error(ErrorKind::kShape, "malformed w1");
  if (y.channels() != w.mics || y.bins() != w.bins)
    throw Error(ErrorKind::kShape, "weights are " + std::to_string(w.mics) + "x" +
                                       std::to_string(w.bins) + ", signal is " +
                                       std::to_string(y.channels()) + "x" + std::to_string(y.bins()));
  for (std::size_t m = 0; m < w.mics; ++m)
    if (std::abs(w.w1_at(m, 0).imag()) > kRealnessTolerance ||
        std::abs(w.w1_at(m, w.bins - 1).imag()) > kRealnessTolerance)
      throw Error(ErrorKind::kConstraint, "w1 must be real at DC and Nyquist");
}

}  // namespace

std::vector<CVector> MvdrWeights(const BinCovariances& phi_nn, const RtfVector& rtf) {
  return SolveAll(phi_nn, rtf);
}

std::vector<CVector> MpdrWeights(const BinCovariances& phi_yy, const RtfVector& rtf) {
  return SolveAll(phi_yy, rtf);
}

RtfVector WhiteNoiseRtf(const BinCovariances& phi_yy, std::size_t reference_index) {
  if (phi_yy.empty()) throw Error(ErrorKind::kShape, "no bins");
  const auto m = phi_yy.front().rows();
  BinCovariances white(phi_yy.size(), CMatrix::Identity(m, m));
  return EstimateRtf(phi_yy, white, reference_index);
}

BaselineResult EstimateBaseline(const Spectrogram& y, Provenance method, std::size_t noise_frames,
                                std::size_t reference_index) {
  BaselineResult r;
  r.covariances = EstimateCovariances(y, noise_frames);
  switch (method) {
    case Provenance::kMvdr:
      r.rtf = EstimateRtf(r.covariances.phi_yy, r.covariances.phi_nn, reference_index);
      r.weights = StageWeights::FromBins(MvdrWeights(r.covariances.phi_nn, r.rtf), y.frames(),
                                         Provenance::kMvdr, y.config().sample_rate);
      break;
    case Provenance::kMpdr:
      r.rtf = WhiteNoiseRtf(r.covariances.phi_yy, reference_index);
      r.weights = StageWeights::FromBins(MpdrWeights(r.covariances.phi_yy, r.rtf), y.frames(),
                                         Provenance::kMpdr, y.config().sample_rate);
      break;
    case Provenance::kLearned:
      throw Error(ErrorKind::kConfig, "learned weights are loaded, not estimated");
  }
  return r;
}

Spectrogram ApplyStage1(const StageWeights& w, const Spectrogram& y) {
  CheckApply(w, y);
  const std::size_t bins = y.bins(), frames = y.frames(), mics = y.channels();
  Spectrogram out(1, bins, frames, y.config());
  std::vector<cd> wc(w.w1.size());
  for (std::size_t i = 0; i < wc.size(); ++i) wc[i] = std::conj(w.w1[i]);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(frames); ++l) {
    auto dst = out.frame(0, l);
    for (std::size_t m = 0; m < mics; ++m) {
      const auto src = y.frame(m, l);
      for (std::size_t k = 0; k < bins; ++k) dst[k] += wc[k * mics + m] * src[k];
    }
  }
  return out;
}

namespace serial {

Spectrogram ApplyStage1(const StageWeights& w, const Spectrogram& y) {
  CheckApply(w, y);
  Spectrogram out(1, y.bins(), y.frames(), y.config());
  for (std::size_t l = 0; l < y.frames(); ++l)
    for (std::size_t k = 0; k < y.bins(); ++k) {
      cd acc{0.0, 0.0};
      for (std::size_t m = 0; m < y.channels(); ++m) acc += std::conj(w.w1_at(m, k)) * y.at(m, k, l);
      out.at(0, k, l) = acc;
    }
  return out;
}

}  // namespace serial

Spectrogram ApplyStage2(const StageWeights& w, const Spectrogram& x_tilde) {
  if (!w.has_mask()) throw Error(ErrorKind::kShape, "weight set has no stage-2 mask");
  if (x_tilde.channels() != 1 || x_tilde.bins() != w.bins || x_tilde.frames() != w.frames)
    throw Error(ErrorKind::kShape, "mask is " + std::to_string(w.bins) + "x" +
                                       std::to_string(w.frames) + ", signal is " +
                                       std::to_string(x_tilde.bins()) + "x" +
                                       std::to_string(x_tilde.frames()));
  Spectrogram out(1, x_tilde.bins(), x_tilde.frames(), x_tilde.config());
  for (std::size_t l = 0; l < x_tilde.frames(); ++l)
    for (std::size_t k = 0; k < x_tilde.bins(); ++k)
      out.at(0, k, l) = std::conj(w.w2_at(k, l)) * x_tilde.at(0, k, l);
  return out;
}

}  // namespace beamlab
