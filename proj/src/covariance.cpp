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

#include "beamlab/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "beamlab/error.hpp"

namespace beamlab {
namespace {

void CheckRange(const Spectrogram& spec, std::size_t begin, std::size_t end) {
  if (begin >= end || end > spec.frames())
    throw Error(ErrorKind::kEstimation, "empty or out-of-range frame range [" +
                                            std::to_string(begin) + ", " + std::to_string(end) + ")");
}

void CheckPair(const BinCovariances& a, const BinCovariances& b, std::size_t reference_index) {
  if (a.size() != b.size() || a.empty())
    throw Error(ErrorKind::kShape, "covariance bin grids differ");
  const auto m = a.front().rows();
  if (m < 2) throw Error(ErrorKind::kShape, "RTF estimation needs at least 2 channels");
  if (reference_index >= static_cast<std::size_t>(m))
    throw Error(ErrorKind::kShape, "reference index out of range");
}

}  // namespace

std::size_t RtfVector::degenerate_count() const {
  std::size_t n = 0;
  for (bool d : degenerate) n += d;
  return n;
}

BinCovariances FrameRangeCovariance(const Spectrogram& spec, std::size_t begin, std::size_t end) {
  CheckRange(spec, begin, end);
  const auto m_count = static_cast<Eigen::Index>(spec.channels());
  const std::size_t bins = spec.bins();
  const auto n = static_cast<Eigen::Index>(end - begin);
  BinCovariances out(bins);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(bins); ++k) {
    CMatrix y(m_count, n);
    for (Eigen::Index m = 0; m < m_count; ++m)
      for (Eigen::Index l = 0; l < n; ++l) y(m, l) = spec.at(m, k, begin + l);
    CMatrix phi = (y * y.adjoint()) / static_cast<double>(n);
    out[k] = (phi + phi.adjoint()) * 0.5;
  }
  return out;
}

namespace serial {

BinCovariances FrameRangeCovariance(const Spectrogram& spec, std::size_t begin, std::size_t end) {
  CheckRange(spec, begin, end);
  const std::size_t m_count = spec.channels();
  BinCovariances out(spec.bins());
  for (std::size_t k = 0; k < spec.bins(); ++k) {
    CMatrix phi = CMatrix::Zero(m_count, m_count);
    for (std::size_t l = begin; l < end; ++l)
      for (std::size_t i = 0; i < m_count; ++i)
        for (std::size_t j = 0; j < m_count; ++j)
          phi(i, j) += spec.at(i, k, l) * std::conj(spec.at(j, k, l));
    phi /= static_cast<double>(end - begin);
    out[k] = (phi + phi.adjoint()) * 0.5;
  }
  return out;
}

}  // namespace serial

BinCovariances NoiseCovariance(const Spectrogram& spec, std::size_t noise_frames) {
  if (noise_frames == 0) throw Error(ErrorKind::kEstimation, "L_n must be at least 1");
  if (noise_frames > spec.frames()) throw Error(ErrorKind::kEstimation, "L_n exceeds frame count");
  return FrameRangeCovariance(spec, 0, noise_frames);
}

BinCovariances NoisyCovariance(const Spectrogram& spec, std::size_t noise_frames) {
  if (noise_frames >= spec.frames())
    throw Error(ErrorKind::kEstimation, "no speech frames after the noise-only head");
  return FrameRangeCovariance(spec, noise_frames, spec.frames());
}

CovarianceSet EstimateCovariances(const Spectrogram& spec, std::size_t noise_frames) {
  CovarianceSet set;
  set.phi_nn = NoiseCovariance(spec, noise_frames);
  set.phi_yy = NoisyCovariance(spec, noise_frames);
  set.noise_frames = noise_frames;
  set.frames = spec.frames();
  return set;
}

CMatrix Hermitianize(const CMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::kInput, "matrix is not square");
  const double asym = (a - a.adjoint()).norm();
  const double scale = a.norm();
  if (asym > kHermitianTolerance * scale + 1e-300)
    throw Error(ErrorKind::kInput, "matrix is not Hermitian");
  return (a + a.adjoint()) * 0.5;
}

MatrixRoots HermitianRoots(const CMatrix& phi) {
  const CMatrix a = Hermitianize(phi);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::kSolver, "eigendecomposition failed");
  Eigen::VectorXd d = eig.eigenvalues();
  const double max_eig = d.maxCoeff();
  if (!(max_eig > 0.0)) throw Error(ErrorKind::kSolver, "matrix has no positive eigenvalue");
  const double floor = kEigenFloor * max_eig;
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::max(d(i), floor);
  const CMatrix& v = eig.eigenvectors();
  const Eigen::VectorXd s = d.cwiseSqrt();
  MatrixRoots roots;
  roots.sqrt = v * s.cast<cd>().asDiagonal() * v.adjoint();
  roots.inv_sqrt = v * s.cwiseInverse().cast<cd>().asDiagonal() * v.adjoint();
  return roots;
}

CMatrix InverseSqrt(const CMatrix& phi) { return HermitianRoots(phi).inv_sqrt; }
CMatrix Sqrt(const CMatrix& phi) { return HermitianRoots(phi).sqrt; }

CMatrix WhitenedCovariance(const CMatrix& phi_yy, const CMatrix& phi_nn) {
  const CMatrix w = InverseSqrt(phi_nn);
  const CMatrix out = w * Hermitianize(phi_yy) * w.adjoint();
  return (out + out.adjoint()) * 0.5;
}

BinCovariances WhitenedCovariance(const BinCovariances& phi_yy, const BinCovariances& phi_nn) {
  if (phi_yy.size() != phi_nn.size()) throw Error(ErrorKind::kShape, "covariance bin grids differ");
  BinCovariances out(phi_yy.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(phi_yy.size()); ++k)
    out[k] = WhitenedCovariance(phi_yy[k], phi_nn[k]);
  return out;
}

CVector EstimateRtfBin(const CMatrix& phi_yy, const CMatrix& phi_nn, std::size_t reference_index,
                       bool* degenerate) {
  const auto roots = HermitianRoots(phi_nn);
  CMatrix white = roots.inv_sqrt * Hermitianize(phi_yy) * roots.inv_sqrt.adjoint();
  white = (white + white.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(white);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::kSolver, "eigendecomposition failed");
  const CVector f = eig.eigenvectors().col(white.rows() - 1);
  const CVector ft = roots.sqrt * f;
  const auto ref = static_cast<Eigen::Index>(reference_index);
  const bool bad = std::abs(ft(ref)) < 1e-12 * ft.norm() || !std::isfinite(ft.norm());
  if (degenerate) *degenerate = bad;
  if (bad) return CVector::Unit(ft.size(), ref);
  CVector h = ft / ft(ref);
  h(ref) = cd{1.0, 0.0};
  return h;
}

RtfVector EstimateRtf(const BinCovariances& phi_yy, const BinCovariances& phi_nn,
                      std::size_t reference_index) {
  CheckPair(phi_yy, phi_nn, reference_index);
  RtfVector out;
  out.reference_index = reference_index;
  out.h.resize(phi_yy.size());
  std::vector<char> flags(phi_yy.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(phi_yy.size()); ++k) {
    bool bad = false;
    out.h[k] = EstimateRtfBin(phi_yy[k], phi_nn[k], reference_index, &bad);
    flags[k] = bad;
  }
  out.degenerate.assign(flags.begin(), flags.end());
  return out;
}

namespace serial {

RtfVector EstimateRtf(const BinCovariances& phi_yy, const BinCovariances& phi_nn,
                      std::size_t reference_index) {
  CheckPair(phi_yy, phi_nn, reference_index);
  RtfVector out;
  out.reference_index = reference_index;
  for (std::size_t k = 0; k < phi_yy.size(); ++k) {
    bool bad = false;
    out.h.push_back(EstimateRtfBin(phi_yy[k], phi_nn[k], reference_index, &bad));
    out.degenerate.push_back(bad);
  }
  return out;
}

}  // namespace serial

}  // namespace beamlab
