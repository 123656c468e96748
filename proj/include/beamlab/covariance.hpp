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

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "beamlab/stft.hpp"

namespace beamlab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Per-bin M x M spatial correlation matrices.
using BinCovariances = std::vector<CMatrix>;

struct CovarianceSet {
  BinCovariances phi_nn;
  BinCovariances phi_yy;
  std::size_t noise_frames = 0;  // L_n
  std::size_t frames = 0;        // L
};

// Mean of y y^H over frames [begin, end) for every bin, symmetrized.
BinCovariances FrameRangeCovariance(const Spectrogram& spec, std::size_t begin, std::size_t end);

// Frames [0, L_n); requires 1 <= L_n <= L.
BinCovariances NoiseCovariance(const Spectrogram& spec, std::size_t noise_frames);
// Frames [L_n, L); requires L_n < L.
BinCovariances NoisyCovariance(const Spectrogram& spec, std::size_t noise_frames);
CovarianceSet EstimateCovariances(const Spectrogram& spec, std::size_t noise_frames);

namespace serial {
BinCovariances FrameRangeCovariance(const Spectrogram& spec, std::size_t begin, std::size_t end);
}  // namespace serial

inline constexpr double kEigenFloor = 1e-10;
inline constexpr double kHermitianTolerance = 1e-9;

// Throws kInput when A is not Hermitian within kHermitianTolerance
// (relative Frobenius). Returns (A + A^H) / 2.
CMatrix Hermitianize(const CMatrix& a);

struct MatrixRoots {
  CMatrix sqrt;
  CMatrix inv_sqrt;
};

// Eigen-decomposition based square root and inverse square root of a
// Hermitian PSD matrix; eigenvalues below kEigenFloor * max are clamped.
MatrixRoots HermitianRoots(const CMatrix& phi);
CMatrix InverseSqrt(const CMatrix& phi);
CMatrix Sqrt(const CMatrix& phi);

// phi_nn^{-1/2} phi_yy phi_nn^{-1/2 H}
CMatrix WhitenedCovariance(const CMatrix& phi_yy, const CMatrix& phi_nn);
BinCovariances WhitenedCovariance(const BinCovariances& phi_yy, const BinCovariances& phi_nn);

struct RtfVector {
  std::vector<CVector> h;         // per bin, h[k](reference_index) == 1
  std::vector<bool> degenerate;   // bins that fell back to e_ref
  std::size_t reference_index = 0;

  std::size_t bins() const { return h.size(); }
  std::size_t degenerate_count() const;
};

// Principal generalized eigenvector, de-whitened and normalized to the
// reference entry. Sets *degenerate and returns e_ref when the reference
// entry vanishes.
CVector EstimateRtfBin(const CMatrix& phi_yy, const CMatrix& phi_nn, std::size_t reference_index,
                       bool* degenerate = nullptr);
RtfVector EstimateRtf(const BinCovariances& phi_yy, const BinCovariances& phi_nn,
                      std::size_t reference_index);

namespace serial {
RtfVector EstimateRtf(const BinCovariances& phi_yy, const BinCovariances& phi_nn,
                      std::size_t reference_index);
}  // namespace serial

}  // namespace beamlab
