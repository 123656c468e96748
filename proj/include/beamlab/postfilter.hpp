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

#include <span>
#include <vector>

#include "beamlab/stft.hpp"

namespace beamlab {

enum class NoisePsdSource { kOracleHead, kExternal };

struct PostfilterConfig {
  double alpha_dd = 0.98;
  double gain_floor_db = -18.0;
  double xi_min_db = -25.0;
  NoisePsdSource noise_psd_source = NoisePsdSource::kOracleHead;

  double gain_floor() const;
  void Validate() const;
};

// Exponential integral E1(x) = int_x^inf e^-t / t dt; +inf at 0.
double ExpIntE1(double x);

// Log-spectral amplitude gain for a-priori SNR xi and a-posteriori SNR
// gamma, unclamped.
double LsaGain(double xi, double gamma);

// Lower bound on the a-posteriori SNR fed to LsaGain. Above it the gain
// falls whenever the noise PSD grows; below it the raw gain would rise as
// the observation weakens.
double MonotoneGammaFloor(double xi);

// Mean |x|^2 per bin over the first `noise_frames` frames.
std::vector<double> NoisePsdFromHead(const Spectrogram& x, std::size_t noise_frames);

// Single-channel LSA postfilter with decision-directed a-priori SNR. The
// recursion starts from the first frame's own a-posteriori SNR. Every
// gain is clamped to [gain_floor, 1]; bins with zero noise PSD pass
// unchanged. Optional `gains` receives G in frame-major (l * K + k) order.
Spectrogram LsaEnhance(const Spectrogram& x, std::span<const double> noise_psd,
                       const PostfilterConfig& cfg = {}, std::vector<double>* gains = nullptr);

}  // namespace beamlab
