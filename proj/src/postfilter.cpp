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

#include "beamlab/postfilter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "beamlab/error.hpp"

namespace beamlab {

double PostfilterConfig::gain_floor() const { return std::pow(10.0, gain_floor_db / 20.0); }

void PostfilterConfig::Validate() const {
  if (!(alpha_dd >= 0.0 && alpha_dd < 1.0)) throw Error(ErrorKind::kConfig, "alpha_dd must be in [0, 1)");
  if (!(gain_floor_db < 0.0)) throw Error(ErrorKind::kConfig, "gain floor must be below 0 dB");
}

double ExpIntE1(double x) {
  if (std::isnan(x) || x < 0.0) throw Error(ErrorKind::kInput, "E1 needs x >= 0");
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  if (x > 700.0) return 0.0;
  if (x <= 1.0) {
    // -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 60; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
  }
  // Continued fraction, modified Lentz.
  constexpr double kTiny = 1e-300;
  double b = x + 1.0, c = 1.0 / kTiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

double LsaGain(double xi, double gamma) {
  const double r = xi / (1.0 + xi);
  const double v = r * gamma;
  if (v <= 0.0) return std::numeric_limits<double>::infinity();
  return r * std::exp(0.5 * ExpIntE1(v));
}

std::vector<double> NoisePsdFromHead(const Spectrogram& x, std::size_t noise_frames) {
  if (noise_frames == 0 || noise_frames > x.frames())
    throw Error(ErrorKind::kEstimation, "noise head must cover 1..L frames");
  std::vector<double> psd(x.bins(), 0.0);
  for (std::size_t l = 0; l < noise_frames; ++l)
    for (std::size_t k = 0; k < x.bins(); ++k) psd[k] += std::norm(x.at(0, k, l));
  for (double& p : psd) p /= static_cast<double>(noise_frames);
  return psd;
}

double MonotoneGammaFloor(double xi) { return (1.0 + xi) / xi * std::log1p(0.5 * xi); }

Spectrogram LsaEnhance(const Spectrogram& x, std::span<const double> noise_psd,
                       const PostfilterConfig& cfg, std::vector<double>* gains) {
  cfg.Validate();
  if (x.channels() != 1) throw Error(ErrorKind::kShape, "postfilter expects one channel");
  if (noise_psd.size() != x.bins()) throw Error(ErrorKind::kShape, "noise PSD has wrong bin count");
  for (double p : noise_psd)
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorKind::kInput, "noise PSD must be >= 0");

  const double floor = cfg.gain_floor();
  const double xi_min = std::pow(10.0, cfg.xi_min_db / 10.0);
  const double alpha = cfg.alpha_dd;
  const std::size_t bins = x.bins(), frames = x.frames();
  Spectrogram out(1, bins, frames, x.config());
  if (gains) gains->assign(bins * frames, 1.0);

  // Frames are a recursion; bins are independent.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(bins); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const double lambda = noise_psd[k];
    double prev_gain = 1.0, prev_gamma = -1.0;
    for (std::size_t l = 0; l < frames; ++l) {
      const cd v = x.at(0, k, l);
      double g = 1.0;
      if (lambda > 0.0) {
        const double gamma = std::norm(v) / lambda;
        if (prev_gamma < 0.0) prev_gamma = gamma;
        const double xi = std::max(
            alpha * prev_gain * prev_gain * prev_gamma + (1.0 - alpha) * std::max(gamma - 1.0, 0.0),
            xi_min);
        g = std::clamp(LsaGain(xi, std::max(gamma, MonotoneGammaFloor(xi))), floor, 1.0);
        prev_gain = g;
        prev_gamma = gamma;
      }
      out.at(0, k, l) = g * v;
      if (gains) (*gains)[l * bins + k] = g;
    }
  }
  return out;
}

}  // namespace beamlab
