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

#include "beamlab/stft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "beamlab/error.hpp"

namespace beamlab {
namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    std::vector<double> re(n);
    std::vector<cd> cx(n / 2 + 1);
    std::lock_guard<std::mutex> lock(PlannerMutex());
    auto* c = reinterpret_cast<fftw_complex*>(cx.data());
    forward_ = fftw_plan_dft_r2c_1d(n, re.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_ = fftw_plan_dft_c2r_1d(n, c, re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void Forward(double* in, cd* out) const {
    fftw_execute_dft_r2c(forward_, in, reinterpret_cast<fftw_complex*>(out));
  }
  // Unnormalized; clobbers `in`.
  void Inverse(cd* in, double* out) const {
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in), out);
  }
  int size() const { return n_; }

 private:
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

std::vector<double> BaseSynthesisShape(const StftConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.frame_len);
  if (cfg.window == WindowKind::kSqrtHann) return AnalysisWindow(cfg);
  return std::vector<double>(n, 1.0);
}

// Overlap-added wa*ws over one hop period.
std::vector<double> LatticeSum(const std::vector<double>& wa,
                               const std::vector<double>& ws, int hop) {
  std::vector<double> sum(hop, 0.0);
  for (std::size_t i = 0; i < wa.size(); ++i) sum[i % hop] += wa[i] * ws[i];
  return sum;
}

}  // namespace

std::size_t StftConfig::num_frames(std::size_t length) const {
  const auto n = static_cast<std::size_t>(frame_len);
  if (length < n) return 0;
  return 1 + (length - n) / static_cast<std::size_t>(hop);
}

std::size_t FramesWithin(std::size_t head_samples, const StftConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.frame_len);
  if (head_samples < n) return 0;
  return (head_samples - n) / static_cast<std::size_t>(cfg.hop) + 1;
}

void StftConfig::Validate() const {
  if (frame_len <= 0 || frame_len % 2 != 0)
    throw Error(ErrorKind::kConfig, "frame_len must be positive and even");
  if (hop <= 0 || hop > frame_len || frame_len % hop != 0)
    throw Error(ErrorKind::kConfig, "hop must divide frame_len");
  if (sample_rate <= 0) throw Error(ErrorKind::kConfig, "sample_rate must be positive");
  if (ColaDeviation(*this) > 1e-12)
    throw Error(ErrorKind::kConfig, "window pair is not COLA at this hop");
}

std::vector<double> AnalysisWindow(const StftConfig& cfg) {
  const int n = cfg.frame_len;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    w[i] = cfg.window == WindowKind::kSqrtHann ? std::sqrt(hann) : hann;
  }
  return w;
}

std::vector<double> SynthesisWindow(const StftConfig& cfg) {
  const auto wa = AnalysisWindow(cfg);
  auto ws = BaseSynthesisShape(cfg);
  const auto sum = LatticeSum(wa, ws, cfg.hop);
  double mean = 0.0;
  for (double s : sum) mean += s;
  mean /= static_cast<double>(sum.size());
  for (double& v : ws) v /= mean;
  return ws;
}

double ColaDeviation(const StftConfig& cfg) {
  if (cfg.frame_len <= 0 || cfg.hop <= 0 || cfg.frame_len % cfg.hop != 0) return 1.0;
  const auto sum = LatticeSum(AnalysisWindow(cfg), SynthesisWindow(cfg), cfg.hop);
  double dev = 0.0;
  for (double s : sum) dev = std::max(dev, std::abs(s - 1.0));
  return dev;
}

Spectrogram Analyze(const TimeSignal& signal, const StftConfig& cfg) {
  cfg.Validate();
  if (signal.sample_rate() != cfg.sample_rate)
    throw Error(ErrorKind::kConfig, "signal sample rate does not match STFT config");
  const std::size_t n = cfg.frame_len;
  if (signal.length() < n)
    throw Error(ErrorKind::kLength, "signal shorter than one frame");
  for (double v : signal.data())
    if (!std::isfinite(v)) throw Error(ErrorKind::kInput, "non-finite sample");

  const std::size_t channels = signal.channels();
  const std::size_t frames = cfg.num_frames(signal.length());
  const std::size_t bins = cfg.num_bins();
  Spectrogram spec(channels, bins, frames, cfg);
  const auto window = AnalysisWindow(cfg);
  const RealFft fft(cfg.frame_len);
  const auto total = static_cast<std::ptrdiff_t>(channels * frames);

#pragma omp parallel
  {
    std::vector<double> buf(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
      const std::size_t m = idx / frames;
      const std::size_t l = idx % frames;
      const auto ch = signal.channel(m);
      const std::size_t start = l * cfg.hop;
      for (std::size_t i = 0; i < n; ++i) buf[i] = ch[start + i] * window[i];
      auto out = spec.frame(m, l);
      fft.Forward(buf.data(), out.data());
      out.front().imag(0.0);
      out.back().imag(0.0);
    }
  }
  return spec;
}

TimeSignal Synthesize(const Spectrogram& spec) {
  const StftConfig& cfg = spec.config();
  cfg.Validate();
  const std::size_t n = cfg.frame_len;
  const std::size_t bins = spec.bins();
  if (bins != static_cast<std::size_t>(cfg.num_bins()))
    throw Error(ErrorKind::kShape, "bin count does not match frame length");
  if (spec.frames() == 0) throw Error(ErrorKind::kShape, "spectrogram has no frames");

  for (std::size_t m = 0; m < spec.channels(); ++m)
    for (std::size_t l = 0; l < spec.frames(); ++l) {
      const auto f = spec.frame(m, l);
      if (std::abs(f.front().imag()) > kRealnessTolerance ||
          std::abs(f.back().imag()) > kRealnessTolerance)
        throw Error(ErrorKind::kConstraint,
                    "DC/Nyquist bin not real (channel " + std::to_string(m) +
                        ", frame " + std::to_string(l) + ")");
    }

  const std::size_t frames = spec.frames();
  const std::size_t length = (frames - 1) * cfg.hop + n;
  TimeSignal out(spec.channels(), length, cfg.sample_rate);
  const auto wa = AnalysisWindow(cfg);
  const auto ws = SynthesisWindow(cfg);

  std::vector<double> norm(length, 0.0);
  for (std::size_t l = 0; l < frames; ++l)
    for (std::size_t i = 0; i < n; ++i) norm[l * cfg.hop + i] += wa[i] * ws[i];

  const RealFft fft(cfg.frame_len);
  const double scale = 1.0 / static_cast<double>(n);
  const auto channels = static_cast<std::ptrdiff_t>(spec.channels());

  // Parallel over channels: each channel's overlap-add is a serial scatter.
#pragma omp parallel
  {
    std::vector<cd> cbuf(bins);
    std::vector<double> rbuf(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t m = 0; m < channels; ++m) {
      auto ch = out.channel(m);
      for (std::size_t l = 0; l < frames; ++l) {
        const auto f = spec.frame(m, l);
        std::copy(f.begin(), f.end(), cbuf.begin());
        cbuf.front().imag(0.0);
        cbuf.back().imag(0.0);
        fft.Inverse(cbuf.data(), rbuf.data());
        const std::size_t start = l * cfg.hop;
        for (std::size_t i = 0; i < n; ++i) ch[start + i] += rbuf[i] * scale * ws[i];
      }
      for (std::size_t t = 0; t < length; ++t)
        ch[t] = norm[t] > 1e-10 ? ch[t] / norm[t] : 0.0;
    }
  }
  return out;
}

PackedSpectrogram PackRealImag(const Spectrogram& spec) {
  PackedSpectrogram p;
  p.channels = spec.channels();
  p.rows = 2 * spec.bins();
  p.frames = spec.frames();
  p.data.resize(p.channels * p.rows * p.frames);
  const std::size_t k_count = spec.bins();
  for (std::size_t m = 0; m < p.channels; ++m)
    for (std::size_t k = 0; k < k_count; ++k)
      for (std::size_t l = 0; l < p.frames; ++l) {
        const cd v = spec.at(m, k, l);
        p.at(m, k, l) = v.real();
        p.at(m, k_count + k, l) = v.imag();
      }
  return p;
}

Spectrogram UnpackRealImag(const PackedSpectrogram& packed, const StftConfig& cfg) {
  if (packed.rows % 2 != 0) throw Error(ErrorKind::kShape, "packed row count is odd");
  if (packed.data.size() != packed.channels * packed.rows * packed.frames)
    throw Error(ErrorKind::kShape, "packed data size does not match its shape");
  const std::size_t k_count = packed.rows / 2;
  Spectrogram spec(packed.channels, k_count, packed.frames, cfg);
  for (std::size_t m = 0; m < packed.channels; ++m)
    for (std::size_t k = 0; k < k_count; ++k)
      for (std::size_t l = 0; l < packed.frames; ++l)
        spec.at(m, k, l) = {packed.at(m, k, l), packed.at(m, k_count + k, l)};
  return spec;
}

TimeSignal PadToFrames(const TimeSignal& signal, const StftConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.frame_len);
  const auto hop = static_cast<std::size_t>(cfg.hop);
  std::size_t len = std::max(signal.length(), n);
  len = n + (len - n + hop - 1) / hop * hop;
  return FitLength(signal, len);
}

TimeSignal FitLength(const TimeSignal& signal, std::size_t length) {
  TimeSignal out(signal.channels(), length, signal.sample_rate());
  const std::size_t keep = std::min(length, signal.length());
  for (std::size_t c = 0; c < signal.channels(); ++c) {
    auto src = signal.channel(c);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(keep), out.channel(c).begin());
  }
  return out;
}

void DropEdgeImaginary(Spectrogram& spec) {
  for (std::size_t m = 0; m < spec.channels(); ++m)
    for (std::size_t l = 0; l < spec.frames(); ++l) {
      auto f = spec.frame(m, l);
      f.front().imag(0.0);
      f.back().imag(0.0);
    }
}

}  // namespace beamlab
