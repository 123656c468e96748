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
#include <span>
#include <vector>

#include "beamlab/signal.hpp"

namespace beamlab {

enum class WindowKind {
  kSqrtHann,  // sqrt-Hann analysis and synthesis
  kHann,      // Hann analysis, rectangular synthesis
};

struct StftConfig {
  int frame_len = 512;
  int hop = 128;
  WindowKind window = WindowKind::kSqrtHann;
  int sample_rate = 16000;

  int num_bins() const { return frame_len / 2 + 1; }
  // Number of frames fully inside a signal of `length` samples.
  std::size_t num_frames(std::size_t length) const;
  void Validate() const;
};

// Frames whose analysis window lies entirely inside the first `head_samples`.
std::size_t FramesWithin(std::size_t head_samples, const StftConfig& cfg);

std::vector<double> AnalysisWindow(const StftConfig& cfg);
// Scaled so that sum_j wa[n + j*hop] * ws[n + j*hop] == 1 on the full lattice.
std::vector<double> SynthesisWindow(const StftConfig& cfg);
// Max relative deviation of the overlap-added window product from its mean.
double ColaDeviation(const StftConfig& cfg);

// Complex M x K x L array. Storage index is (m * L + l) * K + k, so one
// frame of one channel is contiguous.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t channels, std::size_t bins, std::size_t frames,
              StftConfig cfg = {})
      : cfg_(cfg), channels_(channels), bins_(bins), frames_(frames),
        data_(channels * bins * frames) {}

  std::size_t channels() const { return channels_; }
  std::size_t bins() const { return bins_; }
  std::size_t frames() const { return frames_; }
  const StftConfig& config() const { return cfg_; }

  cd& at(std::size_t m, std::size_t k, std::size_t l) {
    return data_[(m * frames_ + l) * bins_ + k];
  }
  const cd& at(std::size_t m, std::size_t k, std::size_t l) const {
    return data_[(m * frames_ + l) * bins_ + k];
  }
  std::span<cd> frame(std::size_t m, std::size_t l) {
    return {data_.data() + (m * frames_ + l) * bins_, bins_};
  }
  std::span<const cd> frame(std::size_t m, std::size_t l) const {
    return {data_.data() + (m * frames_ + l) * bins_, bins_};
  }
  std::vector<cd>& data() { return data_; }
  const std::vector<cd>& data() const { return data_; }

  bool SameShape(const Spectrogram& o) const {
    return channels_ == o.channels_ && bins_ == o.bins_ && frames_ == o.frames_;
  }
  bool operator==(const Spectrogram& o) const {
    return SameShape(o) && data_ == o.data_;
  }

 private:
  StftConfig cfg_;
  std::size_t channels_ = 0;
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  std::vector<cd> data_;
};

inline constexpr double kRealnessTolerance = 1e-9;

Spectrogram Analyze(const TimeSignal& signal, const StftConfig& cfg = {});

// Overlap-add inverse. Output length is (L-1)*hop + frame_len; each sample
// is normalized by the overlap-added window product actually covering it.
// Imaginary parts at DC/Nyquist up to kRealnessTolerance are dropped.
TimeSignal Synthesize(const Spectrogram& spec);

// Zeroes the imaginary parts at DC and Nyquist, as an inverse real FFT
// would ignore them.
void DropEdgeImaginary(Spectrogram& spec);

// Zero-pads so that every sample is covered by a full frame.
TimeSignal PadToFrames(const TimeSignal& signal, const StftConfig& cfg = {});

// Truncates or zero-pads each channel to `length` samples.
TimeSignal FitLength(const TimeSignal& signal, std::size_t length);

// Reshape M x K x L complex into M x 2K x L real: rows [0,K) real parts,
// rows [K,2K) imaginary parts. Storage is (m * 2K + row) * L + l.
struct PackedSpectrogram {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t frames = 0;
  std::vector<double> data;

  double& at(std::size_t m, std::size_t r, std::size_t l) {
    return data[(m * rows + r) * frames + l];
  }
  double at(std::size_t m, std::size_t r, std::size_t l) const {
    return data[(m * rows + r) * frames + l];
  }
};

PackedSpectrogram PackRealImag(const Spectrogram& spec);
Spectrogram UnpackRealImag(const PackedSpectrogram& packed, const StftConfig& cfg = {});

}  // namespace beamlab
