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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace beamlab {

using cd = std::complex<double>;

// Real-valued multichannel waveform, channel-major storage.
class TimeSignal {
 public:
  TimeSignal() = default;
  TimeSignal(std::size_t channels, std::size_t length, int sample_rate)
      : channels_(channels), length_(length), sample_rate_(sample_rate),
        data_(channels * length, 0.0) {}

  static TimeSignal Mono(std::vector<double> samples, int sample_rate) {
    TimeSignal s;
    s.channels_ = 1;
    s.length_ = samples.size();
    s.sample_rate_ = sample_rate;
    s.data_ = std::move(samples);
    return s;
  }

  std::size_t channels() const { return channels_; }
  std::size_t length() const { return length_; }
  int sample_rate() const { return sample_rate_; }

  std::span<double> channel(std::size_t c) {
    return {data_.data() + c * length_, length_};
  }
  std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * length_, length_};
  }
  double& operator()(std::size_t c, std::size_t n) { return data_[c * length_ + n]; }
  double operator()(std::size_t c, std::size_t n) const { return data_[c * length_ + n]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // Copy of one channel as a mono signal.
  TimeSignal Extract(std::size_t c) const {
    auto ch = channel(c);
    return Mono(std::vector<double>(ch.begin(), ch.end()), sample_rate_);
  }

  bool operator==(const TimeSignal&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  int sample_rate_ = 16000;
  std::vector<double> data_;
};

}  // namespace beamlab
