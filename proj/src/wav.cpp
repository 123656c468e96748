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

#include "beamlab/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "beamlab/error.hpp"

namespace beamlab {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T ReadLe(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void PutLe(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace

TimeSignal ReadWav(const std::string& path, std::optional<int> expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorKind::kFormat, path + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* payload = nullptr;
  std::size_t payload_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const auto size = ReadLe<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw Error(ErrorKind::kFormat, path + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorKind::kFormat, path + ": short fmt chunk");
      format = ReadLe<std::uint16_t>(bytes.data() + body);
      channels = ReadLe<std::uint16_t>(bytes.data() + body + 2);
      rate = ReadLe<std::uint32_t>(bytes.data() + body + 4);
      bits = ReadLe<std::uint16_t>(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 26)
        format = ReadLe<std::uint16_t>(bytes.data() + body + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      payload = bytes.data() + body;
      payload_size = size;
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || payload == nullptr)
    throw Error(ErrorKind::kFormat, path + ": missing fmt or data chunk");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw Error(ErrorKind::kFormat, path + ": only 16-bit PCM and 32-bit float are supported");
  if (expected_rate && static_cast<int>(rate) != *expected_rate)
    throw Error(ErrorKind::kConfig, path + ": sample rate " + std::to_string(rate) +
                                        " != expected " + std::to_string(*expected_rate));

  const std::size_t width = bits / 8;
  const std::size_t frames = payload_size / (width * channels);
  TimeSignal sig(channels, frames, static_cast<int>(rate));
  for (std::size_t n = 0; n < frames; ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = payload + (n * channels + c) * width;
      sig(c, n) = pcm16 ? ReadLe<std::int16_t>(p) / 32768.0
                        : static_cast<double>(ReadLe<float>(p));
    }
  return sig;
}

void WriteWav(const std::string& path, const TimeSignal& signal, WavFormat format) {
  const std::uint16_t channels = static_cast<std::uint16_t>(signal.channels());
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint32_t rate = static_cast<std::uint32_t>(signal.sample_rate());
  const std::uint32_t block = channels * bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(signal.length() * block);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutLe<std::uint32_t>(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutLe<std::uint32_t>(out, 16);
  PutLe<std::uint16_t>(out, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  PutLe<std::uint16_t>(out, channels);
  PutLe<std::uint32_t>(out, rate);
  PutLe<std::uint32_t>(out, rate * block);
  PutLe<std::uint16_t>(out, static_cast<std::uint16_t>(block));
  PutLe<std::uint16_t>(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutLe<std::uint32_t>(out, data_size);
  for (std::size_t n = 0; n < signal.length(); ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = signal(c, n);
      if (format == WavFormat::kPcm16) {
        const double s = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        PutLe<std::int16_t>(out, static_cast<std::int16_t>(s));
      } else {
        PutLe<float>(out, static_cast<float>(v));
      }
    }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace beamlab
