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

#include <optional>
#include <string>

#include "beamlab/signal.hpp"

namespace beamlab {

enum class WavFormat { kPcm16, kFloat32 };

// Reads 16-bit PCM or 32-bit float RIFF/WAVE, any channel count. When
// `expected_rate` is given a mismatching file is rejected.
TimeSignal ReadWav(const std::string& path, std::optional<int> expected_rate = std::nullopt);

// PCM16 samples are clipped to [-1, 1).
void WriteWav(const std::string& path, const TimeSignal& signal,
              WavFormat format = WavFormat::kFloat32);

}  // namespace beamlab
