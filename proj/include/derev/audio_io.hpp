// Copyright 2026 The derev Authors
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

#include <string>

#include "derev/types.hpp"

namespace derev {

enum class WavEncoding { Pcm16, Float32 };

/// Reads a RIFF/WAVE file with 16-bit PCM or 32-bit float samples, 1-8
/// channels. Integer samples are normalized by 1/32768; the sample rate is
/// preserved (no resampling).
Waveform read_wav(const std::string& path);

struct WavWriteResult {
  long clipped_samples = 0;
};

/// Writes a WAV file with deterministic bytes. Samples outside [-1, 1] are
/// hard-clipped and counted in the result.
WavWriteResult write_wav(const Waveform& wave, const std::string& path,
                         WavEncoding encoding = WavEncoding::Float32);

}  // namespace derev
