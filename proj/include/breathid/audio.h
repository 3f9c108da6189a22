// breathid/audio.h

// Copyright 2026  The breathid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef BREATHID_AUDIO_H_
#define BREATHID_AUDIO_H_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace breathid {

/// Sampled mono audio. Amplitudes are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  double DurationSeconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

/// Reads a RIFF/WAVE file holding 16-bit mono PCM. Samples are divided by
/// 32768. Throws Error(kNotFound) for a missing file and Error(kFormat) for
/// anything that is not 16-bit mono PCM, with a message naming the cause.
Waveform LoadWav(const std::filesystem::path &path);

/// Writes 16-bit mono PCM. Samples are mapped by round(x * 32768) and
/// clamped to the int16 range, so LoadWav(WriteWav(w)) is exact whenever w
/// was itself produced by LoadWav.
void WriteWav(const std::filesystem::path &path, const Waveform &wave);

/// Rounds every sample to the 16-bit grid used by WriteWav.
Waveform QuantizeToPcm16(const Waveform &wave);

/// Scales the signal to unit mean-square amplitude. Throws on silence.
Waveform EnergyNormalize(const Waveform &wave);

/// Frame geometry derived from millisecond parameters at a given rate.
struct FrameLayout {
  std::size_t frame_length = 0;  // samples
  std::vector<std::size_t> starts;

  std::size_t NumFrames() const { return starts.size(); }
};

/// Frame t starts at round(t * hop_ms * rate / 1000). Full frames are taken
/// while they fit; if samples remain uncovered after the last full frame one
/// extra zero-padded frame is appended.
FrameLayout ComputeFrameLayout(std::size_t num_samples, int sample_rate,
                               double frame_ms, double hop_ms);

std::vector<std::vector<double>> FrameSignal(const Waveform &wave,
                                             double frame_ms, double hop_ms);

}  // namespace breathid

#endif  // BREATHID_AUDIO_H_
