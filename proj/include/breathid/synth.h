// breathid/synth.h

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

// Synthetic breath corpus: white Gaussian noise shaped by a cascade of
// speaker-specific two-pole resonators, with per-instance jitter and an
// attack/decay envelope.

#ifndef BREATHID_SYNTH_H_
#define BREATHID_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "breathid/audio.h"
#include "breathid/classify.h"

namespace breathid {

struct Resonance {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double gain = 1.0;
};

struct SpeakerProfile {
  int speaker_index = 0;
  std::string speaker_id;
  std::vector<Resonance> resonances;  // 3 to 5, ascending centre
  double min_duration = 0.2;          // seconds
  double max_duration = 0.6;
  double attack = 0.2;  // fraction of the duration
  double decay = 0.3;
};

/// Number of distinct speaker profiles, the size of the resonance lattice.
int MaxSpeakers();

/// Speaker id used for index i, e.g. "spk007".
std::string SpeakerId(int index);

/// Deterministic in (index, seed). The first three resonance centres sit on
/// a 100 Hz lattice inside fixed sub-bands of [330, 2520] Hz (150 cells); the
/// cell is a seeded bijection of the index, so two distinct indices below
/// the lattice size always differ by at least 60 Hz in some centre.
/// Bandwidths are redrawn until ResonancesResolved holds at kReferenceRate.
SpeakerProfile MakeSpeakerProfile(int speaker_index, uint64_t seed);

/// Rate used when profiles are checked for resolvable resonances.
inline constexpr int kReferenceRate = 16000;

/// True when the noise-free resonator cascade has an interior power maximum
/// within 1/12 octave of every resonance centre.
bool ResonancesResolved(const SpeakerProfile &profile, int sample_rate);

/// Throws Error(kInvalidArgument) when a profile violates its invariants
/// at the given sample rate.
void ValidateProfile(const SpeakerProfile &profile, int sample_rate);

/// Relative jitter applied to every resonance centre per instance.
inline constexpr double kCenterJitter = 0.03;

/// One breath instance, energy normalized. Deterministic in
/// (profile, instance_seed, sample_rate).
Waveform SynthBreath(const SpeakerProfile &profile, uint64_t instance_seed,
                     int sample_rate);

/// Gain applied before writing unit-energy waveforms to 16-bit files.
inline constexpr double kWriteGain = 0.1;

struct CorpusRow {
  std::string path;  // as written in the manifest, relative to its directory
  std::string speaker;
  Split split = Split::kTrain;
};

struct CorpusManifest {
  std::vector<CorpusRow> rows;
  std::filesystem::path base_dir;  // directory the manifest lives in

  std::filesystem::path Resolve(const CorpusRow &row) const { return base_dir / row.path; }
  /// Sorted distinct speaker ids; a speaker's label is its index here.
  std::vector<std::string> Speakers() const;
  std::vector<int> Labels() const;
};

/// Manifest CSV with header `path,speaker,split`.
void WriteManifest(const std::filesystem::path &path, const CorpusManifest &manifest);
CorpusManifest ReadManifest(const std::filesystem::path &path);

/// Writes n_speakers x n_instances WAV files plus manifest.csv into
/// out_dir, with a seeded 70/20/10 per-speaker split.
CorpusManifest GenerateCorpus(int n_speakers, int n_instances, int sample_rate,
                              uint64_t seed, const std::filesystem::path &out_dir);

}  // namespace breathid

#endif  // BREATHID_SYNTH_H_
