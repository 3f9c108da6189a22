// src/synth.cc

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

#include "breathid/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "breathid/error.h"
#include "breathid/random.h"

namespace breathid {

namespace {

constexpr double kPi = std::numbers::pi;

// Lattice sub-bands for the first three resonances: first centre, count.
// Wide gaps between neighbouring bands keep broad resonances from merging
// into one spectral peak.
struct Band {
  double first_hz;
  int cells;
};
constexpr std::array<Band, 3> kBands = {{{350.0, 5}, {1200.0, 6}, {2100.0, 5}}};
constexpr double kLatticeStep = 100.0;
constexpr double kCellOffset = 20.0;  // max seeded offset from a lattice point

// Optional extra resonances: [lo, hi] Hz.
constexpr std::array<std::array<double, 2>, 2> kExtraBands = {{{3050.0, 3200.0},
                                                               {3800.0, 3950.0}}};

// Power response of the resonator cascade at f Hz.
double CascadePower(const std::vector<Resonance> &res, double f, int rate) {
  double power = 1.0;
  const std::complex<double> z = std::polar(1.0, -2.0 * kPi * f / rate);
  for (const auto &r : res) {
    const double radius = std::exp(-kPi * r.bandwidth_hz / rate);
    const double b = 2.0 * radius * std::cos(2.0 * kPi * r.center_hz / rate);
    const double c = -radius * radius;
    power *= std::norm((1.0 - b - c) * r.gain / (1.0 - b * z - c * z * z));
  }
  return power;
}

int LatticeSize() {
  int m = 1;
  for (const auto &b : kBands) m *= b.cells;
  return m;
}

}  // namespace

int MaxSpeakers() { return LatticeSize(); }

std::string SpeakerId(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%03d", index);
  return buf;
}

SpeakerProfile MakeSpeakerProfile(int speaker_index, uint64_t seed) {
  Require(speaker_index >= 0, "speaker index must be non-negative");
  const int lattice = LatticeSize();
  Require(speaker_index < lattice,
          "speaker index exceeds the resonance lattice (" + std::to_string(lattice) + ")");

  // Seed-level bijection index -> cell: cell = (a i + b) mod M, gcd(a, M) = 1.
  Rng seed_rng(DeriveSeed(seed, {0x6c617474ULL}));
  auto a = static_cast<int>(seed_rng() % lattice);
  while (std::gcd(a, lattice) != 1) a = (a + 1) % lattice;
  const auto b = static_cast<int>(seed_rng() % lattice);
  int cell = static_cast<int>((static_cast<long long>(a) * speaker_index + b) % lattice);

  Rng rng(DeriveSeed(seed, {0x73706b72ULL, static_cast<uint64_t>(speaker_index)}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SpeakerProfile p;
  p.speaker_index = speaker_index;
  p.speaker_id = SpeakerId(speaker_index);
  for (const auto &band : kBands) {
    const int j = cell % band.cells;
    cell /= band.cells;
    Resonance r;
    r.center_hz = band.first_hz + kLatticeStep * j + uniform(-kCellOffset, kCellOffset);
    r.gain = uniform(0.5, 1.0);
    p.resonances.push_back(r);
  }
  const auto extra = static_cast<int>(rng() % 3);
  for (int e = 0; e < extra; ++e) {
    Resonance r;
    r.center_hz = uniform(kExtraBands[e][0], kExtraBands[e][1]);
    r.gain = uniform(0.5, 1.0);
    p.resonances.push_back(r);
  }
  // Redraw bandwidths until every resonance keeps its own peak; the lower
  // resonances' roll-off can otherwise swallow a broad upper one.
  for (int attempt = 0;; ++attempt) {
    for (auto &r : p.resonances) r.bandwidth_hz = uniform(80.0, 250.0);
    if (ResonancesResolved(p, kReferenceRate)) break;
    if (attempt == 1000) Fail(ErrorCode::kNumerical, "cannot resolve resonances of " + p.speaker_id);
  }
  p.min_duration = uniform(0.2, 0.3);
  p.max_duration = uniform(0.45, 0.6);
  p.attack = uniform(0.1, 0.3);
  p.decay = uniform(0.2, 0.4);
  return p;
}

bool ResonancesResolved(const SpeakerProfile &p, int sample_rate) {
  constexpr int kGrid = 64;
  for (const auto &r : p.resonances) {
    const double lo = r.center_hz * std::exp2(-1.0 / 12.0);
    const double hi = r.center_hz * std::exp2(1.0 / 12.0);
    int best = 0;
    double best_power = -1.0;
    for (int i = 0; i <= kGrid; ++i) {
      const double power = CascadePower(p.resonances, lo + (hi - lo) * i / kGrid, sample_rate);
      if (power > best_power) {
        best_power = power;
        best = i;
      }
    }
    if (best == 0 || best == kGrid) return false;
  }
  return true;
}

void ValidateProfile(const SpeakerProfile &p, int sample_rate) {
  Require(p.resonances.size() >= 3 && p.resonances.size() <= 5,
          "profile needs 3 to 5 resonances");
  for (std::size_t i = 0; i < p.resonances.size(); ++i) {
    const auto &r = p.resonances[i];
    Require(r.center_hz > 0.0 && r.center_hz < sample_rate / 2.0,
            "resonance centre outside (0, Nyquist)");
    Require(r.bandwidth_hz > 0.0, "resonance bandwidth must be positive");
    for (std::size_t j = 0; j < i; ++j)
      Require(std::abs(r.center_hz - p.resonances[j].center_hz) >= 50.0,
              "resonance centres closer than 50 Hz");
  }
  Require(p.min_duration > 0.0 && p.min_duration <= p.max_duration,
          "bad duration range");
  Require(p.attack >= 0.0 && p.decay >= 0.0 && p.attack + p.decay <= 1.0,
          "bad envelope fractions");
}

Waveform SynthBreath(const SpeakerProfile &profile, uint64_t instance_seed,
                     int sample_rate) {
  Require(sample_rate >= 8000, "synthesis needs a sample rate of at least 8000 Hz");
  ValidateProfile(profile, sample_rate);
  Rng rng(DeriveSeed(instance_seed,
                     {0x62726561ULL, static_cast<uint64_t>(profile.speaker_index)}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double duration =
      profile.min_duration + (profile.max_duration - profile.min_duration) * unit(rng);
  const auto n = static_cast<std::size_t>(std::lround(duration * sample_rate));
  std::vector<double> signal(n);
  for (double &x : signal) x = normal(rng);

  for (const auto &res : profile.resonances) {
    const double center = res.center_hz * (1.0 + kCenterJitter * (2.0 * unit(rng) - 1.0));
    // Two-pole resonator with unity gain at DC:
    //   y[n] = A x[n] + B y[n-1] + C y[n-2].
    const double radius = std::exp(-kPi * res.bandwidth_hz / sample_rate);
    const double b = 2.0 * radius * std::cos(2.0 * kPi * center / sample_rate);
    const double c = -radius * radius;
    const double a = (1.0 - b - c) * res.gain;
    double y1 = 0.0, y2 = 0.0;
    for (double &x : signal) {
      const double y = a * x + b * y1 + c * y2;
      y2 = y1;
      y1 = y;
      x = y;
    }
  }

  const double attack_len = profile.attack * static_cast<double>(n);
  const double decay_len = profile.decay * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double env = 1.0;
    const double pos = static_cast<double>(i);
    const double from_end = static_cast<double>(n - 1 - i);
    if (pos < attack_len) env *= 0.5 - 0.5 * std::cos(kPi * pos / attack_len);
    if (from_end < decay_len) env *= 0.5 - 0.5 * std::cos(kPi * from_end / decay_len);
    signal[i] *= env;
  }

  Waveform wave;
  wave.sample_rate = sample_rate;
  wave.samples = std::move(signal);
  return EnergyNormalize(wave);
}

std::vector<std::string> CorpusManifest::Speakers() const {
  std::set<std::string> unique;
  for (const auto &row : rows) unique.insert(row.speaker);
  return {unique.begin(), unique.end()};
}

std::vector<int> CorpusManifest::Labels() const {
  const auto speakers = Speakers();
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (const auto &row : rows)
    labels.push_back(static_cast<int>(
        std::lower_bound(speakers.begin(), speakers.end(), row.speaker) - speakers.begin()));
  return labels;
}

void WriteManifest(const std::filesystem::path &path, const CorpusManifest &manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write manifest " + path.string());
  out << "path,speaker,split\n";
  for (const auto &row : manifest.rows)
    out << row.path << ',' << row.speaker << ',' << SplitName(row.split) << '\n';
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

CorpusManifest ReadManifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open manifest " + path.string());
  CorpusManifest manifest;
  manifest.base_dir = path.parent_path();
  std::string line;
  if (!std::getline(in, line) || line != "path,speaker,split")
    Fail(ErrorCode::kFormat, "manifest " + path.string() +
                                 " must start with the header path,speaker,split");
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    CorpusRow row;
    std::string split;
    if (!std::getline(ss, row.path, ',') || !std::getline(ss, row.speaker, ',') ||
        !std::getline(ss, split) || row.path.empty() || row.speaker.empty())
      Fail(ErrorCode::kFormat, "malformed manifest line " + std::to_string(line_no) +
                                   " in " + path.string());
    row.split = ParseSplit(split);
    if (!seen.insert(row.path).second)
      Fail(ErrorCode::kFormat, "duplicate path '" + row.path + "' in manifest");
    manifest.rows.push_back(std::move(row));
  }
  Require(!manifest.rows.empty(), "manifest " + path.string() + " has no rows",
          ErrorCode::kFormat);
  return manifest;
}

CorpusManifest GenerateCorpus(int n_speakers, int n_instances, int sample_rate,
                              uint64_t seed, const std::filesystem::path &out_dir) {
  Require(n_speakers >= 2 && n_instances >= 1, "corpus needs >= 2 speakers and >= 1 instance");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  CorpusManifest manifest;
  manifest.base_dir = out_dir;
  std::vector<std::string> speakers;
  for (int s = 0; s < n_speakers; ++s) {
    const SpeakerProfile profile = MakeSpeakerProfile(s, seed);
    for (int i = 0; i < n_instances; ++i) {
      Waveform wave = SynthBreath(
          profile, DeriveSeed(seed, {static_cast<uint64_t>(s), static_cast<uint64_t>(i)}),
          sample_rate);
      for (double &x : wave.samples) x *= kWriteGain;
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04d.wav", profile.speaker_id.c_str(), i);
      WriteWav(out_dir / name, wave);
      manifest.rows.push_back({name, profile.speaker_id, Split::kTrain});
      speakers.push_back(profile.speaker_id);
    }
  }
  const SplitManifest split = MakeSplit(speakers, {0.7, 0.2, 0.1}, seed);
  for (std::size_t i = 0; i < manifest.rows.size(); ++i)
    manifest.rows[i].split = split.assignment[i];
  WriteManifest(out_dir / "manifest.csv", manifest);
  return manifest;
}

}  // namespace breathid
