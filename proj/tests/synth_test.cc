// tests/synth_test.cc

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

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "breathid/features.h"
#include "breathid/random.h"
#include "test_util.h"

namespace breathid {
namespace {

std::string FileBytes(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(SpeakerProfile, DeterministicAndValid) {
  for (int i = 0; i < 50; ++i) {
    const SpeakerProfile p = MakeSpeakerProfile(i, 11);
    EXPECT_NO_THROW(ValidateProfile(p, 16000)) << i;
    EXPECT_NO_THROW(ValidateProfile(p, 8000)) << i;
    EXPECT_TRUE(ResonancesResolved(p, kReferenceRate));
    EXPECT_EQ(p.speaker_id, SpeakerId(i));
    for (const auto &r : p.resonances) {
      EXPECT_GE(r.center_hz, 300.0);
      EXPECT_LE(r.center_hz, 4000.0);
      EXPECT_GE(r.bandwidth_hz, 80.0);
      EXPECT_LE(r.bandwidth_hz, 250.0);
    }
    EXPECT_GE(p.min_duration, 0.2);
    EXPECT_LE(p.max_duration, 0.6);
    const SpeakerProfile q = MakeSpeakerProfile(i, 11);
    ASSERT_EQ(p.resonances.size(), q.resonances.size());
    for (std::size_t k = 0; k < p.resonances.size(); ++k)
      EXPECT_EQ(p.resonances[k].center_hz, q.resonances[k].center_hz);
  }
  EXPECT_EQ(SpeakerId(7), "spk007");
}

TEST(SpeakerProfile, DistinctSpeakersDifferByFiftyHz) {
  for (uint64_t seed : {1ULL, 7ULL}) {
    std::vector<SpeakerProfile> ps;
    for (int i = 0; i < 150; ++i) ps.push_back(MakeSpeakerProfile(i, seed));
    for (std::size_t a = 0; a < ps.size(); ++a)
      for (std::size_t b = a + 1; b < ps.size(); ++b) {
        double widest = 0.0;
        for (int k = 0; k < 3; ++k)
          widest = std::max(widest, std::abs(ps[a].resonances[k].center_hz -
                                             ps[b].resonances[k].center_hz));
        ASSERT_GE(widest, 50.0) << a << " vs " << b;
      }
  }
  EXPECT_EQ(MaxSpeakers(), 150);
  EXPECT_THROW(MakeSpeakerProfile(150, 1), Error);
  EXPECT_THROW(MakeSpeakerProfile(-1, 1), Error);
}

TEST(ValidateProfile, RejectsBrokenProfiles) {
  SpeakerProfile p = MakeSpeakerProfile(0, 1);
  SpeakerProfile close = p;
  close.resonances[1].center_hz = close.resonances[0].center_hz + 10.0;
  EXPECT_THROW(ValidateProfile(close, 16000), Error);
  SpeakerProfile nyquist = p;
  nyquist.resonances[2].center_hz = 9000.0;
  EXPECT_THROW(ValidateProfile(nyquist, 16000), Error);
  SpeakerProfile two = p;
  two.resonances.resize(2);
  EXPECT_THROW(ValidateProfile(two, 16000), Error);
  EXPECT_THROW(SynthBreath(p, 1, 4000), Error);
}

TEST(SynthBreath, BitwiseDeterministic) {
  const SpeakerProfile p = MakeSpeakerProfile(3, 2);
  const Waveform a = SynthBreath(p, 17, 16000), b = SynthBreath(p, 17, 16000);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, SynthBreath(p, 18, 16000).samples);
}

TEST(SynthBreath, DurationEnergyAndEnvelope) {
  for (int s = 0; s < 10; ++s) {
    const SpeakerProfile p = MakeSpeakerProfile(s, 5);
    const Waveform w = SynthBreath(p, DeriveSeed(5, {static_cast<uint64_t>(s)}), 16000);
    const double seconds = static_cast<double>(w.samples.size()) / 16000.0;
    EXPECT_GE(seconds, p.min_duration - 1e-4);
    EXPECT_LE(seconds, p.max_duration + 1e-4);
    double energy = 0.0, peak = 0.0;
    for (double x : w.samples) {
      energy += x * x;
      peak = std::max(peak, std::abs(x));
    }
    EXPECT_NEAR(energy / static_cast<double>(w.samples.size()), 1.0, 1e-9);
    EXPECT_LT(std::abs(w.samples.front()), 0.05 * peak);
    EXPECT_LT(std::abs(w.samples.back()), 0.05 * peak);
  }
}

// Welch-style power at frequency f: Hann-windowed, half-overlapping
// segments of every waveform, averaged.
double WelchPower(const std::vector<Waveform> &waves, double f, std::size_t seg) {
  double total = 0.0;
  int count = 0;
  for (const auto &w : waves) {
    for (std::size_t start = 0; start + seg <= w.samples.size(); start += seg / 2) {
      std::complex<double> acc = 0.0;
      for (std::size_t n = 0; n < seg; ++n) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / seg);
        acc += hann * w.samples[start + n] *
               std::polar(1.0, -2.0 * std::numbers::pi * f * n / w.sample_rate);
      }
      total += std::norm(acc);
      ++count;
    }
  }
  return total / count;
}

TEST(SynthBreath, SpectrumPeaksNearEveryResonance) {
  // One CQT bin at 12 bins per octave either side of each centre.
  for (int s = 0; s < 10; ++s) {
    const SpeakerProfile p = MakeSpeakerProfile(s, 7);
    std::vector<Waveform> waves;
    for (uint64_t i = 0; i < 30; ++i) waves.push_back(SynthBreath(p, DeriveSeed(1, {i}), 16000));
    for (const auto &r : p.resonances) {
      const double lo = r.center_hz * std::exp2(-1.0 / 12.0);
      const double hi = r.center_hz * std::exp2(1.0 / 12.0);
      constexpr int kGrid = 24;
      int best = 0;
      double best_power = -1.0;
      for (int i = 0; i <= kGrid; ++i) {
        const double power = WelchPower(waves, lo + (hi - lo) * i / kGrid, 2048);
        if (power > best_power) {
          best_power = power;
          best = i;
        }
      }
      EXPECT_GT(best, 0) << "speaker " << s << " resonance " << r.center_hz;
      EXPECT_LT(best, kGrid) << "speaker " << s << " resonance " << r.center_hz;
    }
  }
}

TEST(SynthBreath, SpeakersSeparableInMeanCqtSpectrum) {
  const CqtConfig cfg = MakeCqtConfig(16000, 100.0, 8000.0, 12);
  constexpr int kSpeakers = 10, kInstances = 12;
  std::vector<std::vector<Eigen::VectorXd>> spectra(kSpeakers);
  for (int s = 0; s < kSpeakers; ++s) {
    const SpeakerProfile p = MakeSpeakerProfile(s, 7);
    for (int i = 0; i < kInstances; ++i) {
      const Waveform w = SynthBreath(
          p, DeriveSeed(7, {static_cast<uint64_t>(s), static_cast<uint64_t>(i)}), 16000);
      const Spectrogram spec = CqtSpectrogram(w, cfg, 25.0, 10.0);
      spectra[s].push_back(spec.values.rowwise().mean());
    }
  }
  std::vector<Eigen::VectorXd> means(kSpeakers);
  double within = 0.0;
  for (int s = 0; s < kSpeakers; ++s) {
    means[s] = Eigen::VectorXd::Zero(spectra[s][0].size());
    for (const auto &v : spectra[s]) means[s] += v / kInstances;
    for (const auto &v : spectra[s]) within += (v - means[s]).norm();
  }
  within /= kSpeakers * kInstances;
  for (int a = 0; a < kSpeakers; ++a)
    for (int b = a + 1; b < kSpeakers; ++b)
      EXPECT_GT((means[a] - means[b]).norm(), within) << a << " vs " << b;
}

TEST(GenerateCorpus, FilesManifestAndSplit) {
  testing::ScratchDir dir;
  const CorpusManifest m = GenerateCorpus(10, 40, 16000, 7, dir.path());
  ASSERT_EQ(m.rows.size(), 400u);
  const CorpusManifest back = ReadManifest(dir / "manifest.csv");
  ASSERT_EQ(back.rows.size(), 400u);
  std::map<std::string, std::array<int, 3>> counts;
  for (const auto &row : back.rows) {
    ASSERT_TRUE(std::filesystem::exists(back.Resolve(row))) << row.path;
    counts[row.speaker][static_cast<int>(row.split)] += 1;
  }
  ASSERT_EQ(counts.size(), 10u);
  for (const auto &[spk, c] : counts) {
    EXPECT_EQ(c[0], 28) << spk;
    EXPECT_EQ(c[1], 8) << spk;
    EXPECT_EQ(c[2], 4) << spk;
  }
  const Waveform w = LoadWav(back.Resolve(back.rows[5]));
  EXPECT_EQ(w.sample_rate, 16000);
  EXPECT_EQ(back.Speakers().size(), 10u);
  EXPECT_EQ(back.Labels()[0], 0);
  std::ifstream in(dir / "manifest.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "path,speaker,split");
}

TEST(GenerateCorpus, RegenerationIsByteIdentical) {
  testing::ScratchDir a, b;
  GenerateCorpus(3, 6, 16000, 9, a.path() / "c");
  GenerateCorpus(3, 6, 16000, 9, b.path() / "c");
  for (const auto &entry : std::filesystem::directory_iterator(a.path() / "c"))
    EXPECT_EQ(FileBytes(entry.path()), FileBytes(b.path() / "c" / entry.path().filename()))
        << entry.path();
}

TEST(GenerateCorpus, WrittenAudioRoundTrips) {
  testing::ScratchDir dir;
  GenerateCorpus(2, 6, 16000, 1, dir.path());
  const Waveform w = LoadWav(dir / "spk001_0002.wav");
  const SpeakerProfile p = MakeSpeakerProfile(1, 1);
  const Waveform ref = SynthBreath(p, DeriveSeed(1, {1, 2}), 16000);
  ASSERT_EQ(w.samples.size(), ref.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    EXPECT_NEAR(w.samples[i], kWriteGain * ref.samples[i], 1.0 / 32768.0);
  WriteWav(dir / "copy.wav", w);
  EXPECT_EQ(LoadWav(dir / "copy.wav").samples, w.samples);
}

TEST(Manifest, RejectsBadInput) {
  testing::ScratchDir dir;
  EXPECT_EQ(testing::CodeOf([&] { ReadManifest(dir / "missing.csv"); }), ErrorCode::kNotFound);
  std::ofstream(dir / "bad_header.csv") << "file,speaker,split\na.wav,s,train\n";
  EXPECT_EQ(testing::CodeOf([&] { ReadManifest(dir / "bad_header.csv"); }),
            ErrorCode::kFormat);
  std::ofstream(dir / "dup.csv") << "path,speaker,split\na.wav,s,train\na.wav,s,test\n";
  EXPECT_EQ(testing::CodeOf([&] { ReadManifest(dir / "dup.csv"); }), ErrorCode::kFormat);
  std::ofstream(dir / "split.csv") << "path,speaker,split\na.wav,s,dev\n";
  EXPECT_EQ(testing::CodeOf([&] { ReadManifest(dir / "split.csv"); }), ErrorCode::kFormat);
  std::ofstream(dir / "short.csv") << "path,speaker,split\na.wav\n";
  EXPECT_EQ(testing::CodeOf([&] { ReadManifest(dir / "short.csv"); }), ErrorCode::kFormat);
}

}  // namespace
}  // namespace breathid
