// tests/features_test.cc

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

#include "breathid/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "breathid/synth.h"
#include "test_util.h"

namespace breathid {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> Tone(double hz, double rate, std::size_t n, double phase = 0.0) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::cos(2.0 * kPi * hz * i / rate + phase);
  return s;
}

TEST(CqtConfig, ReferenceConfigurationHas463Bins) {
  const CqtConfig cfg = MakeCqtConfig(44100, 27.5, 22050, 48);
  EXPECT_EQ(cfg.num_bins, 463);
  EXPECT_LE(cfg.center_hz.back(), 22050.0);
}

TEST(CqtConfig, QualityFactorForFortyEightBins) {
  const CqtConfig cfg = MakeCqtConfig(44100, 27.5, 22050, 48);
  // 1 / (2^(1/48) - 1), evaluated independently in extended precision.
  const long double q = 1.0L / (std::pow(2.0L, 1.0L / 48.0L) - 1.0L);
  EXPECT_NEAR(cfg.q, static_cast<double>(q), 1e-10);
  EXPECT_NEAR(cfg.q, 68.7506, 1e-4);
  for (int i = 0; i < cfg.num_bins; ++i)
    EXPECT_NEAR(cfg.center_hz[i] / cfg.BandwidthHz(i), cfg.q, 1e-9);
}

TEST(CqtConfig, OctaveDoublingIsExact) {
  const CqtConfig cfg = MakeCqtConfig(44100, 27.5, 22050, 48);
  EXPECT_EQ(cfg.center_hz[47], 55.0);  // f_48
  for (int i = 0; i + 48 < cfg.num_bins; ++i)
    ASSERT_EQ(cfg.center_hz[i + 48], 2.0 * cfg.center_hz[i]) << "k=" << i + 1;
}

TEST(CqtConfig, WindowLengthsFollowQ) {
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 12);
  for (int i = 0; i < cfg.num_bins; ++i) {
    EXPECT_EQ(cfg.window_length[i],
              static_cast<std::size_t>(std::llround(cfg.q * 16000 / cfg.center_hz[i])));
    if (i > 0) EXPECT_LT(cfg.window_length[i], cfg.window_length[i - 1]);
  }
}

TEST(CqtConfig, RejectsEmptyRange) {
  EXPECT_THROW(MakeCqtConfig(16000, 8000, 8000, 12), Error);
  EXPECT_THROW(MakeCqtConfig(16000, 100, 8000, 0), Error);
}

TEST(CqtFrame, ToneAtCenterFrequencyPeaksAtItsBin) {
  const CqtConfig cfg = MakeCqtConfig(44100, 27.5, 22050, 48);
  const std::size_t n = cfg.window_length[0] + 2;
  const CqtKernel kernel(cfg);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int i = static_cast<int>(rng() % cfg.num_bins);
    const auto s = Tone(cfg.center_hz[i], 44100, n, 0.3 * trial);
    const auto x = kernel.Transform(s, static_cast<std::ptrdiff_t>(n / 2));
    int best = 0;
    for (int j = 1; j < cfg.num_bins; ++j)
      if (std::abs(x[j]) > std::abs(x[best])) best = j;
    EXPECT_EQ(best, i) << "tone " << cfg.center_hz[i] << " Hz";
  }
}

TEST(CqtFrame, ZeroSignalGivesZeros) {
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 12);
  const std::vector<double> s(4000, 0.0);
  for (const auto &v : CqtFrame(s, 2000, cfg)) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(CqtFrame, Linear) {
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 12);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> a(3000), b(3000), mix(3000);
  const double k = -1.7;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
    mix[i] = k * a[i] + b[i];
  }
  const auto xa = CqtFrame(a, 1500, cfg), xb = CqtFrame(b, 1500, cfg), xm = CqtFrame(mix, 1500, cfg);
  for (int j = 0; j < cfg.num_bins; ++j) EXPECT_LT(std::abs(xm[j] - (k * xa[j] + xb[j])), 1e-9);
}

TEST(CqtFrame, MatchesDirectSumInsideSignal) {
  const CqtConfig cfg = MakeCqtConfig(8000, 200, 4000, 6);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  std::vector<double> s(2000);
  for (double &x : s) x = g(rng);
  const std::ptrdiff_t center = 1000;
  const auto x = CqtFrame(s, center, cfg);
  for (int i = 0; i < cfg.num_bins; ++i) {
    const auto len = static_cast<std::ptrdiff_t>(cfg.window_length[i]);
    std::complex<double> acc = 0.0;
    for (std::ptrdiff_t n = 0; n < len; ++n) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * n / len);
      acc += s[center - len / 2 + n] * w * std::polar(1.0, -2.0 * kPi * n * cfg.q / len);
    }
    EXPECT_LT(std::abs(x[i] - acc / static_cast<double>(len)), 1e-12) << i;
  }
}

TEST(CqtFrame, TruncatedWindowNormalizedByEffectiveCount) {
  const CqtConfig cfg = MakeCqtConfig(8000, 50, 4000, 12);
  ASSERT_GT(cfg.window_length[0], 600u);
  const std::vector<double> s(600, 1.0);
  const auto len = static_cast<std::ptrdiff_t>(cfg.window_length[0]);
  const std::ptrdiff_t center = 300;
  std::complex<double> acc = 0.0;
  int count = 0;
  for (std::ptrdiff_t n = 0; n < len; ++n) {
    const std::ptrdiff_t idx = center - len / 2 + n;
    if (idx < 0 || idx >= 600) continue;
    ++count;
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * n / len);
    acc += w * std::polar(1.0, -2.0 * kPi * n * cfg.q / len);
  }
  const auto x = CqtFrame(s, center, cfg);
  EXPECT_LT(std::abs(x[0] - acc / static_cast<double>(count)), 1e-12);
}

TEST(CqtSpectrogram, OneFrameShape) {
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 12);
  Waveform w{std::vector<double>(400, 0.1), 16000};
  const Spectrogram spec = CqtSpectrogram(w, cfg, 25, 10);
  EXPECT_EQ(spec.NumFrames(), 1);
  EXPECT_EQ(spec.NumBins(), cfg.num_bins);
  EXPECT_EQ(spec.freq_axis, cfg.center_hz);
  EXPECT_DOUBLE_EQ(spec.frame_hop, 0.010);
}

TEST(CqtSpectrogram, ScalingShiftsByLogOfFactor) {
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 12);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Waveform w{std::vector<double>(3000), 16000};
  for (double &x : w.samples) x = g(rng);
  Waveform w10 = w;
  for (double &x : w10.samples) x *= 10.0;
  const auto a = CqtSpectrogram(w, cfg, 25, 10).values;
  const auto b = CqtSpectrogram(w10, cfg, 25, 10).values;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) <= std::log(kLogFloor)) continue;
    EXPECT_NEAR(b(i) - a(i), std::log(10.0), 1e-12);
  }
}

TEST(CqtSpectrogram, ValuesRespectFloor) {
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 12);
  Waveform w{std::vector<double>(2000, 0.0), 16000};
  const auto v = CqtSpectrogram(w, cfg, 25, 10).values;
  EXPECT_DOUBLE_EQ(v.minCoeff(), std::log(kLogFloor));
}

TEST(CqtSpectrogram, RateMismatchRejected) {
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 12);
  Waveform w{std::vector<double>(2000, 0.5), 8000};
  EXPECT_EQ(testing::CodeOf([&] { CqtSpectrogram(w, cfg, 25, 10); }),
            ErrorCode::kDimensionMismatch);
}

int NearestRow(const CqtConfig &cfg, double hz) {
  int row = 0;
  for (int i = 1; i < cfg.num_bins; ++i)
    if (std::abs(cfg.center_hz[i] - hz) < std::abs(cfg.center_hz[row] - hz)) row = i;
  return row;
}

SpeakerProfile ProfileWith800(double bandwidth) {
  SpeakerProfile p;
  p.speaker_id = "spk800";
  p.resonances = {{800.0, bandwidth, 1.0}, {2000.0, 200.0, 0.6}, {3200.0, 250.0, 0.5}};
  p.min_duration = p.max_duration = 0.5;
  p.attack = p.decay = 0.1;
  return p;
}

// Frame-wise argmax is only stable when the resonance is narrower than the
// bin spacing; wider ones spread the per-frame peak over neighbouring bins.
TEST(CqtSpectrogram, SharpBreathResonanceDominatesItsRow) {
  const SpeakerProfile p = ProfileWith800(10.0);
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 6);
  const int row = NearestRow(cfg, 800.0);
  int hits = 0, frames = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Spectrogram spec = CqtSpectrogram(SynthBreath(p, seed, 16000), cfg, 25, 10);
    for (Eigen::Index t = 0; t < spec.NumFrames(); ++t) {
      Eigen::Index best = 0;
      spec.values.col(t).maxCoeff(&best);
      hits += best == row;
      ++frames;
    }
  }
  EXPECT_GE(hits, 0.8 * frames) << hits << " of " << frames;
}

TEST(CqtSpectrogram, BreathResonancePeaksTimeAveragedSpectrum) {
  const SpeakerProfile p = ProfileWith800(100.0);
  const CqtConfig cfg = MakeCqtConfig(16000, 100, 8000, 12);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(cfg.num_bins);
  for (uint64_t seed = 0; seed < 10; ++seed)
    mean += CqtSpectrogram(SynthBreath(p, seed, 16000), cfg, 25, 10).values.rowwise().mean();
  Eigen::Index best = 0;
  mean.maxCoeff(&best);
  EXPECT_EQ(best, NearestRow(cfg, 800.0));
}

TEST(Mfcc, DimensionAndShape) {
  MfccConfig cfg;
  EXPECT_EQ(cfg.Dimension(), 39);
  Waveform w{std::vector<double>(1600, 0.0), 16000};
  w.samples[100] = 1.0;
  const auto m = MfccSequence(w, cfg);
  EXPECT_EQ(m.cols(), 39);
  EXPECT_EQ(m.rows(), 9);  // eight full frames from 0 to 1120, one padded
}

TEST(Mfcc, ZeroSignalIsDctOfConstantFloor) {
  MfccConfig cfg;
  cfg.include_deltas = false;
  Waveform w{std::vector<double>(800, 0.0), 16000};
  const auto m = MfccSequence(w, cfg);
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    EXPECT_NEAR(m(t, 0), cfg.n_mel_filters * std::log(kLogFloor), 1e-9);
    for (int c = 1; c < cfg.n_ceps; ++c) EXPECT_NEAR(m(t, c), 0.0, 1e-9);
  }
}

TEST(Mfcc, EnergyCoefficientDominatesOnWhiteNoise) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  Waveform w{std::vector<double>(16000), 16000};
  for (double &x : w.samples) x = g(rng);
  MfccConfig cfg;
  cfg.include_deltas = false;
  const Eigen::VectorXd mean = MfccSequence(w, cfg).colwise().mean().transpose();
  for (int c = 1; c < cfg.n_ceps; ++c) EXPECT_GT(std::abs(mean[0]), std::abs(mean[c]));
}

TEST(Mfcc, DeltasOfConstantSequenceVanish) {
  Eigen::MatrixXd frames = Eigen::MatrixXd::Constant(9, 4, 2.5);
  EXPECT_LT(ComputeDeltas(frames).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mfcc, DeltasOfLinearRampAreItsSlope) {
  Eigen::MatrixXd frames(12, 1);
  for (int t = 0; t < 12; ++t) frames(t, 0) = 3.0 * t;
  const auto d = ComputeDeltas(frames);
  for (int t = 2; t < 10; ++t) EXPECT_NEAR(d(t, 0), 3.0, 1e-12);
}

TEST(Mfcc, TooShortRejected) {
  Waveform w{std::vector<double>(100, 0.1), 16000};
  EXPECT_THROW(MfccSequence(w, MfccConfig{}), Error);
}

TEST(Elastic, ZeroAlphaIsIdentity) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 15);
  EXPECT_EQ(ElasticTransform(x, 2.0, 0.0, 5), x);
}

TEST(Elastic, DeterministicInSeed) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(30, 25);
  EXPECT_EQ(ElasticTransform(x, 2.0, 15.0, 5), ElasticTransform(x, 2.0, 15.0, 5));
  EXPECT_NE(ElasticTransform(x, 2.0, 15.0, 5), ElasticTransform(x, 2.0, 15.0, 6));
}

TEST(Elastic, PeakMovesAtMostAlphaPlusOneCells) {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(61, 61);
    x(30, 30) = 1.0;
    const Eigen::MatrixXd y = ElasticTransform(x, 2.0, 15.0, seed);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      for (Eigen::Index j = 0; j < y.cols(); ++j)
        if (y(i, j) != 0.0) {
          EXPECT_LE(std::abs(i - 30), 16);
          EXPECT_LE(std::abs(j - 30), 16);
        }
  }
}

TEST(Elastic, OutputStaysWithinInputRange) {
  std::mt19937_64 rng(2);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(25, 40) * 3.0;
    const Eigen::MatrixXd y = ElasticTransform(x, 2.0, 15.0, seed);
    EXPECT_EQ(y.rows(), x.rows());
    EXPECT_EQ(y.cols(), x.cols());
    EXPECT_GE(y.minCoeff(), x.minCoeff() - 1e-12);
    EXPECT_LE(y.maxCoeff(), x.maxCoeff() + 1e-12);
  }
}

TEST(Elastic, SpectrogramOverloadKeepsMetadata) {
  Spectrogram s;
  s.values = Eigen::MatrixXd::Random(10, 12);
  s.freq_axis.assign(10, 1.0);
  s.frame_hop = 0.01;
  const Spectrogram out = ElasticTransform(s, 2.0, 15.0, 1);
  EXPECT_EQ(out.freq_axis, s.freq_axis);
  EXPECT_EQ(out.frame_hop, s.frame_hop);
}

}  // namespace
}  // namespace breathid
