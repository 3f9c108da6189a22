// src/features.cc

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
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "breathid/error.h"
#include "breathid/random.h"

namespace breathid {

namespace {

constexpr double kPi = std::numbers::pi;

double HannValue(std::size_t n, std::size_t length) {
  return 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n) / length);
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Separable Gaussian blur with clamped borders.
Eigen::MatrixXd GaussianBlur(const Eigen::MatrixXd &in, double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += kernel[i + radius];
  }
  for (double &k : kernel) k /= total;

  const Eigen::Index rows = in.rows(), cols = in.cols();
  Eigen::MatrixXd tmp(rows, cols), out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        Eigen::Index rr = std::clamp<Eigen::Index>(r + i, 0, rows - 1);
        acc += kernel[i + radius] * in(rr, c);
      }
      tmp(r, c) = acc;
    }
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        Eigen::Index cc = std::clamp<Eigen::Index>(c + i, 0, cols - 1);
        acc += kernel[i + radius] * tmp(r, cc);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

CqtConfig MakeCqtConfig(double sample_rate, double min_hz, double max_hz,
                        int bins_per_octave) {
  Require(sample_rate > 0.0, "CQT: sample rate must be positive");
  Require(min_hz > 0.0 && max_hz > min_hz, "CQT: need 0 < min_hz < max_hz");
  Require(max_hz <= sample_rate / 2.0 + 1e-9, "CQT: max_hz above Nyquist");
  Require(bins_per_octave >= 1, "CQT: bins_per_octave must be positive");

  CqtConfig cfg;
  cfg.sample_rate = sample_rate;
  cfg.min_hz = min_hz;
  cfg.max_hz = max_hz;
  cfg.bins_per_octave = bins_per_octave;
  // The epsilon keeps exact octave ratios from flooring one bin short.
  cfg.num_bins = static_cast<int>(
      std::floor(bins_per_octave * std::log2(max_hz / min_hz) + 1e-9));
  Require(cfg.num_bins >= 1, "CQT: configuration yields no bins");
  cfg.q = 1.0 / (std::exp2(1.0 / bins_per_octave) - 1.0);
  cfg.center_hz.resize(cfg.num_bins);
  cfg.window_length.resize(cfg.num_bins);
  for (int i = 0; i < cfg.num_bins; ++i) {
    const int k = i + 1;
    // Whole octaves through ldexp so f_{k+b} = 2 f_k holds bit for bit.
    const int octave = k / bins_per_octave;
    const int step = k % bins_per_octave;
    cfg.center_hz[i] = std::ldexp(
        min_hz * std::exp2(static_cast<double>(step) / bins_per_octave), octave);
    cfg.window_length[i] = static_cast<std::size_t>(
        std::llround(cfg.q * sample_rate / cfg.center_hz[i]));
    Require(cfg.window_length[i] >= 1, "CQT: window length rounds to zero");
    if (i > 0 && cfg.window_length[i] >= cfg.window_length[i - 1])
      Fail(ErrorCode::kInvalidArgument,
           "CQT: window lengths not strictly decreasing at bin " +
               std::to_string(k) + "; lower bins_per_octave or raise the rate");
  }
  return cfg;
}

CqtKernel::CqtKernel(const CqtConfig &config, std::size_t max_signal_length)
    : config_(config), max_signal_length_(max_signal_length) {
  bins_.resize(config_.num_bins);
  for (int i = 0; i < config_.num_bins; ++i) {
    BinTaps &bin = bins_[i];
    const std::size_t length = config_.window_length[i];
    bin.length = length;
    std::size_t first = 0, last = length;
    if (max_signal_length_ > 0) {
      const std::size_t half = length / 2;
      first = half + 1 > max_signal_length_ ? half + 1 - max_signal_length_ : 0;
      last = std::min(length, half + max_signal_length_);
    }
    bin.first = first;
    bin.taps.resize(last - first);
    const double omega = 2.0 * kPi * config_.q / static_cast<double>(length);
    for (std::size_t n = first; n < last; ++n) {
      const double w = HannValue(n, length);
      bin.taps[n - first] = std::polar(w, -omega * static_cast<double>(n));
    }
  }
}

std::vector<std::complex<double>> CqtKernel::Transform(
    std::span<const double> signal, std::ptrdiff_t center) const {
  const auto size = static_cast<std::ptrdiff_t>(signal.size());
  Require(size > 0, "CQT: empty signal");
  if (max_signal_length_ > 0)
    Require(signal.size() <= max_signal_length_ && center >= 0 && center < size,
            "CQT: signal or center outside the kernel's prepared range");

  std::vector<std::complex<double>> out(bins_.size());
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    const BinTaps &bin = bins_[i];
    const auto length = static_cast<std::ptrdiff_t>(bin.length);
    const std::ptrdiff_t start = center - length / 2;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, start);
    const std::ptrdiff_t hi = std::min(size, start + length);
    if (hi <= lo) continue;
    std::complex<double> acc = 0.0;
    const std::ptrdiff_t tap_offset = static_cast<std::ptrdiff_t>(bin.first);
    for (std::ptrdiff_t idx = lo; idx < hi; ++idx)
      acc += signal[idx] * bin.taps[idx - start - tap_offset];
    const double norm = length > size ? static_cast<double>(hi - lo)
                                      : static_cast<double>(length);
    out[i] = acc / norm;
  }
  return out;
}

std::vector<std::complex<double>> CqtFrame(std::span<const double> signal,
                                           std::ptrdiff_t center,
                                           const CqtConfig &config) {
  return CqtKernel(config).Transform(signal, center);
}

Spectrogram CqtSpectrogram(const Waveform &wave, const CqtConfig &config,
                           double frame_ms, double hop_ms) {
  return CqtSpectrogram(wave, CqtKernel(config, wave.samples.size()), frame_ms,
                        hop_ms);
}

Spectrogram CqtSpectrogram(const Waveform &wave, const CqtKernel &kernel,
                           double frame_ms, double hop_ms) {
  const CqtConfig &cfg = kernel.config();
  if (std::abs(cfg.sample_rate - wave.sample_rate) > 1e-9)
    Fail(ErrorCode::kDimensionMismatch,
         "CQT configured for " + std::to_string(cfg.sample_rate) +
             " Hz but audio is " + std::to_string(wave.sample_rate) + " Hz");
  const FrameLayout layout = ComputeFrameLayout(
      wave.samples.size(), wave.sample_rate, frame_ms, hop_ms);

  Spectrogram spec;
  spec.values.resize(cfg.num_bins, static_cast<Eigen::Index>(layout.NumFrames()));
  spec.freq_axis = cfg.center_hz;
  spec.frame_hop = hop_ms / 1000.0;
  spec.source_config = cfg;
  const std::span<const double> signal(wave.samples);
  for (std::size_t t = 0; t < layout.NumFrames(); ++t) {
    const auto center = static_cast<std::ptrdiff_t>(
        std::min(layout.starts[t] + layout.frame_length / 2,
                 wave.samples.size() - 1));
    const auto column = kernel.Transform(signal, center);
    for (int k = 0; k < cfg.num_bins; ++k)
      spec.values(k, static_cast<Eigen::Index>(t)) =
          std::log(std::max(std::abs(column[k]), kLogFloor));
  }
  return spec;
}

Eigen::MatrixXd ComputeDeltas(const Eigen::MatrixXd &frames, int window) {
  const Eigen::Index n = frames.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, frames.cols());
  double denom = 0.0;
  for (int k = 1; k <= window; ++k) denom += 2.0 * k * k;
  for (Eigen::Index t = 0; t < n; ++t) {
    for (int k = 1; k <= window; ++k) {
      Eigen::Index next = std::min<Eigen::Index>(t + k, n - 1);
      Eigen::Index prev = std::max<Eigen::Index>(t - k, 0);
      out.row(t) += k * (frames.row(next) - frames.row(prev));
    }
  }
  return out / denom;
}

Eigen::MatrixXd MfccSequence(const Waveform &wave, const MfccConfig &cfg) {
  Require(cfg.n_ceps >= 1 && cfg.n_ceps <= cfg.n_mel_filters,
          "MFCC: need 1 <= n_ceps <= n_mel_filters");
  Require(wave.sample_rate > 0, "MFCC: sample rate must be positive");

  Waveform emphasized = wave;
  for (std::size_t i = wave.samples.size(); i-- > 1;)
    emphasized.samples[i] = wave.samples[i] - cfg.pre_emphasis * wave.samples[i - 1];
  const auto frames = FrameSignal(emphasized, cfg.frame_ms, cfg.hop_ms);

  const std::size_t frame_len = frames.front().size();
  std::size_t nfft = 1;
  while (nfft < frame_len) nfft <<= 1;
  const std::size_t nbins = nfft / 2 + 1;
  const double rate = wave.sample_rate;
  const double high = cfg.high_hz > 0.0 ? cfg.high_hz : rate / 2.0;
  Require(cfg.low_hz >= 0.0 && cfg.low_hz < high, "MFCC: bad mel band edges");

  // Triangular filters on the FFT bin grid.
  const int M = cfg.n_mel_filters;
  Eigen::MatrixXd fbank = Eigen::MatrixXd::Zero(M, static_cast<Eigen::Index>(nbins));
  const double mel_lo = HzToMel(cfg.low_hz), mel_hi = HzToMel(high);
  std::vector<double> edges(M + 2);
  for (int i = 0; i < M + 2; ++i)
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (M + 1));
  for (int m = 0; m < M; ++m) {
    for (std::size_t b = 0; b < nbins; ++b) {
      const double hz = b * rate / nfft;
      double w = 0.0;
      if (hz > edges[m] && hz <= edges[m + 1])
        w = (hz - edges[m]) / (edges[m + 1] - edges[m]);
      else if (hz > edges[m + 1] && hz < edges[m + 2])
        w = (edges[m + 2] - hz) / (edges[m + 2] - edges[m + 1]);
      fbank(m, static_cast<Eigen::Index>(b)) = w;
    }
  }

  Eigen::MatrixXd dct(cfg.n_ceps, M);
  for (int n = 0; n < cfg.n_ceps; ++n)
    for (int m = 0; m < M; ++m) dct(n, m) = std::cos(kPi * n * (m + 0.5) / M);

  std::vector<double> window(frame_len);
  for (std::size_t n = 0; n < frame_len; ++n)
    window[n] = frame_len > 1
                    ? 0.54 - 0.46 * std::cos(2.0 * kPi * n / (frame_len - 1))
                    : 1.0;

  Eigen::FFT<double> fft;
  std::vector<double> buffer(nfft);
  std::vector<std::complex<double>> spectrum;
  Eigen::MatrixXd ceps(static_cast<Eigen::Index>(frames.size()), cfg.n_ceps);
  Eigen::VectorXd power(static_cast<Eigen::Index>(nbins));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::fill(buffer.begin(), buffer.end(), 0.0);
    for (std::size_t n = 0; n < frame_len; ++n) buffer[n] = frames[t][n] * window[n];
    fft.fwd(spectrum, buffer);
    for (std::size_t b = 0; b < nbins; ++b)
      power(static_cast<Eigen::Index>(b)) = std::norm(spectrum[b]);
    Eigen::VectorXd log_mel = (fbank * power).array().max(kLogFloor).log();
    ceps.row(static_cast<Eigen::Index>(t)) = (dct * log_mel).transpose();
  }
  if (!cfg.include_deltas) return ceps;

  Eigen::MatrixXd delta = ComputeDeltas(ceps);
  Eigen::MatrixXd delta2 = ComputeDeltas(delta);
  Eigen::MatrixXd out(ceps.rows(), 3 * cfg.n_ceps);
  out << ceps, delta, delta2;
  return out;
}

Eigen::MatrixXd ElasticTransform(const Eigen::MatrixXd &input, double sigma,
                                 double alpha, uint64_t seed) {
  Require(sigma > 0.0, "elastic transform: sigma must be positive");
  Require(alpha >= 0.0, "elastic transform: alpha must be non-negative");
  const Eigen::Index rows = input.rows(), cols = input.cols();
  if (alpha == 0.0 || rows == 0 || cols == 0) return input;

  Rng rng(DeriveSeed(seed, {0x656c6173ULL}));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::MatrixXd dy(rows, cols), dx(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) dy(r, c) = uniform(rng);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) dx(r, c) = uniform(rng);
  dy = alpha * GaussianBlur(dy, sigma);
  dx = alpha * GaussianBlur(dx, sigma);

  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double y = std::clamp(r + dy(r, c), 0.0, static_cast<double>(rows - 1));
      const double x = std::clamp(c + dx(r, c), 0.0, static_cast<double>(cols - 1));
      const auto y0 = static_cast<Eigen::Index>(std::floor(y));
      const auto x0 = static_cast<Eigen::Index>(std::floor(x));
      const Eigen::Index y1 = std::min(y0 + 1, rows - 1);
      const Eigen::Index x1 = std::min(x0 + 1, cols - 1);
      const double fy = y - y0, fx = x - x0;
      out(r, c) = (1 - fy) * ((1 - fx) * input(y0, x0) + fx * input(y0, x1)) +
                  fy * ((1 - fx) * input(y1, x0) + fx * input(y1, x1));
    }
  }
  return out;
}

Spectrogram ElasticTransform(const Spectrogram &input, double sigma,
                             double alpha, uint64_t seed) {
  Spectrogram out = input;
  out.values = ElasticTransform(input.values, sigma, alpha, seed);
  return out;
}

}  // namespace breathid
