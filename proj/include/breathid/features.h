// breathid/features.h

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

#ifndef BREATHID_FEATURES_H_
#define BREATHID_FEATURES_H_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "breathid/audio.h"

namespace breathid {

/// Magnitude floor applied before taking logs of spectral values.
inline constexpr double kLogFloor = 1e-10;

enum class WindowKind { kHann };

/// Constant-Q analysis parameters plus the quantities derived from them.
/// Bins are numbered k = 1..K in the formulas; vectors here are 0-based, so
/// center_hz[i] is the frequency of bin k = i + 1.
struct CqtConfig {
  double sample_rate = 0.0;
  double min_hz = 0.0;
  double max_hz = 0.0;
  int bins_per_octave = 0;
  WindowKind window = WindowKind::kHann;

  int num_bins = 0;    // K = floor(b log2(max/min))
  double q = 0.0;      // 1 / (2^(1/b) - 1)
  std::vector<double> center_hz;     // f_k = min_hz 2^(k/b)
  std::vector<std::size_t> window_length;  // N_k = round(Q fs / f_k)

  double BandwidthHz(int bin) const { return center_hz[bin] / q; }
};

/// Validates the inputs and fills in K, Q, f_k and N_k. Throws if K < 1 or
/// the window lengths are not strictly decreasing.
CqtConfig MakeCqtConfig(double sample_rate, double min_hz, double max_hz,
                        int bins_per_octave);

/// Precomputed windowed complex exponentials for every bin. When
/// max_signal_length is nonzero only the taps that can overlap a signal of
/// that length are stored, which keeps long low-frequency windows cheap.
class CqtKernel {
 public:
  explicit CqtKernel(const CqtConfig &config, std::size_t max_signal_length = 0);

  const CqtConfig &config() const { return config_; }

  /// Transform of the window centred on `center`; see CqtFrame.
  std::vector<std::complex<double>> Transform(std::span<const double> signal,
                                              std::ptrdiff_t center) const;

 private:
  struct BinTaps {
    std::size_t length = 0;        // N_k
    std::size_t first = 0;         // index of taps[0] within the window
    std::vector<std::complex<double>> taps;
  };
  CqtConfig config_;
  std::size_t max_signal_length_ = 0;
  std::vector<BinTaps> bins_;
};

/// Constant-Q coefficients of one frame: for each bin,
///   x[k] = (1/N_k) sum_{n<N_k} s[c - N_k/2 + n] w[n] exp(-j 2 pi n Q / N_k)
/// with out-of-range samples read as zero. When N_k is longer than the whole
/// signal the normalization uses the number of in-range samples instead.
std::vector<std::complex<double>> CqtFrame(std::span<const double> signal,
                                           std::ptrdiff_t center,
                                           const CqtConfig &config);

/// F x T log-magnitude constant-Q spectrogram.
struct Spectrogram {
  Eigen::MatrixXd values;          // rows = bins, cols = frames
  std::vector<double> freq_axis;   // Hz per row
  double frame_hop = 0.0;          // seconds
  CqtConfig source_config;

  Eigen::Index NumBins() const { return values.rows(); }
  Eigen::Index NumFrames() const { return values.cols(); }
};

/// Column t is log(max(|x|, kLogFloor)) of the transform centred on frame t
/// of FrameSignal(wave, frame_ms, hop_ms).
Spectrogram CqtSpectrogram(const Waveform &wave, const CqtConfig &config,
                           double frame_ms, double hop_ms);
Spectrogram CqtSpectrogram(const Waveform &wave, const CqtKernel &kernel,
                           double frame_ms, double hop_ms);

struct MfccConfig {
  int n_mel_filters = 40;
  int n_ceps = 13;
  bool include_deltas = true;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double pre_emphasis = 0.97;
  double low_hz = 20.0;
  double high_hz = 0.0;  // 0 means Nyquist

  int Dimension() const { return n_ceps * (include_deltas ? 3 : 1); }
};

/// MFCC frames as rows: pre-emphasis, Hamming window, power spectrum,
/// triangular mel filterbank, log with kLogFloor, unnormalized DCT-II
/// (c_n = sum_m e_m cos(pi n (m + 1/2) / M)), then +-2 frame regression
/// deltas and delta-deltas when enabled.
Eigen::MatrixXd MfccSequence(const Waveform &wave, const MfccConfig &config);

/// Regression deltas over +-`window` frames, edges clamped.
Eigen::MatrixXd ComputeDeltas(const Eigen::MatrixXd &frames, int window = 2);

/// Smooth random warp: two per-cell uniform [-1, 1] displacement fields are
/// blurred by a Gaussian of standard deviation sigma (truncated at 4 sigma,
/// clamped borders), scaled by alpha, and the matrix is resampled through
/// them bilinearly with clamped borders.
Spectrogram ElasticTransform(const Spectrogram &input, double sigma,
                             double alpha, uint64_t seed);
Eigen::MatrixXd ElasticTransform(const Eigen::MatrixXd &input, double sigma,
                                 double alpha, uint64_t seed);

}  // namespace breathid

#endif  // BREATHID_FEATURES_H_
