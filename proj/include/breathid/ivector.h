// breathid/ivector.h

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

#ifndef BREATHID_IVECTOR_H_
#define BREATHID_IVECTOR_H_

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "breathid/gmm.h"

namespace breathid {

/// Zeroth- and centred first-order statistics of one utterance against a
/// UBM: N_c = sum_t gamma_c(x_t), F_c = sum_t gamma_c(x_t) (x_t - mu_c).
struct BaumWelchStats {
  Eigen::VectorXd zeroth;          // C
  Eigen::MatrixXd first_centered;  // C x D

  /// First-order stats flattened component-major to length C*D.
  Eigen::VectorXd FlatFirst() const;
};

BaumWelchStats CollectStats(const DiagonalGmm &ubm, const Eigen::MatrixXd &frames);

/// Supervector model M = m + T w with w ~ N(0, I). `t` has C*D rows in the
/// component-major supervector layout; `sigma` holds the UBM variances.
struct TotalVariabilityModel {
  Eigen::VectorXd m;
  Eigen::MatrixXd t;
  Eigen::MatrixXd sigma;  // C x D

  Eigen::Index Rank() const { return t.cols(); }
  Eigen::Index NumComponents() const { return sigma.rows(); }
  Eigen::Index Dim() const { return sigma.cols(); }
};

/// Posterior of w given one utterance's statistics.
struct IvectorPosterior {
  Eigen::VectorXd mean;       // L^-1 b
  Eigen::MatrixXd precision;  // L = I + sum_c N_c T_c' Sigma_c^-1 T_c
  Eigen::VectorXd linear;     // b = T' Sigma^-1 f
};

IvectorPosterior ComputePosterior(const BaumWelchStats &stats,
                                  const TotalVariabilityModel &model);

/// Log-likelihood of the utterance statistics under the model, up to a
/// constant that does not depend on T: 0.5 b' L^-1 b - 0.5 log|L|.
double UtteranceLogLikelihood(const BaumWelchStats &stats,
                              const TotalVariabilityModel &model);

struct TvTrainOptions {
  int rank = 40;
  int n_iters = 10;
  double init_stddev = 0.1;
  uint64_t seed = 0;
};

struct TvFit {
  TotalVariabilityModel model;
  /// Summed UtteranceLogLikelihood before each EM iteration, plus one final
  /// value after the last M-step (n_iters + 1 values).
  std::vector<double> objective;
};

/// EM training of T with m fixed at the stacked UBM means.
TvFit TrainTotalVariability(const std::vector<BaumWelchStats> &stats,
                            const DiagonalGmm &ubm, const TvTrainOptions &options);

/// Posterior-mean i-vector.
Eigen::VectorXd ExtractIvector(const BaumWelchStats &stats,
                               const TotalVariabilityModel &model);

struct NormalizedVectors {
  Eigen::MatrixXd vectors;  // one per row, unit L2 norm
  Eigen::VectorXd mean;
};

/// Subtracts `mean` (or the row mean of `vectors` when none is given) and
/// scales each row to unit length. A row that is zero after centring is an
/// error naming the row index.
NormalizedVectors CenterLengthNormalize(
    const Eigen::MatrixXd &vectors,
    const std::optional<Eigen::VectorXd> &mean = std::nullopt);

struct LdaProjection {
  Eigen::MatrixXd basis;  // R x R'
  Eigen::VectorXd mean;   // global mean of the fitting data

  Eigen::Index InputDim() const { return basis.rows(); }
  Eigen::Index OutputDim() const { return basis.cols(); }
};

/// Fits LDA on labelled rows: the basis is the top `out_dim` generalized
/// eigenvectors of (S_b, S_w + lambda I), lambda = 1e-6 trace(S_w) / R.
LdaProjection LdaFit(const Eigen::MatrixXd &vectors, const std::vector<int> &labels,
                     int out_dim);

Eigen::VectorXd LdaProject(const LdaProjection &lda, const Eigen::VectorXd &v);
Eigen::MatrixXd LdaProject(const LdaProjection &lda, const Eigen::MatrixXd &rows);

}  // namespace breathid

#endif  // BREATHID_IVECTOR_H_
