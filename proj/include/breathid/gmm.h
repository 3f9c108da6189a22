// breathid/gmm.h

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

#ifndef BREATHID_GMM_H_
#define BREATHID_GMM_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace breathid {

/// Diagonal-covariance Gaussian mixture. Row c of `means` / `variances`
/// belongs to component c.
struct DiagonalGmm {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;
  Eigen::MatrixXd variances;

  Eigen::Index NumComponents() const { return means.rows(); }
  Eigen::Index Dim() const { return means.cols(); }

  /// log(w_c N(x; mu_c, var_c)) for every frame (rows) and component (cols).
  Eigen::MatrixXd ComponentLogLikes(const Eigen::MatrixXd &frames) const;

  /// Total log-likelihood of the frames under the mixture.
  double LogLikelihood(const Eigen::MatrixXd &frames) const;

  /// Throws Error(kFormat) when the shapes or the simplex/positivity
  /// invariants do not hold.
  void Check() const;
};

/// Stacked component means, component-major: [mu_0; mu_1; ...].
using Supervector = Eigen::VectorXd;

struct GmmTrainOptions {
  int n_components = 32;
  int n_iters = 20;
  int kmeans_iters = 10;
  double variance_floor_scale = 1e-3;  // times the global per-dim variance
  uint64_t seed = 0;
};

struct GmmFit {
  DiagonalGmm gmm;
  /// log_likelihood[i] is the total log-likelihood of the training frames
  /// under the parameters entering EM iteration i; the last entry is the
  /// likelihood after the final M-step (n_iters + 1 values).
  std::vector<double> log_likelihood;
};

/// Trains a diagonal GMM on the rows of `frames`: seeded k-means++ with a
/// few Lloyd iterations, then EM with a variance floor. A component that
/// collects no responsibility is re-seeded at the worst-modelled frame.
GmmFit EmTrainGmm(const Eigen::MatrixXd &frames, const GmmTrainOptions &options);

/// Posterior component probabilities for one frame (log-space, max-shifted).
Eigen::VectorXd Responsibilities(const DiagonalGmm &gmm, const Eigen::VectorXd &x);

/// Responsibilities for every frame; rows = frames.
Eigen::MatrixXd Responsibilities(const DiagonalGmm &gmm,
                                 const Eigen::MatrixXd &frames);

/// Mean-only MAP adaptation with relevance factor r:
///   alpha_c = n_c / (n_c + r),  mu'_c = alpha_c E_c + (1 - alpha_c) mu_c.
Supervector MapAdapt(const DiagonalGmm &ubm, const Eigen::MatrixXd &frames,
                     double relevance = 16.0);

/// Stacked means of `gmm`, the supervector of an unadapted model.
Supervector StackMeans(const DiagonalGmm &gmm);

}  // namespace breathid

#endif  // BREATHID_GMM_H_
