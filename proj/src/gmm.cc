// src/gmm.cc

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

#include "breathid/gmm.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "breathid/error.h"
#include "breathid/random.h"

namespace breathid {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)

// Row-wise log-sum-exp.
Eigen::VectorXd LogSumExpRows(const Eigen::MatrixXd &m) {
  Eigen::VectorXd out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    out(i) = mx + std::log((m.row(i).array() - mx).exp().sum());
  }
  return out;
}

Eigen::RowVectorXd ColumnVariance(const Eigen::MatrixXd &x) {
  Eigen::RowVectorXd mean = x.colwise().mean();
  return (x.rowwise() - mean).array().square().colwise().mean();
}

// k-means++ seeding followed by Lloyd iterations; returns the assignment.
std::vector<Eigen::Index> KMeans(const Eigen::MatrixXd &x, int k, int iters,
                                 Rng &rng, Eigen::MatrixXd *centers) {
  const Eigen::Index n = x.rows();
  centers->resize(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers->row(0) = x.row(pick(rng));
  Eigen::VectorXd d2 = (x.rowwise() - centers->row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng), acc = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers->row(c) = x.row(chosen);
    d2 = d2.cwiseMin((x.rowwise() - centers->row(c)).rowwise().squaredNorm());
  }

  std::vector<Eigen::Index> assign(n, 0);
  for (int it = 0; it <= iters; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centers->rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      assign[i] = best;
    }
    if (it == iters) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += x.row(i);
      counts(assign[i]) += 1.0;
    }
    for (int c = 0; c < k; ++c)
      if (counts(c) > 0) centers->row(c) = sums.row(c) / counts(c);
  }
  return assign;
}

}  // namespace

Eigen::MatrixXd DiagonalGmm::ComponentLogLikes(const Eigen::MatrixXd &frames) const {
  const Eigen::Index n = frames.rows(), k = NumComponents();
  Eigen::MatrixXd out(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::RowVectorXd inv = variances.row(c).cwiseInverse();
    const double log_norm = std::log(weights(c)) -
                            0.5 * (Dim() * kLog2Pi +
                                   variances.row(c).array().log().sum());
    out.col(c) = (((frames.rowwise() - means.row(c)).array().square().rowwise() *
                   inv.array())
                      .rowwise()
                      .sum() *
                  -0.5)
                     .matrix();
    out.col(c).array() += log_norm;
  }
  return out;
}

double DiagonalGmm::LogLikelihood(const Eigen::MatrixXd &frames) const {
  return LogSumExpRows(ComponentLogLikes(frames)).sum();
}

void DiagonalGmm::Check() const {
  const Eigen::Index k = means.rows();
  if (k == 0 || weights.size() != k || variances.rows() != k ||
      variances.cols() != means.cols())
    Fail(ErrorCode::kFormat, "GMM parameter shapes are inconsistent");
  if (std::abs(weights.sum() - 1.0) > 1e-9 || weights.minCoeff() < 0.0)
    Fail(ErrorCode::kFormat, "GMM weights are not a probability simplex");
  if (variances.minCoeff() <= 0.0)
    Fail(ErrorCode::kFormat, "GMM variances must be positive");
}

GmmFit EmTrainGmm(const Eigen::MatrixXd &frames, const GmmTrainOptions &opt) {
  const Eigen::Index n = frames.rows(), dim = frames.cols();
  const int k = opt.n_components;
  Require(k >= 1, "GMM: need at least one component");
  Require(opt.n_iters >= 1, "GMM: need at least one EM iteration");
  Require(n >= k, "GMM: fewer frames (" + std::to_string(n) +
                      ") than components (" + std::to_string(k) + ")");

  const Eigen::RowVectorXd global_var = ColumnVariance(frames);
  const Eigen::RowVectorXd floor =
      (global_var * opt.variance_floor_scale).cwiseMax(1e-12);

  Rng rng(DeriveSeed(opt.seed, {0x676d6dULL}));
  Eigen::MatrixXd centers;
  const auto assign = KMeans(frames, k, opt.kmeans_iters, rng, &centers);

  DiagonalGmm gmm;
  gmm.means = centers;
  gmm.weights = Eigen::VectorXd::Zero(k);
  gmm.variances = Eigen::MatrixXd::Zero(k, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = assign[i];
    gmm.weights(c) += 1.0;
    gmm.variances.row(c) += (frames.row(i) - centers.row(c)).array().square().matrix();
  }
  for (int c = 0; c < k; ++c) {
    if (gmm.weights(c) >= 2.0)
      gmm.variances.row(c) /= gmm.weights(c);
    else
      gmm.variances.row(c) = global_var;
    gmm.variances.row(c) = gmm.variances.row(c).cwiseMax(floor);
    gmm.weights(c) = std::max(gmm.weights(c), 1.0);
  }
  gmm.weights /= gmm.weights.sum();

  GmmFit fit;
  for (int it = 0; it < opt.n_iters; ++it) {
    Eigen::MatrixXd ll = gmm.ComponentLogLikes(frames);
    Eigen::VectorXd lse = LogSumExpRows(ll);
    fit.log_likelihood.push_back(lse.sum());
    Eigen::MatrixXd post = (ll.colwise() - lse).array().exp();

    Eigen::VectorXd counts = post.colwise().sum().transpose();
    Eigen::MatrixXd first = post.transpose() * frames;
    for (int c = 0; c < k; ++c) {
      if (counts(c) < 1e-10) {
        Eigen::Index worst = 0;
        lse.minCoeff(&worst);
        gmm.means.row(c) = frames.row(worst);
        gmm.variances.row(c) = global_var.cwiseMax(floor);
        counts(c) = 1.0;
        continue;
      }
      gmm.means.row(c) = first.row(c) / counts(c);
      Eigen::RowVectorXd var =
          post.col(c).transpose() *
          (frames.rowwise() - gmm.means.row(c)).array().square().matrix() /
          counts(c);
      gmm.variances.row(c) = var.cwiseMax(floor);
    }
    gmm.weights = counts / counts.sum();
  }
  fit.log_likelihood.push_back(gmm.LogLikelihood(frames));
  fit.gmm = std::move(gmm);
  return fit;
}

Eigen::MatrixXd Responsibilities(const DiagonalGmm &gmm,
                                 const Eigen::MatrixXd &frames) {
  if (frames.cols() != gmm.Dim())
    Fail(ErrorCode::kDimensionMismatch,
         "frame dimension " + std::to_string(frames.cols()) +
             " does not match GMM dimension " + std::to_string(gmm.Dim()));
  Eigen::MatrixXd ll = gmm.ComponentLogLikes(frames);
  Eigen::VectorXd lse = LogSumExpRows(ll);
  return (ll.colwise() - lse).array().exp();
}

Eigen::VectorXd Responsibilities(const DiagonalGmm &gmm, const Eigen::VectorXd &x) {
  return Responsibilities(gmm, Eigen::MatrixXd(x.transpose())).row(0).transpose();
}

Supervector StackMeans(const DiagonalGmm &gmm) {
  Supervector out(gmm.NumComponents() * gmm.Dim());
  for (Eigen::Index c = 0; c < gmm.NumComponents(); ++c)
    out.segment(c * gmm.Dim(), gmm.Dim()) = gmm.means.row(c).transpose();
  return out;
}

Supervector MapAdapt(const DiagonalGmm &ubm, const Eigen::MatrixXd &frames,
                     double relevance) {
  Require(relevance >= 0.0, "MAP: relevance must be non-negative");
  Require(frames.rows() > 0, "MAP: empty frame set");
  Eigen::MatrixXd post = Responsibilities(ubm, frames);
  Eigen::VectorXd counts = post.colwise().sum().transpose();
  Eigen::MatrixXd first = post.transpose() * frames;
  const Eigen::Index dim = ubm.Dim();
  Supervector out = StackMeans(ubm);
  for (Eigen::Index c = 0; c < ubm.NumComponents(); ++c) {
    if (counts(c) <= 0.0) continue;
    const double alpha = counts(c) / (counts(c) + relevance);
    Eigen::VectorXd expected = first.row(c).transpose() / counts(c);
    out.segment(c * dim, dim) =
        alpha * expected + (1.0 - alpha) * ubm.means.row(c).transpose();
  }
  return out;
}

}  // namespace breathid
