// src/ivector.cc

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

#include "breathid/ivector.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "breathid/error.h"
#include "breathid/random.h"

namespace breathid {

namespace {

void CheckShapes(const BaumWelchStats &stats, const TotalVariabilityModel &model) {
  if (stats.zeroth.size() != model.NumComponents() ||
      stats.first_centered.rows() != model.NumComponents() ||
      stats.first_centered.cols() != model.Dim() ||
      model.t.rows() != model.NumComponents() * model.Dim())
    Fail(ErrorCode::kDimensionMismatch,
         "Baum-Welch statistics do not match the total variability model");
}

// Per-component T_c' Sigma_c^-1 T_c, shared by every utterance in a pass.
std::vector<Eigen::MatrixXd> ComponentPrecisions(const TotalVariabilityModel &model) {
  const Eigen::Index dim = model.Dim();
  std::vector<Eigen::MatrixXd> out(model.NumComponents());
  for (Eigen::Index c = 0; c < model.NumComponents(); ++c) {
    auto tc = model.t.middleRows(c * dim, dim);
    Eigen::VectorXd inv = model.sigma.row(c).transpose().cwiseInverse();
    out[c] = tc.transpose() * inv.asDiagonal() * tc;
  }
  return out;
}

Eigen::VectorXd FlatInverseSigma(const TotalVariabilityModel &model) {
  Eigen::VectorXd out(model.NumComponents() * model.Dim());
  for (Eigen::Index c = 0; c < model.NumComponents(); ++c)
    out.segment(c * model.Dim(), model.Dim()) =
        model.sigma.row(c).transpose().cwiseInverse();
  return out;
}

IvectorPosterior PosteriorWith(const BaumWelchStats &stats,
                               const TotalVariabilityModel &model,
                               const std::vector<Eigen::MatrixXd> &precisions,
                               const Eigen::VectorXd &inv_sigma) {
  const Eigen::Index rank = model.Rank();
  IvectorPosterior post;
  post.precision = Eigen::MatrixXd::Identity(rank, rank);
  for (Eigen::Index c = 0; c < model.NumComponents(); ++c)
    if (stats.zeroth(c) != 0.0) post.precision += stats.zeroth(c) * precisions[c];
  post.linear = model.t.transpose() * inv_sigma.cwiseProduct(stats.FlatFirst());
  post.mean = post.precision.llt().solve(post.linear);
  return post;
}

double LogLikelihoodOf(const IvectorPosterior &post) {
  Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * post.linear.dot(post.mean) - 0.5 * log_det;
}

}  // namespace

Eigen::VectorXd BaumWelchStats::FlatFirst() const {
  Eigen::VectorXd out(first_centered.size());
  const Eigen::Index dim = first_centered.cols();
  for (Eigen::Index c = 0; c < first_centered.rows(); ++c)
    out.segment(c * dim, dim) = first_centered.row(c).transpose();
  return out;
}

BaumWelchStats CollectStats(const DiagonalGmm &ubm, const Eigen::MatrixXd &frames) {
  Require(frames.rows() > 0, "Baum-Welch statistics need at least one frame");
  Eigen::MatrixXd post = Responsibilities(ubm, frames);
  BaumWelchStats stats;
  stats.zeroth = post.colwise().sum().transpose();
  stats.first_centered = post.transpose() * frames;
  stats.first_centered -= stats.zeroth.asDiagonal() * ubm.means;
  return stats;
}

IvectorPosterior ComputePosterior(const BaumWelchStats &stats,
                                  const TotalVariabilityModel &model) {
  CheckShapes(stats, model);
  return PosteriorWith(stats, model, ComponentPrecisions(model),
                       FlatInverseSigma(model));
}

double UtteranceLogLikelihood(const BaumWelchStats &stats,
                              const TotalVariabilityModel &model) {
  return LogLikelihoodOf(ComputePosterior(stats, model));
}

Eigen::VectorXd ExtractIvector(const BaumWelchStats &stats,
                               const TotalVariabilityModel &model) {
  return ComputePosterior(stats, model).mean;
}

TvFit TrainTotalVariability(const std::vector<BaumWelchStats> &stats,
                            const DiagonalGmm &ubm, const TvTrainOptions &opt) {
  Require(opt.rank >= 1, "total variability rank must be positive");
  Require(opt.n_iters >= 0, "iteration count must be non-negative");
  Require(stats.size() >= static_cast<std::size_t>(opt.rank),
          "total variability training needs at least rank (" +
              std::to_string(opt.rank) + ") utterances, got " +
              std::to_string(stats.size()));
  const Eigen::Index num_comp = ubm.NumComponents(), dim = ubm.Dim();
  const Eigen::Index rank = opt.rank;

  TvFit fit;
  TotalVariabilityModel &model = fit.model;
  model.m = StackMeans(ubm);
  model.sigma = ubm.variances;
  model.t.resize(num_comp * dim, rank);
  Rng rng(DeriveSeed(opt.seed, {0x7476ULL}));
  std::normal_distribution<double> normal(0.0, opt.init_stddev);
  for (Eigen::Index j = 0; j < rank; ++j)
    for (Eigen::Index i = 0; i < model.t.rows(); ++i) model.t(i, j) = normal(rng);
  for (const auto &s : stats) CheckShapes(s, model);

  for (int it = 0; it <= opt.n_iters; ++it) {
    const auto precisions = ComponentPrecisions(model);
    const Eigen::VectorXd inv_sigma = FlatInverseSigma(model);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(num_comp * dim, rank);
    std::vector<Eigen::MatrixXd> second(num_comp, Eigen::MatrixXd::Zero(rank, rank));
    double objective = 0.0;
    for (const auto &s : stats) {
      IvectorPosterior post = PosteriorWith(s, model, precisions, inv_sigma);
      objective += LogLikelihoodOf(post);
      if (it == opt.n_iters) continue;
      Eigen::MatrixXd ww = post.precision.llt().solve(
          Eigen::MatrixXd::Identity(rank, rank));
      ww += post.mean * post.mean.transpose();
      cross += s.FlatFirst() * post.mean.transpose();
      for (Eigen::Index c = 0; c < num_comp; ++c)
        if (s.zeroth(c) != 0.0) second[c] += s.zeroth(c) * ww;
    }
    fit.objective.push_back(objective);
    if (it == opt.n_iters) break;

    for (Eigen::Index c = 0; c < num_comp; ++c) {
      Eigen::LLT<Eigen::MatrixXd> llt(second[c]);
      if (llt.info() != Eigen::Success) {
        llt.compute(second[c] + 1e-8 * Eigen::MatrixXd::Identity(rank, rank));
      }
      // T_c = cross_c second_c^-1, solved from second_c T_c' = cross_c'.
      model.t.middleRows(c * dim, dim) =
          llt.solve(cross.middleRows(c * dim, dim).transpose()).transpose();
    }
  }
  return fit;
}

NormalizedVectors CenterLengthNormalize(const Eigen::MatrixXd &vectors,
                                        const std::optional<Eigen::VectorXd> &mean) {
  Require(vectors.rows() > 0, "length normalization needs at least one vector");
  NormalizedVectors out;
  out.mean = mean ? *mean : Eigen::VectorXd(vectors.colwise().mean().transpose());
  if (out.mean.size() != vectors.cols())
    Fail(ErrorCode::kDimensionMismatch,
         "stored mean has dimension " + std::to_string(out.mean.size()) +
             ", vectors have " + std::to_string(vectors.cols()));
  out.vectors = vectors.rowwise() - out.mean.transpose();
  for (Eigen::Index i = 0; i < out.vectors.rows(); ++i) {
    const double norm = out.vectors.row(i).norm();
    if (norm == 0.0)
      Fail(ErrorCode::kInvalidArgument,
           "vector " + std::to_string(i) + " is zero after centering");
    out.vectors.row(i) /= norm;
  }
  return out;
}

LdaProjection LdaFit(const Eigen::MatrixXd &vectors, const std::vector<int> &labels,
                     int out_dim) {
  Require(vectors.rows() == static_cast<Eigen::Index>(labels.size()),
          "LDA: label count does not match vector count");
  std::map<int, std::vector<Eigen::Index>> classes;
  for (std::size_t i = 0; i < labels.size(); ++i)
    classes[labels[i]].push_back(static_cast<Eigen::Index>(i));
  const auto num_classes = static_cast<int>(classes.size());
  Require(num_classes >= 2, "LDA: need at least two classes");
  Require(out_dim >= 1 && out_dim <= num_classes - 1,
          "LDA: output dimension " + std::to_string(out_dim) +
              " exceeds classes - 1 = " + std::to_string(num_classes - 1));
  const Eigen::Index dim = vectors.cols();
  Require(out_dim <= dim, "LDA: output dimension exceeds input dimension");

  const double n = static_cast<double>(vectors.rows());
  LdaProjection lda;
  lda.mean = vectors.colwise().mean().transpose();
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto &[label, rows] : classes) {
    Eigen::VectorXd class_mean = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index r : rows) class_mean += vectors.row(r).transpose();
    class_mean /= static_cast<double>(rows.size());
    for (Eigen::Index r : rows) {
      Eigen::VectorXd d = vectors.row(r).transpose() - class_mean;
      within += d * d.transpose();
    }
    Eigen::VectorXd d = class_mean - lda.mean;
    between += static_cast<double>(rows.size()) * d * d.transpose();
  }
  within /= n;
  between /= n;
  const double ridge = 1e-6 * within.trace() / static_cast<double>(dim);
  within += std::max(ridge, 1e-300) * Eigen::MatrixXd::Identity(dim, dim);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between, within);
  if (solver.info() != Eigen::Success)
    Fail(ErrorCode::kNumerical, "LDA eigen-decomposition failed");
  // Eigenvalues come back ascending.
  lda.basis.resize(dim, out_dim);
  for (int j = 0; j < out_dim; ++j) {
    Eigen::VectorXd v = solver.eigenvectors().col(dim - 1 - j);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    lda.basis.col(j) = v;
  }
  return lda;
}

Eigen::VectorXd LdaProject(const LdaProjection &lda, const Eigen::VectorXd &v) {
  if (v.size() != lda.InputDim())
    Fail(ErrorCode::kDimensionMismatch, "LDA input dimension mismatch");
  return lda.basis.transpose() * (v - lda.mean);
}

Eigen::MatrixXd LdaProject(const LdaProjection &lda, const Eigen::MatrixXd &rows) {
  if (rows.cols() != lda.InputDim())
    Fail(ErrorCode::kDimensionMismatch, "LDA input dimension mismatch");
  return (rows.rowwise() - lda.mean.transpose()) * lda.basis;
}

}  // namespace breathid
