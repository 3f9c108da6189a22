// tests/oracles.h

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

// Independent reference computations shared by the unit tests and the
// acceptance binary.

#ifndef BREATHID_TESTS_ORACLES_H_
#define BREATHID_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "breathid/gmm.h"
#include "breathid/ivector.h"

namespace breathid::testing {

inline constexpr double kFdStep = 1e-5;

struct FdReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::string where;  // parameter block of the worst coordinate, if named
};

/// Central differences of loss() against analytic[i] for every coordinate
/// of params. Relative error is |a - n| / max(|a|, |n|); coordinates where
/// both are exactly zero count as agreeing.
inline FdReport FiniteDifferenceCheck(std::span<double> params,
                                      std::span<const double> analytic,
                                      const std::function<double()> &loss,
                                      double step = kFdStep) {
  FdReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = loss();
    params[i] = saved - step;
    const double down = loss();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double denom = std::max(std::abs(a), std::abs(numeric));
    const double rel = denom == 0.0 ? 0.0 : std::abs(a - numeric) / denom;
    if (rel > report.max_rel_error || i == 0) {
      report.max_rel_error = std::max(report.max_rel_error, rel);
      report.worst_index = i;
      report.analytic = a;
      report.numeric = numeric;
    }
  }
  return report;
}

/// Mann-Whitney AUC by direct pair counting: (2 wins + ties) / (2 P N).
inline double PairCountAuc(std::span<const double> scores, std::span<const bool> positives) {
  long long twice = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) (positives[i] ? pos : neg) += 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positives[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positives[j]) continue;
      if (scores[i] > scores[j]) twice += 2;
      else if (scores[i] == scores[j]) twice += 1;
    }
  }
  return static_cast<double>(twice) / static_cast<double>(2 * pos * neg);
}

/// Per-utterance objective whose maximizer is the i-vector:
///   J(w) = -|w|^2 / 2 + sum_t sum_c gamma_tc log N(x_t; mu_c + T_c w, Sigma_c),
/// with gamma from the UBM and T_c the rows of T for component c.
inline double IvectorObjective(const DiagonalGmm &ubm, const Eigen::MatrixXd &frames,
                               const Eigen::MatrixXd &gamma, const Eigen::MatrixXd &t,
                               const Eigen::VectorXd &w) {
  const Eigen::Index d = ubm.Dim();
  double j = -0.5 * w.squaredNorm();
  for (Eigen::Index c = 0; c < ubm.NumComponents(); ++c) {
    const Eigen::VectorXd shift = t.middleRows(c * d, d) * w;
    for (Eigen::Index f = 0; f < frames.rows(); ++f) {
      double logn = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double var = ubm.variances(c, k);
        const double diff = frames(f, k) - ubm.means(c, k) - shift[k];
        logn += -0.5 * (std::log(2.0 * std::numbers::pi * var) + diff * diff / var);
      }
      j += gamma(f, c) * logn;
    }
  }
  return j;
}

/// Rank-1 maximizer of IvectorObjective by exhaustive grid search.
inline double GridSearchIvector(const DiagonalGmm &ubm, const Eigen::MatrixXd &frames,
                                const Eigen::MatrixXd &t, double lo = -5.0, double hi = 5.0,
                                double step = 1e-4) {
  const Eigen::MatrixXd gamma = Responsibilities(ubm, frames);
  const auto n = static_cast<long>(std::llround((hi - lo) / step));
  Eigen::VectorXd w(1);
  double best = lo, best_j = -INFINITY;
  for (long i = 0; i <= n; ++i) {
    w[0] = lo + static_cast<double>(i) * step;
    const double j = IvectorObjective(ubm, frames, gamma, t, w);
    if (j > best_j) {
      best_j = j;
      best = w[0];
    }
  }
  return best;
}

}  // namespace breathid::testing

#endif  // BREATHID_TESTS_ORACLES_H_
