// src/classify.cc

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

#include "breathid/classify.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>

#include "breathid/error.h"
#include "breathid/random.h"

namespace breathid {

namespace {

std::string FormatDouble(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Eigen::MatrixXd Activate(const Eigen::MatrixXd &z, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kSigmoid:
      return (1.0 + (-z.array()).exp()).inverse().matrix();
    case Activation::kSoftmax: {
      Eigen::MatrixXd out(z.rows(), z.cols());
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        Eigen::RowVectorXd e = (z.row(i).array() - z.row(i).maxCoeff()).exp();
        out.row(i) = e / e.sum();
      }
      return out;
    }
  }
  return z;
}

void CheckLabels(std::span<const int> labels, Eigen::Index rows, int num_classes) {
  Require(static_cast<Eigen::Index>(labels.size()) == rows,
          "label count does not match vector count");
  for (int l : labels)
    Require(l >= 0 && l < num_classes, "label out of range: " + std::to_string(l));
}

}  // namespace

const char *SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split ParseSplit(const std::string &name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  Fail(ErrorCode::kFormat, "unknown split tag '" + name + "'");
}

std::vector<std::size_t> SplitManifest::Indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == split) out.push_back(i);
  return out;
}

SplitManifest MakeSplit(std::span<const std::string> speakers,
                        const std::array<double, 3> &fractions, uint64_t seed) {
  for (double f : fractions) Require(f >= 0.0, "split fractions must be non-negative");
  Require(std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) < 1e-9,
          "split fractions must sum to 1");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < speakers.size(); ++i) groups[speakers[i]].push_back(i);

  SplitManifest manifest;
  manifest.assignment.assign(speakers.size(), Split::kTrain);
  uint64_t ordinal = 0;
  for (auto &[speaker, idx] : groups) {
    Rng rng(DeriveSeed(seed, {0x73706c74ULL, ordinal++}));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n = static_cast<long>(idx.size());
    const long n_train = std::lround(n * fractions[0]);
    const long n_val = std::min(std::lround(n * fractions[1]), n - n_train);
    const long n_test = n - n_train - n_val;
    const std::array<long, 3> counts = {n_train, n_val, n_test};
    for (int s = 0; s < 3; ++s)
      if (fractions[s] > 0.0 && counts[s] < 1)
        Fail(ErrorCode::kInvalidArgument,
             "speaker '" + speaker + "' has too few examples (" + std::to_string(n) +
                 ") for a nonzero " + SplitName(static_cast<Split>(s)) + " share");
    for (long j = 0; j < n; ++j) {
      Split s = j < n_train ? Split::kTrain
                : j < n_train + n_val ? Split::kValidation
                                      : Split::kTest;
      manifest.assignment[idx[j]] = s;
    }
  }
  return manifest;
}

// SVM -------------------------------------------------------------------------

double SvmObjective(const LinearSvm &model, int cls, const Eigen::MatrixXd &vectors,
                    std::span<const int> labels) {
  const Eigen::VectorXd w = model.weights.row(cls).transpose();
  const double b = model.biases(cls);
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    const double s = labels[i] == cls ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - s * (vectors.row(i).dot(w) + b));
  }
  return 0.5 * model.lambda * (w.squaredNorm() + b * b) +
         hinge / static_cast<double>(vectors.rows());
}

SvmFit TrainLinearSvm(const Eigen::MatrixXd &vectors, std::span<const int> labels,
                      int num_classes, const SvmTrainOptions &opt) {
  Require(num_classes >= 2, "SVM needs at least two classes");
  CheckLabels(labels, vectors.rows(), num_classes);
  Require(vectors.rows() > 0, "SVM needs training data");
  Require(opt.c_reg > 0.0 && opt.epochs >= 1, "SVM needs c_reg > 0 and epochs >= 1");
  const Eigen::Index n = vectors.rows(), d = vectors.cols();

  SvmFit fit;
  fit.model.lambda = 1.0 / (opt.c_reg * static_cast<double>(n));
  fit.model.weights = Eigen::MatrixXd::Zero(num_classes, d);
  fit.model.biases = Eigen::VectorXd::Zero(num_classes);
  fit.objective.resize(num_classes);
  const double lambda = fit.model.lambda;
  const double radius = 1.0 / std::sqrt(lambda);

  std::vector<Eigen::Index> order(n);
  for (int c = 0; c < num_classes; ++c) {
    // Augmented weight [w; b] against [v; 1].
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    Rng rng(DeriveSeed(opt.seed, {0x73766dULL, static_cast<uint64_t>(c)}));
    std::iota(order.begin(), order.end(), 0);
    uint64_t t = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (Eigen::Index i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double s = labels[i] == c ? 1.0 : -1.0;
        const double margin = s * (vectors.row(i).dot(w.head(d)) + w(d));
        w *= 1.0 - eta * lambda;
        if (margin < 1.0) {
          w.head(d) += eta * s * vectors.row(i).transpose();
          w(d) += eta * s;
        }
        const double norm = w.norm();
        if (norm > radius) w *= radius / norm;
      }
      fit.model.weights.row(c) = w.head(d).transpose();
      fit.model.biases(c) = w(d);
      fit.objective[c].push_back(SvmObjective(fit.model, c, vectors, labels));
    }
  }
  return fit;
}

Eigen::VectorXd SvmScores(const LinearSvm &model, const Eigen::VectorXd &v) {
  if (v.size() != model.Dim())
    Fail(ErrorCode::kDimensionMismatch, "SVM input dimension " + std::to_string(v.size()) +
                                            " != " + std::to_string(model.Dim()));
  return model.weights * v + model.biases;
}

Eigen::MatrixXd SvmScores(const LinearSvm &model, const Eigen::MatrixXd &rows) {
  if (rows.cols() != model.Dim())
    Fail(ErrorCode::kDimensionMismatch, "SVM input dimension " +
                                            std::to_string(rows.cols()) + " != " +
                                            std::to_string(model.Dim()));
  return (rows * model.weights.transpose()).rowwise() + model.biases.transpose();
}

// MLP -------------------------------------------------------------------------

Mlp InitMlp(int input_dim, std::span<const int> hidden, int num_classes, uint64_t seed) {
  Require(hidden.size() == 1 || hidden.size() == 2, "MLP supports one or two hidden layers");
  Require(input_dim >= 1 && num_classes >= 2, "MLP needs inputs and at least two classes");
  Rng rng(DeriveSeed(seed, {0x6d6c70ULL}));
  Mlp mlp;
  int in = input_dim;
  std::vector<std::pair<int, Activation>> shapes;
  shapes.emplace_back(hidden[0], Activation::kRelu);
  if (hidden.size() == 2) shapes.emplace_back(hidden[1], Activation::kSigmoid);
  shapes.emplace_back(num_classes, Activation::kSoftmax);
  for (auto [out, act] : shapes) {
    Require(out >= 1, "MLP layer sizes must be positive");
    MlpLayer layer;
    const double bound = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-bound, bound);
    layer.weights.resize(out, in);
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = u(rng);
    layer.biases = Eigen::VectorXd::Zero(out);
    layer.activation = act;
    mlp.layers.push_back(std::move(layer));
    in = out;
  }
  return mlp;
}

Eigen::MatrixXd MlpPredict(const Mlp &model, const Eigen::MatrixXd &rows) {
  if (rows.cols() != model.InputDim())
    Fail(ErrorCode::kDimensionMismatch, "MLP input dimension mismatch");
  Eigen::MatrixXd a = rows;
  for (const auto &layer : model.layers) {
    Eigen::MatrixXd z = (a * layer.weights.transpose()).rowwise() + layer.biases.transpose();
    a = Activate(z, layer.activation);
  }
  return a;
}

double MlpLossAndGradient(const Mlp &model, const Eigen::MatrixXd &rows,
                          std::span<const int> labels, Mlp *gradient) {
  CheckLabels(labels, rows.rows(), static_cast<int>(model.NumClasses()));
  std::vector<Eigen::MatrixXd> acts = {rows};
  for (const auto &layer : model.layers) {
    Eigen::MatrixXd z =
        (acts.back() * layer.weights.transpose()).rowwise() + layer.biases.transpose();
    acts.push_back(Activate(z, layer.activation));
  }
  const Eigen::MatrixXd &probs = acts.back();
  const auto n = static_cast<double>(rows.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) loss -= std::log(probs(i, labels[i]));
  loss /= n;
  if (!gradient) return loss;

  *gradient = model;
  Eigen::MatrixXd delta = probs;  // d loss / d z of the output layer
  for (Eigen::Index i = 0; i < rows.rows(); ++i) delta(i, labels[i]) -= 1.0;
  delta /= n;
  for (std::size_t k = model.layers.size(); k-- > 0;) {
    gradient->layers[k].weights = delta.transpose() * acts[k];
    gradient->layers[k].biases = delta.colwise().sum().transpose();
    if (k == 0) break;
    Eigen::MatrixXd d_act = delta * model.layers[k].weights;
    const Eigen::MatrixXd &a = acts[k];
    if (model.layers[k - 1].activation == Activation::kRelu)
      delta = d_act.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
    else
      delta = d_act.cwiseProduct((a.array() * (1.0 - a.array())).matrix());
  }
  return loss;
}

MlpFit TrainMlp(const Eigen::MatrixXd &vectors, std::span<const int> labels,
                int num_classes, const MlpTrainOptions &opt) {
  CheckLabels(labels, vectors.rows(), num_classes);
  Require(vectors.rows() > 0, "MLP needs training data");
  Require(opt.batch_size >= 1 && opt.epochs >= 1, "MLP needs batch size and epochs >= 1");
  MlpFit fit;
  fit.model = InitMlp(static_cast<int>(vectors.cols()), opt.hidden, num_classes, opt.seed);
  Mlp velocity = fit.model;
  for (auto &layer : velocity.layers) {
    layer.weights.setZero();
    layer.biases.setZero();
  }

  const Eigen::Index n = vectors.rows();
  const Eigen::Index batch = std::min<Eigen::Index>(opt.batch_size, n);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(opt.seed, {0x6d6c7074ULL}));
  uint64_t updates = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      Eigen::MatrixXd x(len, vectors.cols());
      std::vector<int> y(len);
      for (Eigen::Index i = 0; i < len; ++i) {
        x.row(i) = vectors.row(order[start + i]);
        y[i] = labels[order[start + i]];
      }
      Mlp grad;
      const double loss = MlpLossAndGradient(fit.model, x, y, &grad);
      if (!std::isfinite(loss))
        Fail(ErrorCode::kNumerical, "non-finite MLP loss at epoch " +
                                        std::to_string(epoch + 1) + ", batch starting " +
                                        std::to_string(start));
      epoch_loss += loss * static_cast<double>(len);
      const double rate = opt.learning_rate / (1.0 + opt.decay * static_cast<double>(updates));
      fit.learning_rates.push_back(rate);
      ++updates;
      for (std::size_t k = 0; k < fit.model.layers.size(); ++k) {
        auto &v = velocity.layers[k];
        auto &p = fit.model.layers[k];
        v.weights = opt.momentum * v.weights - rate * grad.layers[k].weights;
        v.biases = opt.momentum * v.biases - rate * grad.layers[k].biases;
        p.weights += v.weights;
        p.biases += v.biases;
      }
    }
    fit.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  return fit;
}

// Evaluation ------------------------------------------------------------------

Evaluation EvaluatePredictions(std::span<const int> predicted, std::span<const int> labels,
                               int num_classes) {
  Require(!labels.empty() && predicted.size() == labels.size(),
          "evaluation needs matching, non-empty prediction and label lists");
  Evaluation ev;
  ev.confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Require(labels[i] >= 0 && labels[i] < num_classes && predicted[i] >= 0 &&
                predicted[i] < num_classes,
            "class index out of range in evaluation");
    ev.confusion(labels[i], predicted[i]) += 1;
    if (labels[i] == predicted[i]) ++correct;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  return ev;
}

Evaluation Evaluate(const Eigen::MatrixXd &scores, std::span<const int> labels) {
  Require(scores.rows() == static_cast<Eigen::Index>(labels.size()),
          "score rows do not match labels");
  std::vector<int> predicted(labels.size());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index arg = 0;
    scores.row(i).maxCoeff(&arg);
    predicted[i] = static_cast<int>(arg);
  }
  return EvaluatePredictions(predicted, labels, static_cast<int>(scores.cols()));
}

RocCurve RocAuc(std::span<const double> scores, std::span<const bool> positives) {
  Require(scores.size() == positives.size(), "ROC: score and label counts differ");
  const auto num_pos = static_cast<long>(std::count(positives.begin(), positives.end(), true));
  const auto num_neg = static_cast<long>(positives.size()) - num_pos;
  if (num_pos == 0 || num_neg == 0)
    Fail(ErrorCode::kInvalidArgument, "ROC needs at least one positive and one negative");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  long tp = 0, fp = 0;
  // Twice the area in count units: sum of neg_g * (2 tp_before + pos_g).
  // Integers stay exact; the one division at the end is correctly rounded.
  long long twice_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    long pos_g = 0, neg_g = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i)
      (positives[order[i]] ? pos_g : neg_g) += 1;
    twice_area += static_cast<long long>(neg_g) * (2 * tp + pos_g);
    tp += pos_g;
    fp += neg_g;
    roc.points.push_back({s, static_cast<double>(fp) / num_neg,
                          static_cast<double>(tp) / num_pos});
  }
  roc.auc = static_cast<double>(twice_area) /
            static_cast<double>(2LL * num_pos * num_neg);
  return roc;
}

std::vector<RocCurve> PerClassRoc(const Eigen::MatrixXd &scores, std::span<const int> labels) {
  Require(scores.rows() == static_cast<Eigen::Index>(labels.size()),
          "score rows do not match labels");
  std::vector<RocCurve> out;
  std::vector<double> col(labels.size());
  auto pos = std::make_unique<bool[]>(labels.size());
  for (Eigen::Index c = 0; c < scores.cols(); ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      col[i] = scores(static_cast<Eigen::Index>(i), c);
      pos[i] = labels[i] == c;
    }
    out.push_back(RocAuc(col, std::span<const bool>(pos.get(), labels.size())));
  }
  return out;
}

void WriteRocCsv(const std::filesystem::path &path, const RocCurve &roc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "# auc=" << FormatDouble(roc.auc) << "\n";
  out << "threshold,fpr,tpr\n";
  for (const auto &p : roc.points)
    out << FormatDouble(p.threshold) << ',' << FormatDouble(p.fpr) << ','
        << FormatDouble(p.tpr) << '\n';
}

void WriteConfusionCsv(const std::filesystem::path &path, const Eigen::MatrixXi &confusion,
                       std::span<const std::string> class_names) {
  Require(static_cast<Eigen::Index>(class_names.size()) == confusion.rows(),
          "confusion matrix and class names disagree");
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "true\\predicted";
  for (const auto &name : class_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
    out << class_names[r];
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) out << ',' << confusion(r, c);
    out << '\n';
  }
}

}  // namespace breathid
