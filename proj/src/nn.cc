// src/nn.cc

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

#include "breathid/nn.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "breathid/error.h"
#include "breathid/random.h"

namespace breathid {

namespace {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::span<double> View(Eigen::MatrixXd &m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> View(Eigen::VectorXd &v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  values.assign(n, 0.0);
}

NetworkParams InitNetwork(const NetworkShape &shape, uint64_t seed) {
  Require(shape.input_bins >= kPoolRows, "network needs at least 2 input rows");
  Require(shape.num_filters >= 1 && shape.hidden_dim >= 1 && shape.num_classes >= 2,
          "network needs filters, hidden units and at least two classes");
  Require(shape.filter_rows % 2 == 1 && shape.filter_cols % 2 == 1,
          "convolution filter sizes must be odd");
  Require(shape.dropout_rate >= 0.0 && shape.dropout_rate < 1.0,
          "dropout rate must lie in [0, 1)");

  Rng rng(DeriveSeed(seed, {0x6e6e696eULL}));
  auto fill = [&rng](std::span<double> values, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double &v : values) v = u(rng);
  };

  NetworkParams p;
  p.input_bins = shape.input_bins;
  p.dropout_rate = shape.dropout_rate;

  p.conv.num_filters = shape.num_filters;
  p.conv.rows = shape.filter_rows;
  p.conv.cols = shape.filter_cols;
  p.conv.filters.resize(static_cast<std::size_t>(shape.num_filters) *
                        shape.filter_rows * shape.filter_cols);
  p.conv.biases.assign(shape.num_filters, 0.0);
  fill(p.conv.filters, 1.0 / std::sqrt(shape.filter_rows * shape.filter_cols));

  const int pooled_rows = shape.input_bins / kPoolRows;
  const int hidden = shape.hidden_dim;
  p.lstm.input_dim = shape.num_filters * pooled_rows;
  p.lstm.hidden_dim = hidden;
  p.lstm.weights.resize(4 * hidden, p.lstm.input_dim + hidden);
  p.lstm.biases = Eigen::VectorXd::Zero(4 * hidden);
  p.lstm.biases.head(hidden).setOnes();
  fill(View(p.lstm.weights), 1.0 / std::sqrt(p.lstm.input_dim + hidden));

  p.dense.weights.resize(shape.num_classes, hidden);
  p.dense.biases = Eigen::VectorXd::Zero(shape.num_classes);
  fill(View(p.dense.weights), 1.0 / std::sqrt(hidden));
  return p;
}

std::vector<ParamView> ParameterViews(NetworkParams &p) {
  return {
      {"conv.filters", p.conv.filters},
      {"conv.biases", p.conv.biases},
      {"lstm.weights", View(p.lstm.weights)},
      {"lstm.biases", View(p.lstm.biases)},
      {"dense.weights", View(p.dense.weights)},
      {"dense.biases", View(p.dense.biases)},
  };
}

NetworkParams ZerosLike(const NetworkParams &params) {
  NetworkParams z = params;
  for (auto &view : ParameterViews(z)) std::fill(view.values.begin(), view.values.end(), 0.0);
  return z;
}

Tensor ConvForward(const Eigen::MatrixXd &input, const Conv2dLayer &layer,
                   Tensor *pre) {
  const auto F = static_cast<std::size_t>(input.rows());
  const auto T = static_cast<std::size_t>(input.cols());
  const int L = layer.num_filters;
  const int hu = layer.rows / 2, hv = layer.cols / 2;
  Tensor z({static_cast<std::size_t>(L), F, T});
  for (int l = 0; l < L; ++l) {
    for (std::size_t f = 0; f < F; ++f) {
      for (std::size_t t = 0; t < T; ++t) {
        double acc = layer.biases[l];
        for (int u = 0; u < layer.rows; ++u) {
          const auto ff = static_cast<std::ptrdiff_t>(f) + u - hu;
          if (ff < 0 || ff >= static_cast<std::ptrdiff_t>(F)) continue;
          for (int v = 0; v < layer.cols; ++v) {
            const auto tt = static_cast<std::ptrdiff_t>(t) + v - hv;
            if (tt < 0 || tt >= static_cast<std::ptrdiff_t>(T)) continue;
            acc += layer.Weight(l, u, v) * input(ff, tt);
          }
        }
        z.At(l, f, t) = acc;
      }
    }
  }
  Tensor out = z;
  for (double &v : out.values) v = std::max(0.0, v);
  if (pre) *pre = std::move(z);
  return out;
}

Tensor MaxPoolForward(const Tensor &input, std::vector<std::size_t> *argmax) {
  const std::size_t L = input.shape[0], F = input.shape[1], T = input.shape[2];
  Require(F >= static_cast<std::size_t>(kPoolRows), "max pooling needs at least 2 rows");
  const std::size_t P = F / kPoolRows;
  Tensor out({L, P, T});
  if (argmax) argmax->assign(out.Size(), 0);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t t = 0; t < T; ++t) {
        std::size_t best = (l * F + kPoolRows * p) * T + t;
        for (int r = 1; r < kPoolRows; ++r) {
          std::size_t idx = (l * F + kPoolRows * p + r) * T + t;
          if (input.values[idx] > input.values[best]) best = idx;
        }
        const std::size_t o = (l * P + p) * T + t;
        out.values[o] = input.values[best];
        if (argmax) (*argmax)[o] = best;
      }
    }
  }
  return out;
}

Eigen::MatrixXd FlattenForLstm(const Tensor &pooled) {
  const std::size_t L = pooled.shape[0], P = pooled.shape[1], T = pooled.shape[2];
  Eigen::MatrixXd seq(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(L * P));
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t t = 0; t < T; ++t)
        seq(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l * P + p)) =
            pooled.At(l, p, t);
  return seq;
}

Eigen::VectorXd LstmForward(const Eigen::MatrixXd &sequence, const LstmLayer &layer,
                            LstmCache *cache) {
  Require(sequence.rows() >= 1, "LSTM needs at least one time step");
  if (sequence.cols() != layer.input_dim)
    Fail(ErrorCode::kDimensionMismatch,
         "LSTM input width " + std::to_string(sequence.cols()) + " != " +
             std::to_string(layer.input_dim));
  const int H = layer.hidden_dim, D = layer.input_dim;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H), c = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd z(D + H);
  if (cache) {
    *cache = LstmCache{};
    cache->cells.push_back(c);
    cache->hidden.push_back(h);
  }
  for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
    z.head(D) = sequence.row(t).transpose();
    z.tail(H) = h;
    Eigen::VectorXd a = layer.weights * z + layer.biases;
    for (int j = 0; j < 3 * H; ++j) a(j) = Sigmoid(a(j));
    for (int j = 3 * H; j < 4 * H; ++j) a(j) = std::tanh(a(j));
    c = a.segment(0, H).cwiseProduct(c) + a.segment(H, H).cwiseProduct(a.segment(3 * H, H));
    h = a.segment(2 * H, H).cwiseProduct(c.array().tanh().matrix());
    if (cache) {
      cache->inputs.push_back(z);
      cache->gates.push_back(std::move(a));
      cache->cells.push_back(c);
      cache->hidden.push_back(h);
    }
  }
  return h;
}

Eigen::MatrixXd LstmBackward(const LstmLayer &layer, const LstmCache &cache,
                             const Eigen::VectorXd &grad_last, LstmLayer *grad) {
  const int H = layer.hidden_dim, D = layer.input_dim;
  const auto steps = static_cast<Eigen::Index>(cache.gates.size());
  Eigen::MatrixXd d_seq(steps, D);
  Eigen::VectorXd dh = grad_last, dc_next = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd da(4 * H);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const Eigen::VectorXd &a = cache.gates[t];
    const Eigen::VectorXd &c_prev = cache.cells[t];
    const Eigen::VectorXd &c = cache.cells[t + 1];
    const auto f = a.segment(0, H).array(), i = a.segment(H, H).array(),
               o = a.segment(2 * H, H).array(), g = a.segment(3 * H, H).array();
    const Eigen::ArrayXd tc = c.array().tanh();
    const Eigen::ArrayXd dc = dh.array() * o * (1.0 - tc.square()) + dc_next.array();
    da.segment(0, H) = (dc * c_prev.array() * f * (1.0 - f)).matrix();
    da.segment(H, H) = (dc * g * i * (1.0 - i)).matrix();
    da.segment(2 * H, H) = (dh.array() * tc * o * (1.0 - o)).matrix();
    da.segment(3 * H, H) = (dc * i * (1.0 - g.square())).matrix();
    dc_next = (dc * f).matrix();
    grad->weights.noalias() += da * cache.inputs[t].transpose();
    grad->biases += da;
    Eigen::VectorXd dz = layer.weights.transpose() * da;
    d_seq.row(t) = dz.head(D).transpose();
    dh = dz.tail(H);
  }
  return d_seq;
}

Eigen::VectorXd DropoutApply(const Eigen::VectorXd &h, double rate, bool training,
                             uint64_t seed, Eigen::VectorXd *mask) {
  Require(rate >= 0.0 && rate < 1.0, "dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) {
    if (mask) *mask = Eigen::VectorXd::Ones(h.size());
    return h;
  }
  Rng rng(DeriveSeed(seed, {0x64726f70ULL}));
  std::bernoulli_distribution keep(1.0 - rate);
  Eigen::VectorXd m(h.size());
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < h.size(); ++i) m(i) = keep(rng) ? scale : 0.0;
  Eigen::VectorXd out = h.cwiseProduct(m);
  if (mask) *mask = std::move(m);
  return out;
}

Eigen::VectorXd Softmax(const Eigen::VectorXd &logits) {
  Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Eigen::VectorXd DenseSoftmax(const Eigen::VectorXd &h, const DenseLayer &dense) {
  if (h.size() != dense.weights.cols())
    Fail(ErrorCode::kDimensionMismatch, "dense layer input size mismatch");
  return Softmax(dense.weights * h + dense.biases);
}

double KlLoss(const Eigen::VectorXd &label, const Eigen::VectorXd &prediction) {
  Require(label.size() == prediction.size(), "KL loss: class count mismatch");
  double loss = 0.0;
  for (Eigen::Index j = 0; j < label.size(); ++j)
    if (label(j) > 0.0) loss += label(j) * std::log(label(j) / prediction(j));
  return loss;
}

double KlLoss(int label, const Eigen::VectorXd &prediction) {
  Require(label >= 0 && label < prediction.size(), "KL loss: label out of range");
  return -std::log(prediction(label));
}

double EmpiricalRisk(std::span<const int> labels,
                     std::span<const Eigen::VectorXd> predictions) {
  Require(!labels.empty() && labels.size() == predictions.size(),
          "empirical risk needs matching, non-empty batches");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total += KlLoss(labels[i], predictions[i]);
  return total / static_cast<double>(labels.size());
}

Eigen::VectorXd OneHot(int label, int num_classes) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(num_classes);
  y(label) = 1.0;
  return y;
}

ForwardPass NetworkForward(const NetworkParams &params, const Eigen::MatrixXd &input,
                           bool training, uint64_t dropout_seed) {
  if (input.rows() != params.input_bins)
    Fail(ErrorCode::kDimensionMismatch,
         "network expects " + std::to_string(params.input_bins) +
             " frequency rows, input has " + std::to_string(input.rows()));
  Require(input.rows() >= params.conv.rows && input.cols() >= 1,
          "input smaller than the convolution filter");
  ForwardPass pass;
  pass.input = input;
  pass.conv_out = ConvForward(input, params.conv, &pass.conv_pre);
  pass.pooled = MaxPoolForward(pass.conv_out, &pass.pool_argmax);
  pass.sequence = FlattenForLstm(pass.pooled);
  pass.hidden = LstmForward(pass.sequence, params.lstm, &pass.lstm);
  pass.dropped = DropoutApply(pass.hidden, params.dropout_rate, training, dropout_seed,
                              &pass.dropout_mask);
  pass.probs = DenseSoftmax(pass.dropped, params.dense);
  return pass;
}

Eigen::VectorXd Predict(const NetworkParams &params, const Eigen::MatrixXd &input) {
  return NetworkForward(params, input, false, 0).probs;
}

NetworkParams NetworkBackward(const NetworkParams &params, const ForwardPass &pass,
                              int label) {
  NetworkParams grad = ZerosLike(params);
  Eigen::VectorXd d_logits = pass.probs;
  d_logits(label) -= 1.0;
  grad.dense.weights = d_logits * pass.dropped.transpose();
  grad.dense.biases = d_logits;
  Eigen::VectorXd d_hidden =
      (params.dense.weights.transpose() * d_logits).cwiseProduct(pass.dropout_mask);

  Eigen::MatrixXd d_seq = LstmBackward(params.lstm, pass.lstm, d_hidden, &grad.lstm);

  const std::size_t L = pass.pooled.shape[0], P = pass.pooled.shape[1],
                    T = pass.pooled.shape[2];
  std::vector<double> d_conv(pass.conv_out.Size(), 0.0);
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t o = (l * P + p) * T + t;
        d_conv[pass.pool_argmax[o]] +=
            d_seq(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l * P + p));
      }
  for (std::size_t i = 0; i < d_conv.size(); ++i)
    if (pass.conv_pre.values[i] <= 0.0) d_conv[i] = 0.0;

  const Conv2dLayer &conv = params.conv;
  const std::size_t F = pass.conv_out.shape[1];
  const int hu = conv.rows / 2, hv = conv.cols / 2;
  for (int l = 0; l < conv.num_filters; ++l) {
    for (std::size_t f = 0; f < F; ++f) {
      for (std::size_t t = 0; t < T; ++t) {
        const double dz = d_conv[(l * F + f) * T + t];
        if (dz == 0.0) continue;
        grad.conv.biases[l] += dz;
        for (int u = 0; u < conv.rows; ++u) {
          const auto ff = static_cast<std::ptrdiff_t>(f) + u - hu;
          if (ff < 0 || ff >= static_cast<std::ptrdiff_t>(F)) continue;
          for (int v = 0; v < conv.cols; ++v) {
            const auto tt = static_cast<std::ptrdiff_t>(t) + v - hv;
            if (tt < 0 || tt >= static_cast<std::ptrdiff_t>(T)) continue;
            grad.conv.Weight(l, u, v) += dz * pass.input(ff, tt);
          }
        }
      }
    }
  }
  return grad;
}

AdadeltaState MakeAdadeltaState(NetworkParams &params, double rho, double epsilon) {
  Require(rho > 0.0 && rho < 1.0, "Adadelta decay must lie in (0, 1)");
  Require(epsilon > 0.0, "Adadelta epsilon must be positive");
  AdadeltaState state;
  state.rho = rho;
  state.epsilon = epsilon;
  for (const auto &view : ParameterViews(params)) {
    state.sq_grad.emplace_back(view.values.size(), 0.0);
    state.sq_update.emplace_back(view.values.size(), 0.0);
  }
  return state;
}

void AdadeltaUpdate(std::span<double> params, std::span<const double> grads,
                    std::span<double> sq_grad, std::span<double> sq_update,
                    double rho, double epsilon) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    sq_grad[i] = rho * sq_grad[i] + (1.0 - rho) * g * g;
    const double dx = -std::sqrt(sq_update[i] + epsilon) / std::sqrt(sq_grad[i] + epsilon) * g;
    sq_update[i] = rho * sq_update[i] + (1.0 - rho) * dx * dx;
    params[i] += dx;
  }
}

void AdadeltaStep(NetworkParams &params, NetworkParams &grads, AdadeltaState &state) {
  auto p = ParameterViews(params);
  auto g = ParameterViews(grads);
  Require(p.size() == state.sq_grad.size(), "Adadelta state does not match parameters");
  for (std::size_t k = 0; k < p.size(); ++k) {
    Require(p[k].values.size() == g[k].values.size() &&
                p[k].values.size() == state.sq_grad[k].size(),
            "Adadelta: shape mismatch in " + p[k].name);
    AdadeltaUpdate(p[k].values, g[k].values, state.sq_grad[k], state.sq_update[k],
                   state.rho, state.epsilon);
  }
}

std::pair<double, double> ErrorAndRisk(const NetworkParams &params,
                                       std::span<const LabeledMatrix> data) {
  Require(!data.empty(), "cannot score an empty set");
  double errors = 0.0, risk = 0.0;
  for (const auto &ex : data) {
    Eigen::VectorXd probs = Predict(params, ex.values);
    Eigen::Index arg = 0;
    probs.maxCoeff(&arg);
    if (arg != ex.label) errors += 1.0;
    risk += KlLoss(ex.label, probs);
  }
  const auto n = static_cast<double>(data.size());
  return {errors / n, risk / n};
}

NetworkTrainResult TrainNetwork(const NetworkParams &initial,
                                std::span<const LabeledMatrix> train,
                                std::span<const LabeledMatrix> validation,
                                const NetworkTrainConfig &config,
                                const std::function<void(const EpochLog &)> &on_epoch) {
  Require(!train.empty() && !validation.empty(),
          "training needs at least one training and one validation example");
  Require(config.max_epochs >= 1 && config.patience >= 0,
          "bad epoch budget or patience");
  NetworkTrainResult result;
  NetworkParams params = initial;
  AdadeltaState state = MakeAdadeltaState(params, config.rho, config.epsilon);

  auto [best_error, best_risk] = ErrorAndRisk(params, validation);
  result.params = params;
  int stale = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng shuffle_rng(DeriveSeed(config.seed, {0x73687566ULL, static_cast<uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total_loss = 0.0;
    for (std::size_t step = 0; step < order.size(); ++step) {
      const LabeledMatrix &ex = train[order[step]];
      const uint64_t drop_seed =
          DeriveSeed(config.seed, {static_cast<uint64_t>(epoch), step});
      ForwardPass pass = NetworkForward(params, ex.values, true, drop_seed);
      const double loss = KlLoss(ex.label, pass.probs);
      if (!std::isfinite(loss))
        Fail(ErrorCode::kNumerical, "non-finite loss at epoch " + std::to_string(epoch) +
                                        ", training example " +
                                        std::to_string(order[step]));
      total_loss += loss;
      NetworkParams grads = NetworkBackward(params, pass, ex.label);
      AdadeltaStep(params, grads, state);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_risk = total_loss / static_cast<double>(train.size());
    std::tie(entry.val_error, entry.val_risk) = ErrorAndRisk(params, validation);
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    // Only a lower error resets patience; an equal error with lower risk
    // still replaces the returned parameters.
    const bool lower_error = entry.val_error < best_error;
    if (lower_error || (entry.val_error == best_error && entry.val_risk < best_risk)) {
      best_error = entry.val_error;
      best_risk = entry.val_risk;
      result.params = params;
      result.best_epoch = epoch;
    }
    if (lower_error) {
      stale = 0;
    } else if (++stale > config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace breathid
