// breathid/nn.h

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

// CNN-LSTM speaker classifier: same-padded convolution + ReLU, 2x1 max
// pooling along frequency, an LSTM over time whose last output goes through
// dropout into a softmax layer. Everything is double precision and batch
// size one.

#ifndef BREATHID_NN_H_
#define BREATHID_NN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace breathid {

/// Dense row-major array with an explicit shape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);

  std::size_t Size() const { return values.size(); }
  /// Element of a rank-3 tensor.
  double &At(std::size_t i, std::size_t j, std::size_t k) {
    return values[(i * shape[1] + j) * shape[2] + k];
  }
  double At(std::size_t i, std::size_t j, std::size_t k) const {
    return values[(i * shape[1] + j) * shape[2] + k];
  }
};

struct Conv2dLayer {
  int num_filters = 0;
  int rows = 0;  // U, along frequency
  int cols = 0;  // V, along time
  std::vector<double> filters;  // L x U x V, row-major
  std::vector<double> biases;   // L

  double &Weight(int l, int u, int v) { return filters[(l * rows + u) * cols + v]; }
  double Weight(int l, int u, int v) const { return filters[(l * rows + u) * cols + v]; }
};

/// Gate blocks of `weights` / `biases` are stacked as [forget; input;
/// output; candidate], each hidden_dim rows, acting on [x_t; h_{t-1}].
struct LstmLayer {
  int input_dim = 0;
  int hidden_dim = 0;
  Eigen::MatrixXd weights;  // 4H x (input_dim + H)
  Eigen::VectorXd biases;   // 4H
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // C x H
  Eigen::VectorXd biases;   // C
};

struct NetworkParams {
  Conv2dLayer conv;
  LstmLayer lstm;
  DenseLayer dense;
  double dropout_rate = 0.4;

  int NumClasses() const { return static_cast<int>(dense.weights.rows()); }
  /// Number of frequency rows the network was built for.
  int input_bins = 0;
};

/// Size of the max-pooling window and stride along frequency.
inline constexpr int kPoolRows = 2;

struct NetworkShape {
  int input_bins = 0;
  int num_filters = 8;
  int filter_rows = 3;
  int filter_cols = 3;
  int hidden_dim = 64;
  int num_classes = 0;
  double dropout_rate = 0.4;
};

/// Uniform(+-1/sqrt(fan_in)) weights, zero biases except the LSTM forget
/// gate bias which starts at 1.
NetworkParams InitNetwork(const NetworkShape &shape, uint64_t seed);

/// Every trainable array in a fixed order with a stable name; gradients and
/// optimizer state use the same traversal.
struct ParamView {
  std::string name;
  std::span<double> values;
};
std::vector<ParamView> ParameterViews(NetworkParams &params);
NetworkParams ZerosLike(const NetworkParams &params);

// Layer operations -----------------------------------------------------------

/// Same-padded correlation plus bias, then ReLU. Returns the L x F x T
/// activation and stores the pre-activation in `pre` when given.
Tensor ConvForward(const Eigen::MatrixXd &input, const Conv2dLayer &layer,
                   Tensor *pre = nullptr);

/// Non-overlapping 2x1 max pooling along frequency; an odd trailing row is
/// dropped. Ties go to the lower row. `argmax` receives the flat source
/// index of every output cell.
Tensor MaxPoolForward(const Tensor &input, std::vector<std::size_t> *argmax = nullptr);

/// Rows are time steps; step t holds pooled(l, p, t) at column l * F2 + p.
Eigen::MatrixXd FlattenForLstm(const Tensor &pooled);

struct LstmCache {
  std::vector<Eigen::VectorXd> inputs;  // [x_t; h_{t-1}]
  std::vector<Eigen::VectorXd> gates;   // activated f, i, o, g stacked
  std::vector<Eigen::VectorXd> cells;   // c_0 .. c_T
  std::vector<Eigen::VectorXd> hidden;  // h_0 .. h_T
};

/// Runs the recurrence from zero state over the rows of `sequence` and
/// returns the final hidden state.
Eigen::VectorXd LstmForward(const Eigen::MatrixXd &sequence, const LstmLayer &layer,
                            LstmCache *cache = nullptr);

/// Backpropagates d(loss)/d(h_T) through time. Accumulates into `grad` and
/// returns d(loss)/d(sequence).
Eigen::MatrixXd LstmBackward(const LstmLayer &layer, const LstmCache &cache,
                             const Eigen::VectorXd &grad_last, LstmLayer *grad);

/// Inverted dropout. In training mode each element survives with
/// probability 1 - rate and is scaled by 1 / (1 - rate); otherwise identity.
Eigen::VectorXd DropoutApply(const Eigen::VectorXd &h, double rate, bool training,
                             uint64_t seed, Eigen::VectorXd *mask = nullptr);

/// Numerically stable softmax (max subtracted).
Eigen::VectorXd Softmax(const Eigen::VectorXd &logits);

Eigen::VectorXd DenseSoftmax(const Eigen::VectorXd &h, const DenseLayer &dense);

/// sum_j y_j log(y_j / yhat_j) with 0 log 0 = 0.
double KlLoss(const Eigen::VectorXd &label, const Eigen::VectorXd &prediction);
/// One-hot case: -log yhat_label.
double KlLoss(int label, const Eigen::VectorXd &prediction);
/// Mean one-hot KL loss over a batch.
double EmpiricalRisk(std::span<const int> labels,
                     std::span<const Eigen::VectorXd> predictions);

Eigen::VectorXd OneHot(int label, int num_classes);

// Whole network --------------------------------------------------------------

struct ForwardPass {
  Eigen::MatrixXd input;
  Tensor conv_pre;
  Tensor conv_out;
  Tensor pooled;
  std::vector<std::size_t> pool_argmax;
  Eigen::MatrixXd sequence;
  LstmCache lstm;
  Eigen::VectorXd hidden;
  Eigen::VectorXd dropout_mask;
  Eigen::VectorXd dropped;
  Eigen::VectorXd probs;
};

ForwardPass NetworkForward(const NetworkParams &params, const Eigen::MatrixXd &input,
                           bool training, uint64_t dropout_seed);

/// Class probabilities with dropout disabled.
Eigen::VectorXd Predict(const NetworkParams &params, const Eigen::MatrixXd &input);

/// Exact gradient of KlLoss(label, probs) for the pass, same layout as the
/// parameters.
NetworkParams NetworkBackward(const NetworkParams &params, const ForwardPass &pass,
                              int label);

// Optimization ---------------------------------------------------------------

struct AdadeltaState {
  double rho = 0.9;
  double epsilon = 1e-6;
  std::vector<std::vector<double>> sq_grad;    // E[g^2]
  std::vector<std::vector<double>> sq_update;  // E[dx^2]
};

AdadeltaState MakeAdadeltaState(NetworkParams &params, double rho = 0.9,
                                double epsilon = 1e-6);

/// One Adadelta update on a flat parameter array.
void AdadeltaUpdate(std::span<double> params, std::span<const double> grads,
                    std::span<double> sq_grad, std::span<double> sq_update,
                    double rho, double epsilon);

void AdadeltaStep(NetworkParams &params, NetworkParams &grads, AdadeltaState &state);

struct LabeledMatrix {
  Eigen::MatrixXd values;
  int label = 0;
};

struct NetworkTrainConfig {
  int max_epochs = 100;
  int patience = 5;
  double rho = 0.9;
  double epsilon = 1e-6;
  uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double train_risk = 0.0;
  double val_error = 0.0;
  double val_risk = 0.0;
};

struct NetworkTrainResult {
  NetworkParams params;
  std::vector<EpochLog> log;
  int best_epoch = 0;  // 0 means the initial parameters were never beaten
};

/// Batch-size-one Adadelta over seeded shuffles. After every epoch the
/// validation set is scored. Training stops once more than `patience`
/// consecutive epochs fail to lower the validation error rate. The returned
/// parameters are those of the lowest error, ties going to the lower
/// validation risk.
NetworkTrainResult TrainNetwork(const NetworkParams &initial,
                                std::span<const LabeledMatrix> train,
                                std::span<const LabeledMatrix> validation,
                                const NetworkTrainConfig &config,
                                const std::function<void(const EpochLog &)> &on_epoch = {});

/// Error rate and mean risk of `params` on a labelled set.
std::pair<double, double> ErrorAndRisk(const NetworkParams &params,
                                       std::span<const LabeledMatrix> data);

}  // namespace breathid

#endif  // BREATHID_NN_H_
