// breathid/classify.h

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

#ifndef BREATHID_CLASSIFY_H_
#define BREATHID_CLASSIFY_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace breathid {

// Splits ---------------------------------------------------------------------

enum class Split : int { kTrain = 0, kValidation = 1, kTest = 2 };

const char *SplitName(Split split);
Split ParseSplit(const std::string &name);

struct SplitManifest {
  std::vector<Split> assignment;  // parallel to the label list

  std::vector<std::size_t> Indices(Split split) const;
};

/// Per-speaker seeded shuffle, then a contiguous cut into train/validation/
/// test of sizes round(n f_train), round(n f_val) and the remainder. A
/// speaker left without an example for a nonzero fraction is an error that
/// names the speaker.
SplitManifest MakeSplit(std::span<const std::string> speakers,
                        const std::array<double, 3> &fractions, uint64_t seed);

// Linear SVM -----------------------------------------------------------------

/// One-vs-rest linear machine; score_c(v) = w_c . v + b_c.
struct LinearSvm {
  Eigen::MatrixXd weights;  // C x d
  Eigen::VectorXd biases;   // C
  double lambda = 0.0;

  Eigen::Index NumClasses() const { return weights.rows(); }
  Eigen::Index Dim() const { return weights.cols(); }
};

struct SvmTrainOptions {
  double c_reg = 1.0;  // lambda = 1 / (c_reg * n)
  int epochs = 50;
  uint64_t seed = 0;
};

struct SvmFit {
  LinearSvm model;
  /// objective[c][e]: primal objective of class c after epoch e.
  std::vector<std::vector<double>> objective;
};

/// Stochastic subgradient (Pegasos) per class on
///   (lambda/2)|w|^2 + mean_i hinge(1 - s_i (w . v_i + b)),
/// with step 1/(lambda t). The bias is learned as the weight of a constant
/// feature.
SvmFit TrainLinearSvm(const Eigen::MatrixXd &vectors, std::span<const int> labels,
                      int num_classes, const SvmTrainOptions &options);

Eigen::VectorXd SvmScores(const LinearSvm &model, const Eigen::VectorXd &v);
Eigen::MatrixXd SvmScores(const LinearSvm &model, const Eigen::MatrixXd &rows);

/// Primal objective of one class of the machine on the given data.
double SvmObjective(const LinearSvm &model, int cls, const Eigen::MatrixXd &vectors,
                    std::span<const int> labels);

// MLP ------------------------------------------------------------------------

enum class Activation : int { kRelu = 0, kSigmoid = 1, kSoftmax = 2 };

struct MlpLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd biases;
  Activation activation = Activation::kRelu;
};

/// ReLU first hidden layer, logistic second hidden layer when present,
/// softmax output.
struct Mlp {
  std::vector<MlpLayer> layers;

  Eigen::Index InputDim() const { return layers.front().weights.cols(); }
  Eigen::Index NumClasses() const { return layers.back().weights.rows(); }
};

struct MlpTrainOptions {
  std::vector<int> hidden = {128};
  double learning_rate = 0.1;
  double momentum = 0.9;
  double decay = 1e-9;
  int batch_size = 400;
  int epochs = 200;
  uint64_t seed = 0;
};

struct MlpFit {
  Mlp model;
  std::vector<double> epoch_loss;      // mean loss seen during each epoch
  std::vector<double> learning_rates;  // rate used by every update
};

Mlp InitMlp(int input_dim, std::span<const int> hidden, int num_classes, uint64_t seed);

/// Class probabilities for each row.
Eigen::MatrixXd MlpPredict(const Mlp &model, const Eigen::MatrixXd &rows);

/// Mean one-hot KL loss over the rows and its exact gradient.
double MlpLossAndGradient(const Mlp &model, const Eigen::MatrixXd &rows,
                          std::span<const int> labels, Mlp *gradient);

/// Minibatch SGD with classical momentum; update t uses rate
/// lr / (1 + decay t). A batch larger than the data becomes the full set.
MlpFit TrainMlp(const Eigen::MatrixXd &vectors, std::span<const int> labels,
                int num_classes, const MlpTrainOptions &options);

// Evaluation -----------------------------------------------------------------

struct Evaluation {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;  // rows = true class, cols = predicted class
};

/// Arg-max of each score row against the true labels.
Evaluation Evaluate(const Eigen::MatrixXd &scores, std::span<const int> labels);
Evaluation EvaluatePredictions(std::span<const int> predicted,
                               std::span<const int> labels, int num_classes);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // starts at (0, 0), ends at (1, 1)
  double auc = 0.0;
};

/// Threshold sweep over distinct scores, descending; tied scores form one
/// step. AUC by the trapezoidal rule.
RocCurve RocAuc(std::span<const double> scores, std::span<const bool> positives);

/// Per-class one-vs-rest verification curves from a score matrix.
std::vector<RocCurve> PerClassRoc(const Eigen::MatrixXd &scores,
                                  std::span<const int> labels);

void WriteRocCsv(const std::filesystem::path &path, const RocCurve &roc);
void WriteConfusionCsv(const std::filesystem::path &path, const Eigen::MatrixXi &confusion,
                       std::span<const std::string> class_names);

}  // namespace breathid

#endif  // BREATHID_CLASSIFY_H_
