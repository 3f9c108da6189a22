// breathid/pipeline.h

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

// Pipeline stages shared by the command-line tool and the end-to-end
// tests. Each stage reads a manifest and/or containers and returns the
// container it would persist.

#ifndef BREATHID_PIPELINE_H_
#define BREATHID_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "breathid/classify.h"
#include "breathid/container.h"
#include "breathid/features.h"
#include "breathid/gmm.h"
#include "breathid/ivector.h"
#include "breathid/nn.h"
#include "breathid/synth.h"

namespace breathid {

enum class FeatureKind : int { kCqt = 0, kMfcc = 1 };

FeatureKind ParseFeatureKind(const std::string &name);

struct FeatureOptions {
  FeatureKind kind = FeatureKind::kCqt;
  double min_hz = 100.0;  // CQT; max is always rate / 2
  int bins_per_octave = 12;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  MfccConfig mfcc;
};

/// Records feat/<i> per manifest row (CQT: bins x frames, MFCC: frames x
/// dims) plus feat.kind. All files must share one sample rate.
ModelContainer ExtractFeatures(const CorpusManifest &manifest, const FeatureOptions &options);

/// Frames of row i as a T x D matrix, whatever the stored orientation.
Eigen::MatrixXd FeatureFrames(const ModelContainer &features, std::size_t row);
/// Feature matrix of row i as stored.
Eigen::MatrixXd FeatureMatrix(const ModelContainer &features, std::size_t row);

ModelContainer TrainUbmStage(const ModelContainer &features, const CorpusManifest &manifest,
                             const GmmTrainOptions &options);
DiagonalGmm UbmFromContainer(const ModelContainer &c);

ModelContainer TrainTvStage(const ModelContainer &features, const CorpusManifest &manifest,
                            const ModelContainer &ubm, const TvTrainOptions &options);
TotalVariabilityModel TvFromContainer(const ModelContainer &c);

/// I-vectors of every row, centred on the training-split mean and length
/// normalized: records vectors and ivector_mean.
ModelContainer ExtractIvectorsStage(const ModelContainer &features,
                                    const CorpusManifest &manifest,
                                    const ModelContainer &ubm, const ModelContainer &tv);

/// Fits on the training split, projects every row: lda_basis, lda_mean,
/// vectors.
ModelContainer LdaStage(const ModelContainer &vectors, const CorpusManifest &manifest,
                        int out_dim);

ModelContainer TrainSvmStage(const ModelContainer &vectors, const CorpusManifest &manifest,
                             const SvmTrainOptions &options);
ModelContainer TrainMlpStage(const ModelContainer &vectors, const CorpusManifest &manifest,
                             const MlpTrainOptions &options);

struct CnnLstmOptions {
  int num_filters = 8;
  int filter_rows = 3;
  int filter_cols = 3;
  int hidden_dim = 64;
  double dropout_rate = 0.4;
  int augment_copies = 2;  // elastic copies added per training example
  double elastic_sigma = 2.0;
  double elastic_alpha = 15.0;
  NetworkTrainConfig train;
};

/// Trains on the training split with early stopping on the validation
/// split. The log rows are returned through log when non-null.
ModelContainer TrainCnnLstmStage(const ModelContainer &features,
                                 const CorpusManifest &manifest,
                                 const CnnLstmOptions &options,
                                 std::vector<EpochLog> *log = nullptr);
NetworkParams NetworkFromContainer(const ModelContainer &c);

/// Scores of every row of one split: scores (N x C), labels, rows.
/// The model kind follows from its records; input is the vectors
/// container for svm/mlp models and the features container for cnnlstm.
ModelContainer IdentifyStage(const ModelContainer &model, const ModelContainer &input,
                             const CorpusManifest &manifest, Split split);

void WriteTrainingLog(const std::filesystem::path &path, const std::vector<EpochLog> &log);
void WritePredictionsCsv(const std::filesystem::path &path, const ModelContainer &scores,
                         const CorpusManifest &manifest);

/// Per-speaker verification curves: roc_<speaker>.csv and auc.csv in
/// out_dir. Returns the mean AUC.
double VerifyStage(const ModelContainer &scores, const CorpusManifest &manifest,
                   const std::filesystem::path &out_dir);

struct Metrics {
  double accuracy = 0.0;
  double mean_auc = 0.0;
};

/// metrics.csv, confusion.csv and roc.csv (pooled target/non-target trials)
/// in out_dir.
Metrics EvaluateStage(const ModelContainer &scores, const CorpusManifest &manifest,
                      const std::filesystem::path &out_dir);

}  // namespace breathid

#endif  // BREATHID_PIPELINE_H_
