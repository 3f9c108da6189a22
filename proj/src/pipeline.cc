// src/pipeline.cc

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

#include "breathid/pipeline.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>

#include "breathid/audio.h"
#include "breathid/error.h"
#include "breathid/random.h"

namespace breathid {

namespace {

std::string FeatName(std::size_t row) { return "feat/" + std::to_string(row); }

std::string Fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::ofstream OpenOut(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void CheckRowCount(const ModelContainer &c, const CorpusManifest &manifest,
                   const std::string &what) {
  if (!c.Has(FeatName(0)) || c.Has(FeatName(manifest.rows.size())) ||
      !c.Has(FeatName(manifest.rows.size() - 1)))
    Fail(ErrorCode::kDimensionMismatch,
         what + " does not hold one record per manifest row (" +
             std::to_string(manifest.rows.size()) + ")");
}

Eigen::MatrixXd Vectors(const ModelContainer &c, const CorpusManifest &manifest) {
  Eigen::MatrixXd v = c.GetMatrix("vectors");
  if (v.rows() != static_cast<Eigen::Index>(manifest.rows.size()))
    Fail(ErrorCode::kDimensionMismatch,
         "vectors have " + std::to_string(v.rows()) + " rows but the manifest has " +
             std::to_string(manifest.rows.size()));
  return v;
}

std::vector<std::size_t> RowsOf(const CorpusManifest &manifest, Split split) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i)
    if (manifest.rows[i].split == split) rows.push_back(i);
  if (rows.empty())
    Fail(ErrorCode::kInvalidArgument,
         std::string("manifest has no rows in split ") + SplitName(split));
  return rows;
}

Eigen::MatrixXd SelectRows(const Eigen::MatrixXd &m, const std::vector<std::size_t> &rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<int> SelectLabels(const std::vector<int> &labels,
                              const std::vector<std::size_t> &rows) {
  std::vector<int> out;
  for (auto r : rows) out.push_back(labels[r]);
  return out;
}

FeatureKind StoredKind(const ModelContainer &features) {
  return static_cast<FeatureKind>(static_cast<int>(features.GetScalar("feat.kind")));
}

// Per-bin statistics of the training spectrograms, used to standardize
// network inputs.
void InputStats(const std::vector<Eigen::MatrixXd> &specs, Eigen::VectorXd *mean,
                Eigen::VectorXd *scale) {
  const Eigen::Index f = specs.front().rows();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(f);
  double count = 0.0;
  for (const auto &s : specs) {
    sum += s.rowwise().sum();
    count += static_cast<double>(s.cols());
  }
  *mean = sum / count;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(f);
  for (const auto &s : specs) sq += (s.colwise() - *mean).array().square().rowwise().sum().matrix();
  *scale = (sq / count).array().sqrt().max(1e-8).inverse().matrix();
}

Eigen::MatrixXd Standardize(const Eigen::MatrixXd &spec, const Eigen::VectorXd &mean,
                            const Eigen::VectorXd &scale) {
  if (spec.rows() != mean.size())
    Fail(ErrorCode::kDimensionMismatch, "spectrogram has " + std::to_string(spec.rows()) +
                                            " bins but the network expects " +
                                            std::to_string(mean.size()));
  return ((spec.colwise() - mean).array().colwise() * scale.array()).matrix();
}

}  // namespace

FeatureKind ParseFeatureKind(const std::string &name) {
  if (name == "cqt") return FeatureKind::kCqt;
  if (name == "mfcc") return FeatureKind::kMfcc;
  Fail(ErrorCode::kInvalidArgument, "unknown feature kind '" + name + "' (cqt|mfcc)");
}

ModelContainer ExtractFeatures(const CorpusManifest &manifest, const FeatureOptions &options) {
  ModelContainer c;
  c.PutScalar("feat.kind", static_cast<double>(options.kind));
  std::optional<CqtKernel> kernel;
  int rate = 0;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const Waveform wave = LoadWav(manifest.Resolve(manifest.rows[i]));
    if (rate == 0) {
      rate = wave.sample_rate;
      c.PutScalar("feat.sample_rate", rate);
    } else if (wave.sample_rate != rate) {
      Fail(ErrorCode::kDimensionMismatch, manifest.rows[i].path + " has rate " +
                                              std::to_string(wave.sample_rate) +
                                              ", expected " + std::to_string(rate));
    }
    if (options.kind == FeatureKind::kCqt) {
      if (!kernel) {
        const CqtConfig cfg =
            MakeCqtConfig(rate, options.min_hz, rate / 2.0, options.bins_per_octave);
        kernel.emplace(cfg);
        c.PutVector("cqt.center_hz", Eigen::Map<const Eigen::VectorXd>(
                                         cfg.center_hz.data(),
                                         static_cast<Eigen::Index>(cfg.center_hz.size())));
      }
      c.PutMatrix(FeatName(i),
                  CqtSpectrogram(wave, *kernel, options.frame_ms, options.hop_ms).values);
    } else {
      c.PutMatrix(FeatName(i), MfccSequence(wave, options.mfcc));
    }
  }
  return c;
}

Eigen::MatrixXd FeatureMatrix(const ModelContainer &features, std::size_t row) {
  return features.GetMatrix(FeatName(row));
}

Eigen::MatrixXd FeatureFrames(const ModelContainer &features, std::size_t row) {
  Eigen::MatrixXd m = FeatureMatrix(features, row);
  if (StoredKind(features) == FeatureKind::kCqt) return m.transpose();
  return m;
}

ModelContainer TrainUbmStage(const ModelContainer &features, const CorpusManifest &manifest,
                             const GmmTrainOptions &options) {
  CheckRowCount(features, manifest, "feature container");
  const auto rows = RowsOf(manifest, Split::kTrain);
  std::vector<Eigen::MatrixXd> parts;
  Eigen::Index total = 0;
  for (auto r : rows) {
    parts.push_back(FeatureFrames(features, r));
    total += parts.back().rows();
  }
  Eigen::MatrixXd frames(total, parts.front().cols());
  Eigen::Index at = 0;
  for (const auto &p : parts) {
    if (p.cols() != frames.cols())
      Fail(ErrorCode::kDimensionMismatch, "feature dimension differs between rows");
    frames.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  const GmmFit fit = EmTrainGmm(frames, options);
  ModelContainer c;
  c.PutVector("ubm.weights", fit.gmm.weights);
  c.PutMatrix("ubm.means", fit.gmm.means);
  c.PutMatrix("ubm.variances", fit.gmm.variances);
  c.PutVector("ubm.log_likelihood",
              Eigen::Map<const Eigen::VectorXd>(fit.log_likelihood.data(),
                                                static_cast<Eigen::Index>(fit.log_likelihood.size())));
  return c;
}

DiagonalGmm UbmFromContainer(const ModelContainer &c) {
  DiagonalGmm g;
  g.weights = c.GetVector("ubm.weights");
  g.means = c.GetMatrix("ubm.means");
  g.variances = c.GetMatrix("ubm.variances");
  try {
    g.Check();
  } catch (const Error &e) {
    Fail(ErrorCode::kFormat, std::string("stored UBM is inconsistent: ") + e.what());
  }
  return g;
}

namespace {

std::vector<BaumWelchStats> StatsFor(const ModelContainer &features, const DiagonalGmm &ubm,
                                     const std::vector<std::size_t> &rows) {
  std::vector<BaumWelchStats> stats;
  for (auto r : rows) {
    const Eigen::MatrixXd frames = FeatureFrames(features, r);
    if (frames.cols() != ubm.Dim())
      Fail(ErrorCode::kDimensionMismatch,
           "features have dimension " + std::to_string(frames.cols()) +
               " but the UBM expects " + std::to_string(ubm.Dim()));
    stats.push_back(CollectStats(ubm, frames));
  }
  return stats;
}

}  // namespace

ModelContainer TrainTvStage(const ModelContainer &features, const CorpusManifest &manifest,
                            const ModelContainer &ubm_c, const TvTrainOptions &options) {
  CheckRowCount(features, manifest, "feature container");
  const DiagonalGmm ubm = UbmFromContainer(ubm_c);
  const auto stats = StatsFor(features, ubm, RowsOf(manifest, Split::kTrain));
  const TvFit fit = TrainTotalVariability(stats, ubm, options);
  ModelContainer c;
  c.PutVector("m", fit.model.m);
  c.PutMatrix("T", fit.model.t);
  c.PutMatrix("sigma", fit.model.sigma);
  c.PutVector("tv.objective",
              Eigen::Map<const Eigen::VectorXd>(fit.objective.data(),
                                                static_cast<Eigen::Index>(fit.objective.size())));
  return c;
}

TotalVariabilityModel TvFromContainer(const ModelContainer &c) {
  TotalVariabilityModel model;
  model.m = c.GetVector("m");
  model.t = c.GetMatrix("T");
  model.sigma = c.GetMatrix("sigma");
  if (model.m.size() != model.sigma.size() || model.t.rows() != model.m.size())
    Fail(ErrorCode::kFormat, "stored total variability model has inconsistent shapes");
  return model;
}

ModelContainer ExtractIvectorsStage(const ModelContainer &features,
                                    const CorpusManifest &manifest,
                                    const ModelContainer &ubm_c, const ModelContainer &tv_c) {
  CheckRowCount(features, manifest, "feature container");
  const DiagonalGmm ubm = UbmFromContainer(ubm_c);
  const TotalVariabilityModel tv = TvFromContainer(tv_c);
  if (tv.NumComponents() != ubm.NumComponents() || tv.Dim() != ubm.Dim())
    Fail(ErrorCode::kDimensionMismatch, "total variability model does not match the UBM");
  std::vector<std::size_t> all(manifest.rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto stats = StatsFor(features, ubm, all);
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(all.size()), tv.Rank());
  for (std::size_t i = 0; i < all.size(); ++i)
    raw.row(static_cast<Eigen::Index>(i)) = ExtractIvector(stats[i], tv).transpose();
  const auto train = RowsOf(manifest, Split::kTrain);
  const Eigen::VectorXd mean = SelectRows(raw, train).colwise().mean().transpose();
  const NormalizedVectors norm = CenterLengthNormalize(raw, mean);
  ModelContainer c;
  c.PutMatrix("vectors", norm.vectors);
  c.PutVector("ivector_mean", norm.mean);
  return c;
}

ModelContainer LdaStage(const ModelContainer &vectors_c, const CorpusManifest &manifest,
                        int out_dim) {
  const Eigen::MatrixXd vectors = Vectors(vectors_c, manifest);
  const auto labels = manifest.Labels();
  const auto train = RowsOf(manifest, Split::kTrain);
  const LdaProjection lda = LdaFit(SelectRows(vectors, train), SelectLabels(labels, train), out_dim);
  ModelContainer c;
  c.PutMatrix("lda_basis", lda.basis);
  c.PutVector("lda_mean", lda.mean);
  c.PutMatrix("vectors", LdaProject(lda, vectors));
  return c;
}

ModelContainer TrainSvmStage(const ModelContainer &vectors_c, const CorpusManifest &manifest,
                             const SvmTrainOptions &options) {
  const Eigen::MatrixXd vectors = Vectors(vectors_c, manifest);
  const auto labels = manifest.Labels();
  const auto train = RowsOf(manifest, Split::kTrain);
  const int classes = static_cast<int>(manifest.Speakers().size());
  const SvmFit fit = TrainLinearSvm(SelectRows(vectors, train), SelectLabels(labels, train),
                                    classes, options);
  ModelContainer c;
  c.PutMatrix("svm.weights", fit.model.weights);
  c.PutVector("svm.biases", fit.model.biases);
  c.PutScalar("svm.lambda", fit.model.lambda);
  return c;
}

ModelContainer TrainMlpStage(const ModelContainer &vectors_c, const CorpusManifest &manifest,
                             const MlpTrainOptions &options) {
  const Eigen::MatrixXd vectors = Vectors(vectors_c, manifest);
  const auto labels = manifest.Labels();
  const auto train = RowsOf(manifest, Split::kTrain);
  const int classes = static_cast<int>(manifest.Speakers().size());
  const MlpFit fit = TrainMlp(SelectRows(vectors, train), SelectLabels(labels, train), classes,
                              options);
  ModelContainer c;
  c.PutScalar("mlp.num_layers", static_cast<double>(fit.model.layers.size()));
  for (std::size_t k = 0; k < fit.model.layers.size(); ++k) {
    const std::string p = "mlp.layer" + std::to_string(k) + ".";
    c.PutMatrix(p + "weights", fit.model.layers[k].weights);
    c.PutVector(p + "biases", fit.model.layers[k].biases);
    c.PutScalar(p + "activation", static_cast<double>(fit.model.layers[k].activation));
  }
  return c;
}

namespace {

Mlp MlpFromContainer(const ModelContainer &c) {
  Mlp model;
  const auto n = static_cast<int>(c.GetScalar("mlp.num_layers"));
  for (int k = 0; k < n; ++k) {
    const std::string p = "mlp.layer" + std::to_string(k) + ".";
    MlpLayer layer;
    layer.weights = c.GetMatrix(p + "weights");
    layer.biases = c.GetVector(p + "biases");
    layer.activation = static_cast<Activation>(static_cast<int>(c.GetScalar(p + "activation")));
    model.layers.push_back(std::move(layer));
  }
  return model;
}

}  // namespace

ModelContainer TrainCnnLstmStage(const ModelContainer &features, const CorpusManifest &manifest,
                                 const CnnLstmOptions &options, std::vector<EpochLog> *log) {
  CheckRowCount(features, manifest, "feature container");
  if (StoredKind(features) != FeatureKind::kCqt)
    Fail(ErrorCode::kInvalidArgument, "the CNN-LSTM needs CQT features");
  const auto labels = manifest.Labels();
  const auto train = RowsOf(manifest, Split::kTrain);
  const auto val = RowsOf(manifest, Split::kValidation);

  std::vector<Eigen::MatrixXd> train_specs;
  for (auto r : train) train_specs.push_back(FeatureMatrix(features, r));
  Eigen::VectorXd mean, scale;
  InputStats(train_specs, &mean, &scale);

  std::vector<LabeledMatrix> train_set, val_set;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int label = labels[train[i]];
    train_set.push_back({Standardize(train_specs[i], mean, scale), label});
    for (int k = 0; k < options.augment_copies; ++k) {
      const uint64_t seed = DeriveSeed(options.train.seed, {0x656c6173ULL, train[i],
                                                             static_cast<uint64_t>(k)});
      const Eigen::MatrixXd warped =
          ElasticTransform(train_specs[i], options.elastic_sigma, options.elastic_alpha, seed);
      train_set.push_back({Standardize(warped, mean, scale), label});
    }
  }
  for (auto r : val) val_set.push_back({Standardize(FeatureMatrix(features, r), mean, scale),
                                        labels[r]});

  NetworkShape shape;
  shape.input_bins = static_cast<int>(mean.size());
  shape.num_filters = options.num_filters;
  shape.filter_rows = options.filter_rows;
  shape.filter_cols = options.filter_cols;
  shape.hidden_dim = options.hidden_dim;
  shape.num_classes = static_cast<int>(manifest.Speakers().size());
  shape.dropout_rate = options.dropout_rate;
  const NetworkParams init = InitNetwork(shape, DeriveSeed(options.train.seed, {0x696e6974ULL}));
  const NetworkTrainResult result = TrainNetwork(init, train_set, val_set, options.train);
  if (log) *log = result.log;

  const NetworkParams &p = result.params;
  ModelContainer c;
  c.Put({"conv.filters",
         {static_cast<uint64_t>(p.conv.num_filters), static_cast<uint64_t>(p.conv.rows),
          static_cast<uint64_t>(p.conv.cols)},
         p.conv.filters});
  c.Put({"conv.biases", {p.conv.biases.size()}, p.conv.biases});
  c.PutMatrix("lstm.weights", p.lstm.weights);
  c.PutVector("lstm.biases", p.lstm.biases);
  c.PutMatrix("dense.weights", p.dense.weights);
  c.PutVector("dense.biases", p.dense.biases);
  c.PutScalar("net.dropout_rate", p.dropout_rate);
  c.PutScalar("net.input_bins", p.input_bins);
  c.PutScalar("net.best_epoch", result.best_epoch);
  c.PutVector("input.mean", mean);
  c.PutVector("input.scale", scale);
  return c;
}

NetworkParams NetworkFromContainer(const ModelContainer &c) {
  NetworkParams p;
  const Record &filters = c.Get("conv.filters");
  if (filters.dims.size() != 3) Fail(ErrorCode::kFormat, "conv.filters must have rank 3");
  p.conv.num_filters = static_cast<int>(filters.dims[0]);
  p.conv.rows = static_cast<int>(filters.dims[1]);
  p.conv.cols = static_cast<int>(filters.dims[2]);
  p.conv.filters = filters.values;
  p.conv.biases = c.Get("conv.biases").values;
  p.lstm.weights = c.GetMatrix("lstm.weights");
  p.lstm.biases = c.GetVector("lstm.biases");
  p.lstm.hidden_dim = static_cast<int>(p.lstm.weights.rows() / 4);
  p.lstm.input_dim = static_cast<int>(p.lstm.weights.cols()) - p.lstm.hidden_dim;
  p.dense.weights = c.GetMatrix("dense.weights");
  p.dense.biases = c.GetVector("dense.biases");
  p.dropout_rate = c.GetScalar("net.dropout_rate");
  p.input_bins = static_cast<int>(c.GetScalar("net.input_bins"));
  if (static_cast<int>(p.conv.biases.size()) != p.conv.num_filters ||
      p.lstm.input_dim != p.conv.num_filters * (p.input_bins / kPoolRows) ||
      p.dense.weights.cols() != p.lstm.hidden_dim)
    Fail(ErrorCode::kFormat, "stored network has inconsistent shapes");
  return p;
}

ModelContainer IdentifyStage(const ModelContainer &model, const ModelContainer &input,
                             const CorpusManifest &manifest, Split split) {
  const auto rows = RowsOf(manifest, split);
  const auto labels = manifest.Labels();
  Eigen::MatrixXd scores;
  auto check_dim = [](Eigen::Index have, Eigen::Index want) {
    if (have != want)
      Fail(ErrorCode::kDimensionMismatch, "input vectors have dimension " +
                                              std::to_string(have) + " but the model expects " +
                                              std::to_string(want));
  };
  if (model.Has("svm.weights")) {
    LinearSvm svm;
    svm.weights = model.GetMatrix("svm.weights");
    svm.biases = model.GetVector("svm.biases");
    const Eigen::MatrixXd v = SelectRows(Vectors(input, manifest), rows);
    check_dim(v.cols(), svm.Dim());
    scores = SvmScores(svm, v);
  } else if (model.Has("mlp.num_layers")) {
    const Mlp mlp = MlpFromContainer(model);
    const Eigen::MatrixXd v = SelectRows(Vectors(input, manifest), rows);
    check_dim(v.cols(), mlp.InputDim());
    scores = MlpPredict(mlp, v);
  } else if (model.Has("conv.filters")) {
    CheckRowCount(input, manifest, "feature container");
    const NetworkParams net = NetworkFromContainer(model);
    const Eigen::VectorXd mean = model.GetVector("input.mean");
    const Eigen::VectorXd scale = model.GetVector("input.scale");
    scores.resize(static_cast<Eigen::Index>(rows.size()), net.NumClasses());
    for (std::size_t i = 0; i < rows.size(); ++i)
      scores.row(static_cast<Eigen::Index>(i)) =
          Predict(net, Standardize(FeatureMatrix(input, rows[i]), mean, scale)).transpose();
  } else {
    Fail(ErrorCode::kFormat, "model container holds no svm, mlp or cnnlstm records");
  }
  const auto classes = static_cast<Eigen::Index>(manifest.Speakers().size());
  if (scores.cols() != classes)
    Fail(ErrorCode::kDimensionMismatch, "model has " + std::to_string(scores.cols()) +
                                            " classes but the manifest has " +
                                            std::to_string(classes));
  Eigen::VectorXd lab(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd idx(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lab[static_cast<Eigen::Index>(i)] = labels[rows[i]];
    idx[static_cast<Eigen::Index>(i)] = static_cast<double>(rows[i]);
  }
  ModelContainer c;
  c.PutMatrix("scores", scores);
  c.PutVector("labels", lab);
  c.PutVector("rows", idx);
  return c;
}

namespace {

std::vector<int> ScoreLabels(const ModelContainer &scores) {
  const Eigen::VectorXd v = scores.GetVector("labels");
  std::vector<int> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(v[i]);
  return out;
}

}  // namespace

void WriteTrainingLog(const std::filesystem::path &path, const std::vector<EpochLog> &log) {
  auto out = OpenOut(path);
  out << "epoch,train_risk,val_error\n";
  for (const auto &e : log)
    out << e.epoch << ',' << Fmt(e.train_risk) << ',' << Fmt(e.val_error) << '\n';
}

void WritePredictionsCsv(const std::filesystem::path &path, const ModelContainer &scores,
                         const CorpusManifest &manifest) {
  const Eigen::MatrixXd s = scores.GetMatrix("scores");
  const Eigen::VectorXd rows = scores.GetVector("rows");
  const auto speakers = manifest.Speakers();
  auto out = OpenOut(path);
  out << "path,speaker,predicted,score\n";
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    s.row(i).maxCoeff(&best);
    const auto &row = manifest.rows.at(static_cast<std::size_t>(rows[i]));
    out << row.path << ',' << row.speaker << ',' << speakers.at(static_cast<std::size_t>(best))
        << ',' << Fmt(s(i, best)) << '\n';
  }
}

double VerifyStage(const ModelContainer &scores, const CorpusManifest &manifest,
                   const std::filesystem::path &out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto speakers = manifest.Speakers();
  const auto curves = PerClassRoc(scores.GetMatrix("scores"), ScoreLabels(scores));
  auto out = OpenOut(out_dir / "auc.csv");
  out << "speaker,auc\n";
  double sum = 0.0;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    WriteRocCsv(out_dir / ("roc_" + speakers[c] + ".csv"), curves[c]);
    out << speakers[c] << ',' << Fmt(curves[c].auc) << '\n';
    sum += curves[c].auc;
  }
  const double mean = sum / static_cast<double>(curves.size());
  out << "mean," << Fmt(mean) << '\n';
  return mean;
}

Metrics EvaluateStage(const ModelContainer &scores_c, const CorpusManifest &manifest,
                      const std::filesystem::path &out_dir) {
  std::filesystem::create_directories(out_dir);
  const Eigen::MatrixXd scores = scores_c.GetMatrix("scores");
  const auto labels = ScoreLabels(scores_c);
  const auto speakers = manifest.Speakers();
  const Evaluation eval = Evaluate(scores, labels);
  const auto curves = PerClassRoc(scores, labels);
  Metrics m;
  m.accuracy = eval.accuracy;
  for (const auto &c : curves) m.mean_auc += c.auc;
  m.mean_auc /= static_cast<double>(curves.size());

  std::vector<double> pooled;
  const std::size_t n = labels.size() * static_cast<std::size_t>(scores.cols());
  auto target = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      target[pooled.size()] = labels[i] == c;
      pooled.push_back(scores(static_cast<Eigen::Index>(i), c));
    }
  WriteRocCsv(out_dir / "roc.csv", RocAuc(pooled, std::span<const bool>(target.get(), n)));
  WriteConfusionCsv(out_dir / "confusion.csv", eval.confusion, speakers);
  auto out = OpenOut(out_dir / "metrics.csv");
  out << "metric,value\n";
  out << "accuracy," << Fmt(m.accuracy) << '\n';
  out << "mean_auc," << Fmt(m.mean_auc) << '\n';
  return m;
}

}  // namespace breathid
