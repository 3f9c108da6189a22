// tools/breathid.cc

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

// Command-line driver: one subcommand per pipeline stage, one artifact per
// stage on disk.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "breathid/config.h"
#include "breathid/error.h"
#include "breathid/pipeline.h"

namespace fs = std::filesystem;
using namespace breathid;

namespace {

struct Paths {
  std::string manifest, features, vectors, ubm, tv, model, input, scores, out, log,
      predictions, config;
};

CLI::App *AddCommand(CLI::App &app, const std::string &name, const std::string &help,
                     Paths &p) {
  CLI::App *cmd = app.add_subcommand(name, help);
  // Consumed before parsing; declared so the flag itself validates.
  cmd->add_option("--config", p.config, "key = value run configuration file");
  return cmd;
}

void AddSeed(CLI::App *cmd, uint64_t &seed) {
  cmd->add_option("--seed", seed, "random seed")->required();
}

CLI::Option *AddExisting(CLI::App *cmd, const std::string &flag, std::string &target,
                         const std::string &help) {
  return cmd->add_option(flag, target, help)->required();
}

}  // namespace

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") {
        args = MergeConfigArgs(args, ReadConfig(args[i + 1]));
        break;
      }
      if (args[i].rfind("--config=", 0) == 0) {
        args = MergeConfigArgs(args, ReadConfig(args[i].substr(9)));
        break;
      }
    }
  } catch (const Error &e) {
    std::fprintf(stderr, "breathid: %s\n", e.what());
    return static_cast<int>(e.code());
  }

  CLI::App app{"breath-sound speaker identification toolkit"};
  app.require_subcommand(1);
  Paths p;
  uint64_t seed = 0;

  // synth
  int speakers = 10, instances = 40, rate = 16000;
  CLI::App *synth = AddCommand(app, "synth", "generate a synthetic breath corpus", p);
  synth->add_option("--speakers", speakers)->check(CLI::Range(2, MaxSpeakers()));
  synth->add_option("--instances", instances)->check(CLI::PositiveNumber);
  synth->add_option("--rate", rate)->check(CLI::Range(8000, 192000));
  AddSeed(synth, seed);
  synth->add_option("--out", p.out, "output directory")->required();

  // features
  FeatureOptions feat;
  std::string kind = "cqt";
  CLI::App *features = AddCommand(app, "features", "extract CQT or MFCC features", p);
  AddExisting(features, "--manifest", p.manifest, "corpus manifest");
  features->add_option("--kind", kind)->check(CLI::IsMember({"cqt", "mfcc"}));
  features->add_option("--min-hz", feat.min_hz)->check(CLI::PositiveNumber);
  features->add_option("--bins-per-octave", feat.bins_per_octave)->check(CLI::PositiveNumber);
  features->add_option("--frame-ms", feat.frame_ms)->check(CLI::PositiveNumber);
  features->add_option("--hop-ms", feat.hop_ms)->check(CLI::PositiveNumber);
  features->add_option("--mel-filters", feat.mfcc.n_mel_filters)->check(CLI::PositiveNumber);
  features->add_option("--ceps", feat.mfcc.n_ceps)->check(CLI::PositiveNumber);
  features->add_option("--out", p.out, "feature container")->required();

  // train-ubm
  GmmTrainOptions gmm;
  CLI::App *ubm = AddCommand(app, "train-ubm", "train the universal background GMM", p);
  AddExisting(ubm, "--manifest", p.manifest, "corpus manifest");
  AddExisting(ubm, "--features", p.features, "feature container");
  ubm->add_option("--components", gmm.n_components)->check(CLI::PositiveNumber);
  ubm->add_option("--iters", gmm.n_iters)->check(CLI::PositiveNumber);
  AddSeed(ubm, seed);
  ubm->add_option("--out", p.out, "UBM container")->required();

  // train-tv
  TvTrainOptions tvo;
  CLI::App *tv = AddCommand(app, "train-tv", "train the total variability matrix", p);
  AddExisting(tv, "--manifest", p.manifest, "corpus manifest");
  AddExisting(tv, "--features", p.features, "feature container");
  AddExisting(tv, "--ubm", p.ubm, "UBM container");
  tv->add_option("--rank", tvo.rank)->check(CLI::PositiveNumber);
  tv->add_option("--iters", tvo.n_iters)->check(CLI::NonNegativeNumber);
  AddSeed(tv, seed);
  tv->add_option("--out", p.out, "total variability container")->required();

  // extract-ivectors
  CLI::App *ext = AddCommand(app, "extract-ivectors", "extract normalized i-vectors", p);
  AddExisting(ext, "--manifest", p.manifest, "corpus manifest");
  AddExisting(ext, "--features", p.features, "feature container");
  AddExisting(ext, "--ubm", p.ubm, "UBM container");
  AddExisting(ext, "--tv", p.tv, "total variability container");
  ext->add_option("--out", p.out, "vectors container")->required();

  // lda
  int lda_dim = 0;
  CLI::App *lda = AddCommand(app, "lda", "fit LDA on the training split and project", p);
  AddExisting(lda, "--manifest", p.manifest, "corpus manifest");
  AddExisting(lda, "--vectors", p.vectors, "vectors container");
  lda->add_option("--dim", lda_dim, "output dimension")->required()->check(CLI::PositiveNumber);
  lda->add_option("--out", p.out, "projected vectors container")->required();

  // train-svm
  SvmTrainOptions svmo;
  CLI::App *svm = AddCommand(app, "train-svm", "train a one-vs-rest linear SVM", p);
  AddExisting(svm, "--manifest", p.manifest, "corpus manifest");
  AddExisting(svm, "--vectors", p.vectors, "vectors container");
  svm->add_option("--c", svmo.c_reg)->check(CLI::PositiveNumber);
  svm->add_option("--epochs", svmo.epochs)->check(CLI::PositiveNumber);
  AddSeed(svm, seed);
  svm->add_option("--out", p.out, "model container")->required();

  // train-mlp
  MlpTrainOptions mlpo;
  CLI::App *mlp = AddCommand(app, "train-mlp", "train a 1- or 2-hidden-layer MLP", p);
  AddExisting(mlp, "--manifest", p.manifest, "corpus manifest");
  AddExisting(mlp, "--vectors", p.vectors, "vectors container");
  mlp->add_option("--hidden", mlpo.hidden, "hidden sizes")->expected(1, 2);
  mlp->add_option("--lr", mlpo.learning_rate)->check(CLI::PositiveNumber);
  mlp->add_option("--momentum", mlpo.momentum)->check(CLI::Range(0.0, 1.0));
  mlp->add_option("--decay", mlpo.decay)->check(CLI::NonNegativeNumber);
  mlp->add_option("--batch", mlpo.batch_size)->check(CLI::PositiveNumber);
  mlp->add_option("--epochs", mlpo.epochs)->check(CLI::PositiveNumber);
  AddSeed(mlp, seed);
  mlp->add_option("--out", p.out, "model container")->required();

  // train-cnnlstm
  CnnLstmOptions net;
  CLI::App *cnn = AddCommand(app, "train-cnnlstm", "train the CNN-LSTM on CQT features", p);
  AddExisting(cnn, "--manifest", p.manifest, "corpus manifest");
  AddExisting(cnn, "--features", p.features, "CQT feature container");
  cnn->add_option("--filters", net.num_filters)->check(CLI::PositiveNumber);
  cnn->add_option("--hidden", net.hidden_dim)->check(CLI::PositiveNumber);
  cnn->add_option("--dropout", net.dropout_rate)->check(CLI::Range(0.0, 0.99));
  cnn->add_option("--augment", net.augment_copies)->check(CLI::NonNegativeNumber);
  cnn->add_option("--elastic-sigma", net.elastic_sigma)->check(CLI::PositiveNumber);
  cnn->add_option("--elastic-alpha", net.elastic_alpha)->check(CLI::NonNegativeNumber);
  cnn->add_option("--max-epochs", net.train.max_epochs)->check(CLI::PositiveNumber);
  cnn->add_option("--patience", net.train.patience)->check(CLI::PositiveNumber);
  AddSeed(cnn, seed);
  cnn->add_option("--log", p.log, "training log CSV");
  cnn->add_option("--out", p.out, "model container")->required();

  // identify
  std::string split_name = "test";
  CLI::App *ident = AddCommand(app, "identify", "score one split with a trained model", p);
  AddExisting(ident, "--manifest", p.manifest, "corpus manifest");
  AddExisting(ident, "--model", p.model, "model container");
  AddExisting(ident, "--input", p.input, "vectors (svm, mlp) or features (cnnlstm) container");
  ident->add_option("--split", split_name)->check(CLI::IsMember({"train", "validation", "test"}));
  ident->add_option("--predictions", p.predictions, "predictions CSV");
  ident->add_option("--out", p.out, "scores container")->required();

  // verify
  CLI::App *ver = AddCommand(app, "verify", "per-speaker verification ROC curves", p);
  AddExisting(ver, "--manifest", p.manifest, "corpus manifest");
  AddExisting(ver, "--scores", p.scores, "scores container");
  ver->add_option("--out", p.out, "output directory")->required();

  // evaluate
  CLI::App *eval = AddCommand(app, "evaluate", "accuracy, confusion and ROC CSVs", p);
  AddExisting(eval, "--manifest", p.manifest, "corpus manifest");
  AddExisting(eval, "--scores", p.scores, "scores container");
  eval->add_option("--out", p.out, "output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "breathid: %s\n", e.what());
    return static_cast<int>(ErrorCode::kInvalidArgument);
  }

  try {
    auto manifest = [&] { return ReadManifest(p.manifest); };
    auto load = [](const std::string &path) { return ModelContainer::Read(path); };
    if (*synth) {
      const auto m = GenerateCorpus(speakers, instances, rate, seed, p.out);
      std::printf("wrote %zu files and %s\n", m.rows.size(),
                  (fs::path(p.out) / "manifest.csv").c_str());
    } else if (*features) {
      feat.kind = ParseFeatureKind(kind);
      ExtractFeatures(manifest(), feat).Write(p.out);
    } else if (*ubm) {
      gmm.seed = seed;
      TrainUbmStage(load(p.features), manifest(), gmm).Write(p.out);
    } else if (*tv) {
      tvo.seed = seed;
      TrainTvStage(load(p.features), manifest(), load(p.ubm), tvo).Write(p.out);
    } else if (*ext) {
      ExtractIvectorsStage(load(p.features), manifest(), load(p.ubm), load(p.tv)).Write(p.out);
    } else if (*lda) {
      LdaStage(load(p.vectors), manifest(), lda_dim).Write(p.out);
    } else if (*svm) {
      svmo.seed = seed;
      TrainSvmStage(load(p.vectors), manifest(), svmo).Write(p.out);
    } else if (*mlp) {
      mlpo.seed = seed;
      TrainMlpStage(load(p.vectors), manifest(), mlpo).Write(p.out);
    } else if (*cnn) {
      net.train.seed = seed;
      std::vector<EpochLog> log;
      TrainCnnLstmStage(load(p.features), manifest(), net, &log).Write(p.out);
      if (!p.log.empty()) WriteTrainingLog(p.log, log);
    } else if (*ident) {
      const auto m = manifest();
      const auto scores = IdentifyStage(load(p.model), load(p.input), m, ParseSplit(split_name));
      scores.Write(p.out);
      if (!p.predictions.empty()) WritePredictionsCsv(p.predictions, scores, m);
    } else if (*ver) {
      const double auc = VerifyStage(load(p.scores), manifest(), p.out);
      std::printf("mean_auc %.6f\n", auc);
    } else if (*eval) {
      const Metrics m = EvaluateStage(load(p.scores), manifest(), p.out);
      std::printf("accuracy %.6f\nmean_auc %.6f\n", m.accuracy, m.mean_auc);
    }
  } catch (const Error &e) {
    std::fprintf(stderr, "breathid: %s\n", e.what());
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error &e) {
    std::fprintf(stderr, "breathid: %s\n", e.what());
    return static_cast<int>(ErrorCode::kIo);
  }
  return 0;
}
