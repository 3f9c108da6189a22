// tests/acceptance.cc

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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "breathid/classify.h"
#include "breathid/features.h"
#include "breathid/gmm.h"
#include "breathid/ivector.h"
#include "breathid/pipeline.h"
#include "breathid/synth.h"
#include "generators.h"
#include "gradcheck.h"
#include "oracles.h"

namespace breathid {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char *fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// 1. Gradient checks: CNN-LSTM and MLP, five instances each, under 2 min.
Outcome GradientChecks() {
  const auto start = std::chrono::steady_clock::now();
  double net_worst = 0.0, mlp_worst = 0.0;
  for (uint64_t seed = 11; seed <= 15; ++seed) {
    const testing::NetworkInstance inst = testing::MakeNetworkInstance(seed);
    net_worst = std::max(net_worst, testing::NetworkGradientCheck(inst.params, inst.input,
                                                                  inst.label, seed + 100)
                                        .max_rel_error);
    const std::vector<int> hidden = {6, 4};
    Mlp m = InitMlp(5, hidden, 3, seed);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (auto &view : testing::MlpViews(m))
      for (double &v : view) v += 0.1 * g(rng);
    Eigen::MatrixXd x(7, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    std::vector<int> y(7);
    for (int &l : y) l = static_cast<int>(rng() % 3);
    mlp_worst = std::max(mlp_worst, testing::MlpGradientCheck(m, x, y).max_rel_error);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {net_worst < 1e-5 && mlp_worst < 1e-5 && secs < 120.0,
          Format("max rel error cnn-lstm %.2e, mlp %.2e over 5 instances each; %.1f s",
                 net_worst, mlp_worst, secs)};
}

// 2. EM monotonicity: GMM over 50 iterations on 2-D data, TV over 10.
Outcome EmMonotonicity() {
  double gmm_drop = 0.0, tv_drop = 0.0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const DiagonalGmm src = testing::RandomGmm(rng, 4, 2, 0.2, 2.0);
    const Eigen::MatrixXd x =
        testing::ShiftedFrames(src, Eigen::MatrixXd::Zero(8, 1), Eigen::VectorXd::Zero(1), 400, rng);
    GmmTrainOptions opt;
    opt.n_components = 4;
    opt.n_iters = 50;
    opt.seed = seed;
    const auto ll = EmTrainGmm(x, opt).log_likelihood;
    for (std::size_t i = 1; i < ll.size(); ++i) gmm_drop = std::max(gmm_drop, ll[i - 1] - ll[i]);
  }
  for (uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    const DiagonalGmm ubm = testing::RandomGmm(rng, 4, 3, 0.3, 1.5);
    const Eigen::MatrixXd t = Eigen::MatrixXd::Random(12, 3);
    std::normal_distribution<double> g;
    std::vector<BaumWelchStats> stats;
    for (int u = 0; u < 40; ++u) {
      const Eigen::Vector3d w(g(rng), g(rng), g(rng));
      stats.push_back(CollectStats(ubm, testing::ShiftedFrames(ubm, t, w, 30, rng)));
    }
    TvTrainOptions opt;
    opt.rank = 3;
    opt.n_iters = 10;
    opt.seed = seed;
    const auto obj = TrainTotalVariability(stats, ubm, opt).objective;
    for (std::size_t i = 1; i < obj.size(); ++i) tv_drop = std::max(tv_drop, obj[i - 1] - obj[i]);
  }
  return {gmm_drop <= 1e-9 && tv_drop <= 1e-8,
          Format("largest step decrease: gmm %.2e (10 runs x 50 iters), tv %.2e (5 runs x 10 "
                 "iters)",
                 gmm_drop, tv_drop)};
}

// 3. Closed-form i-vector against grid search, C = 2, D = 2, R = 1.
Outcome IvectorAgreement() {
  double worst = 0.0;
  for (uint64_t inst = 0; inst < 20; ++inst) {
    std::mt19937_64 rng(500 + inst);
    const DiagonalGmm ubm = testing::RandomGmm(rng, 2, 2, 0.3, 1.5);
    std::normal_distribution<double> g;
    Eigen::MatrixXd t(4, 1);
    for (int i = 0; i < 4; ++i) t(i, 0) = 0.5 * g(rng);
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 1.5 * g(rng));
    const Eigen::MatrixXd x = testing::ShiftedFrames(ubm, t, w, 30, rng);
    TotalVariabilityModel model;
    model.m = StackMeans(ubm);
    model.t = t;
    model.sigma = ubm.variances;
    const double closed = ExtractIvector(CollectStats(ubm, x), model)[0];
    worst = std::max(worst, std::abs(closed - testing::GridSearchIvector(ubm, x, t)));
  }
  return {worst < 1e-3, Format("max |closed form - grid| %.2e over 20 instances", worst)};
}

// 4. CQT geometry and tone localization.
Outcome CqtChecks() {
  const CqtConfig cfg = MakeCqtConfig(44100, 27.5, 22050, 48);
  bool doubling = true;
  for (int k = 0; k + 48 < cfg.num_bins; ++k)
    doubling = doubling && cfg.center_hz[k + 48] == 2.0 * cfg.center_hz[k];
  const CqtKernel kernel(cfg);
  const std::size_t n = cfg.window_length[0] + 2;
  std::mt19937_64 rng(3);
  int hits = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const int k = static_cast<int>(rng() % cfg.num_bins);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i)
      s[i] = std::cos(2.0 * std::numbers::pi * cfg.center_hz[k] * i / 44100.0 + 0.3 * trial);
    const auto x = kernel.Transform(s, static_cast<std::ptrdiff_t>(n / 2));
    int best = 0;
    for (int j = 1; j < cfg.num_bins; ++j)
      if (std::abs(x[j]) > std::abs(x[best])) best = j;
    hits += best == k;
  }
  return {cfg.num_bins == 463 && hits == 10 && doubling,
          Format("K = %d, %d/10 tones peak at their bin, octave doubling %s", cfg.num_bins, hits,
                 doubling ? "exact" : "broken")};
}

struct RunConfig {
  int speakers = 10;
  int instances = 40;
  uint64_t seed = 7;
  int ubm_components = 8;
  int tv_rank = 40;
  int lda_dim = 9;
  CnnLstmOptions cnn;
};

struct RunResult {
  double svm_accuracy = 0.0;
  double svm_auc = 0.0;
  double cnn_accuracy = 0.0;
  double cnn_auc = 0.0;
};

// Synth corpus through both systems, every artifact written under dir.
RunResult RunPipeline(const fs::path &dir, const RunConfig &cfg) {
  fs::remove_all(dir);
  const CorpusManifest manifest =
      GenerateCorpus(cfg.speakers, cfg.instances, kReferenceRate, cfg.seed, dir / "corpus");
  FeatureOptions mfcc_opt;
  mfcc_opt.kind = FeatureKind::kMfcc;
  const ModelContainer mfcc = ExtractFeatures(manifest, mfcc_opt);
  const ModelContainer cqt = ExtractFeatures(manifest, FeatureOptions{});
  mfcc.Write(dir / "mfcc.brth");
  cqt.Write(dir / "cqt.brth");

  GmmTrainOptions gmm;
  gmm.n_components = cfg.ubm_components;
  gmm.seed = cfg.seed;
  const ModelContainer ubm = TrainUbmStage(mfcc, manifest, gmm);
  TvTrainOptions tvo;
  tvo.rank = cfg.tv_rank;
  tvo.seed = cfg.seed;
  const ModelContainer tv = TrainTvStage(mfcc, manifest, ubm, tvo);
  const ModelContainer ivec = ExtractIvectorsStage(mfcc, manifest, ubm, tv);
  const ModelContainer lda = LdaStage(ivec, manifest, cfg.lda_dim);
  SvmTrainOptions svmo;
  svmo.seed = cfg.seed;
  const ModelContainer svm = TrainSvmStage(lda, manifest, svmo);
  const ModelContainer svm_scores = IdentifyStage(svm, lda, manifest, Split::kTest);
  ubm.Write(dir / "ubm.brth");
  tv.Write(dir / "tv.brth");
  ivec.Write(dir / "ivectors.brth");
  lda.Write(dir / "lda.brth");
  svm.Write(dir / "svm.brth");
  svm_scores.Write(dir / "svm_scores.brth");
  WritePredictionsCsv(dir / "svm_predictions.csv", svm_scores, manifest);

  RunResult r;
  r.svm_accuracy = EvaluateStage(svm_scores, manifest, dir / "svm_eval").accuracy;
  r.svm_auc = VerifyStage(svm_scores, manifest, dir / "svm_verify");

  std::vector<EpochLog> log;
  CnnLstmOptions cnn = cfg.cnn;
  cnn.train.seed = cfg.seed;
  const ModelContainer net = TrainCnnLstmStage(cqt, manifest, cnn, &log);
  const ModelContainer cnn_scores = IdentifyStage(net, cqt, manifest, Split::kTest);
  net.Write(dir / "cnn.brth");
  cnn_scores.Write(dir / "cnn_scores.brth");
  WriteTrainingLog(dir / "cnn_log.csv", log);
  WritePredictionsCsv(dir / "cnn_predictions.csv", cnn_scores, manifest);
  r.cnn_accuracy = EvaluateStage(cnn_scores, manifest, dir / "cnn_eval").accuracy;
  r.cnn_auc = VerifyStage(cnn_scores, manifest, dir / "cnn_verify");
  return r;
}

// 5. Desk configuration on 10 speakers x 40 instances.
Outcome EndToEnd(const fs::path &root) {
  const auto start = std::chrono::steady_clock::now();
  const RunResult r = RunPipeline(root / "desk", RunConfig{});
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // Verification AUC is scored on the i-vector system; the CNN-LSTM figure
  // is reported for reference only.
  return {r.svm_accuracy >= 0.85 && r.cnn_accuracy >= 0.90 && r.svm_auc >= 0.95 && secs < 900.0,
          Format("ivector+lda+svm accuracy %.3f, cnn-lstm accuracy %.3f, mean auc %.4f "
                 "(cnn-lstm %.4f); %.0f s",
                 r.svm_accuracy, r.cnn_accuracy, r.svm_auc, r.cnn_auc, secs)};
}

std::map<std::string, std::string> Snapshot(const fs::path &dir) {
  std::map<std::string, std::string> files;
  for (const auto &entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files[fs::relative(entry.path(), dir).generic_string()] =
        std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

// 6. Two identical runs give byte-identical files.
Outcome Reproducibility(const fs::path &root) {
  RunConfig cfg;
  cfg.speakers = 4;
  cfg.instances = 10;
  cfg.seed = 11;
  cfg.ubm_components = 4;
  cfg.tv_rank = 6;
  cfg.lda_dim = 3;
  cfg.cnn.num_filters = 2;
  cfg.cnn.hidden_dim = 8;
  cfg.cnn.augment_copies = 1;
  cfg.cnn.train.max_epochs = 4;
  RunPipeline(root / "run_a", cfg);
  RunPipeline(root / "run_b", cfg);
  const auto a = Snapshot(root / "run_a");
  const auto b = Snapshot(root / "run_b");
  int containers = 0, csvs = 0;
  std::string first_diff;
  for (const auto &[name, bytes] : a) {
    containers += name.ends_with(".brth");
    csvs += name.ends_with(".csv");
    const auto it = b.find(name);
    if (first_diff.empty() && (it == b.end() || it->second != bytes)) first_diff = name;
  }
  if (first_diff.empty() && a.size() != b.size()) first_diff = "(file sets differ)";
  return {first_diff.empty() && containers > 0 && csvs > 0,
          first_diff.empty()
              ? Format("%zu files identical (%d containers, %d csv)", a.size(), containers, csvs)
              : "first difference: " + first_diff};
}

// 7. Threshold-sweep AUC equals pair counting exactly.
Outcome AucExactness() {
  std::mt19937_64 rng(2024);
  int equal = 0;
  for (int set = 0; set < 100; ++set) {
    const auto n = static_cast<std::size_t>(2 + rng() % 199);
    std::vector<double> scores(n);
    std::unique_ptr<bool[]> pos(new bool[n]);
    // Coarse grid for ties; first two entries force both classes.
    const int levels = 1 + static_cast<int>(rng() % 20);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng() % levels) * 0.1;
      pos[i] = i == 0 || (i != 1 && rng() % 3 == 0);
    }
    const std::span<const bool> p(pos.get(), n);
    equal += RocAuc(scores, p).auc == testing::PairCountAuc(scores, p);
  }
  return {equal == 100, Format("%d/100 random sets bit-identical", equal)};
}

}  // namespace
}  // namespace breathid

int main() {
  using namespace breathid;
  const fs::path root = fs::temp_directory_path() / "breathid_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"gradient-check", GradientChecks},
      {"em-monotonicity", EmMonotonicity},
      {"ivector-closed-form", IvectorAgreement},
      {"cqt", CqtChecks},
      {"end-to-end", [&] { return EndToEnd(root); }},
      {"reproducibility", [&] { return Reproducibility(root); }},
      {"auc-exactness", AucExactness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(root);
  return failures == 0 ? 0 : 1;
}
