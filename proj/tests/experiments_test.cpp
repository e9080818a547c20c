// Copyright 2026 The SLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sldp/experiments.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "sldp/error.hpp"

namespace sldp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExperimentConfig SmallMean() {
  auto cfg = ExperimentConfig::Defaults(ExperimentKind::kMean);
  cfg.n_values = {400, 800};
  cfg.eps = {1.0, 4.0};
  cfg.trials = 3;
  cfg.seed = 11;
  return cfg;
}

ExperimentConfig SmallClassify() {
  auto cfg = ExperimentConfig::Defaults(ExperimentKind::kClassify);
  cfg.n_values = {600};
  cfg.eps = {1.0, kInf};
  cfg.trials = 2;
  cfg.k_sweep = {5, 40};
  cfg.k_sweep_runs = 2;
  cfg.logreg_iters = 50;
  return cfg;
}

ExperimentConfig SmallSpatial() {
  auto cfg = ExperimentConfig::Defaults(ExperimentKind::kSpatial);
  cfg.n_values = {2000};
  cfg.eps = {1.0, 4.0};
  cfg.trials = 2;
  cfg.queries = 30;
  return cfg;
}

template <typename Rows, typename Writer>
std::string Csv(const Rows& rows, Writer write) {
  std::ostringstream os;
  write(os, rows);
  return os.str();
}

TEST(ExperimentConfigTest, Defaults) {
  const auto mean = ExperimentConfig::Defaults(ExperimentKind::kMean);
  EXPECT_EQ(mean.eps, (std::vector<double>{0.5, 1.0, 2.0, 4.0, 8.0, 12.0}));
  EXPECT_EQ(mean.trials, 60);
  EXPECT_EQ(mean.delta, 0.05);
  EXPECT_EQ(mean.split, 0.5);
  EXPECT_EQ(mean.n_values, (std::vector<std::size_t>{2000, 16000, 32000, 64000}));
  const auto cls = ExperimentConfig::Defaults(ExperimentKind::kClassify);
  EXPECT_EQ(cls.k, 20);
  EXPECT_EQ(cls.k_sweep_runs, 50);
  EXPECT_EQ(cls.k_sweep_eps, 1.0);
  EXPECT_EQ(cls.knn_k, 15);
  EXPECT_TRUE(cls.knn_weighted);
  EXPECT_EQ(cls.train_fraction, 0.7);
  EXPECT_EQ(cls.eps.front(), 0.1);
  EXPECT_EQ(cls.eps.back(), 10.0);
  const auto sp = ExperimentConfig::Defaults(ExperimentKind::kSpatial);
  EXPECT_EQ(sp.queries, 200u);
  EXPECT_EQ(sp.trials, 60);
  EXPECT_EQ(sp.n_values, (std::vector<std::size_t>{5000, 20000}));
  const auto demo = ExperimentConfig::Defaults(ExperimentKind::kDemo);
  EXPECT_EQ(demo.demo_n, 30000u);
  EXPECT_EQ(demo.eps, (std::vector<double>{1.0}));
}

TEST(ExperimentConfigTest, ValidationFailuresAreConfigErrors) {
  auto bad_eps = SmallMean();
  bad_eps.eps = {1.0, -2.0};
  EXPECT_THROW(bad_eps.Validate(), ConfigError);
  auto bad_trials = SmallMean();
  bad_trials.trials = 0;
  EXPECT_THROW(bad_trials.Validate(), ConfigError);
  auto bad_split = SmallMean();
  bad_split.split = 1.0;
  EXPECT_THROW(bad_split.Validate(), ConfigError);
  EXPECT_THROW(RunMeanExperiment(bad_split), ConfigError);
}

TEST(MeanExperimentTest, RowsBudgetsAndDeterminism) {
  const auto cfg = SmallMean();
  const auto rows = RunMeanExperiment(cfg);
  EXPECT_EQ(rows.size(), 2u * 3u * 2u * 3u);
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(r.eps_regions + r.eps_release, r.eps);
    if (r.method == "sldp") EXPECT_DOUBLE_EQ(r.eps_regions, 0.5 * r.eps);
    EXPECT_GE(r.sq_error, 0.0);
  }
  auto one = cfg;
  one.trials = 1;
  EXPECT_EQ(Csv(RunMeanExperiment(one), WriteMeanCsv), Csv(RunMeanExperiment(one), WriteMeanCsv));
  auto threaded = cfg;
  threaded.threads = 3;
  EXPECT_EQ(Csv(RunMeanExperiment(threaded), WriteMeanCsv), Csv(rows, WriteMeanCsv));
}

TEST(MeanExperimentTest, TrialIndexChangesOutcome) {
  const auto rows = RunMeanExperiment(SmallMean());
  EXPECT_NE(rows[0].estimate, rows[6].estimate);
  EXPECT_EQ(rows[0].trial, 0);
  EXPECT_EQ(rows[6].trial, 1);
  auto reseeded = SmallMean();
  reseeded.seed = 12;
  EXPECT_NE(RunMeanExperiment(reseeded)[0].estimate, rows[0].estimate);
}

TEST(MeanExperimentTest, InfiniteBudgetReproducesTruth) {
  auto cfg = SmallMean();
  cfg.eps = {kInf};
  for (const auto& r : RunMeanExperiment(cfg)) EXPECT_LE(std::abs(r.estimate - r.truth), 1e-9);
}

TEST(MeanExperimentTest, CsvShapes) {
  const auto rows = RunMeanExperiment(SmallMean());
  const std::string csv = Csv(rows, WriteMeanCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,eps,trial,method,eps_regions,eps_release,estimate,truth,sq_error");
  const std::string summary = Csv(rows, WriteMeanSummaryCsv);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 1 + 2 * 2 * 3);
}

TEST(ClassifyExperimentTest, RowsBudgetsAndNoiselessSmoke) {
  const auto cfg = SmallClassify();
  const auto ds = LoadLabeledDataset(cfg);
  const auto result = RunClassifyExperiment(cfg, ds);
  EXPECT_EQ(result.rows.size(), 2u * 4u * 2u * 2u);
  EXPECT_EQ(result.k_sweep_rows.size(), 2u * 2u * 2u);
  for (const auto& r : result.rows) {
    if (std::isinf(r.eps)) {
      EXPECT_TRUE(std::isinf(r.eps_regions + r.eps_release));
    } else {
      EXPECT_DOUBLE_EQ(r.eps_regions + r.eps_release, r.eps);
    }
  }
  for (const auto& r : result.k_sweep_rows) {
    EXPECT_EQ(r.eps, 1.0);
    EXPECT_EQ(r.classifier, "knn");
    EXPECT_TRUE(r.mechanism == "sldp-quantize" || r.mechanism == "sldp-split");
  }

  // ldp and geo at infinite budget train on clean features.
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const auto split = SplitIndices(ds.size(), {cfg.train_fraction,
                                                internal::TrialStream(cfg, trial, internal::kSplit)()});
    std::vector<Point> train, test;
    std::vector<int> ytrain, ytest;
    for (auto i : split.train) train.push_back(ds.points[i]), ytrain.push_back((*ds.labels)[i]);
    for (auto i : split.test) test.push_back(ds.points[i]), ytest.push_back((*ds.labels)[i]);
    const double clean_knn = F1PrecisionRecall(KnnPredict(train, ytrain, test, cfg.knn_k, true), ytest).f1;
    const auto w = LogregFit(train, ytrain, cfg.logreg_iters, cfg.logreg_lr);
    const double clean_lr = F1PrecisionRecall(LogregPredict(w, test), ytest).f1;
    for (const auto& r : result.rows) {
      if (r.trial != trial || !std::isinf(r.eps)) continue;
      if (r.mechanism != "ldp" && r.mechanism != "geo") continue;
      EXPECT_NEAR(r.scores.f1, r.classifier == "knn" ? clean_knn : clean_lr, 1e-6) << r.mechanism;
    }
  }
  const std::string csv = Csv(result.rows, WriteClassifyCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "mechanism,classifier,eps,k_anon,trial,f1,precision,recall,eps_regions,eps_release");
}

TEST(ClassifyExperimentTest, UnlabeledDatasetIsDataError) {
  Dataset ds;
  ds.points = {{0.1, 0.1}, {0.2, 0.2}};
  EXPECT_THROW(RunClassifyExperiment(SmallClassify(), ds), DataError);
  auto cfg = SmallClassify();
  cfg.dataset = "/nonexistent.csv";
  EXPECT_THROW(LoadLabeledDataset(cfg), DataError);
}

TEST(SpatialExperimentTest, RowsTauAndBudgets) {
  auto cfg = SmallSpatial();
  cfg.n_values = {2000};
  cfg.synthetic_size = 25000;
  const auto pool = LoadSpatialDataset(cfg);
  EXPECT_EQ(pool.size(), 25000u);
  const auto rows = RunSpatialExperiment(cfg, pool);
  EXPECT_EQ(rows.size(), 2u * 2u * 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.tau, 10.0);
    EXPECT_DOUBLE_EQ(r.eps_regions + r.eps_release, r.eps);
    EXPECT_GE(r.mre, 0.0);
  }
  cfg.n_values = {20000};
  cfg.trials = 1;
  cfg.eps = {2.0};
  const auto big = RunSpatialExperiment(cfg, pool);
  EXPECT_EQ(big.front().tau, 20.0);
  const std::string csv = Csv(rows, WriteSpatialCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "dataset,method,eps,N,trial,mre,tau,eps_regions,eps_release");
}

TEST(SpatialExperimentTest, DatasetSmallerThanNIsDataError) {
  auto cfg = SmallSpatial();
  Dataset tiny;
  tiny.points = {{0.1, 0.1}};
  EXPECT_THROW(RunSpatialExperiment(cfg, tiny), DataError);
}

TEST(DemoTest, RowCountsAndNoiseScales) {
  auto cfg = ExperimentConfig::Defaults(ExperimentKind::kDemo);
  cfg.demo_n = 3000;
  const auto demo = RunDemo(cfg);
  ASSERT_EQ(demo.points.size(), 3000u);
  EXPECT_GT(demo.partition.size(), 1u);
  EXPECT_DOUBLE_EQ(demo.eps_regions + demo.eps_release, 1.0);
  for (const auto& d : demo.points) {
    EXPECT_LE(d.sldp_sensitivity, d.ldp_sensitivity);
    EXPECT_DOUBLE_EQ(d.ldp_scale, 1.0);
    EXPECT_DOUBLE_EQ(d.sldp_scale, d.sldp_sensitivity / 0.5);
  }
}

}  // namespace
}  // namespace sldp
