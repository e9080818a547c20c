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

// sldp: command-line driver for the experiment harness.
//
//   sldp mean|classify|spatial|demo [--config FILE] [--eps ...] [--trials N]
//        [--seed S] [--out PATH]
//
// Exit codes: 0 success, 1 internal failure, 2 configuration error,
// 3 data error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sldp/error.hpp"
#include "sldp/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void AddOptions(CLI::App& app, sldp::ExperimentConfig& cfg, std::string& config) {
  app.add_option("--config", config, "key = value configuration file");
  app.add_option("--eps", cfg.eps, "total privacy budgets")->delimiter(',');
  app.add_option("--trials", cfg.trials, "trials per setting");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--out", cfg.out, "output path");
  app.add_option("--threads", cfg.threads, "worker threads");
  app.add_option("--n", cfg.n_values, "sample sizes")->delimiter(',');
  app.add_option("--dataset", cfg.dataset, "'synthetic' or a CSV path");
  app.add_option("--x-col", cfg.x_col);
  app.add_option("--y-col", cfg.y_col);
  app.add_option("--label-col", cfg.label_col);
  app.add_option("--value-col", cfg.value_col);
  app.add_option("--delta", cfg.delta, "protocol failure probability");
  app.add_option("--k", cfg.k, "anonymity target (Q = k)");
  app.add_option("--T", cfg.T, "maximum partition depth");
  app.add_option("--split", cfg.split, "share of eps spent on privacy regions");
  app.add_option("--sigma", cfg.sigma, "Gaussian data scale");
  app.add_option("--box", cfg.box_half, "half side of the data box");
  app.add_option("--knn-k", cfg.knn_k);
  app.add_option("--knn-weighted", cfg.knn_weighted);
  app.add_option("--train-fraction", cfg.train_fraction);
  app.add_option("--logreg-iters", cfg.logreg_iters);
  app.add_option("--logreg-lr", cfg.logreg_lr);
  app.add_option("--k-sweep", cfg.k_sweep)->delimiter(',');
  app.add_option("--k-sweep-runs", cfg.k_sweep_runs);
  app.add_option("--k-sweep-eps", cfg.k_sweep_eps);
  app.add_option("--queries", cfg.queries, "workload size M");
  app.add_option("--size-min", cfg.size_min);
  app.add_option("--size-max", cfg.size_max);
  app.add_option("--sel-lo", cfg.sel_lo);
  app.add_option("--sel-hi-fraction", cfg.sel_hi_fraction);
  app.add_option("--grid-depth", cfg.grid_depth, "LDP grid depth g (2^g x 2^g cells)");
  app.add_option("--privtree-split", cfg.privtree_split);
  app.add_option("--clusters", cfg.clusters);
  app.add_option("--spread", cfg.spread);
  app.add_option("--synthetic-size", cfg.synthetic_size);
  app.add_option("--demo-n", cfg.demo_n);
  app.add_option("--demo-f-sigma", cfg.demo_f_sigma);
}

// Turns the entries of a key = value file into arguments for the
// subcommand. Keys may use '_' or '-'; arrays become comma lists.
std::vector<std::string> ConfigArgs(const std::string& path, const std::string& subcommand) {
  std::vector<std::string> args{subcommand};
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    std::string key = item.name;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == subcommand)) {
      key = item.fullname();
    }
    std::replace(key.begin(), key.end(), '_', '-');
    args.push_back("--" + key);
    args.push_back(CLI::detail::join(item.inputs, ","));
  }
  std::reverse(args.begin(), args.end());
  return args;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw sldp::DataError("cannot write '" + path + "'");
  return os;
}

std::string Stem(const std::string& path) {
  std::filesystem::path p(path);
  if (p.extension() == ".csv") p.replace_extension();
  return p.string();
}

void Run(const sldp::ExperimentConfig& cfg) {
  using sldp::ExperimentKind;
  cfg.Validate();
  const std::string out = cfg.out.empty() ? std::string(sldp::ToString(cfg.kind)) + ".csv" : cfg.out;
  switch (cfg.kind) {
    case ExperimentKind::kMean: {
      const auto rows = sldp::RunMeanExperiment(cfg);
      auto os = OpenOut(out);
      sldp::WriteMeanCsv(os, rows);
      auto summary = OpenOut(Stem(out) + "_summary.csv");
      sldp::WriteMeanSummaryCsv(summary, rows);
      std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
      break;
    }
    case ExperimentKind::kClassify: {
      const auto ds = sldp::LoadLabeledDataset(cfg);
      const auto result = sldp::RunClassifyExperiment(cfg, ds);
      auto os = OpenOut(out);
      sldp::WriteClassifyCsv(os, result.rows);
      if (!result.k_sweep_rows.empty()) {
        auto sweep = OpenOut(Stem(out) + "_ksweep.csv");
        sldp::WriteClassifyCsv(sweep, result.k_sweep_rows);
      }
      std::cout << "wrote " << result.rows.size() << " rows to " << out << '\n';
      break;
    }
    case ExperimentKind::kSpatial: {
      const auto pool = sldp::LoadSpatialDataset(cfg);
      const auto rows = sldp::RunSpatialExperiment(cfg, pool);
      auto os = OpenOut(out);
      sldp::WriteSpatialCsv(os, rows);
      std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
      break;
    }
    case ExperimentKind::kDemo: {
      const std::string prefix = cfg.out.empty() ? std::string("demo") : Stem(cfg.out);
      sldp::WriteDemoCsvs(prefix, sldp::RunDemo(cfg));
      std::cout << "wrote " << prefix << "_{cells,clean,sldp,ldp}.csv\n";
      break;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  using sldp::ExperimentConfig;
  using sldp::ExperimentKind;
  CLI::App app{"Spatial local differential privacy experiments"};
  app.require_subcommand(1);

  ExperimentConfig mean = ExperimentConfig::Defaults(ExperimentKind::kMean);
  ExperimentConfig classify = ExperimentConfig::Defaults(ExperimentKind::kClassify);
  ExperimentConfig spatial = ExperimentConfig::Defaults(ExperimentKind::kSpatial);
  ExperimentConfig demo = ExperimentConfig::Defaults(ExperimentKind::kDemo);
  struct Entry {
    const char* name;
    const char* help;
    ExperimentConfig* cfg;
    CLI::App* app = nullptr;
    std::string config;
  };
  Entry entries[] = {
      {"mean", "mean estimation of |x|^2: SLDP vs DP vs LDP", &mean},
      {"classify", "classification on perturbed locations", &classify},
      {"spatial", "range-query MRE: SLDP vs PrivTree vs LDP grid", &spatial},
      {"demo", "per-user function-value release under SLDP and LDP", &demo},
  };
  for (auto& e : entries) {
    e.app = app.add_subcommand(e.name, e.help);
    AddOptions(*e.app, *e.cfg, e.config);
  }

  // Values from the config file are applied first, then the command line
  // is parsed again so that it overrides them.
  try {
    app.parse(argc, argv);
    for (auto& e : entries) {
      if (!e.app->parsed() || e.config.empty()) continue;
      auto args = ConfigArgs(e.config, e.name);
      app.clear();
      app.parse(args);
      app.clear();
      app.parse(argc, argv);
      break;
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    for (auto& e : entries) {
      if (e.app->parsed()) Run(*e.cfg);
    }
  } catch (const sldp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sldp::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
