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

#ifndef SLDP_EXPERIMENTS_HPP_
#define SLDP_EXPERIMENTS_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sldp/data.hpp"
#include "sldp/error.hpp"
#include "sldp/estimators.hpp"
#include "sldp/eval.hpp"
#include "sldp/geometry.hpp"
#include "sldp/protocol.hpp"
#include "sldp/rng.hpp"
#include "sldp/scheme.hpp"
#include "sldp/spatial.hpp"

namespace sldp {

enum class ExperimentKind { kMean, kClassify, kSpatial, kDemo };

inline const char* ToString(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kMean: return "mean";
    case ExperimentKind::kClassify: return "classify";
    case ExperimentKind::kSpatial: return "spatial";
    case ExperimentKind::kDemo: return "demo";
  }
  return "?";
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kMean;

  // Dataset: "synthetic" or the path of a headered CSV.
  std::string dataset = "synthetic";
  std::string x_col = "x";
  std::string y_col = "y";
  std::string label_col;  // 0/1 labels
  std::string value_col;  // binarized by its median when no label column

  std::vector<double> eps;
  std::vector<std::size_t> n_values;
  double delta = 0.05;
  int k = 20;
  int T = 20;
  int trials = 60;
  double split = 0.5;  // share of eps spent on the privacy regions
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  // Mean estimation and demo data: N(0, sigma^2) truncated to [-box, box]^2.
  double sigma = 1.5;
  double box_half = 10.0;

  // Classification.
  int knn_k = 15;
  bool knn_weighted = true;
  double train_fraction = 0.7;
  int logreg_iters = 300;
  double logreg_lr = 1.0;
  std::vector<int> k_sweep;
  int k_sweep_runs = 50;
  double k_sweep_eps = 1.0;

  // Spatial queries.
  std::size_t queries = 200;
  double size_min = 1.0 / 256.0;
  double size_max = 1.0 / 8.0;
  std::int64_t sel_lo = 20;
  double sel_hi_fraction = 0.05;
  int grid_depth = 6;
  double privtree_split = 0.5;  // share of eps spent on the PrivTree structure
  int clusters = 5;
  double spread = 0.05;
  std::size_t synthetic_size = 0;  // 0: the largest N

  // Demo.
  std::size_t demo_n = 30000;
  double demo_f_sigma = 1.5;

  static ExperimentConfig Defaults(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    switch (kind) {
      case ExperimentKind::kMean:
        // The sample-size multiplier is an assumption (x 10^3).
        cfg.eps = {0.5, 1.0, 2.0, 4.0, 8.0, 12.0};
        cfg.n_values = {2000, 16000, 32000, 64000};
        break;
      case ExperimentKind::kClassify:
        cfg.eps = {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
        cfg.n_values = {10000};
        cfg.k_sweep = {5, 10, 20, 40, 80, 160};
        break;
      case ExperimentKind::kSpatial:
        cfg.eps = {0.5, 1.0, 2.0, 4.0};
        cfg.n_values = {5000, 20000};
        break;
      case ExperimentKind::kDemo:
        cfg.eps = {1.0};
        cfg.trials = 1;
        break;
    }
    return cfg;
  }

  void Validate() const {
    auto fail = [](const std::string& why) { throw ConfigError(why); };
    if (eps.empty()) fail("at least one eps value is required");
    for (double e : eps) {
      if (!(e > 0.0)) fail("eps values must be positive");
    }
    if (trials < 1) fail("trials must be at least 1");
    if (!(split > 0.0 && split < 1.0)) fail("split fraction must be in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) fail("delta must be in (0, 1)");
    if (k < 1) fail("k must be at least 1");
    if (T < 1 || T > CellId::kMaxDepth) fail("T must be in [1, 32]");
    if (threads < 1) fail("threads must be at least 1");
    if (kind != ExperimentKind::kDemo && n_values.empty()) fail("at least one N is required");
    for (auto n : n_values) {
      if (n < 1) fail("N values must be positive");
    }
    if (!(sigma > 0.0) || !(box_half > 0.0)) fail("sigma and box must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train fraction must be in (0, 1)");
    if (knn_k < 1) fail("knn_k must be at least 1");
    if (k_sweep_runs < 1) fail("k_sweep_runs must be at least 1");
    for (int kk : k_sweep) {
      if (kk < 1) fail("k_sweep values must be at least 1");
    }
    if (!(0.0 < size_min && size_min <= size_max && size_max <= 1.0)) {
      fail("query sizes must satisfy 0 < size_min <= size_max <= 1");
    }
    if (!(sel_hi_fraction > 0.0 && sel_hi_fraction <= 1.0)) fail("sel_hi_fraction must be in (0, 1]");
    if (grid_depth < 0 || grid_depth > 12) fail("grid_depth must be in [0, 12]");
    if (!(privtree_split > 0.0 && privtree_split < 1.0)) fail("privtree_split must be in (0, 1)");
    if (clusters < 1 || !(spread > 0.0)) fail("clusters and spread must be positive");
    if (demo_n < 1 || !(demo_f_sigma > 0.0)) fail("demo_n and demo_f_sigma must be positive");
  }
};

namespace internal {

// Runs fn(0..n-1) on up to `threads` workers. The first exception is
// rethrown after all workers stop.
inline void ParallelFor(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  workers.clear();
  if (error) std::rethrow_exception(error);
}

enum Purpose : std::uint64_t {
  kData = 1,
  kProtocol = 2,
  kRelease = 3,
  kBaseline = 4,
  kWorkload = 5,
  kSplit = 6,
  kPool = 7,
};

// Stream for (trial, purpose, i, j) under the master seed.
inline RngStream TrialStream(const ExperimentConfig& cfg, std::uint64_t trial, Purpose purpose,
                             std::uint64_t i = 0, std::uint64_t j = 0) {
  const RngStream master(cfg.seed, static_cast<std::uint64_t>(cfg.kind) + 1);
  return master.Substream(trial, (static_cast<std::uint64_t>(purpose) << 56) ^ (i << 28) ^ j);
}

inline std::string FormatEps(double eps) {
  if (std::isinf(eps)) return "inf";
  std::ostringstream os;
  os << std::setprecision(10) << eps;
  return os.str();
}

inline std::vector<Rect> RegionsOf(const ProtocolOutcome& outcome, const Rect& domain) {
  std::vector<Rect> regions;
  regions.reserve(outcome.final_regions.size());
  for (const auto& id : outcome.final_regions) regions.push_back(CellRect(domain, id));
  return regions;
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Mean estimation of f(x) = |x|^2.

struct MeanRow {
  std::size_t n = 0;
  double eps = 0.0;
  int trial = 0;
  std::string method;  // dp | ldp | sldp
  double eps_regions = 0.0;
  double eps_release = 0.0;
  double estimate = 0.0;
  double truth = 0.0;
  double sq_error = 0.0;
};

// Per (N, trial): one truncated Gaussian sample shared by every eps. SLDP
// spends split * eps on the regions and the rest on the release; DP and LDP
// spend the full eps.
inline std::vector<MeanRow> RunMeanExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  const Rect box(-cfg.box_half, cfg.box_half, -cfg.box_half, cfg.box_half);
  const auto f = BoundedFunction::SquaredNorm(box);
  const std::size_t cells = cfg.n_values.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<MeanRow>> per_cell(cells);
  internal::ParallelFor(cells, cfg.threads, [&](std::size_t cell) {
    const std::size_t ni = cell / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(cell % static_cast<std::size_t>(cfg.trials));
    const std::size_t n = cfg.n_values[ni];
    RngStream data_rng = internal::TrialStream(cfg, trial, internal::kData, ni);
    const Dataset ds = SampleTruncatedGaussian(n, cfg.sigma, box, data_rng);
    std::vector<double> values;
    values.reserve(n);
    for (const auto& p : ds.points) values.push_back(f(p));
    double truth = 0.0;
    for (double v : values) truth += v;
    truth /= static_cast<double>(n);

    auto& rows = per_cell[cell];
    for (std::size_t ei = 0; ei < cfg.eps.size(); ++ei) {
      const double eps = cfg.eps[ei];
      const double eps_regions = eps * cfg.split;
      const double eps_release = std::isinf(eps) ? eps : eps - eps_regions;
      auto push = [&](const char* method, double er, double el, double estimate) {
        rows.push_back({n, eps, trial, method, er, el, estimate, truth,
                        (estimate - truth) * (estimate - truth)});
      };
      RngStream dp_rng = internal::TrialStream(cfg, trial, internal::kBaseline, ni, 2 * ei);
      push("dp", 0.0, eps, DpMean(values, f.bound(), eps, dp_rng));
      push("ldp", 0.0, eps,
           LdpMean(values, f.bound(), eps,
                   internal::TrialStream(cfg, trial, internal::kBaseline, ni, 2 * ei + 1)));
      const auto pcfg = ProtocolConfig::ForAnonymity(cfg.k, eps_regions, cfg.delta, cfg.T, box);
      const auto outcome =
          ServerRun(ds.points, pcfg, internal::TrialStream(cfg, trial, internal::kProtocol, ni, ei));
      const auto regions = internal::RegionsOf(outcome, box);
      push("sldp", eps_regions, eps_release,
           SldpMean(ds.points, regions, f, eps_release,
                    internal::TrialStream(cfg, trial, internal::kRelease, ni, ei)));
    }
  });
  std::vector<MeanRow> rows;
  for (auto& r : per_cell) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

inline void WriteMeanCsv(std::ostream& os, const std::vector<MeanRow>& rows) {
  os << "N,eps,trial,method,eps_regions,eps_release,estimate,truth,sq_error\n"
     << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.n << ',' << internal::FormatEps(r.eps) << ',' << r.trial << ',' << r.method << ','
       << internal::FormatEps(r.eps_regions) << ',' << internal::FormatEps(r.eps_release) << ','
       << r.estimate << ',' << r.truth << ',' << r.sq_error << '\n';
  }
}

// MSE per (N, eps, method) with a normal-approximation 95% interval.
inline void WriteMeanSummaryCsv(std::ostream& os, const std::vector<MeanRow>& rows) {
  struct Acc {
    std::size_t n;
    double eps;
    std::string method;
    std::vector<double> errors;
  };
  std::vector<Acc> groups;
  for (const auto& r : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Acc& a) {
      return a.n == r.n && a.eps == r.eps && a.method == r.method;
    });
    if (it == groups.end()) {
      groups.push_back({r.n, r.eps, r.method, {}});
      it = std::prev(groups.end());
    }
    it->errors.push_back(r.sq_error);
  }
  os << "N,eps,method,trials,mse,ci_low,ci_high\n" << std::setprecision(12);
  for (const auto& g : groups) {
    const auto m = static_cast<double>(g.errors.size());
    double mean = 0.0;
    for (double e : g.errors) mean += e;
    mean /= m;
    double var = 0.0;
    for (double e : g.errors) var += (e - mean) * (e - mean);
    const double half = g.errors.size() > 1 ? 1.96 * std::sqrt(var / (m - 1) / m) : 0.0;
    os << g.n << ',' << internal::FormatEps(g.eps) << ',' << g.method << ',' << g.errors.size()
       << ',' << mean << ',' << std::max(0.0, mean - half) << ',' << mean + half << '\n';
  }
}

// ---------------------------------------------------------------------------
// Classification on perturbed training features.

struct ClassifyRow {
  std::string mechanism;   // sldp-quantize | sldp-split | ldp | geo
  std::string classifier;  // knn | logreg
  double eps = 0.0;
  int k_anon = 0;
  int trial = 0;
  BinaryScores scores;
  double eps_regions = 0.0;
  double eps_release = 0.0;
};

struct ClassifyResult {
  std::vector<ClassifyRow> rows;
  std::vector<ClassifyRow> k_sweep_rows;
};

inline const std::vector<std::string>& ClassifyMechanisms() {
  static const std::vector<std::string> kMechanisms = {"sldp-quantize", "sldp-split", "ldp", "geo"};
  return kMechanisms;
}

// Synthetic labeled data on the unit square: clustered locations with a
// spatially smooth value field, binarized at its median.
inline Dataset SyntheticLabeledDataset(std::size_t n, int clusters, double spread, RngStream& rng) {
  Dataset ds = SampleClusterMixture(n, clusters, spread, rng);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> values;
  values.reserve(n);
  for (const auto& p : ds.points) {
    values.push_back(std::sin(2.0 * std::numbers::pi * p.x) * std::cos(2.0 * std::numbers::pi * p.y) +
                     noise(rng));
  }
  ds.labels = BinarizeLabelsByMedian(values);
  ds.values = std::move(values);
  ds.provenance = "synthetic";
  return ds;
}

// Loads the configured dataset, normalized to the unit square. Labels come
// from the label column, or from the value column binarized at its median.
inline Dataset LoadLabeledDataset(const ExperimentConfig& cfg) {
  if (cfg.dataset == "synthetic") {
    RngStream rng = internal::TrialStream(cfg, 0, internal::kPool);
    return SyntheticLabeledDataset(cfg.n_values.empty() ? 10000 : cfg.n_values.front(),
                                   cfg.clusters, cfg.spread, rng);
  }
  const auto label = cfg.label_col.empty() ? std::nullopt : std::optional(cfg.label_col);
  const auto value = cfg.value_col.empty() ? std::nullopt : std::optional(cfg.value_col);
  if (!label && !value) throw DataError("classification needs a label_col or value_col");
  auto loaded = LoadPointsCsv(cfg.dataset, cfg.x_col, cfg.y_col, label, value);
  Dataset ds = NormalizeToUnitSquare(loaded.dataset);
  if (!ds.labels) ds.labels = BinarizeLabelsByMedian(*ds.values);
  return ds;
}

namespace internal {

struct PerturbResult {
  std::vector<Point> points;
  double eps_regions = 0.0;
  double eps_release = 0.0;
};

inline PerturbResult PerturbTraining(const std::string& mechanism, std::span<const Point> train,
                                     double eps, int k, const ExperimentConfig& cfg,
                                     std::uint64_t trial, std::uint64_t tag) {
  PerturbResult out;
  out.points.reserve(train.size());
  const Rect unit = Rect::Unit();
  RngStream release = TrialStream(cfg, trial, kRelease, tag);
  if (mechanism == "sldp-quantize" || mechanism == "sldp-split") {
    const bool split = mechanism == "sldp-split";
    out.eps_regions = split ? eps * cfg.split : eps;
    out.eps_release = split ? (std::isinf(eps) ? eps : eps - out.eps_regions) : 0.0;
    const auto pcfg = ProtocolConfig::ForAnonymity(k, out.eps_regions, cfg.delta, cfg.T, unit);
    const auto outcome = ServerRun(train, pcfg, TrialStream(cfg, trial, kProtocol, tag));
    for (const auto& p : train) {
      out.points.push_back(split ? PerturbSplit(p, outcome.partition, out.eps_release, release)
                                 : PerturbQuantize(p, outcome.partition));
    }
  } else if (mechanism == "ldp") {
    out.eps_release = eps;
    for (const auto& p : train) out.points.push_back(PerturbLdp(p, unit, eps, release));
  } else if (mechanism == "geo") {
    out.eps_release = eps;
    for (const auto& p : train) out.points.push_back(PerturbGeo(p, eps, release));
  } else {
    throw ConfigError("unknown mechanism '" + mechanism + "'");
  }
  return out;
}

inline std::vector<ClassifyRow> ScoreClassifiers(const std::string& mechanism, double eps, int k,
                                                 int trial, const PerturbResult& perturbed,
                                                 std::span<const int> train_labels,
                                                 std::span<const Point> test,
                                                 std::span<const int> test_labels,
                                                 const ExperimentConfig& cfg, bool with_logreg) {
  std::vector<ClassifyRow> rows;
  const int knn_k = std::min<int>(cfg.knn_k, static_cast<int>(perturbed.points.size()));
  const auto knn = KnnPredict(perturbed.points, train_labels, test, knn_k, cfg.knn_weighted);
  rows.push_back({mechanism, "knn", eps, k, trial, F1PrecisionRecall(knn, test_labels),
                  perturbed.eps_regions, perturbed.eps_release});
  if (with_logreg) {
    const auto w = LogregFit(perturbed.points, train_labels, cfg.logreg_iters, cfg.logreg_lr);
    rows.push_back({mechanism, "logreg", eps, k, trial,
                    F1PrecisionRecall(LogregPredict(w, test), test_labels), perturbed.eps_regions,
                    perturbed.eps_release});
  }
  return rows;
}

}  // namespace internal

// Per (trial, mechanism, eps): perturb the training features, fit kNN and
// logistic regression, and score on the untouched test split. The k sweep
// runs the SLDP mechanisms with kNN at k_sweep_eps.
inline ClassifyResult RunClassifyExperiment(const ExperimentConfig& cfg, const Dataset& ds) {
  cfg.Validate();
  if (!ds.labels) throw DataError("classification needs a labeled dataset");
  const auto& labels = *ds.labels;

  auto gather = [&](const std::vector<std::size_t>& idx, std::vector<Point>& pts,
                    std::vector<int>& lab) {
    for (std::size_t i : idx) {
      pts.push_back(ds.points[i]);
      lab.push_back(labels[i]);
    }
  };

  const auto& mechanisms = ClassifyMechanisms();
  const std::size_t main_cells =
      static_cast<std::size_t>(cfg.trials) * mechanisms.size() * cfg.eps.size();
  const std::size_t sweep_cells =
      static_cast<std::size_t>(cfg.k_sweep_runs) * 2 * cfg.k_sweep.size();
  std::vector<std::vector<ClassifyRow>> out(main_cells + sweep_cells);

  internal::ParallelFor(main_cells + sweep_cells, cfg.threads, [&](std::size_t cell) {
    const bool sweep = cell >= main_cells;
    std::size_t c = sweep ? cell - main_cells : cell;
    std::string mechanism;
    double eps;
    int k;
    int trial;
    if (!sweep) {
      const std::size_t ei = c % cfg.eps.size();
      c /= cfg.eps.size();
      mechanism = mechanisms[c % mechanisms.size()];
      trial = static_cast<int>(c / mechanisms.size());
      eps = cfg.eps[ei];
      k = cfg.k;
    } else {
      const std::size_t ki = c % cfg.k_sweep.size();
      c /= cfg.k_sweep.size();
      mechanism = mechanisms[c % 2];
      trial = static_cast<int>(c / 2);
      eps = cfg.k_sweep_eps;
      k = cfg.k_sweep[ki];
    }
    const std::uint64_t stream_trial = static_cast<std::uint64_t>(trial) + (sweep ? 1'000'000 : 0);
    const auto split = SplitIndices(ds.size(), {cfg.train_fraction,
                                                internal::TrialStream(cfg, stream_trial, internal::kSplit)()});
    std::vector<Point> train, test;
    std::vector<int> train_labels, test_labels;
    gather(split.train, train, train_labels);
    gather(split.test, test, test_labels);
    const std::uint64_t tag = (static_cast<std::uint64_t>(cell) << 1) | (sweep ? 1 : 0);
    const auto perturbed = internal::PerturbTraining(mechanism, train, eps, k, cfg, stream_trial, tag);
    out[cell] = internal::ScoreClassifiers(mechanism, eps, k, trial, perturbed, train_labels, test,
                                           test_labels, cfg, !sweep);
  });

  ClassifyResult result;
  for (std::size_t cell = 0; cell < out.size(); ++cell) {
    auto& dst = cell < main_cells ? result.rows : result.k_sweep_rows;
    dst.insert(dst.end(), out[cell].begin(), out[cell].end());
  }
  return result;
}

inline void WriteClassifyCsv(std::ostream& os, const std::vector<ClassifyRow>& rows) {
  os << "mechanism,classifier,eps,k_anon,trial,f1,precision,recall,eps_regions,eps_release\n"
     << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.mechanism << ',' << r.classifier << ',' << internal::FormatEps(r.eps) << ','
       << r.k_anon << ',' << r.trial << ',' << r.scores.f1 << ',' << r.scores.precision << ','
       << r.scores.recall << ',' << internal::FormatEps(r.eps_regions) << ','
       << internal::FormatEps(r.eps_release) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Spatial range queries.

struct SpatialRow {
  std::string dataset;
  std::string method;  // sldp | privtree | ldp-grid
  double eps = 0.0;
  std::size_t n = 0;
  int trial = 0;
  double mre = 0.0;
  double tau = 0.0;
  double eps_regions = 0.0;
  double eps_release = 0.0;
};

// The spatial point pool: the configured CSV normalized to the unit square,
// or a synthetic cluster mixture of synthetic_size (default: largest N).
inline Dataset LoadSpatialDataset(const ExperimentConfig& cfg) {
  if (cfg.dataset == "synthetic") {
    std::size_t size = cfg.synthetic_size;
    if (size == 0) size = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());
    RngStream rng = internal::TrialStream(cfg, 0, internal::kPool);
    return SampleClusterMixture(size, cfg.clusters, cfg.spread, rng);
  }
  auto loaded = LoadPointsCsv(cfg.dataset, cfg.x_col, cfg.y_col);
  return NormalizeToUnitSquare(loaded.dataset);
}

inline std::string DatasetName(const ExperimentConfig& cfg) {
  if (cfg.dataset == "synthetic") return "synthetic";
  return std::filesystem::path(cfg.dataset).stem().string();
}

// Per (N, trial): subsample N users, draw an anchored workload, then build
// the SLDP, PrivTree and LDP-grid partitions at every eps and record MRE.
inline std::vector<SpatialRow> RunSpatialExperiment(const ExperimentConfig& cfg,
                                                    const Dataset& pool) {
  cfg.Validate();
  for (auto n : cfg.n_values) {
    if (n > pool.size()) {
      throw DataError("dataset holds " + std::to_string(pool.size()) + " points, fewer than N = " +
                      std::to_string(n));
    }
  }
  const std::string name = DatasetName(cfg);
  const std::size_t cells = cfg.n_values.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<SpatialRow>> out(cells);
  internal::ParallelFor(cells, cfg.threads, [&](std::size_t cell) {
    const std::size_t ni = cell / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(cell % static_cast<std::size_t>(cfg.trials));
    const std::size_t n = cfg.n_values[ni];
    RngStream sub_rng = internal::TrialStream(cfg, trial, internal::kData, ni);
    const Dataset ds = Subsample(pool, n, sub_rng);
    RngStream wl_rng = internal::TrialStream(cfg, trial, internal::kWorkload, ni);
    const auto sel_hi = static_cast<std::int64_t>(std::floor(cfg.sel_hi_fraction * static_cast<double>(n)));
    const Workload workload = GenAnchoredWorkload(ds.points, Rect::Unit(), cfg.queries, cfg.size_min,
                                                  cfg.size_max, cfg.sel_lo, sel_hi, wl_rng);
    const auto nn = static_cast<std::int64_t>(n);
    const double tau = SmoothingThreshold(nn);
    auto& rows = out[cell];
    for (std::size_t ei = 0; ei < cfg.eps.size(); ++ei) {
      const double eps = cfg.eps[ei];
      const auto pcfg = ProtocolConfig::ForAnonymity(cfg.k, eps, cfg.delta, cfg.T, Rect::Unit());
      const auto sldp =
          ServerRun(ds.points, pcfg, internal::TrialStream(cfg, trial, internal::kProtocol, ni, ei));
      rows.push_back({name, "sldp", eps, n, trial, WorkloadMre(sldp.partition, workload, nn), tau,
                      eps, 0.0});

      const double eps_tree = eps * cfg.privtree_split;
      const double eps_count = std::isinf(eps) ? eps : eps - eps_tree;
      RngStream pt_rng = internal::TrialStream(cfg, trial, internal::kBaseline, ni, 2 * ei);
      const auto tree = PrivTreeBuild(ds.points, Rect::Unit(), eps_tree, eps_count, pt_rng);
      rows.push_back({name, "privtree", eps, n, trial, WorkloadMre(tree, workload, nn), tau,
                      eps_tree, eps_count});

      RngStream grid_rng = internal::TrialStream(cfg, trial, internal::kBaseline, ni, 2 * ei + 1);
      const auto grid = LdpGridBuild(ds.points, Rect::Unit(), cfg.grid_depth, eps, grid_rng);
      rows.push_back({name, "ldp-grid", eps, n, trial, WorkloadMre(grid, workload, nn), tau, 0.0,
                      eps});
    }
  });
  std::vector<SpatialRow> rows;
  for (auto& r : out) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

inline void WriteSpatialCsv(std::ostream& os, const std::vector<SpatialRow>& rows) {
  os << "dataset,method,eps,N,trial,mre,tau,eps_regions,eps_release\n" << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.dataset << ',' << r.method << ',' << internal::FormatEps(r.eps) << ',' << r.n << ','
       << r.trial << ',' << r.mre << ',' << r.tau << ',' << internal::FormatEps(r.eps_regions)
       << ',' << internal::FormatEps(r.eps_release) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Function-value release demo.

struct DemoPoint {
  Point x;
  double clean = 0.0;
  double sldp = 0.0;
  double sldp_sensitivity = 0.0;
  double sldp_scale = 0.0;
  double ldp = 0.0;
  double ldp_sensitivity = 0.0;
  double ldp_scale = 0.0;
};

struct DemoResult {
  Partition partition;
  std::vector<DemoPoint> points;
  double eps_regions = 0.0;
  double eps_release = 0.0;
  double eps_ldp = 0.0;
};

// Gaussian-bump values f(x) = exp(-|x|^2 / (2 s^2)) released per user under
// SLDP (regions from the protocol, then Lap(osc(U_i) / eps_release)) and
// under LDP (Lap(1 / eps)).
inline DemoResult RunDemo(const ExperimentConfig& cfg) {
  cfg.Validate();
  const double eps = cfg.eps.front();
  const Rect box(-cfg.box_half, cfg.box_half, -cfg.box_half, cfg.box_half);
  RngStream data_rng = internal::TrialStream(cfg, 0, internal::kData);
  const Dataset ds = SampleTruncatedGaussian(cfg.demo_n, cfg.sigma, box, data_rng);
  const auto f = BoundedFunction::GaussianBump(cfg.demo_f_sigma);

  DemoResult result;
  result.eps_regions = eps * cfg.split;
  result.eps_release = std::isinf(eps) ? eps : eps - result.eps_regions;
  result.eps_ldp = eps;
  const auto pcfg = ProtocolConfig::ForAnonymity(cfg.k, result.eps_regions, cfg.delta, cfg.T, box);
  auto outcome = ServerRun(ds.points, pcfg, internal::TrialStream(cfg, 0, internal::kProtocol));
  result.partition = outcome.partition;
  const RngStream sldp_rng = internal::TrialStream(cfg, 0, internal::kRelease);
  const RngStream ldp_rng = internal::TrialStream(cfg, 0, internal::kBaseline);
  result.points.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    DemoPoint d;
    d.x = ds.points[i];
    d.clean = f(d.x);
    d.sldp_sensitivity = RegionOscillation(f, CellRect(box, outcome.final_regions[i]));
    d.sldp_scale = std::isinf(result.eps_release) ? 0.0 : d.sldp_sensitivity / result.eps_release;
    RngStream s = sldp_rng.Substream(i);
    d.sldp = d.clean + LaplaceNoise(s, d.sldp_sensitivity, result.eps_release);
    d.ldp_sensitivity = f.bound();
    d.ldp_scale = std::isinf(eps) ? 0.0 : f.bound() / eps;
    RngStream l = ldp_rng.Substream(i);
    d.ldp = d.clean + LaplaceNoise(l, f.bound(), eps);
    result.points.push_back(d);
  }
  return result;
}

// Writes <prefix>_cells.csv, _clean.csv, _sldp.csv and _ldp.csv.
inline void WriteDemoCsvs(const std::string& prefix, const DemoResult& demo) {
  auto open = [&](const std::string& suffix) {
    std::ofstream os(prefix + suffix);
    if (!os) throw DataError("cannot write '" + prefix + suffix + "'");
    os << std::setprecision(12);
    return os;
  };
  {
    auto os = open("_cells.csv");
    WritePartitionCsv(os, demo.partition);
  }
  auto clean = open("_clean.csv");
  auto sldp = open("_sldp.csv");
  auto ldp = open("_ldp.csv");
  clean << "x,y,f\n";
  sldp << "x,y,value,sensitivity,noise_scale,eps_regions,eps_release\n";
  ldp << "x,y,value,sensitivity,noise_scale,eps_regions,eps_release\n";
  for (const auto& d : demo.points) {
    clean << d.x.x << ',' << d.x.y << ',' << d.clean << '\n';
    sldp << d.x.x << ',' << d.x.y << ',' << d.sldp << ',' << d.sldp_sensitivity << ','
         << d.sldp_scale << ',' << internal::FormatEps(demo.eps_regions) << ','
         << internal::FormatEps(demo.eps_release) << '\n';
    ldp << d.x.x << ',' << d.x.y << ',' << d.ldp << ',' << d.ldp_sensitivity << ',' << d.ldp_scale
        << ",0," << internal::FormatEps(demo.eps_ldp) << '\n';
  }
}

}  // namespace sldp

#endif  // SLDP_EXPERIMENTS_HPP_
