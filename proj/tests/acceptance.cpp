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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sldp/estimators.hpp"
#include "sldp/eval.hpp"
#include "sldp/experiments.hpp"
#include "sldp/mechanisms.hpp"
#include "sldp/protocol.hpp"
#include "sldp/scheme.hpp"
#include "sldp/spatial.hpp"
#include "stat_oracles.hpp"

namespace sldp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Random small datasets shared by the oracle and anonymity checks.

struct SmallCase {
  std::vector<Point> points;
  int k = 1;
  int T = 1;
};

std::vector<SmallCase> SmallCases() {
  std::mt19937_64 gen(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const int ks[] = {1, 5, 20};
  std::vector<SmallCase> cases;
  for (int i = 0; i < 200; ++i) {
    SmallCase c;
    c.k = ks[i % 3];
    c.T = 1 + static_cast<int>(gen() % 8);
    const auto n = static_cast<std::size_t>(20 + gen() % 481);
    const int clusters = static_cast<int>(gen() % 4);  // 0: uniform
    std::vector<Point> centers;
    for (int j = 0; j < clusters; ++j) centers.emplace_back(u(gen), u(gen));
    const double spread = 0.01 + 0.1 * u(gen);
    for (std::size_t j = 0; j < n; ++j) {
      if (centers.empty()) {
        c.points.emplace_back(u(gen), u(gen));
      } else {
        const Point& m = centers[gen() % centers.size()];
        c.points.emplace_back(std::clamp(m.x + spread * g(gen), 0.0, 1.0),
                              std::clamp(m.y + spread * g(gen), 0.0, 1.0));
      }
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

Outcome OracleEquivalence(const std::vector<SmallCase>& cases) {
  const auto start = std::chrono::steady_clock::now();
  int mismatches = 0;
  int max_depth = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto cfg = ProtocolConfig::ForAnonymity(c.k, kInf, 0.05, c.T);
    const auto run = ServerRun(c.points, cfg, RngStream(i));
    const auto canonical = CanonicalPartition(c.points, Rect::Unit(), c.k, c.T);
    if (!run.partition.SameCellsAndCounts(canonical)) ++mismatches;
    max_depth = std::max(max_depth, canonical.max_depth());
  }
  const double secs = Seconds(start);
  return {mismatches == 0 && secs < 10.0,
          Fmt("%d/%zu mismatches, deepest leaf %d, %.2fs (limit 10s)", mismatches, cases.size(),
              max_depth, secs)};
}

Outcome KAnonymity(const std::vector<SmallCase>& cases) {
  long violations = 0;
  long leaves = 0;
  for (const auto& c : cases) {
    const auto canonical = CanonicalPartition(c.points, Rect::Unit(), c.k, c.T);
    for (const auto& leaf : canonical.leaves()) {
      ++leaves;
      // Recount membership directly rather than trusting the stored count.
      long members = 0;
      for (const auto& p : c.points) members += CellContains(Rect::Unit(), leaf.rect, p) ? 1 : 0;
      if (members < c.k || members != static_cast<long>(leaf.count)) ++violations;
    }
  }
  return {violations == 0, Fmt("%ld violations over %ld leaves", violations, leaves)};
}

// ---------------------------------------------------------------------------

Outcome ConcentrationCoverage() {
  const int trials = 10'000;
  int failing = 0;
  double worst_margin = kInf;
  std::string worst;
  std::uint64_t cell = 0;
  for (int n : {10, 100, 1000}) {
    for (double eps : {0.5, 1.0, 2.0}) {
      for (double x : {2.0, 3.0, 5.0}) {
        RngStream rng(77, cell++);
        const double delta = ComputeDelta(eps, n, x);
        int covered = 0;
        for (int t = 0; t < trials; ++t) {
          // Half of the parent's users hold the indicator.
          double noisy = 0.0;
          int truth = 0;
          for (int i = 0; i < n; ++i) {
            const int indicator = i % 2;
            truth += indicator;
            noisy += indicator + LaplaceNoise(rng, 1.0, eps);
          }
          covered += std::abs(noisy - truth) <= delta ? 1 : 0;
        }
        const double target = 1.0 - std::exp(-x);
        const double floor = target - 3.0 * testing::BinomialSigma(target, trials);
        const double coverage = static_cast<double>(covered) / trials;
        if (coverage < floor) ++failing;
        if (coverage - floor < worst_margin) {
          worst_margin = coverage - floor;
          worst = Fmt("n=%d eps=%g x=%g coverage %.4f floor %.4f", n, eps, x, coverage, floor);
        }
      }
    }
  }
  return {failing == 0, Fmt("%d/27 cells below floor; tightest: %s", failing, worst.c_str())};
}

Outcome TranscriptInvariance() {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  int differing = 0;
  long rounds_compared = 0;
  for (int pair = 0; pair < 100; ++pair) {
    std::vector<Point> pts;
    const Point centers[] = {{0.3, 0.3}, {0.7, 0.6}, {0.45, 0.8}};
    for (int i = 0; i < 20000; ++i) {
      const Point& m = centers[gen() % 3];
      pts.emplace_back(std::clamp(m.x + 0.08 * g(gen), 0.0, 1.0),
                       std::clamp(m.y + 0.08 * g(gen), 0.0, 1.0));
    }
    const int k = 5 + static_cast<int>(gen() % 16);
    const auto canonical = CanonicalPartition(pts, Rect::Unit(), k, 20);
    const std::size_t user = gen() % pts.size();
    const Leaf& leaf = canonical.LeafAt(pts[user]);
    auto moved = pts;
    moved[user] = Point(leaf.rect.xmin + u(gen) * leaf.rect.width(),
                        leaf.rect.ymin + u(gen) * leaf.rect.height());
    if (canonical.Locate(moved[user]) != leaf.id) {
      ++differing;
      continue;
    }
    const auto cfg = ProtocolConfig::ForAnonymity(k, 2.0 * (1 + pair % 4));
    const auto a = ServerRun(pts, cfg, RngStream(500 + pair));
    const auto b = ServerRun(moved, cfg, RngStream(500 + pair));
    // Rounds in which the user's region is a strict ancestor of its leaf.
    const auto depth = static_cast<std::size_t>(leaf.id.depth());
    const auto& ia = a.indicators[user];
    const auto& ib = b.indicators[user];
    const std::size_t la = std::min(depth, ia.size());
    const std::size_t lb = std::min(depth, ib.size());
    bool same = la == lb;
    for (std::size_t r = 0; same && r < la; ++r) same = ia[r] == ib[r];
    rounds_compared += static_cast<long>(la);
    if (!same) ++differing;
  }
  return {differing == 0,
          Fmt("%d/100 pairs differ, %ld rounds compared", differing, rounds_compared)};
}

Outcome MechanismChecks() {
  std::vector<std::string> notes;
  bool pass = true;

  RngStream lap(91);
  const double b = 1.5;
  std::vector<double> draws;
  draws.reserve(1'000'000);
  for (int i = 0; i < 1'000'000; ++i) draws.push_back(SampleLaplace(lap, b));
  const double var = testing::Variance(draws);
  const bool var_ok = std::abs(var / (2 * b * b) - 1.0) <= 0.05;
  pass = pass && var_ok;
  notes.push_back(Fmt("laplace var %.4f vs %.4f", var, 2 * b * b));

  for (double eps : {0.5, 1.0, 4.0}) {
    RngStream rng(92, static_cast<std::uint64_t>(eps * 10));
    std::vector<double> radii;
    for (int i = 0; i < 100'000; ++i) {
      const Point p = SamplePlanarLaplace(rng, Point(0.5, 0.5), eps);
      radii.push_back(std::hypot(p.x - 0.5, p.y - 0.5));
    }
    const double d = testing::KsStatistic(radii, [eps](double r) { return testing::Gamma2Cdf(r, eps); });
    const double crit = testing::KsCritical1Percent(radii.size());
    pass = pass && d < crit;
    notes.push_back(Fmt("ks(eps=%g) %.4f < %.4f", eps, d, crit));
  }

  const double eps = 1.0;
  RngStream r0(93), r1(94);
  std::vector<double> zero, one;
  for (int i = 0; i < 1'000'000; ++i) {
    zero.push_back(0.0 + LaplaceNoise(r0, 1.0, eps));
    one.push_back(1.0 + LaplaceNoise(r1, 1.0, eps));
  }
  const double ratio = testing::MaxHistogramRatio(zero, one, -3.0, 4.0, 14);
  pass = pass && ratio <= std::exp(eps) * 1.05;
  notes.push_back(Fmt("ratio %.4f <= %.4f", ratio, std::exp(eps) * 1.05));

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {pass, detail};
}

Outcome EstimatorVariances() {
  const std::size_t n = 1000;
  const double eps = 1.0;
  const double c = 200.0;
  std::vector<double> values;
  RngStream data(95);
  for (std::size_t i = 0; i < n; ++i) values.push_back(c * data.Uniform01());
  double truth = 0.0;
  for (double v : values) truth += v;
  truth /= static_cast<double>(n);

  std::vector<double> dp, ldp;
  RngStream dp_rng(96);
  for (int t = 0; t < 10'000; ++t) {
    dp.push_back(DpMean(values, c, eps, dp_rng) - truth);
    ldp.push_back(LdpMean(values, c, eps, RngStream(97, t)) - truth);
  }
  const double nd = static_cast<double>(n);
  const double dp_expected = 2 * c * c / ((nd * eps) * (nd * eps));
  const double ldp_expected = 2 * c * c / (nd * eps * eps);
  const double dp_var = testing::Variance(dp);
  const double ldp_var = testing::Variance(ldp);
  const bool pass = std::abs(dp_var / dp_expected - 1.0) <= 0.10 &&
                    std::abs(ldp_var / ldp_expected - 1.0) <= 0.10;
  return {pass, Fmt("dp %.5f vs %.5f, ldp %.3f vs %.3f", dp_var, dp_expected, ldp_var,
                    ldp_expected)};
}

// ---------------------------------------------------------------------------

Outcome MeanOrdering() {
  const auto start = std::chrono::steady_clock::now();
  auto cfg = ExperimentConfig::Defaults(ExperimentKind::kMean);
  cfg.n_values = {20000};
  cfg.eps = {2.0};
  cfg.trials = 60;
  cfg.delta = 0.05;
  std::map<std::string, std::vector<double>> mse;
  for (const auto& r : RunMeanExperiment(cfg)) mse[r.method].push_back(r.sq_error);
  auto q = [&](const std::string& m, double p) { return testing::Quantile(mse[m], p); };
  const double secs = Seconds(start);
  // Separation: the upper quartile of the better method lies below the lower
  // quartile of the worse one.
  const bool ordered = q("dp", 0.5) < q("sldp", 0.5) && q("sldp", 0.5) < q("ldp", 0.5);
  const bool separated = q("dp", 0.75) < q("sldp", 0.25) && q("sldp", 0.75) < q("ldp", 0.25);
  return {ordered && separated && secs < 120.0,
          Fmt("median MSE dp %.3g [%.3g, %.3g], sldp %.3g [%.3g, %.3g], ldp %.3g [%.3g, %.3g]; "
              "%.1fs (limit 120s)",
              q("dp", 0.5), q("dp", 0.25), q("dp", 0.75), q("sldp", 0.5), q("sldp", 0.25),
              q("sldp", 0.75), q("ldp", 0.5), q("ldp", 0.25), q("ldp", 0.75), secs)};
}

Outcome SpatialOrdering() {
  const auto start = std::chrono::steady_clock::now();
  auto cfg = ExperimentConfig::Defaults(ExperimentKind::kSpatial);
  cfg.n_values = {20000};
  cfg.eps = {0.5, 1.0, 2.0, 4.0};
  cfg.trials = 60;
  cfg.clusters = 5;
  const auto pool = LoadSpatialDataset(cfg);
  std::map<std::string, std::map<double, std::vector<double>>> mre;
  for (const auto& r : RunSpatialExperiment(cfg, pool)) mre[r.method][r.eps].push_back(r.mre);
  auto mean = [&](const std::string& m, double eps) { return testing::Mean(mre[m][eps]); };
  const double secs = Seconds(start);

  bool pass = mean("privtree", 1.0) < mean("sldp", 1.0) && mean("sldp", 1.0) < mean("ldp-grid", 1.0);
  std::string detail;
  for (const char* m : {"privtree", "sldp", "ldp-grid"}) {
    int inversions = 0;
    for (std::size_t i = 1; i < cfg.eps.size(); ++i) {
      inversions += mean(m, cfg.eps[i]) >= mean(m, cfg.eps[i - 1]) ? 1 : 0;
    }
    pass = pass && inversions <= 1;
    detail += Fmt("%s %.3g/%.3g/%.3g/%.3g (%d inversions); ", m, mean(m, 0.5), mean(m, 1.0),
                  mean(m, 2.0), mean(m, 4.0), inversions);
  }
  pass = pass && secs < 300.0;
  return {pass, detail + Fmt("%.1fs (limit 300s)", secs)};
}

Outcome ArithmeticAnchors() {
  const auto pt = PrivTreeParams::Recommended(1.0);
  const bool pass = SmoothingThreshold(5000) == 10.0 && SmoothingThreshold(100000) == 100.0 &&
                    pt.lambda == 7.0 / 3.0 && pt.decay == 7.0 / 3.0 * std::log(4.0) &&
                    pt.theta == 0.0 && ComputeDelta(1.0, 100.0, 3.0) == std::sqrt(600.0) + 18.0;
  return {pass, Fmt("tau %.17g %.17g, lambda %.17g, decay %.17g, delta %.17g",
                    SmoothingThreshold(5000), SmoothingThreshold(100000), pt.lambda, pt.decay,
                    ComputeDelta(1.0, 100.0, 3.0))};
}

// ---------------------------------------------------------------------------
// Noiseless identity.

// PrivTree without noise: split every nonempty cell until max_depth.
void NoiselessTree(const std::vector<Point>& pts, const CellId& id, const Rect& rect,
                   int max_depth, std::vector<Leaf>& out) {
  std::vector<Point> inside;
  for (const auto& p : pts) {
    if (CellContains(Rect::Unit(), rect, p)) inside.push_back(p);
  }
  if (inside.empty() || id.depth() == max_depth) {
    out.push_back({id, rect, static_cast<double>(inside.size()), true});
    return;
  }
  for (int c = 0; c < 4; ++c) NoiselessTree(inside, id.Child(c), QuadrantRect(rect, c), max_depth, out);
}

Partition ExactGrid(const std::vector<Point>& pts, int g) {
  const int side = 1 << g;
  std::vector<Leaf> leaves;
  for (int ix = 0; ix < side; ++ix) {
    for (int iy = 0; iy < side; ++iy) {
      const Rect r(static_cast<double>(ix) / side, static_cast<double>(ix + 1) / side,
                   static_cast<double>(iy) / side, static_cast<double>(iy + 1) / side);
      const Point centre((ix + 0.5) / side, (iy + 0.5) / side);
      const CellId id = CellAtDepth(Rect::Unit(), centre, g);
      double count = 0.0;
      for (const auto& p : pts) count += CellContains(Rect::Unit(), r, p) ? 1.0 : 0.0;
      leaves.push_back({id, r, count, true});
    }
  }
  return Partition(Rect::Unit(), std::move(leaves));
}

Outcome NoiselessIdentity() {
  const double tol = 1e-6;
  double worst = 0.0;
  std::vector<std::string> failures;
  auto check = [&](const std::string& what, double got, double want) {
    const double err = std::abs(got - want);
    worst = std::max(worst, err);
    if (!(err <= tol)) failures.push_back(Fmt("%s off by %.3g", what.c_str(), err));
  };

  // Mean: every estimator returns the clean mean.
  auto mean_cfg = ExperimentConfig::Defaults(ExperimentKind::kMean);
  mean_cfg.n_values = {2000, 20000};
  mean_cfg.eps = {kInf};
  mean_cfg.trials = 3;
  for (const auto& r : RunMeanExperiment(mean_cfg)) check("mean/" + r.method, r.estimate, r.truth);

  // Classify: ldp and geo train on the clean points; sldp-split trains on
  // the centroids of the canonical partition.
  auto cls = ExperimentConfig::Defaults(ExperimentKind::kClassify);
  cls.n_values = {3000};
  cls.eps = {kInf};
  cls.trials = 2;
  cls.k_sweep = {cls.k};
  cls.k_sweep_runs = 1;
  const auto ds = LoadLabeledDataset(cls);
  const auto result = RunClassifyExperiment(cls, ds);
  for (int trial = 0; trial < cls.trials; ++trial) {
    const auto split = SplitIndices(
        ds.size(), {cls.train_fraction, internal::TrialStream(cls, trial, internal::kSplit)()});
    std::vector<Point> train, test;
    std::vector<int> ytrain, ytest;
    for (auto i : split.train) train.push_back(ds.points[i]), ytrain.push_back((*ds.labels)[i]);
    for (auto i : split.test) test.push_back(ds.points[i]), ytest.push_back((*ds.labels)[i]);
    const auto canonical = CanonicalPartition(train, Rect::Unit(), cls.k, cls.T);
    std::vector<Point> quantized;
    for (const auto& p : train) {
      const Rect& r = canonical.LeafAt(p).rect;
      quantized.emplace_back(0.5 * (r.xmin + r.xmax), 0.5 * (r.ymin + r.ymax));
    }
    const auto split_pts = internal::PerturbTraining("sldp-split", train, kInf, cls.k, cls, trial, 0);
    for (std::size_t i = 0; i < train.size(); ++i) {
      check("classify/sldp-split point", split_pts.points[i].x, quantized[i].x);
      check("classify/sldp-split point", split_pts.points[i].y, quantized[i].y);
    }
    auto f1 = [&](const std::vector<Point>& pts, const std::string& classifier) {
      if (classifier == "knn") {
        return F1PrecisionRecall(KnnPredict(pts, ytrain, test, cls.knn_k, cls.knn_weighted), ytest).f1;
      }
      const auto w = LogregFit(pts, ytrain, cls.logreg_iters, cls.logreg_lr);
      return F1PrecisionRecall(LogregPredict(w, test), ytest).f1;
    };
    for (const auto& r : result.rows) {
      if (r.trial != trial) continue;
      if (r.mechanism == "ldp" || r.mechanism == "geo") {
        check("classify/" + r.mechanism + "/" + r.classifier, r.scores.f1, f1(train, r.classifier));
      } else if (r.mechanism == "sldp-split") {
        check("classify/sldp-split/" + r.classifier, r.scores.f1, f1(quantized, r.classifier));
      }
    }
  }

  // Spatial: SLDP equals the canonical partition, PrivTree the noiseless
  // tree, and the grid the exact histogram.
  auto sp = ExperimentConfig::Defaults(ExperimentKind::kSpatial);
  sp.n_values = {2000};
  sp.eps = {kInf};
  sp.trials = 2;
  const auto pool = LoadSpatialDataset(sp);
  const auto rows = RunSpatialExperiment(sp, pool);
  for (int trial = 0; trial < sp.trials; ++trial) {
    RngStream sub = internal::TrialStream(sp, trial, internal::kData, 0);
    const Dataset sample = Subsample(pool, 2000, sub);
    RngStream wl = internal::TrialStream(sp, trial, internal::kWorkload, 0);
    const auto sel_hi = static_cast<std::int64_t>(std::floor(sp.sel_hi_fraction * 2000));
    const Workload w = GenAnchoredWorkload(sample.points, Rect::Unit(), sp.queries, sp.size_min,
                                           sp.size_max, sp.sel_lo, sel_hi, wl);
    std::vector<Leaf> tree;
    NoiselessTree(sample.points, CellId::Root(), Rect::Unit(), CellId::kMaxDepth, tree);
    const std::map<std::string, Partition> reference = {
        {"sldp", CanonicalPartition(sample.points, Rect::Unit(), sp.k, sp.T)},
        {"privtree", Partition(Rect::Unit(), std::move(tree))},
        {"ldp-grid", ExactGrid(sample.points, sp.grid_depth)},
    };
    for (const auto& r : rows) {
      if (r.trial != trial) continue;
      check("spatial/" + r.method, r.mre, WorkloadMre(reference.at(r.method), w, 2000));
    }
  }

  std::string detail = Fmt("max deviation %.3g", worst);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

}  // namespace
}  // namespace sldp

int main() {
  using sldp::Outcome;
  const auto cases = sldp::SmallCases();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle-equivalence", [&] { return sldp::OracleEquivalence(cases); }},
      {"k-anonymity", [&] { return sldp::KAnonymity(cases); }},
      {"concentration-coverage", sldp::ConcentrationCoverage},
      {"transcript-invariance", sldp::TranscriptInvariance},
      {"mechanism-distributions", sldp::MechanismChecks},
      {"estimator-variances", sldp::EstimatorVariances},
      {"mean-mse-ordering", sldp::MeanOrdering},
      {"spatial-mre-ordering", sldp::SpatialOrdering},
      {"arithmetic-anchors", sldp::ArithmeticAnchors},
      {"noiseless-identity", sldp::NoiselessIdentity},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
