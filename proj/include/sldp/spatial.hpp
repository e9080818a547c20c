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

#ifndef SLDP_SPATIAL_HPP_
#define SLDP_SPATIAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sldp/error.hpp"
#include "sldp/geometry.hpp"
#include "sldp/mechanisms.hpp"
#include "sldp/rng.hpp"
#include "sldp/scheme.hpp"

namespace sldp {

struct RangeQuery {
  Rect rect;
  std::int64_t true_count = -1;  // -1 until filled
};

struct Workload {
  std::vector<RangeQuery> queries;
  std::string strategy;
  double size_min = 0.0;
  double size_max = 0.0;
  std::int64_t sel_lo = 0;
  std::int64_t sel_hi = 0;
  std::uint64_t seed = 0;
};

// Points sorted by x for closed-rectangle counting.
class PointIndex {
 public:
  explicit PointIndex(std::span<const Point> points) : points_(points.begin(), points.end()) {
    std::sort(points_.begin(), points_.end(),
              [](const Point& a, const Point& b) { return a.x < b.x; });
  }

  std::int64_t CountIn(const Rect& r) const {
    auto lo = std::lower_bound(points_.begin(), points_.end(), r.xmin,
                               [](const Point& p, double x) { return p.x < x; });
    std::int64_t n = 0;
    for (auto it = lo; it != points_.end() && it->x <= r.xmax; ++it) {
      if (r.ymin <= it->y && it->y <= r.ymax) ++n;
    }
    return n;
  }

  std::size_t size() const { return points_.size(); }

 private:
  std::vector<Point> points_;
};

// Default selectivity window [20, floor(0.05 N)].
inline std::int64_t DefaultSelectivityLow() { return 20; }
inline std::int64_t DefaultSelectivityHigh(std::size_t n) {
  return static_cast<std::int64_t>(std::floor(0.05 * static_cast<double>(n)));
}

// Anchored multi-scale workload: each candidate is anchored at a random data
// point, has log-uniform side lengths in [size_min, size_max] (fractions of
// the domain side), is placed uniformly among the in-domain positions that
// contain the anchor, and is kept iff its true count lies in [sel_lo, sel_hi].
inline Workload GenAnchoredWorkload(std::span<const Point> points, const Rect& domain,
                                    std::size_t m, double size_min, double size_max,
                                    std::int64_t sel_lo, std::int64_t sel_hi, RngStream& rng,
                                    std::size_t max_attempts = 1'000'000) {
  internal::Require(!points.empty(), "anchored workload needs data points");
  internal::Require(0.0 < size_min && size_min <= size_max && size_max <= 1.0,
                    "sizes must satisfy 0 < size_min <= size_max <= 1");
  Workload w{{}, "anchored", size_min, size_max, sel_lo, sel_hi, rng.seed()};
  w.queries.reserve(m);
  const PointIndex index(points);
  const double log_lo = std::log2(size_min);
  const double log_hi = std::log2(size_max);
  auto side = [&](double extent) {
    return extent * std::exp2(log_lo + (log_hi - log_lo) * rng.Uniform01());
  };
  auto place = [&](double anchor, double lo, double hi, double len) {
    const double a = std::max(lo, anchor - len);
    const double b = std::min(anchor, hi - len);
    return a + (b - a) * rng.Uniform01();
  };
  std::size_t attempts = 0;
  while (w.queries.size() < m) {
    if (attempts++ >= max_attempts) {
      std::ostringstream msg;
      msg << "anchored workload: selectivity window [" << sel_lo << ", " << sel_hi
          << "] could not be met after " << max_attempts << " attempts (accepted "
          << w.queries.size() << " of " << m << ")";
      throw DataError(msg.str());
    }
    const Point& anchor = points[static_cast<std::size_t>(rng() % points.size())];
    const double width = side(domain.width());
    const double height = side(domain.height());
    const double x0 = place(anchor.x, domain.xmin, domain.xmax, width);
    const double y0 = place(anchor.y, domain.ymin, domain.ymax, height);
    const Rect r(x0, std::min(x0 + width, domain.xmax), y0, std::min(y0 + height, domain.ymax));
    const std::int64_t count = index.CountIn(r);
    if (count < sel_lo || count > sel_hi) continue;
    w.queries.push_back({r, count});
  }
  return w;
}

inline void FillTrueCounts(Workload& workload, std::span<const Point> points) {
  const PointIndex index(points);
  for (auto& q : workload.queries) q.true_count = index.CountIn(q.rect);
}

// Uniform workload: side lengths U(size_min, size_max) (fractions of the
// domain side) and positions uniform among those fully inside the domain.
inline Workload GenUniformWorkload(std::size_t m, double size_min, double size_max,
                                   const Rect& domain, RngStream& rng,
                                   std::optional<std::span<const Point>> points = std::nullopt) {
  internal::Require(0.0 < size_min && size_min <= size_max && size_max <= 1.0,
                    "sizes must satisfy 0 < size_min <= size_max <= 1");
  Workload w{{}, "uniform", size_min, size_max, -1, -1, rng.seed()};
  w.queries.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double width = domain.width() * (size_min + (size_max - size_min) * rng.Uniform01());
    const double height = domain.height() * (size_min + (size_max - size_min) * rng.Uniform01());
    const double x0 = domain.xmin + (domain.width() - width) * rng.Uniform01();
    const double y0 = domain.ymin + (domain.height() - height) * rng.Uniform01();
    w.queries.push_back(
        {Rect(x0, std::min(x0 + width, domain.xmax), y0, std::min(y0 + height, domain.ymax)), -1});
  }
  if (points) FillTrueCounts(w, *points);
  return w;
}

// Area-weighted answer: sum over leaves of max(c, 0) * |F n q| / |F|.
inline double AnswerQuery(const Partition& partition, const Rect& q) {
  double answer = 0.0;
  for (const auto& leaf : partition.leaves()) {
    const double area = Area(leaf.rect);
    if (area <= 0.0 || leaf.count <= 0.0) continue;
    const double overlap = IntersectionArea(leaf.rect, q);
    if (overlap > 0.0) answer += leaf.count * (overlap / area);
  }
  return answer;
}

inline std::vector<double> AnswerWorkload(const Partition& partition, const Workload& w) {
  std::vector<double> answers;
  answers.reserve(w.queries.size());
  for (const auto& q : w.queries) answers.push_back(AnswerQuery(partition, q.rect));
  return answers;
}

// tau = 10 max(1, 1e-4 N).
inline double SmoothingThreshold(std::int64_t n) {
  return 10.0 * std::max(1.0, 1e-4 * static_cast<double>(n));
}

// Mean relative error with smoothing threshold tau(N).
inline double Mre(std::span<const double> estimates, std::span<const std::int64_t> truths,
                  std::int64_t n) {
  internal::Require(estimates.size() == truths.size(), "estimates and truths differ in length");
  internal::Require(!estimates.empty(), "MRE of an empty workload");
  const double tau = SmoothingThreshold(n);
  double total = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto y = static_cast<double>(truths[i]);
    total += std::abs(estimates[i] - y) / std::max(y, tau);
  }
  return total / static_cast<double>(estimates.size());
}

inline double WorkloadMre(const Partition& partition, const Workload& w, std::int64_t n) {
  std::vector<std::int64_t> truths;
  truths.reserve(w.queries.size());
  for (const auto& q : w.queries) truths.push_back(q.true_count);
  const auto answers = AnswerWorkload(partition, w);
  return Mre(answers, truths, n);
}

struct PrivTreeParams {
  double lambda = 0.0;  // split-test noise scale
  double decay = 0.0;   // per-depth count decay
  double theta = 0.0;   // split threshold

  // lambda = 7 / (3 eps_tree), decay = lambda ln 4, theta = 0.
  static PrivTreeParams Recommended(double eps_tree) {
    internal::Require(eps_tree > 0.0, "eps_tree must be positive");
    PrivTreeParams p;
    p.lambda = std::isinf(eps_tree) ? 0.0 : 7.0 / (3.0 * eps_tree);
    p.decay = p.lambda * std::log(4.0);
    p.theta = 0.0;
    return p;
  }
};

// Central-DP PrivTree over the raw points (trusted curator). A node at depth
// d splits iff max(c - d * decay, theta - decay) + Lap(lambda) > theta. Leaf
// counts get fresh Lap(1 / eps_count) noise. Noise is drawn depth-first from
// `rng`.
inline Partition PrivTreeBuild(std::span<const Point> points, const Rect& domain,
                               double eps_tree, double eps_count, RngStream& rng,
                               int max_depth = CellId::kMaxDepth) {
  internal::Require(eps_count > 0.0, "eps_count must be positive");
  internal::Require(max_depth >= 0 && max_depth <= CellId::kMaxDepth, "max depth out of range");
  const PrivTreeParams params = PrivTreeParams::Recommended(eps_tree);
  for (const auto& p : points) {
    internal::Require(ContainsClosed(domain, p), "all points must lie inside the domain");
  }
  struct Pending {
    CellId id;
    Rect rect;
    std::vector<Point> members;
  };
  std::vector<Leaf> leaves;
  std::vector<Pending> stack;
  stack.push_back({CellId::Root(), domain, {points.begin(), points.end()}});
  while (!stack.empty()) {
    Pending node = std::move(stack.back());
    stack.pop_back();
    const auto count = static_cast<double>(node.members.size());
    const double biased = std::max(count - node.id.depth() * params.decay,
                                   params.theta - params.decay);
    const double noisy = biased + (params.lambda > 0.0 ? SampleLaplace(rng, params.lambda) : 0.0);
    if (noisy > params.theta && node.id.depth() < max_depth) {
      std::array<std::vector<Point>, kBranching> buckets;
      for (const auto& p : node.members) buckets[QuadrantOf(node.rect, p)].push_back(p);
      // Reverse push so that children are visited in quadrant order.
      for (int code = kBranching - 1; code >= 0; --code) {
        stack.push_back({node.id.Child(code), QuadrantRect(node.rect, code),
                         std::move(buckets[code])});
      }
      continue;
    }
    leaves.push_back({node.id, node.rect, count + LaplaceNoise(rng, 1.0, eps_count),
                      std::isinf(eps_count)});
  }
  return Partition(domain, std::move(leaves));
}

// LDP uniform grid of 2^g x 2^g cells: every user sends a one-hot cell vector
// with Lap(1 / eps) added to every entry; cell counts are the column sums.
// The N-fold sum of Laplace noise in a cell is sampled exactly as the
// difference of two Gamma(N, 1 / eps) variables.
inline Partition LdpGridBuild(std::span<const Point> points, const Rect& domain, int g,
                              double eps, RngStream& rng) {
  internal::Require(g >= 0 && g <= 12, "grid depth g must be in [0, 12]");
  internal::Require(eps > 0.0, "eps must be positive");
  std::vector<double> exact(std::size_t{1} << (2 * g), 0.0);
  for (const auto& p : points) {
    internal::Require(ContainsClosed(domain, p), "all points must lie inside the domain");
    ++exact[static_cast<std::size_t>(CellAtDepth(domain, p, g).bits())];
  }
  const bool noisy = !std::isinf(eps) && !points.empty();
  std::gamma_distribution<double> gamma(noisy ? static_cast<double>(points.size()) : 1.0,
                                        1.0 / (std::isinf(eps) ? 1.0 : eps));
  std::vector<Leaf> leaves;
  leaves.reserve(exact.size());
  for (std::size_t bits = 0; bits < exact.size(); ++bits) {
    CellId id;
    for (int level = g - 1; level >= 0; --level) {
      id = id.Child(static_cast<int>((bits >> (2 * level)) & 3U));
    }
    double count = exact[bits];
    if (noisy) count += gamma(rng) - gamma(rng);
    leaves.push_back({id, CellRect(domain, id), count, !noisy});
  }
  return Partition(domain, std::move(leaves));
}

inline void WriteWorkloadCsv(std::ostream& os, const Workload& w) {
  os << "xmin,xmax,ymin,ymax,true_count\n" << std::setprecision(17);
  for (const auto& q : w.queries) {
    os << q.rect.xmin << ',' << q.rect.xmax << ',' << q.rect.ymin << ',' << q.rect.ymax << ','
       << q.true_count << '\n';
  }
}

inline Workload ReadWorkloadCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "xmin,xmax,ymin,ymax,true_count") {
    throw DataError("workload CSV: missing or unexpected header");
  }
  Workload w;
  w.strategy = "file";
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double v[4];
    long long count = 0;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(ss >> v[0] >> c1 >> v[1] >> c2 >> v[2] >> c3 >> v[3] >> c4 >> count) || c1 != ',' ||
        c2 != ',' || c3 != ',' || c4 != ',') {
      throw DataError("workload CSV: unparseable row: " + line);
    }
    try {
      w.queries.push_back({Rect(v[0], v[1], v[2], v[3]), count});
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("workload CSV: ") + e.what());
    }
  }
  return w;
}

}  // namespace sldp

#endif  // SLDP_SPATIAL_HPP_
