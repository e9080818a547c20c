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

#ifndef SLDP_EVAL_HPP_
#define SLDP_EVAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "sldp/data.hpp"
#include "sldp/error.hpp"
#include "sldp/geometry.hpp"
#include "sldp/rng.hpp"

namespace sldp {

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Random partition of [0, n) into round(n * train_fraction) training indices
// and the rest.
inline TrainTestSplit SplitIndices(std::size_t n, const SplitSpec& spec) {
  internal::Require(spec.train_fraction > 0.0 && spec.train_fraction < 1.0,
                    "train fraction must be in (0, 1)");
  RngStream rng(spec.seed, 0x5b1d);
  auto order = SampleWithoutReplacement(n, n, rng);
  const auto n_train =
      static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  TrainTestSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

// k-nearest-neighbour vote (Euclidean). Weighted votes use 1 / (d + 1e-12).
// Equidistant neighbours are taken in training order; tied votes go to 0.
inline std::vector<int> KnnPredict(std::span<const Point> train, std::span<const int> labels,
                                   std::span<const Point> test, int k, bool distance_weighted) {
  if (train.empty()) throw InvalidArgument("kNN needs a non-empty training set");
  internal::Require(labels.size() == train.size(), "one label per training point required");
  internal::Require(k >= 1 && static_cast<std::size_t>(k) <= train.size(),
                    "k must be in [1, |train|]");
  std::vector<std::pair<double, std::size_t>> dist(train.size());
  std::vector<int> out;
  out.reserve(test.size());
  for (const auto& q : test) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double dx = train[i].x - q.x;
      const double dy = train[i].y - q.y;
      dist[i] = {dx * dx + dy * dy, i};
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    double vote[2] = {0.0, 0.0};
    for (int i = 0; i < k; ++i) {
      const auto& [d2, j] = dist[static_cast<std::size_t>(i)];
      vote[labels[j] == 1 ? 1 : 0] += distance_weighted ? 1.0 / (std::sqrt(d2) + 1e-12) : 1.0;
    }
    out.push_back(vote[1] > vote[0] ? 1 : 0);
  }
  return out;
}

// Weights (w_x, w_y, bias).
using LogisticWeights = std::array<double, 3>;

inline double LogisticMargin(const LogisticWeights& w, const Point& p) {
  return w[0] * p.x + w[1] * p.y + w[2];
}

// Mean negative log-likelihood.
inline double LogisticLoss(const LogisticWeights& w, std::span<const Point> x,
                           std::span<const int> y) {
  internal::Require(x.size() == y.size() && !x.empty(), "one label per point required");
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = LogisticMargin(w, x[i]);
    // log(1 + e^z) - y z, stable for large |z|
    loss += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y[i] * z;
  }
  return loss / static_cast<double>(x.size());
}

inline LogisticWeights LogisticGradient(const LogisticWeights& w, std::span<const Point> x,
                                        std::span<const int> y) {
  internal::Require(x.size() == y.size() && !x.empty(), "one label per point required");
  LogisticWeights g{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = 1.0 / (1.0 + std::exp(-LogisticMargin(w, x[i]))) - y[i];
    g[0] += r * x[i].x;
    g[1] += r * x[i].y;
    g[2] += r;
  }
  for (double& v : g) v /= static_cast<double>(x.size());
  return g;
}

// Full-batch gradient descent from zero weights. A step that would raise the
// loss is rejected and the learning rate halved, so the loss never increases.
inline LogisticWeights LogregFit(std::span<const Point> x, std::span<const int> y, int iters,
                                 double lr) {
  internal::Require(x.size() == y.size() && !x.empty(), "one label per point required");
  internal::Require(lr > 0.0 && iters >= 0, "lr must be positive and iters non-negative");
  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == y.size()) {
    throw InvalidArgument("logistic regression needs both classes");
  }
  LogisticWeights w{0.0, 0.0, 0.0};
  double loss = LogisticLoss(w, x, y);
  for (int it = 0; it < iters && lr > 1e-12; ++it) {
    const auto g = LogisticGradient(w, x, y);
    const LogisticWeights next{w[0] - lr * g[0], w[1] - lr * g[1], w[2] - lr * g[2]};
    const double next_loss = LogisticLoss(next, x, y);
    if (next_loss > loss) {
      lr *= 0.5;
      continue;
    }
    w = next;
    loss = next_loss;
  }
  return w;
}

inline std::vector<int> LogregPredict(const LogisticWeights& w, std::span<const Point> x) {
  std::vector<int> out;
  out.reserve(x.size());
  for (const auto& p : x) out.push_back(LogisticMargin(w, p) > 0.0 ? 1 : 0);
  return out;
}

struct BinaryScores {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Positive class 1; a zero denominator yields 0.
inline BinaryScores F1PrecisionRecall(std::span<const int> pred, std::span<const int> truth) {
  internal::Require(pred.size() == truth.size(), "prediction and truth lengths differ");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1 && truth[i] == 1) ++tp;
    if (pred[i] == 1 && truth[i] != 1) ++fp;
    if (pred[i] != 1 && truth[i] == 1) ++fn;
  }
  BinaryScores s;
  s.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace sldp

#endif  // SLDP_EVAL_HPP_
