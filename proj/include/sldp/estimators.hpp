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

#ifndef SLDP_ESTIMATORS_HPP_
#define SLDP_ESTIMATORS_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <utility>

#include "sldp/error.hpp"
#include "sldp/geometry.hpp"
#include "sldp/mechanisms.hpp"
#include "sldp/rng.hpp"
#include "sldp/scheme.hpp"

namespace sldp {

// A function f with 0 <= f <= C on the domain. The built-in families have a
// closed-form oscillation (max - min) over any rectangle.
class BoundedFunction {
 public:
  enum class Family { kSquaredNorm, kGaussianBump, kCustom };

  // f(x) = |x|^2 with C the maximum over `domain`.
  static BoundedFunction SquaredNorm(const Rect& domain) {
    BoundedFunction f(Family::kSquaredNorm, 0.0, {});
    f.bound_ = MaxSquaredNorm(domain);
    return f;
  }

  // f(x) = exp(-|x|^2 / (2 sigma^2)), C = 1.
  static BoundedFunction GaussianBump(double sigma) {
    internal::Require(sigma > 0.0, "sigma must be positive");
    BoundedFunction f(Family::kGaussianBump, sigma, {});
    f.bound_ = 1.0;
    return f;
  }

  static BoundedFunction Custom(std::function<double(const Point&)> fn, double bound) {
    internal::Require(bound > 0.0, "range bound must be positive");
    internal::Require(static_cast<bool>(fn), "custom function must be callable");
    BoundedFunction f(Family::kCustom, 0.0, std::move(fn));
    f.bound_ = bound;
    return f;
  }

  double operator()(const Point& p) const {
    switch (family_) {
      case Family::kSquaredNorm:
        return p.x * p.x + p.y * p.y;
      case Family::kGaussianBump:
        return std::exp(-(p.x * p.x + p.y * p.y) / (2.0 * sigma_ * sigma_));
      case Family::kCustom:
        return custom_(p);
    }
    return 0.0;
  }

  double bound() const { return bound_; }
  Family family() const { return family_; }
  double sigma() const { return sigma_; }

  static double MinSquaredNorm(const Rect& r) {
    auto axis = [](double lo, double hi) {
      if (lo <= 0.0 && 0.0 <= hi) return 0.0;
      const double d = std::min(std::abs(lo), std::abs(hi));
      return d * d;
    };
    return axis(r.xmin, r.xmax) + axis(r.ymin, r.ymax);
  }

  static double MaxSquaredNorm(const Rect& r) {
    return std::max(r.xmin * r.xmin, r.xmax * r.xmax) + std::max(r.ymin * r.ymin, r.ymax * r.ymax);
  }

 private:
  BoundedFunction(Family family, double sigma, std::function<double(const Point&)> fn)
      : family_(family), sigma_(sigma), custom_(std::move(fn)) {}

  Family family_;
  double sigma_ = 0.0;
  double bound_ = 0.0;
  std::function<double(const Point&)> custom_;
};

// max f - min f over `region`. Throws for custom functions, whose extrema
// are not known in closed form.
inline double RegionOscillation(const BoundedFunction& f, const Rect& region) {
  const double lo = BoundedFunction::MinSquaredNorm(region);
  const double hi = BoundedFunction::MaxSquaredNorm(region);
  switch (f.family()) {
    case BoundedFunction::Family::kSquaredNorm:
      return hi - lo;
    case BoundedFunction::Family::kGaussianBump: {
      const double s2 = 2.0 * f.sigma() * f.sigma();
      return std::exp(-lo / s2) - std::exp(-hi / s2);
    }
    case BoundedFunction::Family::kCustom:
      break;
  }
  throw InvalidArgument("region oscillation is not available for custom functions");
}

namespace internal {

inline double CheckedMean(std::span<const double> values, double bound) {
  Require(!values.empty(), "mean of an empty sample");
  Require(bound > 0.0, "range bound C must be positive");
  double sum = 0.0;
  for (double v : values) {
    Require(v >= 0.0 && v <= bound, "values must lie in [0, C]");
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

}  // namespace internal

// Central DP: mean + Lap(C / (N eps)).
inline double DpMean(std::span<const double> values, double bound, double eps, RngStream& rng) {
  const double mean = internal::CheckedMean(values, bound);
  return mean + LaplaceNoise(rng, bound / static_cast<double>(values.size()), eps);
}

// LDP: every user adds Lap(C / eps); user i draws from rng.Substream(i).
inline double LdpMean(std::span<const double> values, double bound, double eps,
                      const RngStream& rng) {
  internal::CheckedMean(values, bound);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    RngStream user = rng.Substream(i);
    sum += values[i] + LaplaceNoise(user, bound, eps);
  }
  return sum / static_cast<double>(values.size());
}

// SLDP: user i adds Lap(osc(f, U_i) / eps) for its own privacy region U_i.
inline double SldpMean(std::span<const Point> points, std::span<const Rect> regions,
                       const BoundedFunction& f, double eps, const RngStream& rng) {
  internal::Require(!points.empty(), "mean of an empty sample");
  internal::Require(points.size() == regions.size(), "one region per point required");
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!ContainsClosed(regions[i], points[i])) {
      throw InvalidArgument("point lies outside its privacy region");
    }
    RngStream user = rng.Substream(i);
    sum += f(points[i]) + LaplaceNoise(user, RegionOscillation(f, regions[i]), eps);
  }
  return sum / static_cast<double>(points.size());
}

// Centroid of the leaf holding `p`.
inline Point PerturbQuantize(const Point& p, const Partition& partition) {
  return Centroid(partition.LeafAt(p).rect);
}

// Centroid of the leaf holding `p` plus per-axis Laplace noise with scale
// (leaf side along that axis) / eps.
inline Point PerturbSplit(const Point& p, const Partition& partition, double eps,
                          RngStream& rng) {
  const Rect& leaf = partition.LeafAt(p).rect;
  const Point c = Centroid(leaf);
  const double nx = LaplaceNoise(rng, leaf.width(), eps);
  const double ny = LaplaceNoise(rng, leaf.height(), eps);
  return Point(c.x + nx, c.y + ny);
}

// Per-coordinate Laplace noise, scale (domain side) / eps, then clipped to
// the domain. On the unit square the scale is 1 / eps.
inline Point PerturbLdp(const Point& p, const Rect& domain, double eps, RngStream& rng) {
  const double nx = LaplaceNoise(rng, domain.width(), eps);
  const double ny = LaplaceNoise(rng, domain.height(), eps);
  return ClampTo(domain, Point(p.x + nx, p.y + ny));
}

// Planar Laplace; not clipped.
inline Point PerturbGeo(const Point& p, double eps, RngStream& rng) {
  return SamplePlanarLaplace(rng, p, eps);
}

}  // namespace sldp

#endif  // SLDP_ESTIMATORS_HPP_
