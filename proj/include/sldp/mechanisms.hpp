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

#ifndef SLDP_MECHANISMS_HPP_
#define SLDP_MECHANISMS_HPP_

#include <cmath>
#include <numbers>

#include "sldp/error.hpp"
#include "sldp/geometry.hpp"
#include "sldp/rng.hpp"

namespace sldp {

// One draw from Lap(0, b), density exp(-|z|/b) / 2b, by inverse CDF.
inline double SampleLaplace(RngStream& rng, double b) {
  internal::Require(b > 0.0 && std::isfinite(b), "Laplace scale must be positive and finite");
  const double u = rng.Uniform01() - 0.5;
  return u < 0.0 ? b * std::log1p(2.0 * u) : -b * std::log1p(-2.0 * u);
}

// Exponential with the given rate.
inline double SampleExponential(RngStream& rng, double rate) {
  internal::Require(rate > 0.0, "exponential rate must be positive");
  return -std::log(rng.Uniform01()) / rate;
}

// Laplace noise calibrated to `sensitivity / eps`. An infinite budget or a
// zero sensitivity yields exactly zero and consumes no randomness.
inline double LaplaceNoise(RngStream& rng, double sensitivity, double eps) {
  internal::Require(eps > 0.0, "privacy budget must be positive");
  internal::Require(sensitivity >= 0.0, "sensitivity must be non-negative");
  if (std::isinf(eps) || sensitivity == 0.0) return 0.0;
  return SampleLaplace(rng, sensitivity / eps);
}

// Planar Laplace mechanism for eps-geo-indistinguishability: a uniform angle
// and a Gamma(2, eps) radius, the latter as a sum of two Exponential(eps).
inline Point SamplePlanarLaplace(RngStream& rng, const Point& center, double eps) {
  internal::Require(eps > 0.0, "privacy budget must be positive");
  if (std::isinf(eps)) return center;
  const double theta = 2.0 * std::numbers::pi * rng.Uniform01();
  const double r = SampleExponential(rng, eps) + SampleExponential(rng, eps);
  return Point(center.x + r * std::cos(theta), center.y + r * std::sin(theta));
}

}  // namespace sldp

#endif  // SLDP_MECHANISMS_HPP_
