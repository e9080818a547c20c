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

#ifndef SLDP_DATA_HPP_
#define SLDP_DATA_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sldp/error.hpp"
#include "sldp/geometry.hpp"
#include "sldp/rng.hpp"

namespace sldp {

struct Dataset {
  std::vector<Point> points;
  std::optional<std::vector<int>> labels;     // 0/1, one per point
  std::optional<std::vector<double>> values;  // raw value column, when loaded
  Rect domain = Rect::Unit();
  std::string provenance;

  std::size_t size() const { return points.size(); }

  void Validate() const {
    if (labels) internal::Require(labels->size() == points.size(), "one label per point required");
    if (values) internal::Require(values->size() == points.size(), "one value per point required");
    for (const auto& p : points) {
      internal::Require(ContainsClosed(domain, p), "dataset point lies outside its domain");
    }
  }
};

// N i.i.d. points with N(0, sigma^2) coordinates, rejection-sampled into `box`.
inline Dataset SampleTruncatedGaussian(std::size_t n, double sigma, const Rect& box,
                                       RngStream& rng) {
  internal::Require(sigma > 0.0, "sigma must be positive");
  auto axis_mass = [sigma](double lo, double hi) {
    return 0.5 * (std::erf(hi / (sigma * std::sqrt(2.0))) - std::erf(lo / (sigma * std::sqrt(2.0))));
  };
  const double acceptance = axis_mass(box.xmin, box.xmax) * axis_mass(box.ymin, box.ymax);
  if (acceptance < 1e-6) {
    throw InvalidArgument("truncated Gaussian: acceptance probability below 1e-6");
  }
  std::normal_distribution<double> normal(0.0, sigma);
  Dataset ds;
  ds.domain = box;
  ds.provenance = "truncated_gaussian";
  ds.points.reserve(n);
  while (ds.points.size() < n) {
    const double x = normal(rng);
    const double y = normal(rng);
    const Point p(x, y);
    if (ContainsClosed(box, p)) ds.points.push_back(p);
  }
  return ds;
}

// Gaussian clusters around `n_clusters` centers drawn uniformly in the unit
// square; points clipped to the square. `assignment`, when given, receives
// each point's cluster index.
inline Dataset SampleClusterMixture(std::size_t n, int n_clusters, double spread, RngStream& rng,
                                    std::vector<int>* assignment = nullptr) {
  internal::Require(n_clusters >= 1, "need at least one cluster");
  internal::Require(spread > 0.0, "spread must be positive");
  std::vector<Point> centers;
  for (int c = 0; c < n_clusters; ++c) centers.emplace_back(rng.Uniform01(), rng.Uniform01());
  std::normal_distribution<double> normal(0.0, spread);
  Dataset ds;
  ds.provenance = "cluster_mixture";
  ds.points.reserve(n);
  if (assignment) assignment->clear();
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n_clusters));
    const double x = centers[c].x + normal(rng);
    const double y = centers[c].y + normal(rng);
    ds.points.push_back(ClampTo(ds.domain, Point(x, y)));
    if (assignment) assignment->push_back(static_cast<int>(c));
  }
  return ds;
}

struct CsvLoadResult {
  Dataset dataset;
  std::size_t skipped_rows = 0;
};

namespace internal {

inline std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::optional<double> ParseDouble(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::logic_error&) {
    return std::nullopt;
  }
}

}  // namespace internal

// Reads a headered CSV; rows with unparseable numeric fields are skipped and
// counted. The domain is the points' bounding box.
inline CsvLoadResult LoadPointsCsv(const std::string& path, const std::string& x_col,
                                   const std::string& y_col,
                                   const std::optional<std::string>& label_col = std::nullopt,
                                   const std::optional<std::string>& value_col = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  const auto header = internal::SplitCsvLine(line);
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("'" + path + "' has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = column(x_col);
  const std::size_t yi = column(y_col);
  const std::optional<std::size_t> li = label_col ? std::optional(column(*label_col)) : std::nullopt;
  const std::optional<std::size_t> vi = value_col ? std::optional(column(*value_col)) : std::nullopt;

  CsvLoadResult result;
  auto& ds = result.dataset;
  ds.provenance = path;
  std::vector<int> labels;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = internal::SplitCsvLine(line);
    auto field = [&](std::size_t i) -> std::optional<double> {
      if (i >= fields.size()) return std::nullopt;
      return internal::ParseDouble(fields[i]);
    };
    const auto x = field(xi);
    const auto y = field(yi);
    std::optional<double> label = li ? field(*li) : std::optional<double>(0.0);
    std::optional<double> value = vi ? field(*vi) : std::optional<double>(0.0);
    if (!x || !y || !label || !value || (li && *label != 0.0 && *label != 1.0)) {
      ++result.skipped_rows;
      continue;
    }
    ds.points.emplace_back(*x, *y);
    if (li) labels.push_back(static_cast<int>(*label));
    if (vi) values.push_back(*value);
  }
  if (ds.points.empty()) throw DataError("'" + path + "' holds no parseable rows");
  if (li) ds.labels = std::move(labels);
  if (vi) ds.values = std::move(values);
  double x0 = ds.points[0].x, x1 = x0, y0 = ds.points[0].y, y1 = y0;
  for (const auto& p : ds.points) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  ds.domain = Rect(x0, x1, y0, y1);
  return result;
}

// Per-axis affine map of the bounding box onto [0, 1]^2; a constant axis maps
// to 0.5.
inline Dataset NormalizeToUnitSquare(const Dataset& ds) {
  if (ds.points.empty()) throw DataError("cannot normalize an empty dataset");
  double x0 = ds.points[0].x, x1 = x0, y0 = ds.points[0].y, y1 = y0;
  for (const auto& p : ds.points) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  auto map = [](double v, double lo, double hi) {
    if (hi == lo) return 0.5;
    return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  };
  Dataset out = ds;
  out.domain = Rect::Unit();
  for (auto& p : out.points) p = Point(map(p.x, x0, x1), map(p.y, y0, y1));
  return out;
}

inline double Median(std::vector<double> values) {
  internal::Require(!values.empty(), "median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// 1 iff the value exceeds the median.
inline std::vector<int> BinarizeLabelsByMedian(std::span<const double> values) {
  internal::Require(!values.empty(), "cannot binarize an empty sample");
  const double median = Median({values.begin(), values.end()});
  std::vector<int> labels;
  labels.reserve(values.size());
  for (double v : values) labels.push_back(v > median ? 1 : 0);
  return labels;
}

// `n` distinct indices of [0, size), uniformly without replacement.
inline std::vector<std::size_t> SampleWithoutReplacement(std::size_t size, std::size_t n,
                                                         RngStream& rng) {
  if (n > size) throw DataError("cannot draw a subset larger than the dataset");
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

inline Dataset Subsample(const Dataset& ds, std::size_t n, RngStream& rng) {
  const auto idx = SampleWithoutReplacement(ds.size(), n, rng);
  Dataset out;
  out.domain = ds.domain;
  out.provenance = ds.provenance;
  out.points.reserve(n);
  if (ds.labels) out.labels.emplace();
  if (ds.values) out.values.emplace();
  for (std::size_t i : idx) {
    out.points.push_back(ds.points[i]);
    if (ds.labels) out.labels->push_back((*ds.labels)[i]);
    if (ds.values) out.values->push_back((*ds.values)[i]);
  }
  return out;
}

// `x,y[,label]`.
inline void WriteDatasetCsv(std::ostream& os, std::span<const Point> points,
                            std::optional<std::span<const int>> labels = std::nullopt) {
  if (labels) internal::Require(labels->size() == points.size(), "one label per point required");
  os << (labels ? "x,y,label\n" : "x,y\n") << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << points[i].x << ',' << points[i].y;
    if (labels) os << ',' << (*labels)[i];
    os << '\n';
  }
}

}  // namespace sldp

#endif  // SLDP_DATA_HPP_
