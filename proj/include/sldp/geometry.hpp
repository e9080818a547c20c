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

#ifndef SLDP_GEOMETRY_HPP_
#define SLDP_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sldp/error.hpp"

namespace sldp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  Point() = default;
  Point(double px, double py) : x(px), y(py) {
    internal::Require(std::isfinite(px) && std::isfinite(py),
                      "Point coordinates must be finite");
  }

  friend bool operator==(const Point&, const Point&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Point& p) {
  return os << '(' << p.x << ", " << p.y << ')';
}

// Axis-aligned rectangle [xmin, xmax) x [ymin, ymax).
struct Rect {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  Rect() = default;
  Rect(double x0, double x1, double y0, double y1)
      : xmin(x0), xmax(x1), ymin(y0), ymax(y1) {
    internal::Require(std::isfinite(x0) && std::isfinite(x1) &&
                          std::isfinite(y0) && std::isfinite(y1),
                      "Rect bounds must be finite");
    internal::Require(x0 <= x1 && y0 <= y1,
                      "Rect requires xmin <= xmax and ymin <= ymax");
  }

  static Rect Unit() { return Rect(0.0, 1.0, 0.0, 1.0); }

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Rect& r) {
  return os << '[' << r.xmin << ',' << r.xmax << ")x[" << r.ymin << ','
            << r.ymax << ')';
}

inline double Area(const Rect& r) { return r.width() * r.height(); }

// Half-open membership: xmin <= x < xmax and ymin <= y < ymax.
inline bool Contains(const Rect& r, const Point& p) {
  return r.xmin <= p.x && p.x < r.xmax && r.ymin <= p.y && p.y < r.ymax;
}

inline bool ContainsClosed(const Rect& r, const Point& p) {
  return r.xmin <= p.x && p.x <= r.xmax && r.ymin <= p.y && p.y <= r.ymax;
}

// Membership of a cell of a partition of `domain`: half-open, except that
// cells touching the domain's right/top edge own that edge.
inline bool CellContains(const Rect& domain, const Rect& cell, const Point& p) {
  const bool in_x = cell.xmin <= p.x &&
                    (p.x < cell.xmax || (cell.xmax == domain.xmax && p.x == cell.xmax));
  const bool in_y = cell.ymin <= p.y &&
                    (p.y < cell.ymax || (cell.ymax == domain.ymax && p.y == cell.ymax));
  return in_x && in_y;
}

inline bool RectWithin(const Rect& inner, const Rect& outer) {
  return outer.xmin <= inner.xmin && inner.xmax <= outer.xmax &&
         outer.ymin <= inner.ymin && inner.ymax <= outer.ymax;
}

inline double IntersectionArea(const Rect& a, const Rect& b) {
  const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

inline Point Centroid(const Rect& r) {
  return Point(0.5 * (r.xmin + r.xmax), 0.5 * (r.ymin + r.ymax));
}

inline Point ClampTo(const Rect& r, const Point& p) {
  return Point(std::clamp(p.x, r.xmin, r.xmax), std::clamp(p.y, r.ymin, r.ymax));
}

// Quadrant codes: 0 lower-left, 1 lower-right, 2 upper-left, 3 upper-right.
inline constexpr int kBranching = 4;

inline Rect QuadrantRect(const Rect& r, int code) {
  const double xmid = 0.5 * (r.xmin + r.xmax);
  const double ymid = 0.5 * (r.ymin + r.ymax);
  const bool right = (code & 1) != 0;
  const bool upper = (code & 2) != 0;
  return Rect(right ? xmid : r.xmin, right ? r.xmax : xmid,
              upper ? ymid : r.ymin, upper ? r.ymax : ymid);
}

// Code of the quadrant of `r` holding `p` under the half-open convention.
inline int QuadrantOf(const Rect& r, const Point& p) {
  const double xmid = 0.5 * (r.xmin + r.xmax);
  const double ymid = 0.5 * (r.ymin + r.ymax);
  return (p.x >= xmid ? 1 : 0) | (p.y >= ymid ? 2 : 0);
}

}  // namespace sldp

#endif  // SLDP_GEOMETRY_HPP_
