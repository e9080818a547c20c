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

#ifndef SLDP_SCHEME_HPP_
#define SLDP_SCHEME_HPP_

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sldp/error.hpp"
#include "sldp/geometry.hpp"

namespace sldp {

// Address of a cell in the quadtree hierarchy: the sequence of quadrant codes
// from the root. Codes are packed two bits per level, first level highest.
class CellId {
 public:
  static constexpr int kMaxDepth = 32;

  CellId() = default;

  static CellId Root() { return CellId(); }

  static CellId FromPath(std::span<const int> path) {
    CellId id;
    for (int code : path) id = id.Child(code);
    return id;
  }

  // Parses a quadrant-code string such as "203"; "" is the root.
  static CellId Parse(std::string_view path) {
    CellId id;
    for (char c : path) {
      if (c < '0' || c > '3') {
        throw InvalidArgument("invalid quadrant code in cell path '" +
                              std::string(path) + "'");
      }
      id = id.Child(c - '0');
    }
    return id;
  }

  int depth() const { return depth_; }
  bool is_root() const { return depth_ == 0; }

  // Quadrant code taken at `level` (0-based from the root).
  int CodeAt(int level) const {
    internal::Require(level >= 0 && level < depth_, "CellId level out of range");
    return static_cast<int>((bits_ >> (2 * (depth_ - 1 - level))) & 3U);
  }

  int LastCode() const { return CodeAt(depth_ - 1); }

  CellId Child(int code) const {
    internal::Require(code >= 0 && code < kBranching, "quadrant code must be in [0,4)");
    if (depth_ >= kMaxDepth) {
      throw InvalidArgument("CellId depth overflow: cannot refine beyond depth " +
                            std::to_string(kMaxDepth));
    }
    CellId c;
    c.bits_ = (bits_ << 2) | static_cast<std::uint64_t>(code);
    c.depth_ = depth_ + 1;
    return c;
  }

  CellId Parent() const {
    internal::Require(depth_ > 0, "root cell has no parent");
    CellId p;
    p.bits_ = bits_ >> 2;
    p.depth_ = depth_ - 1;
    return p;
  }

  // Ancestor at `depth` (or the cell itself when depths match).
  CellId Ancestor(int depth) const {
    internal::Require(depth >= 0 && depth <= depth_, "ancestor depth out of range");
    CellId a;
    a.bits_ = depth == 0 ? 0 : bits_ >> (2 * (depth_ - depth));
    a.depth_ = depth;
    return a;
  }

  bool IsAncestorOf(const CellId& other) const {
    return depth_ <= other.depth_ && other.Ancestor(depth_) == *this;
  }

  std::vector<int> Path() const {
    std::vector<int> path(static_cast<std::size_t>(depth_));
    for (int i = 0; i < depth_; ++i) path[static_cast<std::size_t>(i)] = CodeAt(i);
    return path;
  }

  std::string ToString() const {
    std::string s;
    s.reserve(static_cast<std::size_t>(depth_));
    for (int i = 0; i < depth_; ++i) s.push_back(static_cast<char>('0' + CodeAt(i)));
    return s;
  }

  std::uint64_t bits() const { return bits_; }

  friend bool operator==(const CellId&, const CellId&) = default;

  // Lexicographic order on paths (a prefix sorts before its extensions).
  friend std::strong_ordering operator<=>(const CellId& a, const CellId& b) {
    const int common = std::min(a.depth_, b.depth_);
    const std::uint64_t pa = common == 0 ? 0 : a.bits_ >> (2 * (a.depth_ - common));
    const std::uint64_t pb = common == 0 ? 0 : b.bits_ >> (2 * (b.depth_ - common));
    if (pa != pb) return pa <=> pb;
    return a.depth_ <=> b.depth_;
  }

 private:
  std::uint64_t bits_ = 0;
  int depth_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const CellId& id) {
  return os << '"' << id.ToString() << '"';
}

struct CellIdHash {
  std::size_t operator()(const CellId& id) const {
    return std::hash<std::uint64_t>{}(id.bits() * 0x9e3779b97f4a7c15ULL ^
                                      static_cast<std::uint64_t>(id.depth()));
  }
};

// Rect of `id` under recursive quadrant bisection of `domain`.
inline Rect CellRect(const Rect& domain, const CellId& id) {
  Rect r = domain;
  for (int level = 0; level < id.depth(); ++level) r = QuadrantRect(r, id.CodeAt(level));
  return r;
}

// The four children of `id`, ordered by quadrant code.
inline std::array<CellId, kBranching> Children(const CellId& id) {
  if (id.depth() >= CellId::kMaxDepth) {
    throw InvalidArgument("cannot split a cell at the maximum depth");
  }
  return {id.Child(0), id.Child(1), id.Child(2), id.Child(3)};
}

// The depth-`depth` cell holding `p`.
inline CellId CellAtDepth(const Rect& domain, const Point& p, int depth) {
  CellId id;
  Rect r = domain;
  for (int level = 0; level < depth; ++level) {
    const int code = QuadrantOf(r, p);
    id = id.Child(code);
    r = QuadrantRect(r, code);
  }
  return id;
}

struct Leaf {
  CellId id;
  Rect rect;
  double count = 0.0;
  // True when `count` is the exact number of points; false when noisy.
  bool exact = true;
};

// A set of disjoint quadtree leaves covering `domain`, sorted by path.
class Partition {
 public:
  Partition() : Partition(Rect::Unit(), {Leaf{CellId::Root(), Rect::Unit(), 0.0, true}}) {}

  Partition(const Rect& domain, std::vector<Leaf> leaves)
      : domain_(domain), leaves_(std::move(leaves)) {
    std::sort(leaves_.begin(), leaves_.end(),
              [](const Leaf& a, const Leaf& b) { return a.id < b.id; });
    Validate();
    index_.reserve(leaves_.size());
    for (std::size_t i = 0; i < leaves_.size(); ++i) index_.emplace(leaves_[i].id, i);
  }

  static Partition RootOnly(const Rect& domain, double count, bool exact = true) {
    return Partition(domain, {Leaf{CellId::Root(), domain, count, exact}});
  }

  const Rect& domain() const { return domain_; }
  std::span<const Leaf> leaves() const { return leaves_; }
  std::size_t size() const { return leaves_.size(); }

  int max_depth() const {
    int d = 0;
    for (const auto& leaf : leaves_) d = std::max(d, leaf.id.depth());
    return d;
  }

  double TotalCount() const {
    double total = 0.0;
    for (const auto& leaf : leaves_) total += leaf.count;
    return total;
  }

  bool HasLeaf(const CellId& id) const { return index_.contains(id); }

  // Index of the unique leaf containing `p`.
  std::size_t LocateIndex(const Point& p) const {
    if (!ContainsClosed(domain_, p)) {
      std::ostringstream msg;
      msg << "point " << p << " lies outside the partition domain " << domain_;
      throw InvalidArgument(msg.str());
    }
    CellId id;
    Rect r = domain_;
    for (;;) {
      if (auto it = index_.find(id); it != index_.end()) return it->second;
      const int code = QuadrantOf(r, p);
      id = id.Child(code);
      r = QuadrantRect(r, code);
    }
  }

  CellId Locate(const Point& p) const { return leaves_[LocateIndex(p)].id; }
  const Leaf& LeafAt(const Point& p) const { return leaves_[LocateIndex(p)]; }

  // Same cells with the same counts; the exact/noisy flag is not compared.
  bool SameCellsAndCounts(const Partition& other) const {
    if (!(domain_ == other.domain_) || leaves_.size() != other.leaves_.size()) return false;
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
      if (leaves_[i].id != other.leaves_[i].id ||
          leaves_[i].count != other.leaves_[i].count) {
        return false;
      }
    }
    return true;
  }

  friend bool operator==(const Partition& a, const Partition& b) {
    if (!a.SameCellsAndCounts(b)) return false;
    for (std::size_t i = 0; i < a.leaves_.size(); ++i) {
      if (a.leaves_[i].exact != b.leaves_[i].exact) return false;
    }
    return true;
  }

 private:
  // Leaves must be prefix-free and their 4^-depth areas must sum to one,
  // which together mean an exact disjoint cover of the domain.
  void Validate() const {
    internal::Require(!leaves_.empty(), "partition needs at least one leaf");
    unsigned __int128 mass = 0;
    const unsigned __int128 whole = static_cast<unsigned __int128>(1) << 64;
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
      const int d = leaves_[i].id.depth();
      mass += static_cast<unsigned __int128>(1) << (64 - 2 * d);
      if (i > 0 && leaves_[i - 1].id.IsAncestorOf(leaves_[i].id)) {
        throw InvalidArgument("partition leaves overlap: " + leaves_[i - 1].id.ToString() +
                              " contains " + leaves_[i].id.ToString());
      }
    }
    internal::Require(mass == whole, "partition leaves do not cover the domain");
  }

  Rect domain_;
  std::vector<Leaf> leaves_;
  std::unordered_map<CellId, std::size_t, CellIdHash> index_;
};

// Non-private canonical partition: a cell below depth `max_depth` is replaced
// by its four children iff every child holds at least `k` points.
inline Partition CanonicalPartition(std::span<const Point> points, const Rect& domain,
                                    int k, int max_depth) {
  internal::Require(k >= 1, "k must be at least 1");
  internal::Require(max_depth >= 0 && max_depth <= CellId::kMaxDepth,
                    "max depth must be in [0, 32]");
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
    Pending cell = std::move(stack.back());
    stack.pop_back();
    if (cell.id.depth() < max_depth) {
      std::array<std::vector<Point>, kBranching> buckets;
      for (const auto& p : cell.members) buckets[QuadrantOf(cell.rect, p)].push_back(p);
      const bool split = std::all_of(buckets.begin(), buckets.end(), [k](const auto& b) {
        return b.size() >= static_cast<std::size_t>(k);
      });
      if (split) {
        for (int code = 0; code < kBranching; ++code) {
          stack.push_back({cell.id.Child(code), QuadrantRect(cell.rect, code),
                           std::move(buckets[code])});
        }
        continue;
      }
    }
    leaves.push_back({cell.id, cell.rect, static_cast<double>(cell.members.size()), true});
  }
  return Partition(domain, std::move(leaves));
}

// CSV with header `cell_path,xmin,xmax,ymin,ymax,count,exact`.
inline void WritePartitionCsv(std::ostream& os, const Partition& partition) {
  os << "cell_path,xmin,xmax,ymin,ymax,count,exact\n";
  os << std::setprecision(17);
  for (const auto& leaf : partition.leaves()) {
    os << leaf.id.ToString() << ',' << leaf.rect.xmin << ',' << leaf.rect.xmax << ','
       << leaf.rect.ymin << ',' << leaf.rect.ymax << ',' << leaf.count << ','
       << (leaf.exact ? 1 : 0) << '\n';
  }
}

inline Partition ReadPartitionCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "cell_path,xmin,xmax,ymin,ymax,count,exact") {
    throw DataError("partition CSV: missing or unexpected header");
  }
  std::vector<Leaf> leaves;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 7) throw DataError("partition CSV: expected 7 fields: " + line);
    try {
      Leaf leaf;
      leaf.id = CellId::Parse(fields[0]);
      leaf.rect = Rect(std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3]),
                       std::stod(fields[4]));
      leaf.count = std::stod(fields[5]);
      leaf.exact = fields[6] == "1";
      if (leaves.empty()) {
        xmin = leaf.rect.xmin, xmax = leaf.rect.xmax, ymin = leaf.rect.ymin, ymax = leaf.rect.ymax;
      } else {
        xmin = std::min(xmin, leaf.rect.xmin), xmax = std::max(xmax, leaf.rect.xmax);
        ymin = std::min(ymin, leaf.rect.ymin), ymax = std::max(ymax, leaf.rect.ymax);
      }
      leaves.push_back(leaf);
    } catch (const std::logic_error&) {
      throw DataError("partition CSV: unparseable row: " + line);
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("partition CSV: ") + e.what());
    }
  }
  if (leaves.empty()) throw DataError("partition CSV: no leaves");
  try {
    return Partition(Rect(xmin, xmax, ymin, ymax), std::move(leaves));
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("partition CSV: ") + e.what());
  }
}

}  // namespace sldp

#endif  // SLDP_SCHEME_HPP_
