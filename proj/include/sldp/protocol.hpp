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

#ifndef SLDP_PROTOCOL_HPP_
#define SLDP_PROTOCOL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "sldp/error.hpp"
#include "sldp/geometry.hpp"
#include "sldp/mechanisms.hpp"
#include "sldp/rng.hpp"
#include "sldp/scheme.hpp"

namespace sldp {

// Tail parameter x(delta) = ln(4 T / delta): a union bound over at most T
// rounds of four sibling comparisons keeps the overshoot probability <= delta.
inline double DefaultTailParameter(double delta, int max_depth) {
  internal::Require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
  internal::Require(max_depth >= 1, "max depth must be at least 1");
  return std::log(4.0 * max_depth / delta);
}

// Split margin (sqrt(2 n x) + 6 x) / eps for a child whose parent has
// `n_parent` responders. Zero when eps is infinite.
inline double ComputeDelta(double eps, double n_parent, double x) {
  internal::Require(eps > 0.0, "eps must be positive");
  internal::Require(n_parent >= 0.0 && x >= 0.0, "n_parent and x must be non-negative");
  return (std::sqrt(2.0 * n_parent * x) + 6.0 * x) / eps;
}

struct ProtocolConfig {
  double eps = 1.0;         // budget of every single report
  double delta = 0.05;
  double x_of_delta = DefaultTailParameter(0.05, 20);
  double Q = 20.0;          // count threshold
  int T = 20;               // depth cap
  int k = 20;               // target anonymity
  Rect domain = Rect::Unit();

  // Q = k and x(delta) = ln(4 T / delta).
  static ProtocolConfig ForAnonymity(int k, double eps, double delta = 0.05, int T = 20,
                                     const Rect& domain = Rect::Unit()) {
    ProtocolConfig cfg;
    cfg.eps = eps;
    cfg.delta = delta;
    cfg.T = T;
    cfg.k = k;
    cfg.Q = static_cast<double>(k);
    cfg.domain = domain;
    cfg.x_of_delta = DefaultTailParameter(delta, T);
    cfg.Validate();
    return cfg;
  }

  void Validate() const {
    internal::Require(eps > 0.0, "eps must be positive");
    internal::Require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
    internal::Require(x_of_delta > 0.0, "x(delta) must be positive");
    internal::Require(Q >= 1.0, "Q must be at least 1");
    internal::Require(k >= 1, "k must be at least 1");
    internal::Require(T >= 1 && T <= CellId::kMaxDepth, "T must be in [1, 32]");
  }
};

// Server message of round `round`. Regular broadcasts list the depth-`round`
// children of the active cells. The closing broadcast that ends a run lists
// the depth-cap cells finalized without a split test (depth `round - 1`),
// and is empty when there are none.
struct Broadcast {
  int round = 0;
  std::vector<CellId> cells;  // sorted

  friend bool operator==(const Broadcast&, const Broadcast&) = default;
};

struct Report {
  int round = 0;
  std::uint32_t user = 0;
  CellId cell;
  double value = 0.0;

  friend bool operator==(const Report&, const Report&) = default;
};

// Everything sent over the public channel during one run, in order.
struct Transcript {
  std::vector<Broadcast> broadcasts;
  std::vector<Report> reports;  // grouped by round, in delivery order
  std::vector<int> stop_rounds;  // per user: number of rounds reported

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

// Indicator values a client emitted in one round, in quadrant order.
using RoundIndicators = std::array<std::uint8_t, kBranching>;

// User side of the region discovery protocol.
class Client {
 public:
  struct Finished {
    CellId region;
  };
  using RoundResult = std::variant<std::vector<Report>, Finished>;

  Client(const Point& x, std::uint32_t pseudonym, const Rect& domain, double eps,
         int max_depth, RngStream noise)
      : x_(x),
        pseudonym_(pseudonym),
        domain_(domain),
        eps_(eps),
        max_depth_(max_depth),
        noise_(noise),
        region_rect_(domain) {
    internal::Require(ContainsClosed(domain, x), "client point lies outside the domain");
    internal::Require(eps > 0.0, "eps must be positive");
  }

  // Handles the broadcast of the next round: either reports one noisy
  // membership indicator per child of the current region, or finishes.
  RoundResult Round(const Broadcast& broadcast) {
    if (finished_) throw ProtocolDesync("client already finished");
    if (broadcast.round != round_ + 1) {
      throw ProtocolDesync("client expected round " + std::to_string(round_ + 1) +
                           ", got " + std::to_string(broadcast.round));
    }
    ++round_;
    const auto& cells = broadcast.cells;

    if (region_.depth() == max_depth_) {
      // Only a closing broadcast can reach a client at the depth cap.
      if (std::binary_search(cells.begin(), cells.end(), region_)) return Finish(region_);
      return Finish(previous_);
    }

    const auto children = Children(region_);
    auto it = std::lower_bound(cells.begin(), cells.end(), children[0]);
    int present = 0;
    for (int code = 0; code < kBranching && it != cells.end(); ++code, ++it) {
      if (*it != children[static_cast<std::size_t>(code)]) break;
      ++present;
    }
    if (present == 0) {
      if (round_ == 1) throw ProtocolDesync("first broadcast does not cover the client");
      return Finish(previous_);
    }
    if (present != kBranching) {
      throw ProtocolDesync("broadcast holds only some children of region " +
                           region_.ToString());
    }

    RngStream noise = noise_.Substream(pseudonym_, static_cast<std::uint64_t>(round_));
    const int mine = QuadrantOf(region_rect_, x_);
    std::vector<Report> reports;
    reports.reserve(kBranching);
    RoundIndicators indicators{};
    for (int code = 0; code < kBranching; ++code) {
      const std::uint8_t indicator = code == mine ? 1 : 0;
      indicators[static_cast<std::size_t>(code)] = indicator;
      reports.push_back({round_, pseudonym_, children[static_cast<std::size_t>(code)],
                         indicator + LaplaceNoise(noise, 1.0, eps_)});
    }
    indicator_log_.push_back(indicators);
    previous_ = region_;
    region_ = children[static_cast<std::size_t>(mine)];
    region_rect_ = QuadrantRect(region_rect_, mine);
    return reports;
  }

  bool finished() const { return finished_; }
  const CellId& final_region() const { return final_; }
  std::uint32_t pseudonym() const { return pseudonym_; }
  int rounds_reported() const { return static_cast<int>(indicator_log_.size()); }
  std::span<const RoundIndicators> indicators() const { return indicator_log_; }

 private:
  RoundResult Finish(const CellId& region) {
    finished_ = true;
    final_ = region;
    return Finished{region};
  }

  Point x_;
  std::uint32_t pseudonym_;
  Rect domain_;
  double eps_;
  int max_depth_;
  RngStream noise_;
  int round_ = 0;
  CellId region_;    // U_{t-1}
  CellId previous_;  // U_{t-2}
  Rect region_rect_;
  bool finished_ = false;
  CellId final_;
  std::vector<RoundIndicators> indicator_log_;
};

// Server side: maintains the active cells, aggregates reports and finalizes
// a parent as soon as any of its children fails n_hat >= Q + Delta.
// Decisions depend only on the messages it receives.
class Server {
 public:
  explicit Server(const ProtocolConfig& config) : config_(config) {
    config_.Validate();
    active_.push_back(CellId::Root());
  }

  bool done() const { return done_; }
  int round() const { return round_; }

  // Opens the next round. When no refinement remains, returns the closing
  // broadcast and marks the run done.
  Broadcast OpenRound() {
    internal::Require(!done_, "protocol already finished");
    internal::Require(!open_, "previous round still open");
    ++round_;
    Broadcast b{round_, {}};
    if (active_.empty() || round_ > config_.T) {
      for (std::size_t i = 0; i < active_.size(); ++i) {
        leaves_.push_back({active_[i], CellRect(config_.domain, active_[i]), active_counts_[i],
                           false});
      }
      b.cells = active_;
      active_.clear();
      done_ = true;
      return b;
    }
    frontier_.clear();
    frontier_.reserve(active_.size() * kBranching);
    for (const auto& cell : active_) {
      for (const auto& child : Children(cell)) frontier_.push_back(child);
    }
    sums_.assign(frontier_.size(), 0.0);
    responder_counts_.clear();
    seen_.clear();
    open_ = true;
    b.cells = frontier_;
    return b;
  }

  void Receive(const Report& report) {
    if (!open_ || report.round != round_) {
      throw MalformedTranscript("report for round " + std::to_string(report.round) +
                                " outside the open round " + std::to_string(round_));
    }
    auto it = std::lower_bound(frontier_.begin(), frontier_.end(), report.cell);
    if (it == frontier_.end() || *it != report.cell) {
      throw MalformedTranscript("report for cell " + report.cell.ToString() +
                                " that was not broadcast in round " + std::to_string(round_));
    }
    const auto idx = static_cast<std::uint64_t>(it - frontier_.begin());
    if (!seen_.insert((idx << 32) | report.user).second) {
      throw MalformedTranscript("duplicate report from user " + std::to_string(report.user));
    }
    sums_[idx] += report.value;
    ++responder_counts_[((idx / kBranching) << 32) | report.user];
  }

  void CloseRound() {
    internal::Require(open_, "no open round");
    open_ = false;
    const std::size_t parents = frontier_.size() / kBranching;
    std::vector<double> responders(parents, 0.0);
    for (const auto& [key, count] : responder_counts_) {
      if (count == kBranching) responders[key >> 32] += 1.0;
    }
    std::vector<CellId> next_active;
    std::vector<double> next_counts;
    for (std::size_t p = 0; p < parents; ++p) {
      const double margin = ComputeDelta(config_.eps, responders[p], config_.x_of_delta);
      bool split = true;
      for (std::size_t j = 0; j < kBranching; ++j) {
        if (sums_[p * kBranching + j] < config_.Q + margin) split = false;
      }
      if (split) {
        for (std::size_t j = 0; j < kBranching; ++j) {
          next_active.push_back(frontier_[p * kBranching + j]);
          next_counts.push_back(sums_[p * kBranching + j]);
        }
      } else {
        const CellId parent = frontier_[p * kBranching].Parent();
        leaves_.push_back({parent, CellRect(config_.domain, parent), responders[p], true});
      }
    }
    active_ = std::move(next_active);
    active_counts_ = std::move(next_counts);
  }

  Partition Result() const {
    internal::Require(done_, "protocol still running");
    return Partition(config_.domain, leaves_);
  }

  const ProtocolConfig& config() const { return config_; }

 private:
  ProtocolConfig config_;
  int round_ = 0;
  bool open_ = false;
  bool done_ = false;
  std::vector<CellId> active_;
  std::vector<double> active_counts_{0.0};
  std::vector<CellId> frontier_;
  std::vector<double> sums_;
  std::unordered_map<std::uint64_t, int> responder_counts_;
  std::unordered_set<std::uint64_t> seen_;
  std::vector<Leaf> leaves_;
};

struct ProtocolOutcome {
  Partition partition;
  Transcript transcript;
  std::vector<CellId> final_regions;  // per user
  std::vector<std::vector<RoundIndicators>> indicators;  // per user, per round
};

// Simulates one synchronous run: one client per point, messages delivered
// in pseudonym order. User i draws its round-t noise from
// rng.Substream(i, t).
inline ProtocolOutcome ServerRun(std::span<const Point> points, const ProtocolConfig& config,
                                 const RngStream& rng) {
  config.Validate();
  for (const auto& p : points) {
    internal::Require(ContainsClosed(config.domain, p), "all points must lie inside the domain");
  }
  internal::Require(points.size() < (std::size_t{1} << 32), "too many clients");

  std::vector<Client> clients;
  clients.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    clients.emplace_back(points[i], static_cast<std::uint32_t>(i), config.domain, config.eps,
                         config.T, rng);
  }

  Server server(config);
  Transcript transcript;
  std::vector<std::uint32_t> running(points.size());
  for (std::size_t i = 0; i < running.size(); ++i) running[i] = static_cast<std::uint32_t>(i);

  while (!server.done()) {
    Broadcast b = server.OpenRound();
    std::vector<std::uint32_t> still_running;
    still_running.reserve(running.size());
    for (std::uint32_t user : running) {
      auto result = clients[user].Round(b);
      if (auto* reports = std::get_if<std::vector<Report>>(&result)) {
        for (const auto& r : *reports) {
          server.Receive(r);
          transcript.reports.push_back(r);
        }
        still_running.push_back(user);
      }
    }
    running = std::move(still_running);
    transcript.broadcasts.push_back(std::move(b));
    if (!server.done()) server.CloseRound();
  }
  internal::Require(running.empty(), "clients still running after the closing broadcast");

  ProtocolOutcome outcome{server.Result(), std::move(transcript), {}, {}};
  outcome.final_regions.reserve(clients.size());
  outcome.indicators.reserve(clients.size());
  outcome.transcript.stop_rounds.reserve(clients.size());
  for (const auto& c : clients) {
    outcome.final_regions.push_back(c.final_region());
    outcome.indicators.emplace_back(c.indicators().begin(), c.indicators().end());
    outcome.transcript.stop_rounds.push_back(c.rounds_reported());
  }
  return outcome;
}

// Recomputes the released partition from the public transcript alone.
inline Partition TranscriptReplay(const Transcript& transcript, const ProtocolConfig& config) {
  if (transcript.broadcasts.empty()) {
    if (!transcript.reports.empty()) throw MalformedTranscript("reports without broadcasts");
    return Partition::RootOnly(config.domain, 0.0);
  }
  Server server(config);
  std::size_t next_report = 0;
  for (const auto& recorded : transcript.broadcasts) {
    if (server.done()) throw MalformedTranscript("broadcast after the closing broadcast");
    const Broadcast expected = server.OpenRound();
    if (!(expected == recorded)) {
      throw MalformedTranscript("broadcast of round " + std::to_string(recorded.round) +
                                " disagrees with the decisions implied by earlier rounds");
    }
    while (next_report < transcript.reports.size() &&
           transcript.reports[next_report].round == recorded.round) {
      if (server.done()) throw MalformedTranscript("report answering the closing broadcast");
      server.Receive(transcript.reports[next_report++]);
    }
    if (!server.done()) server.CloseRound();
  }
  if (next_report != transcript.reports.size()) {
    throw MalformedTranscript("report for round " +
                              std::to_string(transcript.reports[next_report].round) +
                              " out of order or not broadcast");
  }
  if (!server.done()) throw MalformedTranscript("transcript ends before the closing broadcast");
  return server.Result();
}

// Line format: `B <t> <cell_path>...` and `R <t> <user> <cell_path> <value>`.
inline void WriteTranscript(std::ostream& os, const Transcript& transcript) {
  os << std::setprecision(17);
  std::size_t r = 0;
  for (const auto& b : transcript.broadcasts) {
    os << "B " << b.round;
    for (const auto& c : b.cells) os << ' ' << c.ToString();
    os << '\n';
    for (; r < transcript.reports.size() && transcript.reports[r].round == b.round; ++r) {
      const auto& rep = transcript.reports[r];
      os << "R " << rep.round << ' ' << rep.user << ' ' << rep.cell.ToString() << ' '
         << rep.value << '\n';
    }
  }
  for (; r < transcript.reports.size(); ++r) {
    const auto& rep = transcript.reports[r];
    os << "R " << rep.round << ' ' << rep.user << ' ' << rep.cell.ToString() << ' '
       << rep.value << '\n';
  }
}

inline Transcript ReadTranscript(std::istream& is) {
  Transcript t;
  std::string line;
  int line_no = 0;
  std::uint32_t max_user = 0;
  bool any_report = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    auto fail = [&](const std::string& why) {
      return MalformedTranscript("transcript line " + std::to_string(line_no) + ": " + why);
    };
    try {
      if (tag == "B") {
        Broadcast b;
        if (!(ss >> b.round)) throw fail("missing round");
        if (!t.broadcasts.empty() && b.round <= t.broadcasts.back().round) {
          throw fail("broadcast rounds must strictly increase");
        }
        std::string path;
        while (ss >> path) b.cells.push_back(CellId::Parse(path));
        if (!std::is_sorted(b.cells.begin(), b.cells.end())) throw fail("cells not sorted");
        t.broadcasts.push_back(std::move(b));
      } else if (tag == "R") {
        Report r;
        std::string path;
        long long user = -1;
        if (!(ss >> r.round >> user >> path >> r.value) || user < 0 || user > 0xffffffffLL) {
          throw fail("expected `R <t> <user> <cell_path> <value>`");
        }
        r.user = static_cast<std::uint32_t>(user);
        r.cell = CellId::Parse(path);
        if (!t.reports.empty() && r.round < t.reports.back().round) {
          throw fail("report rounds must not decrease");
        }
        max_user = std::max(max_user, r.user);
        any_report = true;
        t.reports.push_back(r);
      } else {
        throw fail("unknown record tag '" + tag + "'");
      }
    } catch (const InvalidArgument& e) {
      throw fail(e.what());
    }
  }
  if (any_report) {
    t.stop_rounds.assign(static_cast<std::size_t>(max_user) + 1, 0);
    for (const auto& r : t.reports) {
      auto& s = t.stop_rounds[r.user];
      s = std::max(s, r.round);
    }
  }
  return t;
}

}  // namespace sldp

#endif  // SLDP_PROTOCOL_HPP_
