/*
 * graph.hpp
 *
 * The income circulation graph has an edge u -> v iff f_uv != 0 (u sells to
 * v, money flows from v to u). Its structure decides the kind of society:
 *
 *   Fragmented      more than one strongly connected component
 *   WholePeriodic   strongly connected, period p >= 2 (imprimitive F)
 *   Cohesive        strongly connected and aperiodic (primitive F); every
 *                   pair of agents is joined by a walk of exactly k0 edges
 *
 * k0 (the exponent, "degrees of business separation") is bounded by
 * (n-1)^2 + 1, and by 2n - nu - 1 when nu > 0 agents keep part of their
 * wealth (nonzero diagonal).
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icm/bitmatrix.hpp"
#include "icm/core.hpp"
#include "icm/error.hpp"

namespace icm {

class CirculationGraph {
 public:
  CirculationGraph() = default;

  std::size_t n() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return out_targets_.size(); }
  std::size_t self_loops() const noexcept { return self_loops_; }

  std::span<const std::size_t> successors(std::size_t u) const {
    return {out_targets_.data() + out_ptr_[u], out_ptr_[u + 1] - out_ptr_[u]};
  }
  std::span<const std::size_t> predecessors(std::size_t v) const {
    return {in_sources_.data() + in_ptr_[v], in_ptr_[v + 1] - in_ptr_[v]};
  }
  std::size_t out_degree(std::size_t u) const { return out_ptr_[u + 1] - out_ptr_[u]; }
  std::size_t in_degree(std::size_t v) const { return in_ptr_[v + 1] - in_ptr_[v]; }

  bool has_edge(std::size_t u, std::size_t v) const {
    auto s = successors(u);
    return std::binary_search(s.begin(), s.end(), v);
  }

  BitMatrix adjacency() const {
    BitMatrix a(n_);
    for (std::size_t u = 0; u < n_; ++u)
      for (std::size_t v : successors(u)) a.set(u, v);
    return a;
  }

  /// Edges as (source, target) pairs, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    e.reserve(edge_count());
    for (std::size_t u = 0; u < n_; ++u)
      for (std::size_t v : successors(u)) e.emplace_back(u, v);
    return e;
  }

  /// Graph from an explicit edge list; used by tests and the sub-economy checks.
  static CirculationGraph from_edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    CirculationGraph g;
    g.n_ = n;
    g.out_ptr_.assign(n + 1, 0);
    g.in_ptr_.assign(n + 1, 0);
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) fail(ErrorKind::IndexOutOfRange, "edge endpoint outside graph");
      ++g.out_ptr_[u + 1];
      ++g.in_ptr_[v + 1];
      if (u == v) ++g.self_loops_;
    }
    std::partial_sum(g.out_ptr_.begin(), g.out_ptr_.end(), g.out_ptr_.begin());
    std::partial_sum(g.in_ptr_.begin(), g.in_ptr_.end(), g.in_ptr_.begin());
    g.out_targets_.resize(edges.size());
    g.in_sources_.resize(edges.size());
    std::vector<std::size_t> out_fill(g.out_ptr_.begin(), g.out_ptr_.end() - 1);
    std::vector<std::size_t> in_fill(g.in_ptr_.begin(), g.in_ptr_.end() - 1);
    for (auto [u, v] : edges) {
      g.out_targets_[out_fill[u]++] = v;
      g.in_sources_[in_fill[v]++] = u;
    }
    // edges were sorted by (u, v), so successor lists are sorted; sort predecessors too.
    for (std::size_t v = 0; v < n; ++v)
      std::sort(g.in_sources_.begin() + static_cast<std::ptrdiff_t>(g.in_ptr_[v]),
                g.in_sources_.begin() + static_cast<std::ptrdiff_t>(g.in_ptr_[v + 1]));
    return g;
  }

 private:
  std::size_t n_ = 0;
  std::size_t self_loops_ = 0;
  std::vector<std::size_t> out_ptr_, out_targets_;
  std::vector<std::size_t> in_ptr_, in_sources_;
};

inline CirculationGraph build_graph(const IncomeCirculationMatrix& f) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(f.nnz());
  for (std::size_t v = 0; v < f.n(); ++v)
    for (std::size_t u : f.column_rows(v)) edges.emplace_back(u, v);
  return CirculationGraph::from_edges(f.n(), std::move(edges));
}

struct SccPartition {
  std::size_t count = 0;
  /// Component id per agent; ids are in reverse topological order (Tarjan).
  std::vector<std::size_t> membership;
};

/// Iterative Tarjan.
inline SccPartition strongly_connected_components(const CirculationGraph& g) {
  const std::size_t n = g.n();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  SccPartition out;
  out.membership.assign(n, 0);
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_child;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& fr = call.back();
      const std::size_t u = fr.node;
      auto succ = g.successors(u);
      if (fr.next_child < succ.size()) {
        const std::size_t v = succ[fr.next_child++];
        if (index[v] == kUnvisited) {
          index[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = true;
          call.push_back({v, 0});
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], index[v]);
        }
        continue;
      }
      if (low[u] == index[u]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          out.membership[w] = out.count;
        } while (w != u);
        ++out.count;
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[u]);
      }
    }
  }
  return out;
}

inline bool is_strongly_connected(const CirculationGraph& g) {
  return g.n() > 0 && strongly_connected_components(g).count == 1;
}

/// Index of imprimitivity: gcd of all cycle lengths, from BFS levels.
inline std::size_t period(const CirculationGraph& g) {
  if (!is_strongly_connected(g)) fail(ErrorKind::NotStronglyConnected, "period requires a strongly connected graph");
  const std::size_t n = g.n();
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> level(n, kUnseen);
  std::deque<std::size_t> queue{0};
  level[0] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : g.successors(u))
      if (level[v] == kUnseen) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
  }
  std::size_t p = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v : g.successors(u)) {
      const long long diff = static_cast<long long>(level[u]) + 1 - static_cast<long long>(level[v]);
      p = std::gcd(p, static_cast<std::size_t>(diff < 0 ? -diff : diff));
    }
  return p;
}

inline unsigned long long wielandt_bound(std::size_t n) {
  const unsigned long long m = n - 1;
  return m * m + 1;
}

/// 2n - nu - 1 for nu > 0 nonzero diagonals (never below 1).
inline std::optional<unsigned long long> dulmage_mendelsohn_bound(std::size_t n, std::size_t nu) {
  if (nu == 0) return std::nullopt;
  const long long b = 2 * static_cast<long long>(n) - static_cast<long long>(nu) - 1;
  return static_cast<unsigned long long>(std::max<long long>(b, 1));
}

struct ExponentOptions {
  /// Give up once k0 is known to exceed this; nullopt means the Wielandt bound.
  std::optional<unsigned long long> cap;
};

/// Smallest k with A^k all-ones. Doubles to bracket k0 in (2^(m-1), 2^m],
/// then descends through the cached squarings A^(2^j).
inline unsigned long long exponent(const CirculationGraph& g, const ExponentOptions& opts = {}) {
  if (!is_strongly_connected(g)) fail(ErrorKind::NotPrimitive, "graph is not strongly connected");
  const std::size_t p = period(g);
  if (p != 1) fail(ErrorKind::NotPrimitive, "graph is periodic with period " + std::to_string(p));

  const unsigned long long cap = std::min(opts.cap.value_or(wielandt_bound(g.n())), wielandt_bound(g.n()));
  std::vector<BitMatrix> squares{g.adjacency()};  // squares[j] = A^(2^j)
  if (squares[0].all_ones()) {
    if (cap < 1) fail(ErrorKind::ExponentCapExceeded, "exponent exceeds cap");
    return 1;
  }
  unsigned long long span = 1;  // A^span is not all-ones
  for (;;) {
    if (span >= cap)
      fail(ErrorKind::ExponentCapExceeded, "exponent exceeds cap " + std::to_string(cap));
    squares.push_back(squares.back() * squares.back());
    if (squares.back().all_ones()) break;
    span *= 2;
  }
  // A^span is not all-ones, A^(2 span) is. Grow `known` (not all-ones) greedily.
  const std::size_t top = squares.size() - 2;  // squares[top] = A^span
  BitMatrix known = squares[top];
  unsigned long long k = span;
  for (std::size_t j = top; j-- > 0;) {
    BitMatrix candidate = known * squares[j];
    if (!candidate.all_ones()) {
      known = std::move(candidate);
      k += 1ULL << j;
    }
  }
  const unsigned long long k0 = k + 1;
  if (k0 > cap) fail(ErrorKind::ExponentCapExceeded, "exponent " + std::to_string(k0) + " exceeds cap " + std::to_string(cap));
  return k0;
}

enum class Verdict { Fragmented, WholePeriodic, Cohesive };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Fragmented: return "Fragmented";
    case Verdict::WholePeriodic: return "WholePeriodic";
    case Verdict::Cohesive: return "Cohesive";
  }
  return "Unknown";
}

struct SocietyClassification {
  Verdict verdict = Verdict::Fragmented;
  std::size_t n = 0;
  std::size_t scc_count = 0;
  std::vector<std::size_t> scc_membership;
  std::optional<std::size_t> period;          // set iff strongly connected
  std::optional<unsigned long long> exponent;  // set iff Cohesive
  std::optional<double> cohesiveness;          // 1 / exponent
  std::size_t nu = 0;                          // nonzero diagonal entries

  unsigned long long wielandt() const { return wielandt_bound(n); }
  std::optional<unsigned long long> dulmage() const { return dulmage_mendelsohn_bound(n, nu); }
};

inline SocietyClassification classify(const CirculationGraph& g, const ExponentOptions& opts = {}) {
  SocietyClassification c;
  c.n = g.n();
  c.nu = g.self_loops();
  auto scc = strongly_connected_components(g);
  c.scc_count = scc.count;
  c.scc_membership = std::move(scc.membership);
  if (c.scc_count != 1) {
    c.verdict = Verdict::Fragmented;
    return c;
  }
  c.period = period(g);
  if (*c.period > 1) {
    c.verdict = Verdict::WholePeriodic;
    return c;
  }
  c.verdict = Verdict::Cohesive;
  c.exponent = exponent(g, opts);
  c.cohesiveness = 1.0 / static_cast<double>(*c.exponent);
  return c;
}

inline SocietyClassification classify(const IncomeCirculationMatrix& f, const ExponentOptions& opts = {}) {
  return classify(build_graph(f), opts);
}

inline unsigned long long exponent(const IncomeCirculationMatrix& f, const ExponentOptions& opts = {}) {
  return exponent(build_graph(f), opts);
}

struct PathWitness {
  AgentId source;
  AgentId target;
  std::vector<AgentId> agents;  // agents.front() == source, agents.back() == target
  std::size_t length = 0;       // number of edges
};

/// Shortest walk of at least one edge from u to v (for u == v: shortest cycle
/// through u).
inline PathWitness shortest_path_witness(const CirculationGraph& g, AgentId u, AgentId v) {
  const std::size_t n = g.n();
  if (u.index >= n || v.index >= n) fail(ErrorKind::IndexOutOfRange, "agent outside graph");
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(n, kUnseen);
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t w : g.successors(u.index)) {
    if (seen[w]) continue;
    seen[w] = true;
    parent[w] = u.index;
    queue.push_back(w);
  }
  while (!queue.empty() && !seen[v.index]) {
    const std::size_t a = queue.front();
    queue.pop_front();
    for (std::size_t w : g.successors(a))
      if (!seen[w]) {
        seen[w] = true;
        parent[w] = a;
        queue.push_back(w);
      }
  }
  if (!seen[v.index])
    fail(ErrorKind::Unreachable,
         "agent " + std::to_string(v.index) + " is unreachable from agent " + std::to_string(u.index));
  PathWitness w;
  w.source = u;
  w.target = v;
  std::size_t cur = v.index;
  w.agents.push_back(AgentId{cur});
  do {
    cur = parent[cur];
    w.agents.push_back(AgentId{cur});
  } while (cur != u.index);
  std::reverse(w.agents.begin(), w.agents.end());
  w.length = w.agents.size() - 1;
  return w;
}

/// Whether some walk of exactly k edges leads from u to v.
inline bool paths_of_length(const CirculationGraph& g, AgentId u, AgentId v, unsigned long long k) {
  const std::size_t n = g.n();
  if (u.index >= n || v.index >= n) fail(ErrorKind::IndexOutOfRange, "agent outside graph");
  BitRow frontier(n);
  frontier.set(u.index);
  const unsigned long long direct_limit = 4ULL * n + 64;
  if (k <= direct_limit) {
    const BitMatrix a = g.adjacency();
    for (unsigned long long s = 0; s < k && !frontier.none(); ++s) frontier = frontier.times(a);
    return frontier.test(v.index);
  }
  BitMatrix base = g.adjacency();
  while (k > 0) {
    if (k & 1ULL) frontier = frontier.times(base);
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return frontier.test(v.index);
}

}  // namespace icm
