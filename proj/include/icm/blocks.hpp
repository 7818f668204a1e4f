/*
 * blocks.hpp
 *
 * Block views of an income circulation matrix.
 *
 * Hoarder split (last agent n-1 singled out):
 *
 *       | F11  b |        b: what agent n-1 spends on the others
 *   F = |        |        c: fractions of the others' wealth paid to n-1
 *       | c^T  d |        d: what agent n-1 keeps
 *
 * A pure cash hoarder has b = 0, c != 0 (so d = 1). If the others form a
 * whole, then for k >= 1
 *
 *   F^k = | F11^k                     0 |   -->   | 0                   0 |
 *         | c^T sum_{i<k} F11^i       1 |         | c^T (I - F11)^-1    1 |
 *
 * Class split (agents in wealth order, last m marginalized):
 *
 *   F = | F11  F12 |      F12 != 0, F21 == 0: the wealthy absorb everything
 *       | F21  F22 |      F21 != 0, F12 == 0: the poor absorb everything
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "icm/core.hpp"
#include "icm/error.hpp"
#include "icm/graph.hpp"

namespace icm {

struct WealthOrder {
  IncomeCirculationMatrix matrix;
  /// order[a] is the original agent placed at position a (richest first).
  std::vector<std::size_t> order;
};

/// Stable descending sort of agents by wealth.
inline std::vector<std::size_t> wealth_order(const WealthVector& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  return order;
}

inline WealthOrder order_by_wealth(const IncomeCirculationMatrix& f, const WealthVector& x) {
  if (x.size() != f.n()) fail(ErrorKind::DimensionMismatch, "wealth vector size differs from matrix");
  auto order = wealth_order(x);
  return {f.permuted(order), std::move(order)};
}

// ---------------------------------------------------------------------------
// Hoarder split

struct HoarderDecomposition {
  DenseMatrix F11;
  std::vector<double> b;
  std::vector<double> c;
  double d = 0.0;
  bool pure_cash_hoarder = false;

  std::size_t n() const { return F11.size() + 1; }

  DenseMatrix reassemble() const {
    const std::size_t m = F11.size();
    DenseMatrix out(m + 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) out(i, j) = F11(i, j);
      out(i, m) = b[i];
      out(m, i) = c[i];
    }
    out(m, m) = d;
    return out;
  }
};

inline HoarderDecomposition hoarder_decompose(const IncomeCirculationMatrix& f,
                                              std::size_t dense_cap = kDefaultDenseCap) {
  const std::size_t n = f.n();
  if (n < 2) fail(ErrorKind::InvalidDimension, "hoarder split needs at least two agents");
  if (n > dense_cap) fail(ErrorKind::SizeCapExceeded, "hoarder split is dense; n exceeds cap");
  const std::size_t m = n - 1;
  HoarderDecomposition dec;
  dec.F11 = DenseMatrix(m);
  dec.b.assign(m, 0.0);
  dec.c.assign(m, 0.0);
  for (const auto& t : f.triplets()) {
    if (t.row < m && t.col < m) dec.F11(t.row, t.col) = t.value;
    else if (t.row < m) dec.b[t.row] = t.value;
    else if (t.col < m) dec.c[t.col] = t.value;
    else dec.d = t.value;
  }
  const bool b_zero = std::all_of(dec.b.begin(), dec.b.end(), [](double v) { return v == 0.0; });
  const bool c_nonzero = std::any_of(dec.c.begin(), dec.c.end(), [](double v) { return v != 0.0; });
  dec.pure_cash_hoarder = b_zero && c_nonzero && std::abs(dec.d - 1.0) <= f.tolerance();
  return dec;
}

inline CirculationGraph dense_pattern_graph(const DenseMatrix& a) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a(i, j) != 0.0) edges.emplace_back(i, j);
  return CirculationGraph::from_edges(a.size(), std::move(edges));
}

namespace detail {
inline void require_whole_sub_economy(const HoarderDecomposition& dec) {
  if (!is_strongly_connected(dense_pattern_graph(dec.F11)))
    fail(ErrorKind::SubEconomyNotWhole, "agents 0..n-2 do not form a strongly connected economy");
}
}  // namespace detail

/// F^k assembled from the block formula, k >= 1.
inline DenseMatrix hoarder_power_closed_form(const HoarderDecomposition& dec, unsigned long long k) {
  if (!dec.pure_cash_hoarder) fail(ErrorKind::NotPureHoarder, "last agent is not a pure cash hoarder");
  if (k == 0) fail(ErrorKind::InvalidArgument, "closed form holds for k >= 1");
  detail::require_whole_sub_economy(dec);
  const std::size_t m = dec.F11.size();

  // row = c^T F11^i, accumulated for i < k.
  std::vector<double> row = dec.c, acc(m, 0.0), next(m);
  for (unsigned long long i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < m; ++j) acc[j] += row[j];
    if (i + 1 == k) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t l = 0; l < m; ++l) {
      const double rl = row[l];
      if (rl == 0.0) continue;
      auto fl = dec.F11.row(l);
      for (std::size_t j = 0; j < m; ++j) next[j] += rl * fl[j];
    }
    row.swap(next);
  }
  const DenseMatrix top = dense_power(dec.F11, k);
  DenseMatrix out(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out(i, j) = top(i, j);
    out(m, i) = acc[i];
  }
  out(m, m) = 1.0;
  return out;
}

struct HoarderLimit {
  DenseMatrix matrix;
  /// c^T (I - F11)^-1: where each agent's money ends up with the hoarder.
  std::vector<double> absorption;
  double spectral_radius_estimate = 0.0;
  double rcond = 0.0;
};

/// lim F^k. Solves (I - F11)^T y = c; singular systems mean the hoarder never
/// drains the rest of the economy (e.g. c = 0).
inline HoarderLimit hoarder_limit(const HoarderDecomposition& dec) {
  if (std::any_of(dec.b.begin(), dec.b.end(), [](double v) { return v != 0.0; }))
    fail(ErrorKind::NotPureHoarder, "last agent spends money (b != 0)");
  detail::require_whole_sub_economy(dec);
  const std::size_t m = dec.F11.size();

  // Power estimate of rho(F11) from column sums of F11^t.
  std::vector<double> w(m, 1.0), next(m);
  const std::size_t iters = std::max<std::size_t>(64, 4 * m);
  for (std::size_t t = 0; t < iters; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t l = 0; l < m; ++l) {
      auto fl = dec.F11.row(l);
      for (std::size_t j = 0; j < m; ++j) next[j] += w[l] * fl[j];
    }
    w.swap(next);
  }
  const double top = *std::max_element(w.begin(), w.end());
  HoarderLimit out;
  out.spectral_radius_estimate = top > 0.0 ? std::pow(top, 1.0 / static_cast<double>(iters)) : 0.0;

  Eigen::MatrixXd system(m, m);
  Eigen::VectorXd rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    rhs(static_cast<Eigen::Index>(i)) = dec.c[i];
    for (std::size_t j = 0; j < m; ++j)
      system(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = (i == j ? 1.0 : 0.0) - dec.F11(i, j);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  out.rcond = lu.rcond();
  if (!(out.rcond > 1e-13) || out.spectral_radius_estimate >= 1.0 - 1e-12)
    fail(ErrorKind::SingularSystem, "I - F11 is singular (rcond " + std::to_string(out.rcond) +
                                        ", spectral radius ~ " + std::to_string(out.spectral_radius_estimate) + ")");
  Eigen::VectorXd y = lu.solve(rhs);
  out.absorption.resize(m);
  out.matrix = DenseMatrix(m + 1);
  for (std::size_t j = 0; j < m; ++j) {
    out.absorption[j] = y(static_cast<Eigen::Index>(j));
    out.matrix(m, j) = out.absorption[j];
  }
  out.matrix(m, m) = 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Class split

struct PartitionConfig {
  double h_frac = 0.1;
  double l_frac = 0.1;
  std::optional<std::vector<std::size_t>> h{};  // explicit ids override the fractions
  std::optional<std::vector<std::size_t>> l{};
};

struct SparseBlock {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Triplet> entries;  // block-local indices

  std::size_t nnz() const { return entries.size(); }
  bool nonzero() const { return !entries.empty(); }
  /// Sum of entries, the l1 norm of the block viewed as a vector.
  double mass() const {
    double s = 0.0;
    for (const auto& t : entries) s += t.value;
    return s;
  }
};

struct ClassPartition {
  std::size_t n = 0;
  std::vector<std::size_t> H;  // top wealthy, richest first
  std::vector<std::size_t> M;
  std::vector<std::size_t> L;  // marginalized, richest first
  /// Upper group (H then M) followed by L; the block order.
  std::vector<std::size_t> order;
  SparseBlock F11, F12, F21, F22;

  std::vector<std::size_t> upper() const {
    std::vector<std::size_t> u = H;
    u.insert(u.end(), M.begin(), M.end());
    return u;
  }
};

inline ClassPartition make_partition(const IncomeCirculationMatrix& f, const WealthVector& x,
                                     const PartitionConfig& cfg = {}) {
  const std::size_t n = f.n();
  if (x.size() != n) fail(ErrorKind::DimensionMismatch, "wealth vector size differs from matrix");
  const auto ranked = wealth_order(x);
  std::vector<int> group(n, 0);  // 1 = H, 0 = M, -1 = L

  auto mark_list = [&](const std::vector<std::size_t>& ids, int tag) {
    for (std::size_t id : ids) {
      if (id >= n) fail(ErrorKind::InvalidPartition, "agent " + std::to_string(id) + " outside economy");
      if (group[id] != 0) fail(ErrorKind::InvalidPartition, "agent " + std::to_string(id) + " listed twice");
      group[id] = tag;
    }
  };
  auto count_for = [&](double frac, const char* name) {
    if (!(frac >= 0.0 && frac <= 1.0)) fail(ErrorKind::InvalidPartition, std::string(name) + " must lie in [0, 1]");
    return static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-12));
  };

  if (cfg.h) {
    mark_list(*cfg.h, 1);
  } else {
    const std::size_t h = count_for(cfg.h_frac, "h_frac");
    for (std::size_t a = 0; a < std::min(h, n); ++a) group[ranked[a]] = 1;
  }
  if (cfg.l) {
    mark_list(*cfg.l, -1);
  } else {
    const std::size_t l = count_for(cfg.l_frac, "l_frac");
    if (l > n) fail(ErrorKind::InvalidPartition, "L larger than the economy");
    for (std::size_t a = n - l; a < n; ++a) {
      if (group[ranked[a]] == 1) fail(ErrorKind::InvalidPartition, "H and L overlap; lower h_frac or l_frac");
      group[ranked[a]] = -1;
    }
  }

  ClassPartition p;
  p.n = n;
  for (std::size_t a : ranked) {
    if (group[a] == 1) p.H.push_back(a);
    else if (group[a] == 0) p.M.push_back(a);
    else p.L.push_back(a);
  }
  p.order = p.upper();
  p.order.insert(p.order.end(), p.L.begin(), p.L.end());

  const std::size_t upper = n - p.L.size();
  std::vector<std::size_t> position(n);
  for (std::size_t a = 0; a < n; ++a) position[p.order[a]] = a;
  p.F11 = {upper, upper, {}};
  p.F12 = {upper, n - upper, {}};
  p.F21 = {n - upper, upper, {}};
  p.F22 = {n - upper, n - upper, {}};
  for (const auto& t : f.triplets()) {
    const std::size_t r = position[t.row], c = position[t.col];
    const bool top = r < upper, left = c < upper;
    SparseBlock& blk = top ? (left ? p.F11 : p.F12) : (left ? p.F21 : p.F22);
    blk.entries.push_back({top ? r : r - upper, left ? c : c - upper, t.value});
  }
  return p;
}

enum class FragmentKind { PoorAbsorb, WealthyAbsorb, Disconnected, Coupled };

constexpr std::string_view to_string(FragmentKind k) {
  switch (k) {
    case FragmentKind::PoorAbsorb: return "PoorAbsorb";
    case FragmentKind::WealthyAbsorb: return "WealthyAbsorb";
    case FragmentKind::Disconnected: return "Disconnected";
    case FragmentKind::Coupled: return "Coupled";
  }
  return "Unknown";
}

struct AsymptoticsOptions {
  std::size_t horizon = 100000;
  /// Stop early once the absorbing group holds at least this share.
  std::optional<double> stop_share{};
};

struct FragmentedDiagnosis {
  FragmentKind kind = FragmentKind::Coupled;
  double f12_mass = 0.0;
  double f21_mass = 0.0;
  double upper_share_initial = 0.0;
  double lower_share_initial = 0.0;
  double upper_share = 0.0;  // at the last simulated step
  double lower_share = 0.0;
  std::size_t steps = 0;
  double max_base_drift = 0.0;
};

inline FragmentedDiagnosis fragmented_asymptotics(const IncomeCirculationMatrix& f, const ClassPartition& p,
                                                  const WealthVector& x0, const AsymptoticsOptions& opts = {}) {
  if (f.n() != p.n || x0.size() != p.n) fail(ErrorKind::DimensionMismatch, "partition, matrix and wealth disagree");
  FragmentedDiagnosis d;
  d.f12_mass = p.F12.mass();
  d.f21_mass = p.F21.mass();
  const bool f12 = p.F12.nonzero(), f21 = p.F21.nonzero();
  d.kind = f21 && !f12   ? FragmentKind::PoorAbsorb
           : f12 && !f21 ? FragmentKind::WealthyAbsorb
           : !f12 && !f21 ? FragmentKind::Disconnected
                          : FragmentKind::Coupled;

  std::vector<bool> lower(p.n, false);
  for (std::size_t a : p.L) lower[a] = true;
  auto shares = [&](const WealthVector& x) {
    double lo = 0.0, total = 0.0;
    for (std::size_t a = 0; a < p.n; ++a) {
      total += x[a];
      if (lower[a]) lo += x[a];
    }
    return std::pair{(total - lo) / total, lo / total};
  };

  WealthVector x = x0;
  const double base0 = x.monetary_base();
  if (!(base0 > 0.0)) fail(ErrorKind::InvalidArgument, "monetary base must be positive");
  std::tie(d.upper_share_initial, d.lower_share_initial) = shares(x);
  std::tie(d.upper_share, d.lower_share) = shares(x);
  for (std::size_t t = 0; t < opts.horizon; ++t) {
    if (opts.stop_share) {
      if (d.kind == FragmentKind::PoorAbsorb && d.lower_share >= *opts.stop_share) break;
      if (d.kind == FragmentKind::WealthyAbsorb && d.upper_share >= *opts.stop_share) break;
    }
    const double before = x.monetary_base();
    x = step(f, x);
    d.max_base_drift = std::max(d.max_base_drift, std::abs(x.monetary_base() - before) / before);
    std::tie(d.upper_share, d.lower_share) = shares(x);
    ++d.steps;
  }
  return d;
}

}  // namespace icm
