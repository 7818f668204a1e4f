/*
 * ingest.hpp
 *
 * Estimating income circulation matrices from payments, windowed averages,
 * and synthetic economies for tests and demos.
 *
 * A payment of `amount` from payer j to payee i during step t contributes
 * amount / x_j(t) to f_ij, with x_j(t) the payer's wealth at the start of the
 * step. Whatever a payer does not spend stays on the diagonal.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icm/core.hpp"
#include "icm/error.hpp"
#include "icm/graph.hpp"

namespace icm {

struct TransactionRecord {
  long time = 0;
  std::size_t payer = 0;
  std::size_t payee = 0;
  double amount = 0.0;
};

struct EstimationWindow {
  long t_start = 0;
  long t_end = 0;

  std::size_t length() const { return t_end >= t_start ? static_cast<std::size_t>(t_end - t_start + 1) : 0; }
};

inline IncomeCirculationMatrix estimate_icm(std::span<const TransactionRecord> transactions,
                                            const WealthVector& wealth_at_step_start, long step,
                                            double tolerance = kDefaultTolerance) {
  const std::size_t n = wealth_at_step_start.size();
  if (n == 0) fail(ErrorKind::InvalidDimension, "empty wealth vector");
  std::map<std::pair<std::size_t, std::size_t>, double> paid;  // (payee, payer) -> amount
  std::vector<double> outflow(n, 0.0);
  for (const auto& tr : transactions) {
    if (tr.time != step)
      fail(ErrorKind::InvalidTransaction,
           "transaction at step " + std::to_string(tr.time) + " passed for step " + std::to_string(step));
    if (tr.payer >= n || tr.payee >= n) fail(ErrorKind::InvalidTransaction, "transaction names an unknown agent");
    if (tr.payer == tr.payee) fail(ErrorKind::InvalidTransaction, "payer and payee must differ");
    if (!std::isfinite(tr.amount) || tr.amount <= 0.0)
      fail(ErrorKind::InvalidTransaction, "transaction amount must be finite and positive");
    paid[{tr.payee, tr.payer}] += tr.amount;
    outflow[tr.payer] += tr.amount;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (outflow[j] == 0.0) continue;
    const double w = wealth_at_step_start[j];
    if (w <= 0.0) fail(ErrorKind::ZeroWealthPayer, "agent " + std::to_string(j) + " pays with zero wealth");
    if (outflow[j] > w * (1.0 + tolerance))
      fail(ErrorKind::OverSpending, "agent " + std::to_string(j) + " pays " + std::to_string(outflow[j]) +
                                        " out of wealth " + std::to_string(w));
  }
  RawMatrix off{n, tolerance, {}};
  off.entries.reserve(paid.size());
  for (const auto& [key, amount] : paid)
    off.entries.push_back({key.first, key.second, amount / wealth_at_step_start[key.second]});
  return savings_diagonal(off);
}

/// One matrix per step of the window. `wealth_by_step` must hold the observed
/// wealth at the start of every step that has transactions.
inline std::vector<IncomeCirculationMatrix> estimate_window(std::span<const TransactionRecord> transactions,
                                                            const std::map<long, WealthVector>& wealth_by_step,
                                                            std::size_t n, const EstimationWindow& window,
                                                            double tolerance = kDefaultTolerance) {
  if (window.length() == 0) fail(ErrorKind::EmptyWindow, "window end precedes its start");
  std::map<long, std::vector<TransactionRecord>> by_step;
  for (const auto& tr : transactions)
    if (tr.time >= window.t_start && tr.time <= window.t_end) by_step[tr.time].push_back(tr);
  std::vector<IncomeCirculationMatrix> out;
  out.reserve(window.length());
  for (long t = window.t_start; t <= window.t_end; ++t) {
    auto it = by_step.find(t);
    if (it == by_step.end()) {
      out.push_back(IncomeCirculationMatrix::identity(n, tolerance));
      continue;
    }
    auto w = wealth_by_step.find(t);
    if (w == wealth_by_step.end())
      fail(ErrorKind::MissingWealth, "no observed wealth for step " + std::to_string(t));
    if (w->second.size() != n) fail(ErrorKind::DimensionMismatch, "wealth vector size differs from economy");
    out.push_back(estimate_icm(it->second, w->second, t, tolerance));
  }
  return out;
}

/// Entrywise arithmetic mean.
inline IncomeCirculationMatrix average_icm(std::span<const IncomeCirculationMatrix> matrices) {
  if (matrices.empty()) fail(ErrorKind::EmptyWindow, "nothing to average");
  const std::size_t n = matrices.front().n();
  std::map<std::pair<std::size_t, std::size_t>, double> sum;  // (col, row) keeps columns together
  double tol = 0.0;
  for (const auto& f : matrices) {
    if (f.n() != n) fail(ErrorKind::DimensionMismatch, "matrices in a window must share n");
    tol = std::max(tol, f.tolerance());
    for (const auto& t : f.triplets()) sum[{t.col, t.row}] += t.value;
  }
  const double count = static_cast<double>(matrices.size());
  RawMatrix raw{n, tol, {}};
  raw.entries.reserve(sum.size());
  for (const auto& [key, v] : sum) raw.entries.push_back({key.second, key.first, v / count});
  return validate(raw);
}

/// Mean over matrices[t_start .. t_end].
inline IncomeCirculationMatrix average_icm(std::span<const IncomeCirculationMatrix> matrices,
                                           const EstimationWindow& window) {
  if (window.length() == 0) fail(ErrorKind::EmptyWindow, "window end precedes its start");
  if (window.t_start < 0 || static_cast<std::size_t>(window.t_end) >= matrices.size())
    fail(ErrorKind::EmptyWindow, "window outside the matrix sequence");
  return average_icm(matrices.subspan(static_cast<std::size_t>(window.t_start), window.length()));
}

// ---------------------------------------------------------------------------
// Synthetic economies

enum class EconomyProfile { CohesiveRandom, Ring, TwoClass, Hoarder };

inline EconomyProfile parse_profile(std::string_view name) {
  if (name == "cohesive-random") return EconomyProfile::CohesiveRandom;
  if (name == "ring") return EconomyProfile::Ring;
  if (name == "two-class") return EconomyProfile::TwoClass;
  if (name == "hoarder") return EconomyProfile::Hoarder;
  fail(ErrorKind::UnknownProfile, "unknown economy profile '" + std::string(name) + "'");
}

struct SynthesisOptions {
  /// Probability of each extra off-diagonal edge on top of a random cycle.
  double density = 0.3;
  /// Savings fractions are drawn from [min_savings, max_savings].
  double min_savings = 0.1;
  double max_savings = 0.5;
  /// two-class: share of marginalized agents (placed last).
  double poor_frac = 0.2;
  /// two-class: per-entry probability of F12 (poor pay wealthy) and F21
  /// (wealthy pay poor) entries. A positive density forces at least one entry.
  double f12_density = 0.0;
  double f21_density = 0.0;
  /// two-class: largest single cross-block fraction.
  double cross_weight = 0.1;
};

struct Economy {
  IncomeCirculationMatrix matrix;
  WealthVector wealth;
};

namespace detail {

/// Column-stochastic weights on a random strongly connected pattern over the
/// agents [first, first + size), with positive diagonal. Entries are scaled so
/// that column j sums to column_mass[j - first].
inline void cohesive_block(std::mt19937_64& rng, std::size_t first, std::size_t size,
                           const std::vector<double>& column_mass, const SynthesisOptions& o,
                           std::vector<Triplet>& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> cycle(size);
  std::iota(cycle.begin(), cycle.end(), std::size_t{0});
  std::shuffle(cycle.begin(), cycle.end(), rng);
  std::vector<std::vector<bool>> edge(size, std::vector<bool>(size, false));  // edge[u][v]: u sells to v
  if (size > 1)
    for (std::size_t a = 0; a < size; ++a) edge[cycle[a]][cycle[(a + 1) % size]] = true;
  for (std::size_t u = 0; u < size; ++u)
    for (std::size_t v = 0; v < size; ++v)
      if (u != v && unit(rng) < o.density) edge[u][v] = true;

  for (std::size_t v = 0; v < size; ++v) {
    const double mass = column_mass[v];
    const double savings = size == 1 ? 1.0 : o.min_savings + (o.max_savings - o.min_savings) * unit(rng);
    std::vector<std::pair<std::size_t, double>> w;
    double total = 0.0;
    for (std::size_t u = 0; u < size; ++u)
      if (u != v && edge[u][v]) {
        const double x = 0.2 + 0.8 * unit(rng);
        w.emplace_back(u, x);
        total += x;
      }
    out.push_back({first + v, first + v, mass * savings});
    for (auto [u, x] : w) out.push_back({first + u, first + v, mass * (1.0 - savings) * x / total});
  }
}

inline std::vector<double> random_wealth(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

}  // namespace detail

inline Economy synthesize_economy(std::size_t n, EconomyProfile profile, unsigned long long seed,
                                  const SynthesisOptions& o = {}) {
  if (n < 2) fail(ErrorKind::InvalidDimension, "synthetic economies need n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RawMatrix raw{n, kDefaultTolerance, {}};

  switch (profile) {
    case EconomyProfile::Ring: {
      for (std::size_t i = 0; i < n; ++i) raw.entries.push_back({i, (i + 1) % n, 1.0});
      return {validate(raw), WealthVector::make(detail::random_wealth(rng, n, 1.0, 100.0))};
    }
    case EconomyProfile::CohesiveRandom: {
      for (int attempt = 0; attempt < 100; ++attempt) {
        raw.entries.clear();
        detail::cohesive_block(rng, 0, n, std::vector<double>(n, 1.0), o, raw.entries);
        auto f = validate(raw);
        if (classify(f).verdict == Verdict::Cohesive)
          return {std::move(f), WealthVector::make(detail::random_wealth(rng, n, 1.0, 100.0))};
      }
      fail(ErrorKind::InvariantViolation, "could not generate a cohesive economy");
    }
    case EconomyProfile::TwoClass: {
      const std::size_t m = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::ceil(o.poor_frac * static_cast<double>(n))), 1, n - 1);
      const std::size_t upper = n - m;
      std::vector<double> mass(n, 1.0);
      std::vector<Triplet> cross;
      auto draw_cross = [&](std::size_t row_lo, std::size_t row_hi, std::size_t col_lo, std::size_t col_hi,
                            double density) {
        if (density <= 0.0) return;
        const std::size_t before = cross.size();
        for (std::size_t j = col_lo; j < col_hi; ++j)
          for (std::size_t i = row_lo; i < row_hi; ++i)
            if (unit(rng) < density) cross.push_back({i, j, o.cross_weight * (0.2 + 0.8 * unit(rng))});
        if (cross.size() == before) {
          std::uniform_int_distribution<std::size_t> ri(row_lo, row_hi - 1), cj(col_lo, col_hi - 1);
          cross.push_back({ri(rng), cj(rng), o.cross_weight * (0.2 + 0.8 * unit(rng))});
        }
      };
      draw_cross(upper, n, 0, upper, o.f21_density);  // wealthy pay poor
      draw_cross(0, upper, upper, n, o.f12_density);  // poor pay wealthy
      std::vector<double> spent(n, 0.0);
      for (const auto& t : cross) spent[t.col] += t.value;
      for (auto& t : cross)
        if (spent[t.col] > 0.5) t.value *= 0.5 / spent[t.col];
      for (const auto& t : cross) mass[t.col] -= t.value;
      detail::cohesive_block(rng, 0, upper, std::vector<double>(mass.begin(), mass.begin() + upper), o, raw.entries);
      detail::cohesive_block(rng, upper, m, std::vector<double>(mass.begin() + upper, mass.end()), o, raw.entries);
      raw.entries.insert(raw.entries.end(), cross.begin(), cross.end());
      auto x = detail::random_wealth(rng, n, 1.0, 2.0);
      for (std::size_t i = 0; i < upper; ++i) x[i] *= 100.0;
      return {validate(raw), WealthVector::make(std::move(x))};
    }
    case EconomyProfile::Hoarder: {
      const std::size_t m = n - 1;
      std::vector<double> c(m, 0.0);
      for (std::size_t j = 0; j < m; ++j)
        if (unit(rng) < 0.5) c[j] = 0.05 + 0.25 * unit(rng);
      if (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; }))
        c[std::uniform_int_distribution<std::size_t>(0, m - 1)(rng)] = 0.05 + 0.25 * unit(rng);
      std::vector<double> mass(m);
      for (std::size_t j = 0; j < m; ++j) mass[j] = 1.0 - c[j];
      detail::cohesive_block(rng, 0, m, mass, o, raw.entries);
      for (std::size_t j = 0; j < m; ++j)
        if (c[j] > 0.0) raw.entries.push_back({m, j, c[j]});
      raw.entries.push_back({m, m, 1.0});
      return {validate(raw), WealthVector::make(detail::random_wealth(rng, n, 1.0, 100.0))};
    }
  }
  fail(ErrorKind::UnknownProfile, "unhandled profile");
}

inline Economy synthesize_economy(std::size_t n, std::string_view profile, unsigned long long seed,
                                  const SynthesisOptions& o = {}) {
  return synthesize_economy(n, parse_profile(profile), seed, o);
}

/// Payments that realize F on wealth x: payer j sends f_ij x_j to every i != j.
inline std::vector<TransactionRecord> synthesize_transactions(const IncomeCirculationMatrix& f,
                                                              const WealthVector& x, long step) {
  if (x.size() != f.n()) fail(ErrorKind::DimensionMismatch, "wealth vector size differs from matrix");
  std::vector<TransactionRecord> out;
  for (const auto& t : f.triplets())
    if (t.row != t.col && x[t.col] > 0.0) out.push_back({step, t.col, t.row, t.value * x[t.col]});
  return out;
}

}  // namespace icm
