/*
 * dynamics.hpp
 *
 * The epsilon-support experiment: at time t0 a wealthy agent h0 hands epsilon
 * to a poor agent l0. With a constant matrix the two trajectories differ by
 *
 *   x_eps(t0 + k) - x(t0 + k) = eps F^k (e_l0 - e_h0),
 *
 * whose l1 norm d_k starts at 2 eps, never grows, and for a cohesive economy
 * stays under gamma0 ((1-g)^C)^k. The difference vector is propagated on its
 * own so d_k carries no cancellation error from subtracting two trajectories.
 *
 * perturbed_evolve repeats the experiment with a fresh Gaussian-perturbed
 * matrix every step, shared by both trajectories.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "icm/core.hpp"
#include "icm/error.hpp"
#include "icm/generosity.hpp"
#include "icm/graph.hpp"

namespace icm {

struct SupportEvent {
  long t0 = 0;
  AgentId h0;
  AgentId l0;
  double epsilon = 0.0;
};

struct SupportOptions {
  /// epsilon above smallness_ratio * x_l0(t0) only produces a warning.
  double smallness_ratio = 0.1;
  /// d_k <= recovery_threshold * epsilon counts as recovered.
  double recovery_threshold = 0.01;
  /// nullopt: derive from the bound (cohesive economies only).
  std::optional<std::size_t> horizon;
  std::size_t max_auto_horizon = 10'000'000;
  std::size_t dense_cap = kDefaultDenseCap;
};

struct BoundSummary {
  unsigned long long k0 = 0;
  double cohesiveness = 0.0;
  double g = 0.0;
  double beta = 0.0;
  double gamma0 = 0.0;
  double rate = 0.0;  // (1-g)^C
};

struct SupportExperimentResult {
  SupportEvent event;
  Trajectory baseline;   // x0.time .. t0 + horizon
  Trajectory supported;  // t0 .. t0 + horizon
  std::vector<double> deviation;  // d_k, k = 0 .. horizon
  std::vector<double> bound;      // empty unless the bound applies
  std::optional<BoundSummary> bound_info;
  std::optional<std::size_t> recovery_k;
  std::vector<std::string> warnings;

  std::size_t horizon() const { return deviation.empty() ? 0 : deviation.size() - 1; }

  /// Largest per-step relative change of the monetary base, both runs.
  double max_base_drift() const { return std::max(baseline.max_base_drift(), supported.max_base_drift()); }
};

inline void check_event(const WealthVector& x, const SupportEvent& ev) {
  if (ev.h0.index >= x.size() || ev.l0.index >= x.size())
    fail(ErrorKind::IndexOutOfRange, "support event names an agent outside the economy");
  if (ev.h0 == ev.l0) fail(ErrorKind::InvalidSupportEvent, "donor and recipient must differ");
  if (!std::isfinite(ev.epsilon) || ev.epsilon < 0.0)
    fail(ErrorKind::InvalidSupportEvent, "epsilon must be finite and >= 0");
  if (ev.epsilon > x[ev.h0.index])
    fail(ErrorKind::InsufficientDonorWealth, "donor " + std::to_string(ev.h0.index) + " holds " +
                                                 std::to_string(x[ev.h0.index]) + " < epsilon " +
                                                 std::to_string(ev.epsilon));
}

inline WealthVector apply_support(const WealthVector& x, const SupportEvent& ev) {
  if (x.time() != ev.t0)
    fail(ErrorKind::InvalidSupportEvent,
         "wealth vector is at time " + std::to_string(x.time()) + ", event at " + std::to_string(ev.t0));
  check_event(x, ev);
  std::vector<double> v(x.values().begin(), x.values().end());
  v[ev.h0.index] -= ev.epsilon;
  v[ev.l0.index] += ev.epsilon;
  return WealthVector::make(std::move(v), x.time());
}

/// eps ||F^k (e_l0 - e_h0)||_1 for k = 0 .. horizon; needs no wealth vector.
inline std::vector<double> deviation_curve(const IncomeCirculationMatrix& f, AgentId h0, AgentId l0, double epsilon,
                                           std::size_t horizon) {
  if (h0.index >= f.n() || l0.index >= f.n()) fail(ErrorKind::IndexOutOfRange, "agent outside economy");
  std::vector<double> delta(f.n(), 0.0), next(f.n());
  delta[h0.index] -= epsilon;
  delta[l0.index] += epsilon;
  std::vector<double> out;
  out.reserve(horizon + 1);
  for (std::size_t k = 0;; ++k) {
    double s = 0.0;
    for (double v : delta) s += std::abs(v);
    out.push_back(s);
    if (k == horizon) break;
    f.apply(delta, next);
    delta.swap(next);
  }
  return out;
}

namespace detail {

inline double l1(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += std::abs(a);
  return s;
}

inline std::optional<std::size_t> first_below(const std::vector<double>& d, double threshold) {
  for (std::size_t k = 0; k < d.size(); ++k)
    if (d[k] <= threshold) return k;
  return std::nullopt;
}

struct BoundSetup {
  std::optional<ConvergenceBound> bound;
  std::optional<BoundSummary> info;
};

inline BoundSetup setup_bound(const IncomeCirculationMatrix& f, const SupportEvent& ev, std::size_t dense_cap) {
  BoundSetup s;
  if (ev.epsilon <= 0.0) return s;
  auto cls = classify(f);
  if (cls.verdict != Verdict::Cohesive) return s;
  auto profile = generosity_profile(f, cls, dense_cap);
  s.bound.emplace(profile, f, ev.h0, ev.l0, ev.epsilon);
  s.info = BoundSummary{profile.k0, profile.cohesiveness(), profile.g, s.bound->beta(), s.bound->gamma0(),
                        s.bound->rate()};
  return s;
}

inline std::size_t resolve_horizon(const std::optional<std::size_t>& requested, const BoundSetup& setup,
                                   const SupportEvent& ev, const SupportOptions& opts) {
  if (requested) return *requested;
  if (!setup.bound)
    fail(ErrorKind::HorizonRequired, "economy is not cohesive (or epsilon is 0); supply a horizon");
  const auto k = setup.bound->steps_to_reach(opts.recovery_threshold * ev.epsilon);
  if (k > opts.max_auto_horizon)
    fail(ErrorKind::HorizonRequired, "bound predicts recovery after " + std::to_string(k) +
                                         " steps, above the automatic limit; supply a horizon");
  return static_cast<std::size_t>(k);
}

/// Checks the properties every support run must satisfy.
inline void assert_deviation_invariants(const SupportExperimentResult& r, bool check_bound) {
  if (r.deviation.empty()) return;
  const double eps = r.event.epsilon;
  if (r.deviation[0] != 2.0 * eps)
    fail(ErrorKind::InvariantViolation, "d_0 != 2 epsilon");
  const double scale = std::max(1.0, 2.0 * eps);
  for (std::size_t k = 1; k < r.deviation.size(); ++k)
    if (r.deviation[k] > r.deviation[k - 1] + 1e-12 * scale)
      fail(ErrorKind::InvariantViolation, "deviation grew at step " + std::to_string(k));
  if (check_bound)
    for (std::size_t k = 0; k < r.bound.size(); ++k)
      if (r.deviation[k] > r.bound[k] + 1e-9 * scale)
        fail(ErrorKind::InvariantViolation, "deviation exceeds the generosity bound at step " + std::to_string(k));
}

}  // namespace detail

inline std::vector<std::string> support_warnings(const WealthVector& x, const SupportEvent& ev, double ratio) {
  std::vector<std::string> w;
  if (ev.epsilon > ratio * x[ev.l0.index])
    w.push_back("epsilon exceeds " + std::to_string(ratio) + " x wealth of recipient; outside the small-transfer regime");
  if (x[ev.l0.index] > x[ev.h0.index]) w.push_back("recipient is wealthier than donor");
  return w;
}

/// Constant-matrix epsilon-support experiment.
inline SupportExperimentResult support_experiment(const IncomeCirculationMatrix& f, const WealthVector& x0,
                                                  const SupportEvent& ev, const SupportOptions& opts = {}) {
  if (x0.size() != f.n()) fail(ErrorKind::DimensionMismatch, "wealth vector size differs from matrix");
  if (ev.t0 < x0.time()) fail(ErrorKind::InvalidSupportEvent, "support time precedes the initial state");
  const auto setup = detail::setup_bound(f, ev, opts.dense_cap);
  const std::size_t horizon = detail::resolve_horizon(opts.horizon, setup, ev, opts);

  SupportExperimentResult r;
  r.event = ev;
  r.baseline = evolve(f, x0, static_cast<std::size_t>(ev.t0 - x0.time()));
  const WealthVector at_t0 = r.baseline.back();
  check_event(at_t0, ev);
  r.warnings = support_warnings(at_t0, ev, opts.smallness_ratio);

  WealthVector x = at_t0;
  WealthVector xe = apply_support(at_t0, ev);
  r.supported.states.reserve(horizon + 1);
  r.supported.states.push_back(xe);
  r.baseline.states.reserve(r.baseline.states.size() + horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    x = step(f, x);
    xe = step(f, xe);
    r.baseline.states.push_back(x);
    r.baseline.matrix_ids.push_back(0);
    r.supported.states.push_back(xe);
    r.supported.matrix_ids.push_back(0);
  }
  r.deviation = deviation_curve(f, ev.h0, ev.l0, ev.epsilon, horizon);
  if (setup.bound) {
    r.bound_info = setup.info;
    r.bound.reserve(horizon + 1);
    for (std::size_t k = 0; k <= horizon; ++k) r.bound.push_back(setup.bound->at(k));
  }
  r.recovery_k = detail::first_below(r.deviation, opts.recovery_threshold * ev.epsilon);
  if (ev.epsilon > 0.0) detail::assert_deviation_invariants(r, setup.bound.has_value());
  return r;
}

/// Per-step sum over `group` of x_eps - x, from t0 onwards.
inline std::vector<double> recovery_rate(const SupportExperimentResult& r, std::span<const std::size_t> group) {
  if (group.empty()) fail(ErrorKind::InvalidArgument, "group must be nonempty");
  const std::size_t offset = r.baseline.states.size() - r.supported.states.size();
  std::vector<double> out;
  out.reserve(r.supported.states.size());
  for (std::size_t k = 0; k < r.supported.states.size(); ++k) {
    const auto& xe = r.supported.states[k];
    const auto& x = r.baseline.states[offset + k];
    double s = 0.0;
    for (std::size_t i : group) {
      if (i >= x.size()) fail(ErrorKind::IndexOutOfRange, "group member outside economy");
      s += xe[i] - x[i];
    }
    out.push_back(s);
  }
  return out;
}

struct PerturbationSpec {
  double sigma = 0.01;
  unsigned long long seed = 0;
  /// Classification of the current matrix is re-checked every this many steps.
  std::size_t check_every = 16;
};

/// One multiplicative Gaussian draw per nonzero entry (std sigma * f_ij),
/// followed by column renormalization. The nonzero pattern must survive.
template <class Rng>
IncomeCirculationMatrix perturb(const IncomeCirculationMatrix& f, double sigma, Rng& rng) {
  if (sigma == 0.0) return f;
  std::normal_distribution<double> noise(0.0, 1.0);
  RawMatrix raw{f.n(), f.tolerance(), {}};
  raw.entries.reserve(f.nnz());
  for (std::size_t j = 0; j < f.n(); ++j) {
    auto rows = f.column_rows(j);
    auto vals = f.column_values(j);
    const std::size_t begin = raw.entries.size();
    double sum = 0.0;
    for (std::size_t p = 0; p < rows.size(); ++p) {
      const double v = vals[p] * (1.0 + sigma * noise(rng));
      if (!(v > kStructuralZero))
        fail(ErrorKind::PatternBroken, "perturbation clipped f(" + std::to_string(rows[p]) + "," +
                                           std::to_string(j) + ") to zero");
      raw.entries.push_back({rows[p], j, v});
      sum += v;
    }
    for (std::size_t p = begin; p < raw.entries.size(); ++p) raw.entries[p].value /= sum;
  }
  auto out = validate(raw);
  if (out.nnz() != f.nnz()) fail(ErrorKind::PatternBroken, "perturbation changed the nonzero pattern");
  return out;
}

/// Support experiment under a per-step perturbed matrix sequence. Both runs
/// see the same matrices. Without an event only the baseline is produced.
inline SupportExperimentResult perturbed_evolve(const IncomeCirculationMatrix& f, const WealthVector& x0,
                                                const PerturbationSpec& spec, const std::optional<SupportEvent>& ev,
                                                const SupportOptions& opts = {}) {
  if (x0.size() != f.n()) fail(ErrorKind::DimensionMismatch, "wealth vector size differs from matrix");
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) fail(ErrorKind::InvalidArgument, "sigma must be >= 0");
  const SupportEvent event = ev.value_or(SupportEvent{x0.time(), AgentId{0}, AgentId{0}, 0.0});
  if (event.t0 < x0.time()) fail(ErrorKind::InvalidSupportEvent, "support time precedes the initial state");

  const auto setup = detail::setup_bound(f, event, opts.dense_cap);
  const std::size_t horizon = detail::resolve_horizon(opts.horizon, setup, event, opts);
  const Verdict nominal = classify(f).verdict;

  std::mt19937_64 rng(spec.seed);
  SupportExperimentResult r;
  r.event = event;
  r.baseline.states.push_back(x0);
  const std::size_t lead = static_cast<std::size_t>(event.t0 - x0.time());
  const std::size_t total = lead + horizon;

  std::vector<double> delta(f.n(), 0.0), next(f.n());
  WealthVector xe;
  std::size_t step_id = 0;
  auto start_support = [&](const WealthVector& at_t0) {
    if (ev) {
      check_event(at_t0, event);
      r.warnings = support_warnings(at_t0, event, opts.smallness_ratio);
      xe = apply_support(at_t0, event);
      delta[event.h0.index] -= event.epsilon;
      delta[event.l0.index] += event.epsilon;
    } else {
      xe = at_t0;
    }
    r.supported.states.push_back(xe);
    r.deviation.push_back(detail::l1(delta));
  };
  if (lead == 0) start_support(x0);

  for (std::size_t s = 0; s < total; ++s, ++step_id) {
    const IncomeCirculationMatrix ft = perturb(f, spec.sigma, rng);
    if (spec.check_every > 0 && s % spec.check_every == 0 && classify(ft).verdict != nominal)
      fail(ErrorKind::PatternBroken, "perturbed matrix changed the society class at step " + std::to_string(s));
    r.baseline.states.push_back(step(ft, r.baseline.back()));
    r.baseline.matrix_ids.push_back(step_id);
    if (s + 1 == lead) {
      start_support(r.baseline.back());
    } else if (s >= lead) {
      xe = step(ft, xe);
      r.supported.states.push_back(xe);
      r.supported.matrix_ids.push_back(step_id);
      ft.apply(delta, next);
      delta.swap(next);
      r.deviation.push_back(detail::l1(delta));
    }
  }
  if (setup.bound) {
    r.bound_info = setup.info;
    for (std::size_t k = 0; k <= horizon; ++k) r.bound.push_back(setup.bound->at(k));
  }
  r.recovery_k = detail::first_below(r.deviation, opts.recovery_threshold * event.epsilon);
  if (ev && event.epsilon > 0.0) detail::assert_deviation_invariants(r, spec.sigma == 0.0 && setup.bound.has_value());
  return r;
}

}  // namespace icm
