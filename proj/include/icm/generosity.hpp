/*
 * generosity.hpp
 *
 * For a cohesive economy with exponent k0, G = F^k0 is strictly positive.
 * alpha_i = min_j G(i, j) is the generosity of the economy towards agent i and
 * g = sum_i alpha_i its overall generosity. On zero-sum vectors G contracts
 * the l1 norm by at least (1 - g), which yields
 *
 *   || F^k (e_l0 - e_h0) ||_1 <= beta / (1-g)^(1-C) * ((1-g)^C)^k,   C = 1/k0,
 *
 * with beta = max_{r < k0} || F^r (e_l0 - e_h0) ||_1. Scaling by epsilon
 * gives the deviation bound gamma0 ((1-g)^C)^k of an epsilon transfer.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "icm/core.hpp"
#include "icm/error.hpp"
#include "icm/graph.hpp"

namespace icm {

struct GenerosityProfile {
  unsigned long long k0 = 0;
  DenseMatrix G;
  std::vector<double> alpha;
  double g = 0.0;
  /// 1 - g, clamped at 0 (the uniform matrix has g == 1).
  double contraction_factor = 1.0;

  double cohesiveness() const { return 1.0 / static_cast<double>(k0); }
};

struct RowMinima {
  std::vector<double> alpha;
  double g = 0.0;
};

inline RowMinima row_minima(const DenseMatrix& G) {
  RowMinima out;
  out.alpha.resize(G.size());
  for (std::size_t i = 0; i < G.size(); ++i) {
    auto r = G.row(i);
    out.alpha[i] = *std::min_element(r.begin(), r.end());
    out.g += out.alpha[i];
  }
  return out;
}

inline GenerosityProfile generosity_profile(const IncomeCirculationMatrix& f, const SocietyClassification& c,
                                            std::size_t dense_cap = kDefaultDenseCap) {
  if (c.verdict != Verdict::Cohesive || !c.exponent)
    fail(ErrorKind::NotCohesive, "generosity requires a cohesive (primitive) economy, got " +
                                     std::string(to_string(c.verdict)));
  if (c.n != f.n()) fail(ErrorKind::DimensionMismatch, "classification does not belong to this matrix");
  GenerosityProfile p;
  p.k0 = *c.exponent;
  p.G = matrix_power(f, p.k0, dense_cap);
  if (!(p.G.min_entry() > 0.0))
    fail(ErrorKind::InvariantViolation,
         "F^k0 has a zero entry for k0 = " + std::to_string(p.k0) + "; contradicts primitivity");
  auto rm = row_minima(p.G);
  p.alpha = std::move(rm.alpha);
  p.g = rm.g;
  p.contraction_factor = std::max(0.0, 1.0 - p.g);
  return p;
}

inline GenerosityProfile generosity_profile(const IncomeCirculationMatrix& f,
                                            std::size_t dense_cap = kDefaultDenseCap) {
  return generosity_profile(f, classify(f), dense_cap);
}

struct ContractionCheck {
  double lhs = 0.0;  // ||G u||_1
  double rhs = 0.0;  // (1 - g) ||u||_1
  bool holds = false;
};

inline ContractionCheck contraction_check(const DenseMatrix& G, std::span<const double> u) {
  const std::size_t n = G.size();
  if (u.size() != n) fail(ErrorKind::DimensionMismatch, "vector length differs from matrix size");
  if (!(G.min_entry() > 0.0)) fail(ErrorKind::NotPositive, "G must be strictly positive");
  double sum = 0.0, norm = 0.0;
  for (double v : u) {
    sum += v;
    norm += std::abs(v);
  }
  if (std::abs(sum) > 1e-12 * norm) fail(ErrorKind::NotZeroSum, "u must sum to zero");
  const double g = row_minima(G).g;
  ContractionCheck out;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    auto r = G.row(i);
    for (std::size_t j = 0; j < n; ++j) acc += r[j] * u[j];
    out.lhs += std::abs(acc);
  }
  out.rhs = std::max(0.0, 1.0 - g) * norm;
  out.holds = out.lhs <= out.rhs + 1e-12;
  return out;
}

/// || F^r (e_l0 - e_h0) ||_1 for r = 0 .. count-1, by sparse products.
inline std::vector<double> transfer_norms(const IncomeCirculationMatrix& f, AgentId h0, AgentId l0,
                                          std::size_t count) {
  if (h0.index >= f.n() || l0.index >= f.n()) fail(ErrorKind::IndexOutOfRange, "agent outside economy");
  std::vector<double> u(f.n(), 0.0), next(f.n());
  u[l0.index] += 1.0;
  u[h0.index] -= 1.0;
  std::vector<double> norms;
  norms.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    double s = 0.0;
    for (double v : u) s += std::abs(v);
    norms.push_back(s);
    if (r + 1 < count) {
      f.apply(u, next);
      u.swap(next);
    }
  }
  return norms;
}

/// gamma0 ((1-g)^C)^k, evaluated in log space.
class ConvergenceBound {
 public:
  ConvergenceBound(const GenerosityProfile& profile, const IncomeCirculationMatrix& f, AgentId h0, AgentId l0,
                   double epsilon)
      : k0_(profile.k0), epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(ErrorKind::InvalidArgument, "epsilon must be > 0");
    if (profile.k0 == 0) fail(ErrorKind::NotCohesive, "profile has no exponent");
    auto norms = transfer_norms(f, h0, l0, static_cast<std::size_t>(k0_));
    beta_ = *std::max_element(norms.begin(), norms.end());
    const double c = profile.cohesiveness();
    if (profile.contraction_factor > 0.0) {
      const double log_q = std::log(profile.contraction_factor);  // log(1 - g)
      log_rate_ = c * log_q;
      log_gamma0_ = std::log(epsilon * beta_) - (1.0 - c) * log_q;
    } else {
      collapsed_ = true;
    }
  }

  double beta() const { return beta_; }

  /// Prefactor; for g == 1 (G annihilates zero-sum vectors) this is eps*beta.
  double gamma0() const { return collapsed_ ? epsilon_ * beta_ : std::exp(log_gamma0_); }

  /// (1-g)^C.
  double rate() const { return collapsed_ ? 0.0 : std::exp(log_rate_); }

  double at(unsigned long long k) const {
    if (beta_ == 0.0) return 0.0;
    if (collapsed_) return k < k0_ ? epsilon_ * beta_ : 0.0;
    return std::exp(log_gamma0_ + static_cast<double>(k) * log_rate_);
  }

  /// Smallest k at which the bound reaches `threshold`.
  unsigned long long steps_to_reach(double threshold) const {
    if (beta_ == 0.0 || at(0) <= threshold) return 0;
    if (collapsed_) return k0_;
    const double k = (std::log(threshold) - log_gamma0_) / log_rate_;
    auto guess = static_cast<unsigned long long>(std::max(0.0, std::ceil(k)));
    while (guess > 0 && at(guess - 1) <= threshold) --guess;
    while (at(guess) > threshold) ++guess;
    return guess;
  }

 private:
  unsigned long long k0_;
  double epsilon_;
  double beta_ = 0.0;
  double log_rate_ = 0.0;
  double log_gamma0_ = 0.0;
  bool collapsed_ = false;
};

inline double convergence_bound(const GenerosityProfile& profile, const IncomeCirculationMatrix& f, AgentId h0,
                                AgentId l0, double epsilon, unsigned long long k) {
  return ConvergenceBound(profile, f, h0, l0, epsilon).at(k);
}

}  // namespace icm
