// Slow, obviously-correct reference implementations and random generators
// shared by the unit tests and the acceptance runner. Nothing here calls into
// the graph or generosity code it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "icm/core.hpp"

namespace oracle {

using BoolMat = std::vector<std::vector<bool>>;
using Mat = std::vector<std::vector<double>>;

inline BoolMat pattern(const icm::IncomeCirculationMatrix& f) {
  BoolMat a(f.n(), std::vector<bool>(f.n(), false));
  for (std::size_t i = 0; i < f.n(); ++i)
    for (std::size_t j = 0; j < f.n(); ++j) a[i][j] = f.at(i, j) != 0.0;
  return a;
}

inline BoolMat bool_mul(const BoolMat& a, const BoolMat& b) {
  const std::size_t n = a.size();
  BoolMat c(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (a[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (b[k][j]) c[i][j] = true;
  return c;
}

inline bool all_true(const BoolMat& a) {
  for (const auto& r : a)
    for (bool v : r)
      if (!v) return false;
  return true;
}

/// Smallest k with A^k all-positive by plain repeated multiplication; 0 if none
/// up to `limit`.
inline unsigned long long brute_exponent(const BoolMat& a, unsigned long long limit) {
  BoolMat p = a;
  for (unsigned long long k = 1; k <= limit; ++k) {
    if (all_true(p)) return k;
    p = bool_mul(p, a);
  }
  return 0;
}

/// gcd of closed-walk lengths up to `limit` (enough for n <= ~30 with limit n^2 + n).
inline std::size_t cycle_gcd(const BoolMat& a, std::size_t limit) {
  BoolMat p = a;
  std::size_t g = 0;
  for (std::size_t k = 1; k <= limit; ++k) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (p[i][i]) {
        g = std::gcd(g, k);
        break;
      }
    p = bool_mul(p, a);
  }
  return g;
}

/// Reachability closure; used to check strong connectivity.
inline bool strongly_connected(const BoolMat& a) {
  const std::size_t n = a.size();
  auto reach = a;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && !reach[i][j]) return false;
  return true;
}

inline Mat dense(const icm::IncomeCirculationMatrix& f) {
  Mat m(f.n(), std::vector<double>(f.n(), 0.0));
  for (std::size_t i = 0; i < f.n(); ++i)
    for (std::size_t j = 0; j < f.n(); ++j) m[i][j] = f.at(i, j);
  return m;
}

inline Mat mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// Naive k-fold product (no squaring).
inline Mat power(const Mat& a, unsigned long long k) {
  const std::size_t n = a.size();
  Mat p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) p[i][i] = 1.0;
  for (unsigned long long s = 0; s < k; ++s) p = mul(a, p);
  return p;
}

inline std::vector<double> mat_vec(const Mat& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

inline double l1(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += std::abs(a);
  return s;
}

inline icm::IncomeCirculationMatrix from_dense(const Mat& m, double tol = icm::kDefaultTolerance) {
  icm::RawMatrix raw{m.size(), tol, {}};
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m[i][j] != 0.0) raw.entries.push_back({i, j, m[i][j]});
  return icm::validate(raw);
}

/// Weights on a boolean pattern, columns scaled to sum to one.
inline Mat weigh(const BoolMat& a, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.1, 1.0);
  const std::size_t n = a.size();
  Mat m(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (a[i][j]) s += (m[i][j] = w(rng));
    for (std::size_t i = 0; i < n; ++i) m[i][j] /= s;
  }
  return m;
}

/// Random strongly connected pattern: a shuffled Hamiltonian cycle plus extra
/// off-diagonal edges with probability `density`. `diagonals` positions get a
/// self-loop.
inline BoolMat random_strong_pattern(std::size_t n, double density, std::size_t diagonals, std::mt19937_64& rng) {
  BoolMat a(n, std::vector<bool>(n, false));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < n; ++i) a[perm[i]][perm[(i + 1) % n]] = true;
  std::bernoulli_distribution extra(density);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && extra(rng)) a[i][j] = true;
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t d = 0; d < std::min(diagonals, n); ++d) a[perm[d]][perm[d]] = true;
  return a;
}

/// Strictly positive column-stochastic matrix.
inline Mat random_positive_stochastic(std::size_t n, std::mt19937_64& rng) {
  BoolMat all(n, std::vector<bool>(n, true));
  std::uniform_real_distribution<double> w(1e-3, 1.0);
  Mat m(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (m[i][j] = w(rng));
    for (std::size_t i = 0; i < n; ++i) m[i][j] /= s;
  }
  return m;
}

inline std::vector<double> random_zero_sum(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> u(n);
  double s = 0.0;
  for (double& v : u) s += (v = z(rng));
  for (double& v : u) v -= s / static_cast<double>(n);
  return u;
}

}  // namespace oracle
