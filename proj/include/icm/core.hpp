/*
 * core.hpp
 *
 * Income circulation matrices and wealth vectors.
 *
 * An income circulation matrix F is an n x n column-stochastic matrix: f_ij is
 * the fraction of agent j's wealth that ends up with agent i after one step,
 * and f_jj is what agent j keeps. Wealth evolves as x(t+1) = F_t x(t), which
 * conserves the monetary base M = sum_i x_i for any schedule of matrices.
 *
 * Storage is compressed sparse column. Entries below kStructuralZero are
 * dropped at validation so the nonzero pattern (and hence the circulation
 * graph) is crisp.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "icm/error.hpp"

namespace icm {

inline constexpr double kStructuralZero = 1e-15;
inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr std::size_t kDefaultDenseCap = 5000;

/// Zero-based agent label.
struct AgentId {
  std::size_t index = 0;

  constexpr AgentId() = default;
  constexpr explicit AgentId(std::size_t i) : index(i) {}
  constexpr auto operator<=>(const AgentId&) const = default;
};

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Unvalidated input: what a matrix file or a generator produces.
struct RawMatrix {
  std::size_t n = 0;
  double tolerance = kDefaultTolerance;
  std::vector<Triplet> entries;
};

/// Dense row-major square matrix, used for explicit powers at small n.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  std::span<const double> data() const noexcept { return data_; }

  double column_sum(std::size_t j) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, j);
    return s;
  }

  double min_entry() const {
    return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.n_ != b.n_) fail(ErrorKind::DimensionMismatch, "dense multiply: size mismatch");
    const std::size_t n = a.n_;
    DenseMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
      double* ci = c.data_.data() + i * n;
      for (std::size_t k = 0; k < n; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* bk = b.data_.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
      }
    }
    return c;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.size() != b.size()) fail(ErrorKind::DimensionMismatch, "max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

class IncomeCirculationMatrix;
IncomeCirculationMatrix validate(const RawMatrix& candidate);

/// Validated column-stochastic matrix in CSC form. Immutable; obtain one via
/// validate(), savings_diagonal() or identity().
class IncomeCirculationMatrix {
 public:
  static IncomeCirculationMatrix identity(std::size_t n, double tolerance = kDefaultTolerance) {
    RawMatrix raw{n, tolerance, {}};
    for (std::size_t i = 0; i < n; ++i) raw.entries.push_back({i, i, 1.0});
    return validate(raw);
  }

  std::size_t n() const noexcept { return n_; }
  double tolerance() const noexcept { return tolerance_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  /// Row indices (sorted ascending) and values of column j.
  std::span<const std::size_t> column_rows(std::size_t j) const {
    return {rows_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }
  std::span<const double> column_values(std::size_t j) const {
    return {values_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }

  double at(std::size_t i, std::size_t j) const {
    auto rows = column_rows(j);
    auto it = std::lower_bound(rows.begin(), rows.end(), i);
    if (it == rows.end() || *it != i) return 0.0;
    return values_[col_ptr_[j] + static_cast<std::size_t>(it - rows.begin())];
  }

  bool is_nonzero(std::size_t i, std::size_t j) const { return at(i, j) != 0.0; }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) out.push_back({rows_[p], j, values_[p]});
    return out;
  }

  RawMatrix to_raw() const { return {n_, tolerance_, triplets()}; }

  DenseMatrix to_dense() const {
    DenseMatrix d(n_);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) d(rows_[p], j) = values_[p];
    return d;
  }

  /// y = F x for arbitrary real x (no sign requirement).
  void apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != n_ || y.size() != n_) fail(ErrorKind::DimensionMismatch, "apply: vector length != n");
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double xj = x[j];
      if (xj == 0.0) continue;
      for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) y[rows_[p]] += values_[p] * xj;
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(n_);
    apply(x, y);
    return y;
  }

  /// Simultaneous row/column relabeling: result(a, b) = F(order[a], order[b]).
  IncomeCirculationMatrix permuted(std::span<const std::size_t> order) const {
    if (order.size() != n_) fail(ErrorKind::DimensionMismatch, "permuted: order length != n");
    std::vector<std::size_t> inverse(n_, n_);
    for (std::size_t a = 0; a < n_; ++a) {
      if (order[a] >= n_ || inverse[order[a]] != n_) fail(ErrorKind::InvalidArgument, "permuted: not a permutation");
      inverse[order[a]] = a;
    }
    RawMatrix raw{n_, tolerance_, {}};
    raw.entries.reserve(nnz());
    for (const auto& t : triplets()) raw.entries.push_back({inverse[t.row], inverse[t.col], t.value});
    return validate(raw);
  }

  friend bool operator==(const IncomeCirculationMatrix&, const IncomeCirculationMatrix&) = default;

 private:
  IncomeCirculationMatrix() = default;
  friend IncomeCirculationMatrix validate(const RawMatrix& candidate);

  std::size_t n_ = 0;
  double tolerance_ = kDefaultTolerance;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::size_t> rows_;
  std::vector<double> values_;
};

/// Checks column-stochasticity and builds the CSC matrix. Duplicate entries
/// are summed, |f| < kStructuralZero is dropped, and columns whose sum lies
/// within the tolerance of 1 are rescaled to sum to 1.
inline IncomeCirculationMatrix validate(const RawMatrix& candidate) {
  const std::size_t n = candidate.n;
  const double tol = candidate.tolerance;
  if (n == 0) fail(ErrorKind::InvalidDimension, "matrix must have n > 0");
  if (!std::isfinite(tol) || tol < 0.0) fail(ErrorKind::InvalidArgument, "tolerance must be finite and >= 0");

  std::vector<Triplet> entries = candidate.entries;
  for (const auto& t : entries) {
    if (t.row >= n || t.col >= n)
      fail(ErrorKind::IndexOutOfRange, "entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                           ") outside " + std::to_string(n) + "x" + std::to_string(n));
    if (!std::isfinite(t.value))
      fail(ErrorKind::NonFinite, "entry (" + std::to_string(t.row) + "," + std::to_string(t.col) + ") is not finite");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.col != b.col ? a.col < b.col : a.row < b.row; });

  IncomeCirculationMatrix m;
  m.n_ = n;
  m.tolerance_ = tol;
  m.col_ptr_.assign(n + 1, 0);

  std::size_t p = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t begin = m.rows_.size();
    while (p < entries.size() && entries[p].col == j) {
      const std::size_t row = entries[p].row;
      double v = 0.0;
      while (p < entries.size() && entries[p].col == j && entries[p].row == row) v += entries[p++].value;
      if (v < -tol)
        fail(ErrorKind::NegativeEntry,
             "f(" + std::to_string(row) + "," + std::to_string(j) + ") = " + std::to_string(v) + " is negative");
      if (v > 1.0 + tol)
        fail(ErrorKind::ColumnSumViolation,
             "f(" + std::to_string(row) + "," + std::to_string(j) + ") = " + std::to_string(v) + " exceeds 1");
      if (std::abs(v) < kStructuralZero || v < 0.0) continue;
      m.rows_.push_back(row);
      m.values_.push_back(v);
    }
    double sum = 0.0;
    for (std::size_t q = begin; q < m.rows_.size(); ++q) sum += m.values_[q];
    if (std::abs(sum - 1.0) > tol)
      fail(ErrorKind::ColumnSumViolation,
           "column " + std::to_string(j) + " sums to " + std::to_string(sum) + ", expected 1");
    if (sum != 1.0)
      for (std::size_t q = begin; q < m.rows_.size(); ++q) m.values_[q] /= sum;
    m.col_ptr_[j + 1] = m.rows_.size();
  }
  return m;
}

inline IncomeCirculationMatrix validate(const RawMatrix& candidate, double tolerance) {
  RawMatrix copy = candidate;
  copy.tolerance = tolerance;
  return validate(copy);
}

/// Completes a matrix from its off-diagonal spending fractions: f_jj becomes
/// 1 - sum_{i != j} f_ij, the fraction agent j keeps.
inline IncomeCirculationMatrix savings_diagonal(const RawMatrix& off_diagonal) {
  const std::size_t n = off_diagonal.n;
  const double tol = off_diagonal.tolerance;
  if (n == 0) fail(ErrorKind::InvalidDimension, "matrix must have n > 0");
  std::vector<double> spent(n, 0.0);
  for (const auto& t : off_diagonal.entries) {
    if (t.row >= n || t.col >= n) fail(ErrorKind::IndexOutOfRange, "entry outside matrix");
    if (t.row == t.col) fail(ErrorKind::UnexpectedDiagonal, "diagonal entry for agent " + std::to_string(t.col));
    if (!std::isfinite(t.value)) fail(ErrorKind::NonFinite, "entry is not finite");
    if (t.value < -tol) fail(ErrorKind::NegativeEntry, "negative spending fraction");
    spent[t.col] += t.value;
  }
  RawMatrix full = off_diagonal;
  for (std::size_t j = 0; j < n; ++j) {
    if (spent[j] > 1.0 + tol)
      fail(ErrorKind::OverSpending,
           "agent " + std::to_string(j) + " spends " + std::to_string(spent[j]) + " of its wealth");
    const double saved = std::max(0.0, 1.0 - spent[j]);
    if (saved > 0.0) full.entries.push_back({j, j, saved});
  }
  return validate(full);
}

/// Nonnegative wealth per agent at a time index.
class WealthVector {
 public:
  WealthVector() = default;

  static WealthVector make(std::vector<double> values, long time = 0) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) fail(ErrorKind::NonFinite, "wealth of agent " + std::to_string(i) + " is not finite");
      if (values[i] < 0.0) fail(ErrorKind::NegativeWealth, "wealth of agent " + std::to_string(i) + " is negative");
    }
    if (time < 0) fail(ErrorKind::InvalidArgument, "time index must be >= 0");
    WealthVector w;
    w.values_ = std::move(values);
    w.time_ = time;
    return w;
  }

  std::size_t size() const noexcept { return values_.size(); }
  long time() const noexcept { return time_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double monetary_base() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  friend bool operator==(const WealthVector&, const WealthVector&) = default;

 private:
  std::vector<double> values_;
  long time_ = 0;
};

struct Trajectory {
  std::vector<WealthVector> states;
  /// matrix_ids[k] identifies the matrix that produced states[k + 1].
  std::vector<std::size_t> matrix_ids;

  const WealthVector& back() const { return states.back(); }

  /// Largest |M(t+1) - M(t)| / M(t) over consecutive states.
  double max_base_drift() const {
    double worst = 0.0;
    for (std::size_t k = 1; k < states.size(); ++k) {
      const double prev = states[k - 1].monetary_base();
      if (prev == 0.0) continue;
      worst = std::max(worst, std::abs(states[k].monetary_base() - prev) / prev);
    }
    return worst;
  }
};

inline WealthVector step(const IncomeCirculationMatrix& f, const WealthVector& x) {
  if (x.size() != f.n())
    fail(ErrorKind::DimensionMismatch,
         "wealth vector has " + std::to_string(x.size()) + " agents, matrix has " + std::to_string(f.n()));
  auto y = f.apply(x.values());
  // F >= 0 and x >= 0, so the only way below zero is -0.0.
  for (double& v : y) v = std::max(v, 0.0);
  return WealthVector::make(std::move(y), x.time() + 1);
}

/// Applies schedule[0], schedule[1], ... in order, one matrix-vector product
/// per step.
inline Trajectory evolve(std::span<const IncomeCirculationMatrix> schedule, const WealthVector& x0) {
  for (const auto& f : schedule)
    if (f.n() != x0.size()) fail(ErrorKind::DimensionMismatch, "schedule matrix size differs from wealth vector");
  Trajectory t;
  t.states.reserve(schedule.size() + 1);
  t.states.push_back(x0);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    t.states.push_back(step(schedule[k], t.states.back()));
    t.matrix_ids.push_back(k);
  }
  return t;
}

/// Homogeneous evolution x(t) = F^t x(0).
inline Trajectory evolve(const IncomeCirculationMatrix& f, const WealthVector& x0, std::size_t steps) {
  if (f.n() != x0.size()) fail(ErrorKind::DimensionMismatch, "matrix size differs from wealth vector");
  Trajectory t;
  t.states.reserve(steps + 1);
  t.states.push_back(x0);
  for (std::size_t k = 0; k < steps; ++k) {
    t.states.push_back(step(f, t.states.back()));
    t.matrix_ids.push_back(0);
  }
  return t;
}

inline DenseMatrix dense_power(DenseMatrix base, unsigned long long k) {
  DenseMatrix result = DenseMatrix::identity(base.size());
  bool first = true;
  while (k > 0) {
    if (k & 1ULL) {
      result = first ? base : result * base;
      first = false;
    }
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

/// F^k by repeated squaring. Refuses n above `dense_cap`.
inline DenseMatrix matrix_power(const IncomeCirculationMatrix& f, unsigned long long k,
                                std::size_t dense_cap = kDefaultDenseCap) {
  if (f.n() > dense_cap)
    fail(ErrorKind::SizeCapExceeded,
         "dense power of a " + std::to_string(f.n()) + "-agent matrix exceeds cap " + std::to_string(dense_cap));
  return dense_power(f.to_dense(), k);
}

}  // namespace icm
