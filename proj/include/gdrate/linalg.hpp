#pragma once

// Small dense symmetric-matrix numerics: a packed symmetric matrix type,
// a cyclic Jacobi eigensolver and the semidefiniteness / conditioning
// helpers built on top of it. Orders here are tiny (at most ~12), so
// everything is written for clarity rather than cache behaviour.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gdrate/errors.hpp"

namespace gdrate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric matrix stored as a packed lower triangle, so entry(i,j) and
/// entry(j,i) are the same storage cell.
class SymMatrix {
 public:
  /// Zero matrix of the given order.
  explicit SymMatrix(std::size_t order) : order_(order), data_(packed_size(order), 0.0) {
    if (order == 0) throw InvalidInput("SymMatrix order must be >= 1");
  }

  /// Row-wise literal; the rows must describe an exactly symmetric matrix.
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows) : SymMatrix(rows.size()) {
    std::vector<std::vector<double>> full;
    for (const auto& r : rows) {
      if (r.size() != order_) throw DimensionMismatch("SymMatrix literal is not square");
      full.emplace_back(r);
    }
    for (std::size_t r = 0; r < order_; ++r) {
      for (std::size_t c = 0; c <= r; ++c) {
        if (full[r][c] != full[c][r]) throw InvalidInput("SymMatrix literal is not symmetric");
        set(r, c, full[r][c]);
      }
    }
  }

  /// Builds from the lower triangle of a square dense matrix.
  static SymMatrix from_lower(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw DimensionMismatch("from_lower needs a square matrix");
    SymMatrix s(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j) s.set(i, j, m(i, j));
    return s;
  }

  /// Builds (m + mᵀ)/2.
  static SymMatrix symmetrize(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw DimensionMismatch("symmetrize needs a square matrix");
    SymMatrix s(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j) s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
    return s;
  }

  static SymMatrix identity(std::size_t order) {
    SymMatrix s(order);
    for (std::size_t i = 0; i < order; ++i) s.set(i, i, 1.0);
    return s;
  }

  static SymMatrix diagonal(std::initializer_list<double> d) {
    SymMatrix s(d.size());
    std::size_t i = 0;
    for (double v : d) s.set(i, i, v), ++i;
    return s;
  }

  std::size_t order() const { return order_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

  void set(std::size_t i, std::size_t j, double v) {
    if (!std::isfinite(v)) throw InvalidInput("SymMatrix entries must be finite");
    data_[index(i, j)] = v;
  }

  Matrix dense() const {
    Matrix m(order_, order_);
    for (std::size_t i = 0; i < order_; ++i)
      for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < order_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < order_; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double v = (*this)(i, j);
        s += (i == j ? 1.0 : 2.0) * v * v;
      }
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// qᵀ S q.
  double quad(const Vector& q) const {
    if (static_cast<std::size_t>(q.size()) != order_) throw DimensionMismatch("quad: vector length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < order_; ++i) {
      s += (*this)(i, i) * q[i] * q[i];
      for (std::size_t j = 0; j < i; ++j) s += 2.0 * (*this)(i, j) * q[i] * q[j];
    }
    return s;
  }

  /// this += alpha * other
  SymMatrix& axpy(double alpha, const SymMatrix& other) {
    if (other.order_ != order_) throw DimensionMismatch("axpy: order mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += alpha * other.data_[k];
    return *this;
  }

  SymMatrix& operator+=(const SymMatrix& o) { return axpy(1.0, o); }
  SymMatrix& operator-=(const SymMatrix& o) { return axpy(-1.0, o); }
  SymMatrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.order_ == b.order_ && a.data_ == b.data_;
  }

 private:
  static std::size_t packed_size(std::size_t n) { return n * (n + 1) / 2; }

  std::size_t index(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

  std::size_t order_;
  std::vector<double> data_;
};

struct EigenResult {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values[i]
};

struct JacobiOptions {
  double rel_tol = 1e-12;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigendecomposition. Sweeps until the off-diagonal
/// Frobenius norm falls below rel_tol * ||S||_F.
inline EigenResult eig_sym(const SymMatrix& s, const JacobiOptions& opts = {}) {
  const auto n = static_cast<Eigen::Index>(s.order());
  Matrix a = s.dense();
  Matrix v = Matrix::Identity(n, n);
  const double norm = s.frobenius_norm();

  auto off_norm = [&] {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < i; ++j) acc += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (off_norm() <= opts.rel_tol * norm) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p,q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });

  EigenResult out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

struct ExtremeEigen {
  double value;
  Vector vector;  // unit norm
};

inline ExtremeEigen max_eigenvalue(const SymMatrix& s) {
  auto e = eig_sym(s);
  const auto last = e.values.size() - 1;
  return {e.values[last], e.vectors.col(last)};
}

inline ExtremeEigen min_eigenvalue(const SymMatrix& s) {
  auto e = eig_sym(s);
  return {e.values[0], e.vectors.col(0)};
}

/// True iff the largest eigenvalue of S does not exceed `slack`.
inline bool is_neg_semidef(const SymMatrix& s, double slack = 0.0) {
  if (slack < 0.0) throw InvalidInput("is_neg_semidef: slack must be >= 0");
  return max_eigenvalue(s).value <= slack;
}

/// lambda_max / lambda_min of a positive definite matrix.
inline double cond_spd(const SymMatrix& s) {
  auto e = eig_sym(s);
  const double lo = e.values[0];
  if (!(lo > 0.0)) throw NotPositiveDefinite("cond_spd: smallest eigenvalue " + std::to_string(lo) + " is not positive");
  return e.values[e.values.size() - 1] / lo;
}

}  // namespace gdrate
