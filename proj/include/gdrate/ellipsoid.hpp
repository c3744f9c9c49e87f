#pragma once

// Deep-cut ellipsoid method for small LMI feasibility problems of the form
//
//   F_i(v) = F_i0 + sum_j v_j F_ij  ⪯  -margin_i I,   i = 1..N,
//
// over a ball of radius R. Each iteration evaluates every constraint at
// the current centre; the most violated one, with the unit eigenvector q of
// its largest eigenvalue, yields the affine cut qᵀF_i(v)q <= -margin_i.
// Infeasibility is reported once the ellipsoid provably contains no ball of
// radius r_min, or once a cut misses the ellipsoid entirely.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "gdrate/errors.hpp"
#include "gdrate/linalg.hpp"

namespace gdrate {

/// constant + sum_j v_j coeffs[j]  ⪯  -margin I
struct AffineSymConstraint {
  SymMatrix constant;
  std::vector<SymMatrix> coeffs;
  double margin = 0.0;

  SymMatrix at(const Vector& v) const {
    SymMatrix s = constant;
    for (std::size_t j = 0; j < coeffs.size(); ++j)
      if (v[j] != 0.0) s.axpy(v[j], coeffs[j]);
    return s;
  }
};

struct EllipsoidOptions {
  double radius = 1.0;
  double r_min = 1e-7;
  std::optional<long> max_iters;  // default: 10 d^2 ln(R / r_min)
};

struct EllipsoidPoint {
  Vector point;
  long iterations = 0;
};

inline long ellipsoid_default_budget(int dim, double radius, double r_min) {
  const double d = static_cast<double>(dim);
  return static_cast<long>(std::ceil(10.0 * d * d * std::log(radius / r_min)));
}

/// Returns a point satisfying every constraint, or nullopt when the
/// feasible set (inside the initial ball) cannot contain a ball of radius
/// r_min. Throws SolverBudgetExceeded when neither happens in time.
inline std::optional<EllipsoidPoint> ellipsoid_feasibility(std::span<const AffineSymConstraint> constraints,
                                                           int dim, const EllipsoidOptions& opts) {
  if (dim < 1) throw InvalidInput("ellipsoid_feasibility: dimension must be >= 1");
  if (!(opts.radius > opts.r_min) || !(opts.r_min > 0.0)) throw InvalidInput("ellipsoid_feasibility: need R > r_min > 0");
  for (const auto& c : constraints)
    if (static_cast<int>(c.coeffs.size()) != dim) throw DimensionMismatch("constraint coefficient count != dim");

  const long budget = opts.max_iters.value_or(ellipsoid_default_budget(dim, opts.radius, opts.r_min));
  const double n = dim;

  Vector x = Vector::Zero(dim);
  Matrix shape = Matrix::Identity(dim, dim) * (opts.radius * opts.radius);
  // log of prod(semi-axes) = 0.5 log det(shape); compared against n log r_min
  double log_volume = n * std::log(opts.radius);
  const double log_floor = n * std::log(opts.r_min);

  for (long it = 0; it < budget; ++it) {
    // Pick the most violated constraint at the centre.
    double worst = 0.0;
    std::optional<std::size_t> worst_idx;
    Vector worst_q;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      auto top = max_eigenvalue(constraints[i].at(x));
      const double violation = top.value + constraints[i].margin;
      if (violation > worst) {
        worst = violation;
        worst_idx = i;
        worst_q = std::move(top.vector);
      }
    }
    if (!worst_idx) return EllipsoidPoint{x, it};

    // Cut: g·v <= h, with g_j = qᵀF_j q and h = -margin - qᵀF_0 q.
    const auto& con = constraints[*worst_idx];
    Vector g(dim);
    for (int j = 0; j < dim; ++j) g[j] = con.coeffs[j].quad(worst_q);
    const double excess = worst;  // g·x - h
    const Vector eg = shape * g;
    const double gnorm2 = g.dot(eg);
    if (!(gnorm2 > 0.0)) return std::nullopt;  // violated and independent of v
    const double gnorm = std::sqrt(gnorm2);
    const double depth = excess / gnorm;
    if (depth >= 1.0) return std::nullopt;  // half-space misses the ellipsoid

    if (dim == 1) {
      // The ellipsoid is an interval; intersect it with the half-line exactly.
      const double r = std::sqrt(shape(0, 0));
      const double lo0 = x[0] - r;
      const double hi0 = x[0] + r;
      const double bound = x[0] - excess / g[0];
      const double lo = g[0] > 0.0 ? lo0 : std::max(lo0, bound);
      const double hi = g[0] > 0.0 ? std::min(hi0, bound) : hi0;
      x[0] = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      shape(0, 0) = half * half;
      log_volume = std::log(half);
    } else {
      const double tau = (1.0 + n * depth) / (n + 1.0);
      const double sigma = 2.0 * (1.0 + n * depth) / ((n + 1.0) * (1.0 + depth));
      const double delta = n * n * (1.0 - depth * depth) / (n * n - 1.0);
      const Vector step = eg / gnorm;
      x -= tau * step;
      shape = delta * (shape - sigma * step * step.transpose());
      shape = 0.5 * (shape + shape.transpose());
      log_volume += 0.5 * (n * std::log(delta) + std::log1p(-sigma));
    }
    if (log_volume < log_floor) return std::nullopt;
  }
  throw SolverBudgetExceeded("ellipsoid method hit its iteration cap (" + std::to_string(budget) + ")");
}

}  // namespace gdrate
