#pragma once

// Rate certification for gradient descent with step sizes in an interval.
//
// For a trial rate rho the certifier looks for a storage matrix P ≻ 0 and a
// multiplier weight lambda >= 0 with
//
//   [AᵀPA - rho²P   AᵀPB(α)]
//   [B(α)ᵀPA     B(α)ᵀPB(α)]  + lambda [C D]ᵀM[C D]  ⪯  -eps I
//
// at every grid point α, then bisects on rho. The problem is jointly
// homogeneous in (P, lambda), so P is normalised to trace 1. With a scalar
// storage (sector multiplier) P = 1 and each grid point admits an exact
// lambda interval; otherwise the ellipsoid backend searches (P, lambda).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gdrate/ellipsoid.hpp"
#include "gdrate/errors.hpp"
#include "gdrate/iqc.hpp"
#include "gdrate/linalg.hpp"
#include "gdrate/model.hpp"

namespace gdrate {

/// Worst-case rate of constant-step gradient descent on S(m, L).
inline double closed_form_rate(double alpha, const FunctionClass& fc) {
  if (!(alpha >= 0.0)) throw InvalidInput("closed_form_rate: alpha must be >= 0");
  return std::max(std::abs(1.0 - alpha * fc.m()), std::abs(1.0 - alpha * fc.L()));
}

/// The LMI block at one step size. Linear in (p, lambda).
inline SymMatrix assemble_lmi_block(const AugmentedSystem& aug, const SymMatrix& quad, double rho, double alpha,
                                    const SymMatrix& p, double lambda) {
  const Eigen::Index n = aug.state_dim;
  if (static_cast<Eigen::Index>(p.order()) != n || static_cast<Eigen::Index>(quad.order()) != n + 1 ||
      aug.a.rows() != n || aug.b0.rows() != n)
    throw DimensionMismatch("assemble_lmi_block: inconsistent dimensions");
  if (lambda < 0.0) throw InvalidInput("assemble_lmi_block: lambda must be >= 0");

  Matrix ab(n, n + 1);
  ab << aug.a, aug.b(alpha);
  const Matrix pd = p.dense();
  Matrix block = ab.transpose() * pd * ab;
  block.topLeftCorner(n, n) -= rho * rho * pd;
  block += lambda * quad.dense();
  return SymMatrix::from_lower(block);
}

struct LmiInstance {
  double rho;
  StepGrid grid;
  AugmentedSystem aug;
  SymMatrix quad;
  Eigen::Index state_dim;

  LmiInstance(double rho_, StepGrid grid_, AugmentedSystem aug_, SymMatrix quad_)
      : rho(rho_), grid(std::move(grid_)), aug(std::move(aug_)), quad(std::move(quad_)), state_dim(aug.state_dim) {
    if (!(rho > 0.0)) throw InvalidInput("LmiInstance: rho must be positive");
    if (grid.size() == 0) throw InvalidInput("LmiInstance: empty grid");
    if (static_cast<Eigen::Index>(quad.order()) != state_dim + 1)
      throw DimensionMismatch("LmiInstance: quadratic form order != state_dim + 1");
  }

  /// Largest magnitude in the instance data; sets the absolute feasibility margin.
  double data_scale() const {
    double s = quad.max_abs();
    for (const Matrix* m : {&aug.a, &aug.b0, &aug.b1, &aug.c, &aug.d})
      if (m->size() > 0) s = std::max(s, m->cwiseAbs().maxCoeff());
    return s;
  }
};

struct Witness {
  SymMatrix p;
  double lambda;
  double slack;          // max over grid blocks of the largest eigenvalue
  double normalization;  // trace(p)
};

struct FeasibilityOptions {
  double eps_rel = 1e-9;  // blocks ⪯ -eps_rel (1 + data scale) I
  double delta = 1e-8;    // P ⪰ delta I (relative to trace 1)
  double r_min = 1e-7;
  std::optional<double> radius;  // default 10 sqrt(dim)
  std::optional<long> max_iters;
};

inline double feasibility_margin(const LmiInstance& inst, const FeasibilityOptions& opts) {
  return opts.eps_rel * (1.0 + inst.data_scale());
}

/// Closed interval of lambda (possibly empty, hi possibly +inf).
struct LambdaInterval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool empty() const { return lo > hi; }
  static LambdaInterval none() { return {1.0, 0.0}; }
  LambdaInterval intersect(const LambdaInterval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
};

namespace detail {

// {lambda : c0 + c1 lambda <= 0}
inline LambdaInterval half_line(double c0, double c1) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (c1 > 0.0) return {-inf, -c0 / c1};
  if (c1 < 0.0) return {-c0 / c1, inf};
  return c0 <= 0.0 ? LambdaInterval{-inf, inf} : LambdaInterval::none();
}

}  // namespace detail

/// Exact set of lambda >= 0 with F + lambda Q ⪯ -eps I for a 2x2 block
/// F (the storage part at P = 1) and the 2x2 quadratic form Q.
inline LambdaInterval lambda_interval_2x2(const SymMatrix& f, const SymMatrix& q, double eps) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (f.order() != 2 || q.order() != 2) throw DimensionMismatch("lambda_interval_2x2 needs 2x2 blocks");
  const double f11 = f(0, 0) + eps, f22 = f(1, 1) + eps, f12 = f(1, 0);
  const double q11 = q(0, 0), q22 = q(1, 1), q12 = q(1, 0);

  LambdaInterval iv{0.0, inf};
  iv = iv.intersect(detail::half_line(f11, q11));
  iv = iv.intersect(detail::half_line(f22, q22));
  if (iv.empty()) return LambdaInterval::none();

  // det(F + eps I + lambda Q) = qa lambda² + qb lambda + qc >= 0
  const double qa = q11 * q22 - q12 * q12;
  const double qb = f11 * q22 + f22 * q11 - 2.0 * f12 * q12;
  const double qc = f11 * f22 - f12 * f12;

  if (qa == 0.0) {
    // qb lambda + qc >= 0  <=>  (-qc) + (-qb) lambda <= 0
    return iv.intersect(detail::half_line(-qc, -qb));
  }
  double disc = qb * qb - 4.0 * qa * qc;
  // Tangency (double root) is common at the boundary rate; absorb rounding.
  const double guard = 64.0 * std::numeric_limits<double>::epsilon() * std::max(qb * qb, std::abs(4.0 * qa * qc));
  if (disc < 0.0 && disc > -guard) disc = 0.0;

  if (disc < 0.0) {
    // No real roots: the sign of the quadratic is the sign of qa everywhere.
    return qa > 0.0 ? iv : LambdaInterval::none();
  }
  const double sq = std::sqrt(disc);
  const double t = -0.5 * (qb + std::copysign(sq, qb));
  double r1 = t / qa;
  double r2 = t != 0.0 ? qc / t : r1;
  if (r1 > r2) std::swap(r1, r2);

  if (qa < 0.0) return iv.intersect({r1, r2});
  // qa > 0: the set is (-inf, r1] ∪ [r2, inf); the LMI solution set is an
  // interval, so at most one piece survives the diagonal conditions.
  auto left = iv.intersect({-inf, r1});
  auto right = iv.intersect({r2, inf});
  if (!left.empty()) return left;
  return right;
}

/// Lambda interval for the scalar-storage case of an arbitrary augmented
/// system with state_dim == 1.
inline LambdaInterval lambda_interval_scalar(const AugmentedSystem& aug, const SymMatrix& quad, double rho,
                                             double alpha, double eps) {
  if (aug.state_dim != 1) throw DimensionMismatch("lambda_interval_scalar needs state_dim == 1");
  auto f = assemble_lmi_block(aug, quad, rho, alpha, SymMatrix::identity(1), 0.0);
  return lambda_interval_2x2(f, quad, eps);
}

/// Lambda interval for gradient descent with the sector multiplier.
inline LambdaInterval lambda_interval_sector(double rho, double alpha, const FunctionClass& fc, double eps) {
  const auto q = sector(fc);
  const auto aug = augment(gradient_descent_plant(), q);
  return lambda_interval_scalar(aug, quad_form(aug, q), rho, alpha, eps);
}

namespace detail {

inline double max_block_eigenvalue(const LmiInstance& inst, const SymMatrix& p, double lambda) {
  double slack = -std::numeric_limits<double>::infinity();
  for (double alpha : inst.grid.points())
    slack = std::max(slack, max_eigenvalue(assemble_lmi_block(inst.aug, inst.quad, inst.rho, alpha, p, lambda)).value);
  return slack;
}

inline std::optional<Witness> feasible_scalar(const LmiInstance& inst, double eps) {
  LambdaInterval iv{0.0, std::numeric_limits<double>::infinity()};
  for (double alpha : inst.grid.points()) {
    iv = iv.intersect(lambda_interval_scalar(inst.aug, inst.quad, inst.rho, alpha, eps));
    if (iv.empty()) return std::nullopt;
  }
  double lambda;
  if (iv.lo == iv.hi)
    lambda = iv.lo;
  else if (std::isinf(iv.hi))
    lambda = iv.lo > 0.0 ? 2.0 * iv.lo : 1.0;
  else
    lambda = 0.5 * (iv.lo + iv.hi);
  auto p = SymMatrix::identity(1);
  const double slack = max_block_eigenvalue(inst, p, lambda);
  return Witness{p, lambda, slack, 1.0};
}

// Decision vector v = (off-trace P coordinates, lambda) with
// P(v) = I/n + sum_i v_i E_i. The E_i span trace-zero symmetric matrices:
// e_i e_iᵀ - e_0 e_0ᵀ for i >= 1, then e_i e_jᵀ + e_j e_iᵀ for i > j.
inline std::vector<SymMatrix> trace_free_basis(std::size_t n) {
  std::vector<SymMatrix> basis;
  for (std::size_t i = 1; i < n; ++i) {
    SymMatrix e(n);
    e.set(i, i, 1.0);
    e.set(0, 0, -1.0);
    basis.push_back(std::move(e));
  }
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      SymMatrix e(n);
      e.set(i, j, 1.0);
      basis.push_back(std::move(e));
    }
  return basis;
}

inline std::optional<Witness> feasible_ellipsoid(const LmiInstance& inst, double eps, const FeasibilityOptions& opts) {
  const auto n = static_cast<std::size_t>(inst.state_dim);
  const auto basis = trace_free_basis(n);
  const int dim = static_cast<int>(basis.size()) + 1;
  const SymMatrix p0 = (1.0 / static_cast<double>(n)) * SymMatrix::identity(n);

  std::vector<AffineSymConstraint> cons;
  cons.reserve(inst.grid.size() + 2);
  for (double alpha : inst.grid.points()) {
    AffineSymConstraint c{assemble_lmi_block(inst.aug, inst.quad, inst.rho, alpha, p0, 0.0), {}, eps};
    for (const auto& e : basis) c.coeffs.push_back(assemble_lmi_block(inst.aug, inst.quad, inst.rho, alpha, e, 0.0));
    c.coeffs.push_back(inst.quad);
    cons.push_back(std::move(c));
  }
  {
    // -P(v) ⪯ -delta I
    AffineSymConstraint c{-1.0 * p0, {}, opts.delta};
    for (const auto& e : basis) c.coeffs.push_back(-1.0 * e);
    c.coeffs.emplace_back(n);
    cons.push_back(std::move(c));
  }
  {
    // -lambda <= 0
    AffineSymConstraint c{SymMatrix(1), std::vector<SymMatrix>(dim - 1, SymMatrix(1)), 0.0};
    c.coeffs.push_back(SymMatrix::diagonal({-1.0}));
    cons.push_back(std::move(c));
  }

  EllipsoidOptions eo;
  eo.radius = opts.radius.value_or(10.0 * std::sqrt(static_cast<double>(dim)));
  eo.r_min = opts.r_min;
  eo.max_iters = opts.max_iters;
  auto found = ellipsoid_feasibility(cons, dim, eo);
  if (!found) return std::nullopt;

  SymMatrix p = p0;
  for (std::size_t i = 0; i < basis.size(); ++i) p.axpy(found->point[i], basis[i]);
  const double lambda = std::max(0.0, found->point[dim - 1]);
  const double slack = max_block_eigenvalue(inst, p, lambda);
  return Witness{p, lambda, slack, p.trace()};
}

}  // namespace detail

/// Searches for (P, lambda) making every grid block ⪯ -eps I. Scalar storage
/// uses the exact lambda-interval backend, larger storage the ellipsoid.
inline std::optional<Witness> feasible_at_rho(const LmiInstance& inst, const FeasibilityOptions& opts = {}) {
  const double eps = feasibility_margin(inst, opts);
  if (inst.state_dim == 1) return detail::feasible_scalar(inst, eps);
  return detail::feasible_ellipsoid(inst, eps, opts);
}

/// Same as feasible_at_rho but always through the ellipsoid backend; used to
/// cross-check the closed-form path.
inline std::optional<Witness> feasible_at_rho_ellipsoid(const LmiInstance& inst, const FeasibilityOptions& opts = {}) {
  return detail::feasible_ellipsoid(inst, feasibility_margin(inst, opts), opts);
}

struct CertifyOptions {
  double rho_lo = 1e-3;
  double rho_hi = 1.0;
  double rho_tol = 1e-4;
  FeasibilityOptions feasibility;
};

struct Certificate {
  std::optional<double> rho_star;
  std::optional<Witness> witness;
  double cond_p = std::numeric_limits<double>::quiet_NaN();
  FunctionClass fc;
  StepSizeInterval interval;
  int grid_size;
  IqcChoice iqc;
  int bisection_iters = 0;

  bool certified() const { return rho_star.has_value(); }
};

/// LMI instance at a trial rate; nullopt when the multiplier's weights are
/// not admissible at that rate.
inline std::optional<LmiInstance> make_instance(const FunctionClass& fc, const StepGrid& grid, const IqcChoice& iqc,
                                                double rho) {
  try {
    const auto q = iqc.instantiate(fc, rho);
    auto aug = augment(gradient_descent_plant(), q);
    auto quad = quad_form(aug, q);
    return LmiInstance(rho, grid, std::move(aug), std::move(quad));
  } catch (const WeightOutOfRange&) {
    if (!iqc.weights) throw;
    return std::nullopt;
  }
}

namespace detail {

// Maps a witness found for the class (m/L, 1) back to (m, L). The filter
// state and the gradient both carry units of L, so with D = diag(1, L I_k)
// the original blocks are D⁻¹ F D⁻¹ (input scaled the same way): feasible
// blocks stay feasible and P, lambda transform by congruence.
inline Witness unnormalize(const Witness& w, double scale, const LmiInstance& original) {
  const std::size_t n = w.p.order();
  SymMatrix p(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) p.set(i, j, w.p(i, j) / ((i ? scale : 1.0) * (j ? scale : 1.0)));
  const double lambda = w.lambda / (scale * scale);
  return Witness{p, lambda, max_block_eigenvalue(original, p, lambda), p.trace()};
}

}  // namespace detail

/// Bisection on rho. Reports the smallest feasible rho found (the upper end
/// of the final bracket) or no rate when rho_hi - rho_tol is infeasible.
///
/// The search runs on the rescaled class (m/L, 1) with steps multiplied by
/// L. Without this the absolute margin eps would weigh the gradient
/// coordinate (entries of order 1/L²) differently at every scale.
inline Certificate certify(const FunctionClass& fc, const StepSizeInterval& interval, int grid_size,
                           const IqcChoice& iqc, const CertifyOptions& opts = {}) {
  if (grid_size < 1) throw InvalidInput("grid size must be >= 1");
  if (!(opts.rho_lo > 0.0) || !(opts.rho_tol > 0.0) || !(opts.rho_lo < opts.rho_hi - opts.rho_tol) || opts.rho_hi > 1.0)
    throw InvalidInput("need 0 < rho_lo < rho_hi - rho_tol and rho_hi <= 1");
  if (iqc.kind != IqcKind::Sector && iqc.order < 1) throw InvalidInput("dynamic IQC needs order >= 1");

  const double scale = fc.L();
  const FunctionClass unit_fc(fc.m() / scale, 1.0);
  const StepGrid unit_grid = make_grid(StepSizeInterval(interval.lo() * scale, interval.hi() * scale), grid_size);
  Certificate cert{std::nullopt, std::nullopt, std::numeric_limits<double>::quiet_NaN(), fc, interval, grid_size, iqc, 0};

  auto check = [&](double rho) -> std::optional<Witness> {
    auto inst = make_instance(unit_fc, unit_grid, iqc, rho);
    if (!inst) return std::nullopt;
    return feasible_at_rho(*inst, opts.feasibility);
  };

  double hi = opts.rho_hi - opts.rho_tol;
  auto best = check(hi);
  if (!best) return cert;

  double lo = opts.rho_lo;
  if (auto w = check(lo)) {
    hi = lo;
    best = std::move(w);
  } else {
    while (hi - lo > opts.rho_tol) {
      const double mid = 0.5 * (lo + hi);
      ++cert.bisection_iters;
      if (auto w = check(mid)) {
        hi = mid;
        best = std::move(w);
      } else {
        lo = mid;
      }
    }
  }
  const auto original = make_instance(fc, make_grid(interval, grid_size), iqc, hi);
  if (!original) throw InvalidInput("multiplier weights not admissible at the certified rate");
  cert.rho_star = hi;
  cert.witness = detail::unnormalize(*best, scale, *original);
  cert.cond_p = cond_spd(cert.witness->p);
  return cert;
}

/// Replays every grid block at (rho*, P, lambda) and checks it is ⪯ slack_tol.
inline bool verify_certificate(const Certificate& cert, double slack_tol = 0.0) {
  if (!cert.rho_star || !cert.witness) return false;
  const auto& w = *cert.witness;
  if (w.lambda < 0.0) return false;
  if (!(min_eigenvalue(w.p).value > 0.0)) return false;
  std::optional<LmiInstance> inst;
  try {
    inst = make_instance(cert.fc, make_grid(cert.interval, cert.grid_size), cert.iqc, *cert.rho_star);
  } catch (const Error&) {
    return false;
  }
  if (!inst || static_cast<Eigen::Index>(w.p.order()) != inst->state_dim) return false;
  for (double alpha : inst->grid.points())
    if (!is_neg_semidef(assemble_lmi_block(inst->aug, inst->quad, inst->rho, alpha, w.p, w.lambda), slack_tol))
      return false;
  return true;
}

}  // namespace gdrate
