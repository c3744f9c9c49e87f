#pragma once

// IQC multipliers (Psi, M) for the gradient of f in S(m, L) and the
// augmented plant/filter system they induce.
//
// Every multiplier here has a two-row output z and the same middle matrix
// M = [0 1; 1 0]. The filter state eta carries past values of L*y - u.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gdrate/errors.hpp"
#include "gdrate/linalg.hpp"
#include "gdrate/model.hpp"

namespace gdrate {

enum class IqcKind { Sector, WeightedOffBy1, ZamesFalb };

struct IqcMultiplier {
  Matrix psi_a;   // k x k
  Matrix psi_by;  // k x 1
  Matrix psi_bu;  // k x 1
  Matrix psi_c;   // 2 x k
  Matrix psi_dy;  // 2 x 1
  Matrix psi_du;  // 2 x 1
  SymMatrix mid{{0.0, 1.0}, {1.0, 0.0}};
  IqcKind kind = IqcKind::Sector;
  std::vector<double> weights;

  Eigen::Index order() const { return psi_a.rows(); }
};

namespace detail {

// Slack for the admissibility checks, so that weights meeting a condition
// with equality (the defaults) are not rejected over rounding.
inline constexpr double kWeightTol = 1e-12;

inline IqcMultiplier static_part(const FunctionClass& fc, Eigen::Index k) {
  IqcMultiplier q;
  q.psi_a = Matrix::Zero(k, k);
  q.psi_by = Matrix::Zero(k, 1);
  q.psi_bu = Matrix::Zero(k, 1);
  q.psi_c = Matrix::Zero(2, k);
  q.psi_dy.resize(2, 1);
  q.psi_dy << fc.L(), -fc.m();
  q.psi_du.resize(2, 1);
  q.psi_du << -1.0, 1.0;
  return q;
}

inline void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidInput("rho must be positive and finite");
}

}  // namespace detail

/// Static sector multiplier: z = (L y - u, u - m y).
inline IqcMultiplier sector(const FunctionClass& fc) {
  auto q = detail::static_part(fc, 0);
  q.kind = IqcKind::Sector;
  return q;
}

/// Off-by-k (Zames-Falb rho-) multiplier with weights h. Needs 0 <= h_j <= 1
/// and sum_j rho^{-2j} h_j <= 1.
inline IqcMultiplier zames_falb(const FunctionClass& fc, double rho, const std::vector<double>& h) {
  detail::check_rho(rho);
  if (h.empty()) throw InvalidInput("zames_falb needs at least one weight");
  double weighted = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (!std::isfinite(h[j]) || h[j] < 0.0 || h[j] > 1.0 + detail::kWeightTol)
      throw WeightOutOfRange("weight h_" + std::to_string(j + 1) + " = " + std::to_string(h[j]) + " outside [0, 1]");
    weighted += h[j] * std::pow(rho, -2.0 * static_cast<double>(j + 1));
  }
  if (weighted > 1.0 + detail::kWeightTol)
    throw WeightOutOfRange("sum rho^{-2j} h_j = " + std::to_string(weighted) + " exceeds 1");

  const auto k = static_cast<Eigen::Index>(h.size());
  auto q = detail::static_part(fc, k);
  for (Eigen::Index j = 1; j < k; ++j) q.psi_a(j, j - 1) = 1.0;
  q.psi_by(0, 0) = -fc.L();
  q.psi_bu(0, 0) = 1.0;
  for (Eigen::Index j = 0; j < k; ++j) q.psi_c(0, j) = h[j];
  q.kind = IqcKind::ZamesFalb;
  q.weights = h;
  return q;
}

/// One-step memory multiplier; h1 must lie in [0, rho^2].
inline IqcMultiplier weighted_off_by_1(const FunctionClass& fc, double rho, double h1) {
  detail::check_rho(rho);
  if (!std::isfinite(h1) || h1 < 0.0 || h1 > rho * rho + detail::kWeightTol)
    throw WeightOutOfRange("h1 = " + std::to_string(h1) + " outside [0, rho^2 = " + std::to_string(rho * rho) + "]");
  auto q = zames_falb(fc, rho, {h1});
  q.kind = IqcKind::WeightedOffBy1;
  return q;
}

/// h_j = rho^{2j} / k: admissible, and meets the weighted-sum condition with
/// equality. The kind is accepted for symmetry with the constructors; the
/// formula is the same for every kind.
inline std::vector<double> default_weights(IqcKind /*kind*/, double rho, int k) {
  if (!(rho > 0.0) || rho > 1.0) throw InvalidInput("default_weights needs rho in (0, 1]");
  if (k < 1) throw InvalidInput("default_weights needs k >= 1");
  std::vector<double> h(k);
  for (int j = 0; j < k; ++j) h[j] = std::pow(rho, 2.0 * (j + 1)) / k;
  return h;
}

/// Which multiplier family to use, independent of rho. Weights default to
/// default_weights() at each rho unless fixed explicitly.
struct IqcChoice {
  IqcKind kind = IqcKind::Sector;
  int order = 0;
  std::optional<std::vector<double>> weights;

  static IqcChoice sector_iqc() { return {IqcKind::Sector, 0, std::nullopt}; }
  static IqcChoice off_by_1() { return {IqcKind::WeightedOffBy1, 1, std::nullopt}; }
  static IqcChoice off_by_k(int k) { return {IqcKind::ZamesFalb, k, std::nullopt}; }

  /// Accepts "sector", "wob1" and "zf:<k>".
  static IqcChoice parse(const std::string& s) {
    if (s == "sector") return sector_iqc();
    if (s == "wob1") return off_by_1();
    if (s.rfind("zf:", 0) == 0) {
      std::size_t used = 0;
      int k = 0;
      try {
        k = std::stoi(s.substr(3), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size() - 3 || k < 1) throw InvalidInput("bad IQC spec '" + s + "'");
      return off_by_k(k);
    }
    throw InvalidInput("unknown IQC '" + s + "' (expected sector, wob1 or zf:<k>)");
  }

  std::string name() const {
    switch (kind) {
      case IqcKind::Sector: return "sector";
      case IqcKind::WeightedOffBy1: return "wob1";
      case IqcKind::ZamesFalb: return "zf:" + std::to_string(order);
    }
    return "?";
  }

  IqcMultiplier instantiate(const FunctionClass& fc, double rho) const {
    switch (kind) {
      case IqcKind::Sector:
        return sector(fc);
      case IqcKind::WeightedOffBy1: {
        auto h = weights ? *weights : default_weights(kind, std::min(rho, 1.0), 1);
        if (h.size() != 1) throw InvalidInput("wob1 takes exactly one weight");
        return weighted_off_by_1(fc, rho, h[0]);
      }
      case IqcKind::ZamesFalb: {
        auto h = weights ? *weights : default_weights(kind, std::min(rho, 1.0), order);
        if (static_cast<int>(h.size()) != order) throw InvalidInput("zf weight count does not match order");
        return zames_falb(fc, rho, h);
      }
    }
    throw InvalidInput("unknown IQC kind");
  }
};

/// x = (xi, eta), B(alpha) = b0 + alpha * b1.
struct AugmentedSystem {
  Matrix a;
  Matrix b0;
  Matrix b1;
  Matrix c;
  Matrix d;
  Eigen::Index state_dim = 1;

  Matrix b(double alpha) const { return b0 + alpha * b1; }
};

inline AugmentedSystem augment(const Plant& p, const IqcMultiplier& q) {
  const Eigen::Index k = q.order();
  if (q.psi_a.cols() != k || q.psi_by.rows() != k || q.psi_bu.rows() != k || q.psi_by.cols() != 1 ||
      q.psi_bu.cols() != 1 || q.psi_c.rows() != 2 || q.psi_c.cols() != k || q.psi_dy.rows() != 2 ||
      q.psi_dy.cols() != 1 || q.psi_du.rows() != 2 || q.psi_du.cols() != 1 || q.mid.order() != 2)
    throw DimensionMismatch("IQC multiplier blocks have inconsistent dimensions");
  if (p.d != 0.0) throw DimensionMismatch("plant feedthrough must be zero");

  const Eigen::Index n = 1 + k;
  AugmentedSystem s;
  s.state_dim = n;
  s.a = Matrix::Zero(n, n);
  s.a(0, 0) = p.a;
  s.a.block(1, 0, k, 1) = q.psi_by * p.c;
  s.a.block(1, 1, k, k) = q.psi_a;

  s.b0 = Matrix::Zero(n, 1);
  s.b0(0, 0) = p.b0;
  s.b0.block(1, 0, k, 1) = q.psi_bu;
  s.b1 = Matrix::Zero(n, 1);
  s.b1(0, 0) = p.b1;

  s.c = Matrix::Zero(2, n);
  s.c.col(0) = q.psi_dy * p.c;
  s.c.block(0, 1, 2, k) = q.psi_c;
  s.d = q.psi_du;
  return s;
}

/// [C D]ᵀ M [C D], of order state_dim + 1.
inline SymMatrix quad_form(const AugmentedSystem& aug, const IqcMultiplier& q) {
  if (aug.c.rows() != q.mid.dense().rows() || aug.d.rows() != aug.c.rows())
    throw DimensionMismatch("quad_form: output dimension mismatch");
  Matrix cd(aug.c.rows(), aug.c.cols() + aug.d.cols());
  cd << aug.c, aug.d;
  return SymMatrix::from_lower(cd.transpose() * q.mid.dense() * cd);
}

}  // namespace gdrate
