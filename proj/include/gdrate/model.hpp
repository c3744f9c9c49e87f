#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gdrate/errors.hpp"

namespace gdrate {

/// The class S(m, L) of m-strongly convex functions with L-Lipschitz
/// gradients.
class FunctionClass {
 public:
  FunctionClass(double m, double L) : m_(m), L_(L) {
    if (!std::isfinite(m) || !std::isfinite(L) || !(m > 0.0) || !(m <= L))
      throw InvalidInput("function class needs 0 < m <= L (got m=" + std::to_string(m) +
                         ", L=" + std::to_string(L) + ")");
  }

  double m() const { return m_; }
  double L() const { return L_; }
  double kappa() const { return L_ / m_; }

  friend bool operator==(const FunctionClass&, const FunctionClass&) = default;

 private:
  double m_;
  double L_;
};

/// Closed interval [lo, hi] of admissible step sizes; lo == hi is a
/// constant step size.
class StepSizeInterval {
 public:
  StepSizeInterval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo > 0.0) || !(lo <= hi))
      throw InvalidInput("step-size interval needs 0 < lo <= hi");
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool degenerate() const { return lo_ == hi_; }
  bool contains(double a) const { return lo_ <= a && a <= hi_; }

  friend bool operator==(const StepSizeInterval&, const StepSizeInterval&) = default;

 private:
  double lo_;
  double hi_;
};

/// [1/(c1 L), c2/L]; rejects an empty interval.
inline StepSizeInterval interval_asymmetric(const FunctionClass& fc, double c1, double c2) {
  if (!(c1 > 0.0) || !(c2 > 0.0) || !std::isfinite(c1) || !std::isfinite(c2))
    throw InvalidC("interval constants must be positive and finite");
  const double lo = 1.0 / (c1 * fc.L());
  const double hi = c2 / fc.L();
  if (lo > hi)
    throw InvalidC("empty step-size interval: 1/(c1 L) = " + std::to_string(lo) + " > c2/L = " + std::to_string(hi));
  return {lo, hi};
}

/// [1/(c L), c/L]; needs c >= 1.
inline StepSizeInterval interval_from_c(const FunctionClass& fc, double c) {
  if (!(c >= 1.0)) throw InvalidC("c must be >= 1 (got " + std::to_string(c) + ")");
  return interval_asymmetric(fc, c, c);
}

class StepGrid {
 public:
  StepGrid(std::vector<double> points, StepSizeInterval source)
      : points_(std::move(points)), source_(source) {}

  const std::vector<double>& points() const { return points_; }
  const StepSizeInterval& source() const { return source_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<double> points_;
  StepSizeInterval source_;
};

/// Uniform grid including both endpoints. A degenerate interval collapses
/// to {lo}; n == 1 on a proper interval gives the midpoint.
inline StepGrid make_grid(const StepSizeInterval& iv, int n) {
  if (n < 1) throw InvalidInput("grid size must be >= 1");
  std::vector<double> pts;
  if (iv.degenerate()) {
    pts.push_back(iv.lo());
  } else if (n == 1) {
    pts.push_back(0.5 * (iv.lo() + iv.hi()));
  } else {
    const double width = iv.hi() - iv.lo();
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
      double p = (i == n - 1) ? iv.hi() : std::min(iv.hi(), iv.lo() + width * static_cast<double>(i) / (n - 1));
      // rounding on very narrow intervals can repeat a value
      if (pts.empty() || p > pts.back()) pts.push_back(p);
    }
  }
  return {std::move(pts), iv};
}

/// Scalar blocks of an LPV plant with B(alpha) = b0 + alpha * b1. Every
/// block of gradient descent is a multiple of I_n and the certificate does
/// not depend on n, so the plant is stored at n = 1.
struct Plant {
  double a = 1.0;
  double b0 = 0.0;
  double b1 = -1.0;
  double c = 1.0;
  double d = 0.0;

  double b(double alpha) const { return b0 + alpha * b1; }
};

inline Plant gradient_descent_plant() { return Plant{1.0, 0.0, -1.0, 1.0, 0.0}; }

}  // namespace gdrate
