#pragma once

// Gradient descent on diagonal quadratics f(x) = ½ Σ q_i x_i² with
// step sizes drawn from the certified interval, checked step by step
// against ‖ξ_k‖ <= sqrt(cond P) ρ^k ‖ξ_0‖.
//
// Random numbers come from std::mt19937_64 (whose output sequence is fixed
// by the standard) and are turned into doubles by taking the top 53 bits,
// so a seed reproduces the same trajectory on every platform. Per-run seeds
// are splitmix64(master + run index).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gdrate/certifier.hpp"
#include "gdrate/errors.hpp"
#include "gdrate/model.hpp"
#include "gdrate/parallel.hpp"

namespace gdrate {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static Rng for_run(std::uint64_t master, std::uint64_t index) { return Rng(splitmix64(master + index)); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Hessian spectrum of a diagonal quadratic in S(m, L).
class QuadraticProblem {
 public:
  QuadraticProblem(const FunctionClass& fc, std::vector<double> eigenvalues) : fc_(fc), q_(std::move(eigenvalues)) {
    if (q_.empty()) throw InvalidInput("quadratic problem needs dim >= 1");
    for (double q : q_)
      if (!(q >= fc.m() && q <= fc.L())) throw InvalidInput("eigenvalue " + std::to_string(q) + " outside [m, L]");
  }

  /// Spectrum with m and L at the ends (dim >= 2) and uniform draws between.
  static QuadraticProblem random(const FunctionClass& fc, int dim, Rng& rng) {
    if (dim < 1) throw InvalidInput("dim must be >= 1");
    std::vector<double> q(dim);
    for (auto& v : q) v = rng.uniform(fc.m(), fc.L());
    if (dim >= 2) {
      q.front() = fc.m();
      q.back() = fc.L();
    }
    return {fc, std::move(q)};
  }

  const FunctionClass& function_class() const { return fc_; }
  const std::vector<double>& eigenvalues() const { return q_; }
  std::size_t dim() const { return q_.size(); }

 private:
  FunctionClass fc_;
  std::vector<double> q_;
};

/// One gradient step: ξ_i <- (1 - α q_i) ξ_i.
inline std::vector<double> step(const std::vector<double>& xi, double alpha, const QuadraticProblem& prob) {
  if (!(alpha >= 0.0)) throw InvalidInput("step size must be >= 0");
  if (xi.size() != prob.dim()) throw DimensionMismatch("state and problem dimension differ");
  std::vector<double> out(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) out[i] = (1.0 - alpha * prob.eigenvalues()[i]) * xi[i];
  return out;
}

enum class PolicyKind { Uniform, Endpoints, Alternating, Constant, AdversarialGreedy };

struct StepPolicy {
  PolicyKind kind = PolicyKind::Uniform;
  double constant = 0.0;  // used by Constant

  /// "uniform", "endpoints", "alternating", "greedy", or "constant:<alpha>".
  static StepPolicy parse(const std::string& s) {
    if (s == "uniform") return {PolicyKind::Uniform};
    if (s == "endpoints") return {PolicyKind::Endpoints};
    if (s == "alternating") return {PolicyKind::Alternating};
    if (s == "greedy" || s == "adversarial") return {PolicyKind::AdversarialGreedy};
    if (s.rfind("constant:", 0) == 0) {
      try {
        std::size_t used = 0;
        double a = std::stod(s.substr(9), &used);
        if (used == s.size() - 9) return {PolicyKind::Constant, a};
      } catch (const std::exception&) {
      }
    }
    throw UnknownPolicy("unknown step-size policy '" + s + "'");
  }

  std::string name() const {
    switch (kind) {
      case PolicyKind::Uniform: return "uniform";
      case PolicyKind::Endpoints: return "endpoints";
      case PolicyKind::Alternating: return "alternating";
      case PolicyKind::AdversarialGreedy: return "greedy";
      case PolicyKind::Constant: return "constant:" + std::to_string(constant);
    }
    return "?";
  }
};

/// Step size for iteration k. AdversarialGreedy needs the spectrum and
/// picks the endpoint with the larger max_i |1 - α q_i| (hi on ties).
inline double sample_alpha(const StepPolicy& policy, const StepSizeInterval& iv, long k, Rng& rng,
                           const std::vector<double>& spectrum = {}) {
  switch (policy.kind) {
    case PolicyKind::Uniform:
      return std::min(iv.hi(), rng.uniform(iv.lo(), iv.hi()));
    case PolicyKind::Endpoints:
      return rng.coin() ? iv.hi() : iv.lo();
    case PolicyKind::Alternating:
      return k % 2 == 0 ? iv.lo() : iv.hi();
    case PolicyKind::Constant:
      if (!iv.contains(policy.constant)) throw InvalidInput("constant step size outside the interval");
      return policy.constant;
    case PolicyKind::AdversarialGreedy: {
      if (spectrum.empty()) throw InvalidInput("greedy policy needs the problem spectrum");
      auto contraction = [&](double a) {
        double worst = 0.0;
        for (double q : spectrum) worst = std::max(worst, std::abs(1.0 - a * q));
        return worst;
      };
      return contraction(iv.lo()) > contraction(iv.hi()) ? iv.lo() : iv.hi();
    }
  }
  throw UnknownPolicy("unknown policy kind");
}

struct TrajectoryReport {
  std::vector<double> norms;
  std::vector<double> bound;
  bool violated = false;
  double max_ratio = 0.0;
  std::uint64_t seed = 0;
  std::string policy;
};

inline constexpr double kViolationTol = 1e-9;

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Runs `steps` iterations from xi0 and compares against the certificate's
/// bound at k = 0..steps. A zero bound with a zero norm counts as ratio 0.
inline TrajectoryReport run(const QuadraticProblem& prob, const StepSizeInterval& iv, const StepPolicy& policy,
                            long steps, std::vector<double> xi0, const Certificate& cert, Rng& rng) {
  if (!cert.rho_star || !cert.witness) throw CertificateMissing("simulation needs a certified rate");
  if (prob.function_class().m() < cert.fc.m() || prob.function_class().L() > cert.fc.L())
    throw InvalidInput("problem class is not covered by the certificate");
  if (steps < 0) throw InvalidInput("steps must be >= 0");
  if (xi0.size() != prob.dim()) throw DimensionMismatch("initial state dimension differs from problem");

  const double rho = *cert.rho_star;
  const double scale = std::sqrt(cert.cond_p) * norm2(xi0);

  TrajectoryReport rep;
  rep.seed = rng.seed();
  rep.policy = policy.name();
  rep.norms.reserve(steps + 1);
  rep.bound.reserve(steps + 1);

  std::vector<double> xi = std::move(xi0);
  double rho_k = 1.0;
  for (long k = 0;; ++k) {
    const double nk = norm2(xi);
    const double bk = scale * rho_k;
    rep.norms.push_back(nk);
    rep.bound.push_back(bk);
    const double ratio = bk > 0.0 ? nk / bk : (nk > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (k == steps) break;
    xi = step(xi, sample_alpha(policy, iv, k, rng, prob.eigenvalues()), prob);
    rho_k *= rho;
  }
  rep.violated = rep.max_ratio > 1.0 + kViolationTol;
  return rep;
}

struct TrialSummary {
  long trial = 0;
  std::uint64_t seed = 0;
  int dim = 1;
  std::string policy;
  double max_ratio = 0.0;
  bool violated = false;
};

struct TrialPlan {
  long trials = 100;
  long steps = 200;
  std::vector<int> dims{2};              // cycled by trial index
  std::vector<StepPolicy> policies{{}};  // cycled by trial index
  std::uint64_t master_seed = 0;
  bool random_start = false;  // default start is the all-ones vector
};

/// Independent seeded trajectories, trial i using Rng::for_run(master, i),
/// policy i mod |policies| and dimension (i / |policies|) mod |dims|.
inline std::vector<TrialSummary> run_trials(const Certificate& cert, const StepSizeInterval& iv,
                                            const TrialPlan& plan) {
  if (!cert.rho_star) throw CertificateMissing("simulation needs a certified rate");
  if (plan.dims.empty() || plan.policies.empty()) throw InvalidInput("trial plan needs dims and policies");
  return parallel_map(static_cast<std::size_t>(std::max(0L, plan.trials)), [&](std::size_t i) {
    Rng rng = Rng::for_run(plan.master_seed, i);
    const auto& policy = plan.policies[i % plan.policies.size()];
    const int dim = plan.dims[(i / plan.policies.size()) % plan.dims.size()];
    auto prob = QuadraticProblem::random(cert.fc, dim, rng);
    std::vector<double> xi0(dim, 1.0);
    if (plan.random_start)
      for (auto& x : xi0) x = rng.uniform(-1.0, 1.0);
    auto rep = run(prob, iv, policy, plan.steps, std::move(xi0), cert, rng);
    return TrialSummary{static_cast<long>(i), rep.seed, dim, rep.policy, rep.max_ratio, rep.violated};
  });
}

}  // namespace gdrate
