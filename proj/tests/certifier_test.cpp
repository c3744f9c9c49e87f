#include <gtest/gtest.h>

#include <random>

#include "gdrate/certifier.hpp"

namespace gdrate {
namespace {

const FunctionClass kFc(1.0, 10.0);

// Hand-written sector block at P = 1, independent of the library's assembly.
double sector_block_max_eig(double m, double L, double rho, double alpha, double lambda) {
  const double a = 1.0 - rho * rho - 2.0 * lambda * m * L;
  const double b = -alpha + lambda * (L + m);
  const double d = alpha * alpha - 2.0 * lambda;
  return 0.5 * (a + d) + std::hypot(0.5 * (a - d), b);
}

// Dense lambda scan: is there a single lambda making every grid block ⪯ tol?
bool scan_feasible(double m, double L, double rho, const std::vector<double>& alphas, double tol = 1e-9) {
  // the diagonal entries need lambda >= (1 - rho²)/(2mL) and lambda >= α²/2
  double top = 1.0 / (m * L);
  for (double a : alphas) top = std::max(top, a * a);
  for (int i = 1; i <= 20000; ++i) {
    const double lambda = top * i / 20000.0;
    bool ok = true;
    for (double a : alphas)
      if (sector_block_max_eig(m, L, rho, a, lambda) > tol) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

double scan_rate(double m, double L, const std::vector<double>& alphas) {
  double lo = 1e-3, hi = 1.0;
  if (!scan_feasible(m, L, hi - 1e-4, alphas)) return 1.0;
  hi -= 1e-4;
  while (hi - lo > 1e-5) {
    const double mid = 0.5 * (lo + hi);
    (scan_feasible(m, L, mid, alphas) ? hi : lo) = mid;
  }
  return hi;
}

LmiInstance sector_instance(const FunctionClass& fc, double rho, const StepGrid& grid) {
  const auto q = sector(fc);
  auto aug = augment(gradient_descent_plant(), q);
  auto quad = quad_form(aug, q);
  return LmiInstance(rho, grid, aug, quad);
}

TEST(ClosedFormRate, Examples) {
  EXPECT_DOUBLE_EQ(closed_form_rate(0.1, kFc), 0.9);
  EXPECT_DOUBLE_EQ(closed_form_rate(0.0, kFc), 1.0);
  EXPECT_NEAR(closed_form_rate(2.0 / 11.0, kFc), 9.0 / 11.0, 1e-15);
  EXPECT_THROW(closed_form_rate(-0.1, kFc), InvalidInput);
}

TEST(AssembleLmiBlock, Examples) {
  const auto q = sector(kFc);
  const auto aug = augment(gradient_descent_plant(), q);
  const auto quad = quad_form(aug, q);
  const auto one = SymMatrix::identity(1);

  auto b1 = assemble_lmi_block(aug, quad, 0.9, 0.1, one, 0.01);
  EXPECT_NEAR(b1(0, 0), -0.01, 1e-15);
  EXPECT_NEAR(b1(1, 0), 0.01, 1e-15);
  EXPECT_NEAR(b1(1, 1), -0.01, 1e-15);

  auto b2 = assemble_lmi_block(aug, quad, 1.0, 0.0, one, 0.0);
  EXPECT_EQ(b2, SymMatrix(2));

  auto b3 = assemble_lmi_block(aug, quad, 0.9, 0.1, one, 0.0);
  EXPECT_NEAR(b3(0, 0), 0.19, 1e-15);
  EXPECT_NEAR(b3(1, 0), -0.1, 1e-15);
  EXPECT_NEAR(b3(1, 1), 0.01, 1e-15);

  EXPECT_THROW(assemble_lmi_block(aug, quad, 0.9, 0.1, SymMatrix::identity(2), 0.0), DimensionMismatch);
  EXPECT_THROW(assemble_lmi_block(aug, quad, 0.9, 0.1, one, -1.0), InvalidInput);
}

TEST(AssembleLmiBlock, MatchesHandFormula) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double m = 0.1 + u(gen), L = m * (1.0 + 20.0 * u(gen));
    const FunctionClass fc(m, L);
    const double rho = u(gen), alpha = 2.0 * u(gen) / L, lambda = u(gen);
    const auto q = sector(fc);
    const auto aug = augment(gradient_descent_plant(), q);
    auto b = assemble_lmi_block(aug, quad_form(aug, q), rho, alpha, SymMatrix::identity(1), lambda);
    EXPECT_NEAR(max_eigenvalue(b).value, sector_block_max_eig(m, L, rho, alpha, lambda), 1e-12 * (1.0 + L * L));
  }
}

TEST(LambdaIntervalSector, Examples) {
  auto tangent = lambda_interval_sector(0.9, 0.1, kFc, 0.0);
  ASSERT_FALSE(tangent.empty());
  EXPECT_NEAR(tangent.lo, 0.01, 1e-9);
  EXPECT_NEAR(tangent.hi, 0.01, 1e-9);

  EXPECT_TRUE(lambda_interval_sector(0.89, 0.1, kFc, 0.0).empty());

  // det = -81λ² + 2λ - 0.01, roots (2 ± sqrt(0.76)) / 162
  auto loose = lambda_interval_sector(1.0, 0.1, kFc, 0.0);
  ASSERT_FALSE(loose.empty());
  EXPECT_NEAR(loose.lo, (2.0 - std::sqrt(0.76)) / 162.0, 1e-12);
  EXPECT_NEAR(loose.hi, (2.0 + std::sqrt(0.76)) / 162.0, 1e-12);
  EXPECT_LE(sector_block_max_eig(1.0, 10.0, 1.0, 0.1, 0.5 * (loose.lo + loose.hi)), 0.0);
  EXPECT_GT(sector_block_max_eig(1.0, 10.0, 1.0, 0.1, 0.005), 0.0);
}

TEST(LambdaIntervalSector, AgreesWithBruteForceScan) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int nonempty = 0;
  for (int i = 0; i < 300; ++i) {
    const double m = 1.0, L = 1.0 + 30.0 * u(gen);
    const double alpha = 2.2 * u(gen) / L, rho = 0.2 + 0.8 * u(gen);
    auto iv = lambda_interval_sector(rho, alpha, FunctionClass(m, L), 0.0);
    // sample lambdas strictly inside / outside the reported interval
    for (int j = 0; j <= 400; ++j) {
      const double lambda = 0.4 * j / 400.0 / L;
      const double top = sector_block_max_eig(m, L, rho, alpha, lambda);
      const bool inside = !iv.empty() && lambda >= iv.lo && lambda <= iv.hi;
      if (inside) {
        EXPECT_LE(top, 1e-10);
      } else if (!iv.empty() && (lambda < iv.lo - 1e-6 || lambda > iv.hi + 1e-6)) {
        EXPECT_GT(top, 0.0);
      } else if (iv.empty()) {
        EXPECT_GT(top, -1e-10);
      }
    }
    nonempty += !iv.empty();
  }
  EXPECT_GT(nonempty, 20);
}

TEST(FeasibleAtRho, Examples) {
  const StepGrid single({0.1}, StepSizeInterval(0.1, 0.1));
  // The tangent case only has a witness with a singular block, so it needs
  // the margin switched off; with the default margin it sits just outside.
  FeasibilityOptions exact;
  exact.eps_rel = 0.0;
  auto w = feasible_at_rho(sector_instance(kFc, 0.9, single), exact);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->p, SymMatrix::identity(1));
  EXPECT_NEAR(w->lambda, 0.01, 1e-6);
  EXPECT_NEAR(w->slack, 0.0, 1e-12);
  EXPECT_FALSE(feasible_at_rho(sector_instance(kFc, 0.9, single)).has_value());
  EXPECT_TRUE(feasible_at_rho(sector_instance(kFc, 0.9 + 1e-6, single)).has_value());
  EXPECT_FALSE(feasible_at_rho(sector_instance(kFc, 0.89, single)).has_value());
  EXPECT_FALSE(feasible_at_rho(sector_instance(kFc, 0.89, single), exact).has_value());
}

TEST(FeasibleAtRho, ConsistentWithClosedForm) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const FunctionClass fc(0.5 + u(gen), 2.0 + 2.0 * u(gen));
    const double alpha = (0.01 + 2.0 * u(gen)) / fc.L();
    const double r = closed_form_rate(alpha, fc);
    if (r + 1e-6 > 1.0) continue;
    const StepGrid g({alpha}, StepSizeInterval(alpha, alpha));
    EXPECT_TRUE(feasible_at_rho(sector_instance(fc, r + 1e-6, g)).has_value()) << alpha;
    if (r > 1e-2) {
      EXPECT_FALSE(feasible_at_rho(sector_instance(fc, r - 1e-4, g)).has_value()) << alpha;
    }
  }
}

TEST(FeasibleAtRho, MonotoneInRho) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const IqcChoice choices[] = {IqcChoice::sector_iqc(), IqcChoice::off_by_1(), IqcChoice::off_by_k(2)};
  for (int i = 0; i < 60; ++i) {
    const FunctionClass fc(1.0, 1.0 + 20.0 * u(gen));
    const auto iv = interval_from_c(fc, 1.0 + 0.8 * u(gen));
    const auto grid = make_grid(iv, 4);
    const auto& iqc = choices[i % 3];
    const double rho = 0.3 + 0.7 * u(gen);
    auto inst = make_instance(fc, grid, iqc, rho);
    if (!inst || !feasible_at_rho(*inst)) continue;
    for (int j = 0; j < 3; ++j) {
      const double rho2 = rho + (1.0 - rho) * u(gen);
      auto inst2 = make_instance(fc, grid, iqc, rho2);
      ASSERT_TRUE(inst2.has_value());
      EXPECT_TRUE(feasible_at_rho(*inst2).has_value()) << iqc.name() << " " << rho << " -> " << rho2;
    }
  }
}

TEST(FeasibleAtRho, BackendsAgreeOnSectorInstances) {
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int compared = 0;
  for (int i = 0; i < 400; ++i) {
    const double m = 0.5 + u(gen);
    const FunctionClass fc(m, m * (1.0 + 10.0 * u(gen)));
    const double a1 = (0.01 + 2.0 * u(gen)) / fc.L();
    const double a2 = a1 * (1.0 + 0.5 * u(gen));
    const StepGrid g(i % 2 ? std::vector<double>{a1} : std::vector<double>{a1, a2}, StepSizeInterval(a1, a2));
    const double rho = 0.05 + 0.95 * u(gen);
    const bool exact = feasible_at_rho(sector_instance(fc, rho, g)).has_value();
    // skip instances whose answer flips within the tolerance band
    if (exact != feasible_at_rho(sector_instance(fc, rho + 1e-6, g)).has_value()) continue;
    if (exact != feasible_at_rho(sector_instance(fc, std::max(1e-3, rho - 1e-6), g)).has_value()) continue;
    EXPECT_EQ(exact, feasible_at_rho_ellipsoid(sector_instance(fc, rho, g)).has_value()) << rho;
    ++compared;
  }
  EXPECT_GT(compared, 350);
}

TEST(Certify, Examples) {
  auto c1 = certify(kFc, interval_from_c(kFc, 1.0), 10, IqcChoice::sector_iqc());
  ASSERT_TRUE(c1.certified());
  EXPECT_NEAR(*c1.rho_star, 0.9, 1e-3);
  EXPECT_GE(*c1.rho_star, 0.9 - 1e-7);
  EXPECT_GT(c1.bisection_iters, 0);

  auto c2 = certify(kFc, interval_from_c(kFc, 2.1), 10, IqcChoice::sector_iqc());
  EXPECT_FALSE(c2.certified());
  EXPECT_FALSE(c2.witness.has_value());

  auto c3 = certify(kFc, interval_from_c(kFc, 1.4), 10, IqcChoice::sector_iqc());
  ASSERT_TRUE(c3.certified());
  EXPECT_LT(*c3.rho_star, 1.0);
  const auto grid = make_grid(interval_from_c(kFc, 1.4), 10).points();
  EXPECT_NEAR(*c3.rho_star, scan_rate(1.0, 10.0, grid), 2e-3);
}

TEST(Certify, KappaOneHitsBisectionFloor) {
  const FunctionClass fc(1.0, 1.0);
  auto c = certify(fc, interval_from_c(fc, 1.0), 10, IqcChoice::sector_iqc());
  ASSERT_TRUE(c.certified());
  EXPECT_EQ(*c.rho_star, 1e-3);
}

TEST(Certify, RejectsBadOptions) {
  CertifyOptions o;
  o.rho_hi = 1.5;
  EXPECT_THROW(certify(kFc, interval_from_c(kFc, 1.0), 10, IqcChoice::sector_iqc(), o), InvalidInput);
  EXPECT_THROW(certify(kFc, interval_from_c(kFc, 1.0), 0, IqcChoice::sector_iqc()), InvalidInput);
}

TEST(Certify, OracleEquivalenceAtConstantStep) {
  for (double kappa : {1.5, 2.0, 5.0, 10.0, 50.0, 100.0}) {
    const FunctionClass fc(1.0, kappa);
    auto c = certify(fc, interval_from_c(fc, 1.0), 10, IqcChoice::sector_iqc());
    ASSERT_TRUE(c.certified());
    EXPECT_LE(std::abs(*c.rho_star - closed_form_rate(1.0 / kappa, fc)), 2e-4) << kappa;
  }
}

TEST(Certify, MatchesDenseScanOnIntervals) {
  for (auto [kappa, c] : {std::pair{2.0, 1.5}, {5.0, 1.3}, {10.0, 1.2}, {15.0, 1.4}}) {
    const FunctionClass fc(1.0, kappa);
    auto cert = certify(fc, interval_from_c(fc, c), 10, IqcChoice::sector_iqc());
    ASSERT_TRUE(cert.certified());
    EXPECT_NEAR(*cert.rho_star, scan_rate(1.0, kappa, make_grid(interval_from_c(fc, c), 10).points()), 2e-3)
        << kappa << " " << c;
  }
}

TEST(VerifyCertificate, RoundTripAndPerturbations) {
  auto cert = certify(kFc, interval_from_c(kFc, 1.0), 10, IqcChoice::sector_iqc());
  ASSERT_TRUE(cert.certified());
  EXPECT_TRUE(verify_certificate(cert));

  auto bumped = cert;
  bumped.witness->lambda += 1.0;
  EXPECT_FALSE(verify_certificate(bumped));

  auto lowered = cert;
  *lowered.rho_star -= 10.0 * 1e-4;
  EXPECT_FALSE(verify_certificate(lowered));

  auto none = cert;
  none.rho_star.reset();
  EXPECT_FALSE(verify_certificate(none));
}

TEST(VerifyCertificate, EveryIqcRoundTrips) {
  for (const char* name : {"sector", "wob1", "zf:2"})
    for (double c : {1.0, 1.3}) {
      auto cert = certify(kFc, interval_from_c(kFc, c), 10, IqcChoice::parse(name));
      ASSERT_TRUE(cert.certified()) << name;
      EXPECT_TRUE(verify_certificate(cert)) << name << " " << c;
      EXPECT_GE(cert.cond_p, 1.0);
      EXPECT_LE(cert.witness->slack, 0.0);
    }
}

TEST(Certify, ScaleInvariance) {
  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 8; ++i) {
    const double m = 0.01 + 10.0 * u(gen), kappa = 1.0 + 30.0 * u(gen), c = 1.0 + 0.6 * u(gen);
    const FunctionClass scaled(m, m * kappa), unit(1.0, kappa);
    auto a = certify(scaled, interval_from_c(scaled, c), 10, IqcChoice::sector_iqc());
    auto b = certify(unit, interval_from_c(unit, c), 10, IqcChoice::sector_iqc());
    ASSERT_EQ(a.certified(), b.certified());
    if (a.certified()) {
      EXPECT_LE(std::abs(*a.rho_star - *b.rho_star), 2e-4);
    }
  }
}

TEST(Certify, NondecreasingInKappaAndC) {
  auto rate = [](double kappa, double c) {
    const FunctionClass fc(1.0, kappa);
    auto cert = certify(fc, interval_from_c(fc, c), 10, IqcChoice::sector_iqc());
    return cert.certified() ? *cert.rho_star : 1.0;
  };
  for (double c : {1.0, 1.3, 1.6}) {
    double prev = 0.0;
    for (double kappa : {1.5, 3.0, 6.0, 12.0, 25.0}) {
      const double r = rate(kappa, c);
      EXPECT_GE(r, prev - 2e-4) << kappa << " " << c;
      prev = r;
    }
  }
  for (double kappa : {2.0, 10.0}) {
    double prev = 0.0;
    for (double c = 1.0; c <= 2.2; c += 0.2) {
      const double r = rate(kappa, c);
      EXPECT_GE(r, prev - 2e-4) << kappa << " " << c;
      prev = r;
    }
  }
}

// Any certificate must cover the constant sequences at the interval's ends,
// whatever the multiplier.
TEST(Certify, NeverBelowConstantStepRate) {
  for (const char* name : {"sector", "wob1", "zf:2"})
    for (auto [kappa, c] : {std::pair{2.0, 1.0}, {2.0, 1.2}, {2.0, 1.5}, {5.0, 1.2}, {10.0, 1.0}, {10.0, 1.2}}) {
      const FunctionClass fc(1.0, kappa);
      const auto iv = interval_from_c(fc, c);
      auto cert = certify(fc, iv, 10, IqcChoice::parse(name));
      ASSERT_TRUE(cert.certified());
      const double floor = std::max(closed_form_rate(iv.lo(), fc), closed_form_rate(iv.hi(), fc));
      EXPECT_GE(*cert.rho_star, floor - 1e-5) << name << " " << kappa << " " << c;
    }
}

TEST(Certify, DynamicIqcMatchesSectorAtConstantStepAndSmallKappa) {
  for (auto [kappa, c] : {std::pair{1.5, 1.0}, {2.0, 1.0}, {5.0, 1.0}, {10.0, 1.0}, {50.0, 1.0}, {2.0, 1.2}}) {
    const FunctionClass fc(1.0, kappa);
    const auto iv = interval_from_c(fc, c);
    const double sec = *certify(fc, iv, 10, IqcChoice::sector_iqc()).rho_star;
    const double wob = *certify(fc, iv, 10, IqcChoice::off_by_1()).rho_star;
    EXPECT_GE(wob, sec - 2e-4) << kappa << " " << c;
  }
}

TEST(MakeInstance, UserWeightsOutsideRangeAreInfeasibleNotErrors) {
  IqcChoice fixed = IqcChoice::off_by_1();
  fixed.weights = std::vector<double>{0.5};
  const auto grid = make_grid(interval_from_c(kFc, 1.0), 10);
  EXPECT_FALSE(make_instance(kFc, grid, fixed, 0.5).has_value());
  EXPECT_TRUE(make_instance(kFc, grid, fixed, 0.8).has_value());
  auto cert = certify(kFc, interval_from_c(kFc, 1.0), 10, fixed);
  ASSERT_TRUE(cert.certified());
  EXPECT_TRUE(verify_certificate(cert));
}

}  // namespace
}  // namespace gdrate
