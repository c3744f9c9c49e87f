// gdrate: certify convergence rates of gradient descent with step sizes in
// [1/(cL), c/L], sweep kappa or c, and check certificates by simulation.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 no certificate,
// 3 bound violation in simulate.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gdrate/gdrate.hpp"

namespace {

using namespace gdrate;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoCertificate = 2;
constexpr int kExitViolation = 3;

struct Globals {
  int grid = 10;
  double rho_tol = 1e-4;
  std::string out;
  std::string svg;
  std::uint64_t seed = 0;
  bool show_config = false;
};

// Flags shared by certify and simulate.
struct ProblemFlags {
  double m = 1.0;
  std::optional<double> L;
  std::optional<double> kappa;
  double c = 1.0;
  std::optional<double> c1;
  std::optional<double> c2;
  std::string iqc = "sector";

  void attach(CLI::App* app) {
    app->add_option("--m", m, "strong convexity constant")->capture_default_str();
    auto* l = app->add_option("--L", L, "gradient Lipschitz constant");
    app->add_option("--kappa", kappa, "condition number L/m (alternative to --L)")->excludes(l);
    auto* cc = app->add_option("--c", c, "interval [1/(cL), c/L]")->capture_default_str();
    auto* a = app->add_option("--c1", c1, "asymmetric interval lower constant: 1/(c1 L)")->excludes(cc);
    auto* b = app->add_option("--c2", c2, "asymmetric interval upper constant: c2/L")->excludes(cc);
    a->needs(b);
    b->needs(a);
    app->add_option("--iqc", iqc, "sector, wob1 or zf:<k>")->capture_default_str();
  }

  FunctionClass function_class() const {
    if (kappa) return {m, m * *kappa};
    if (!L) throw InvalidInput("one of --L or --kappa is required");
    return {m, *L};
  }

  StepSizeInterval interval(const FunctionClass& fc) const {
    return c1 ? interval_asymmetric(fc, *c1, *c2) : interval_from_c(fc, c);
  }
};

CertifyOptions certify_options(const Globals& g) {
  CertifyOptions o;
  o.rho_tol = g.rho_tol;
  return o;
}

// Writes through `fn` to --out, or to stdout when no path was given.
template <class Fn>
void emit(const std::string& path, Fn fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  fn(f);
  f.flush();
  if (!f) throw std::ios_base::failure("write to '" + path + "' failed");
}

void write_svg_file(const std::string& path, const SvgChart& chart) {
  if (path.empty()) return;
  emit(path, [&](std::ostream& os) { write_svg(os, chart); });
}

int cmd_certify(const Globals& g, const ProblemFlags& pf, const std::string& json_path) {
  const auto fc = pf.function_class();
  const auto iv = pf.interval(fc);
  const auto iqc = IqcChoice::parse(pf.iqc);
  const auto cert = certify(fc, iv, g.grid, iqc, certify_options(g));

  nlohmann::json rec = {{"m", fc.m()},           {"L", fc.L()},       {"kappa", fc.kappa()},
                        {"alpha_lo", iv.lo()},   {"alpha_hi", iv.hi()}, {"grid", g.grid},
                        {"iqc", iqc.name()},     {"rho_tol", g.rho_tol}, {"bisection_iters", cert.bisection_iters},
                        {"certified", cert.certified()}};
  if (cert.certified()) {
    const auto& w = *cert.witness;
    std::cout << "rho* = " << format_number(*cert.rho_star) << "\n"
              << "cond(P) = " << format_number(cert.cond_p) << "\n"
              << "lambda = " << format_number(w.lambda) << "\n"
              << "grid = " << g.grid << " points on [" << format_number(iv.lo()) << ", " << format_number(iv.hi())
              << "]\n"
              << "bisection iterations = " << cert.bisection_iters << "\n";
    rec["rho_star"] = *cert.rho_star;
    rec["cond_p"] = cert.cond_p;
    rec["lambda"] = w.lambda;
    rec["slack"] = w.slack;
    std::vector<std::vector<double>> p(w.p.order(), std::vector<double>(w.p.order()));
    for (std::size_t i = 0; i < w.p.order(); ++i)
      for (std::size_t j = 0; j < w.p.order(); ++j) p[i][j] = w.p(i, j);
    rec["P"] = p;
  } else {
    std::cout << "no certificate: no rate below 1 is feasible\n";
    rec["rho_star"] = nullptr;
  }
  if (!json_path.empty()) emit(json_path, [&](std::ostream& os) { os << rec.dump(2) << '\n'; });
  return cert.certified() ? kExitOk : kExitNoCertificate;
}

std::vector<std::optional<double>> rates(const std::vector<SweepRow>& rows) {
  std::vector<std::optional<double>> y;
  for (const auto& r : rows) y.push_back(r.rho_star);
  return y;
}

int cmd_sweep_kappa(const Globals& g, double c, double kmin, double kmax, int count, bool linear,
                    const std::string& iqc_name) {
  if (!(kmin >= 1.0) || !(kmax >= kmin)) throw InvalidInput("need 1 <= kappa-min <= kappa-max");
  const auto kappas = linear ? linspace(kmin, kmax, count) : logspace(kmin, kmax, count);
  const auto iqc = IqcChoice::parse(iqc_name);
  const auto rows = sweep_kappa(c, kappas, g.grid, iqc, certify_options(g));
  emit(g.out, [&](std::ostream& os) { write_sweep_csv(os, rows); });

  if (!g.svg.empty()) {
    SvgChart chart{"certified rate, c = " + format_number(c), "kappa", "rho", !linear, 0.0, 1.0, {}};
    chart.series.push_back({iqc.name(), "#1f77b4", kappas, rates(rows), false});
    SvgSeries ref{"1 - 1/kappa", "#d62728", {}, {}, true};
    for (double k : linear ? linspace(kmin, kmax, 200) : logspace(kmin, kmax, 200)) {
      ref.x.push_back(k);
      ref.y.push_back(1.0 - 1.0 / k);
    }
    chart.series.push_back(std::move(ref));
    write_svg_file(g.svg, chart);
  }
  return kExitOk;
}

int cmd_sweep_c(const Globals& g, double kappa, double cmin, double cmax, int count, std::optional<double> cstep,
                const std::string& iqc_name) {
  if (!(kappa >= 1.0)) throw InvalidInput("kappa must be >= 1");
  if (!(cmin >= 1.0) || !(cmax >= cmin) || cmax > 2.5) throw InvalidInput("need 1 <= c-min <= c-max <= 2.5");
  std::vector<double> cs;
  if (cstep) {
    if (!(*cstep > 0.0)) throw InvalidInput("c-step must be positive");
    const int n = static_cast<int>(std::floor((cmax - cmin) / *cstep + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) cs.push_back(cmin + i * *cstep);
  } else {
    cs = linspace(cmin, cmax, count);
  }
  const auto iqc = IqcChoice::parse(iqc_name);
  const auto rows = sweep_c(kappa, cs, g.grid, iqc, certify_options(g));
  emit(g.out, [&](std::ostream& os) { write_sweep_csv(os, rows); });

  if (!g.svg.empty()) {
    SvgChart chart{"certified rate, kappa = " + format_number(kappa), "c", "rho", false, 0.0, 1.0, {}};
    chart.series.push_back({iqc.name(), "#1f77b4", cs, rates(rows), false});
    write_svg_file(g.svg, chart);
  }
  return kExitOk;
}

struct SimulateFlags {
  std::vector<std::string> policies{"uniform"};
  long steps = 200;
  long trials = 100;
  std::vector<int> dims{2};
  bool random_start = false;
};

int cmd_simulate(const Globals& g, const ProblemFlags& pf, const SimulateFlags& sf) {
  const auto fc = pf.function_class();
  const auto iv = pf.interval(fc);
  TrialPlan plan;
  plan.trials = sf.trials;
  plan.steps = sf.steps;
  plan.dims = sf.dims;
  plan.master_seed = g.seed;
  plan.random_start = sf.random_start;
  plan.policies.clear();
  for (const auto& p : sf.policies) {
    if (p == "all") {
      for (const char* name : {"uniform", "endpoints", "alternating", "greedy"}) plan.policies.push_back(StepPolicy::parse(name));
      plan.policies.push_back({PolicyKind::Constant, iv.lo()});
    } else {
      plan.policies.push_back(StepPolicy::parse(p));
    }
  }
  for (int d : plan.dims)
    if (d < 1) throw InvalidInput("dims must be >= 1");
  if (sf.trials < 0 || sf.steps < 0) throw InvalidInput("trials and steps must be >= 0");

  const auto cert = certify(fc, iv, g.grid, IqcChoice::parse(pf.iqc), certify_options(g));
  if (!cert.certified()) {
    std::cerr << "no certificate: nothing to validate\n";
    return kExitNoCertificate;
  }
  const auto results = run_trials(cert, iv, plan);

  long violations = 0;
  double worst = 0.0;
  emit(g.out, [&](std::ostream& os) {
    os << "trial,seed,max_ratio,violated\n";
    for (const auto& t : results) {
      os << t.trial << ',' << t.seed << ',' << format_number(t.max_ratio) << ',' << (t.violated ? "true" : "false")
         << '\n';
      violations += t.violated;
      worst = std::max(worst, t.max_ratio);
    }
  });
  std::cerr << "rho* = " << format_number(*cert.rho_star) << ", cond(P) = " << format_number(cert.cond_p) << ", "
            << results.size() << " trials, worst ratio " << format_number(worst) << ", " << violations
            << " violations\n";

  if (!g.svg.empty()) {
    SvgChart chart{"max ||xi_k|| / bound_k per trial", "trial", "ratio", false, 0.0, std::max(1.0, worst), {}};
    SvgSeries s{"max ratio", "#1f77b4", {}, {}, false};
    for (const auto& t : results) {
      s.x.push_back(static_cast<double>(t.trial));
      s.y.push_back(t.max_ratio);
    }
    chart.series.push_back(std::move(s));
    chart.series.push_back({"bound", "#d62728", {0.0, static_cast<double>(std::max<long>(1, sf.trials - 1))}, {1.0, 1.0}, true});
    write_svg_file(g.svg, chart);
  }
  return violations == 0 ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified convergence rates for gradient descent with interval step sizes", "gdrate"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  app.set_config("--config", "", "key=value file pre-setting any flag");

  Globals g;
  app.add_option("--grid", g.grid, "grid points on the step-size interval")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--rho-tol", g.rho_tol, "bisection tolerance on rho")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "CSV/JSON output path (default stdout)");
  app.add_option("--svg", g.svg, "also write an SVG chart here");
  app.add_option("--seed", g.seed, "master seed for simulate")->capture_default_str();
  app.add_flag("--show-config", g.show_config, "print the effective configuration and exit")->configurable(false);

  ProblemFlags certify_pf;
  std::string json_path;
  auto* certify_cmd = app.add_subcommand("certify", "certify one (m, L, interval) instance");
  certify_pf.attach(certify_cmd);
  certify_cmd->add_option("--json", json_path, "write a JSON record (use - for stdout)");

  double sk_c = 1.0, sk_min = 1.0, sk_max = 100.0;
  int sk_count = 20;
  bool sk_linear = false;
  std::string sk_iqc = "sector";
  auto* sk = app.add_subcommand("sweep-kappa", "rate against condition number at fixed c");
  sk->add_option("--c", sk_c, "interval constant")->capture_default_str();
  sk->add_option("--kappa-min", sk_min)->capture_default_str();
  sk->add_option("--kappa-max", sk_max)->capture_default_str();
  sk->add_option("--count", sk_count)->capture_default_str()->check(CLI::PositiveNumber);
  sk->add_flag("--linear", sk_linear, "linear instead of log spacing");
  sk->add_option("--iqc", sk_iqc)->capture_default_str();

  double sc_kappa = 10.0, sc_min = 1.0, sc_max = 2.5;
  int sc_count = 31;
  std::optional<double> sc_step;
  std::string sc_iqc = "sector";
  auto* sc = app.add_subcommand("sweep-c", "rate against interval constant c at fixed kappa");
  sc->add_option("--kappa", sc_kappa)->capture_default_str();
  sc->add_option("--c-min", sc_min)->capture_default_str();
  sc->add_option("--c-max", sc_max)->capture_default_str();
  auto* count_opt = sc->add_option("--count", sc_count)->capture_default_str()->check(CLI::PositiveNumber);
  sc->add_option("--c-step", sc_step, "fixed spacing (overrides --count)")->excludes(count_opt);
  sc->add_option("--iqc", sc_iqc)->capture_default_str();

  ProblemFlags sim_pf;
  SimulateFlags sf;
  auto* sim = app.add_subcommand("simulate", "check a certificate against sampled trajectories");
  sim_pf.attach(sim);
  sim->add_option("--policy", sf.policies, "uniform, endpoints, alternating, greedy, constant:<a>, or all")
      ->capture_default_str();
  sim->add_option("--steps", sf.steps)->capture_default_str();
  sim->add_option("--trials", sf.trials)->capture_default_str();
  sim->add_option("--dims", sf.dims, "problem dimensions, cycled over trials")->capture_default_str();
  sim->add_flag("--random-start", sf.random_start, "uniform [-1, 1] start instead of all ones");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (g.show_config) {
    std::cout << app.config_to_str(true, true);
    return kExitOk;
  }

  try {
    if (*certify_cmd) return cmd_certify(g, certify_pf, json_path);
    if (*sk) return cmd_sweep_kappa(g, sk_c, sk_min, sk_max, sk_count, sk_linear, sk_iqc);
    if (*sc) return cmd_sweep_c(g, sc_kappa, sc_min, sc_max, sc_count, sc_step, sc_iqc);
    if (*sim) return cmd_simulate(g, sim_pf, sf);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const gdrate::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
