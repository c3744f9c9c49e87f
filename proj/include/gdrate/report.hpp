#pragma once

// Sweeps over kappa and c, their CSV encoding, and a minimal SVG line chart.
//
// CSV numbers use std::to_chars with 12 significant digits, so output does
// not depend on the C locale. An infeasible row leaves rho_star and cond_p
// empty and sets feasible=false.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gdrate/certifier.hpp"
#include "gdrate/errors.hpp"
#include "gdrate/model.hpp"
#include "gdrate/parallel.hpp"

namespace gdrate {

struct SweepRow {
  double kappa = 1.0;
  double c = 1.0;
  std::optional<double> rho_star;
  bool feasible = false;
  std::optional<double> cond_p;
  int grid_size = 10;
  std::string iqc = "sector";

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

inline std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 12);
  if (res.ec != std::errc{}) throw InvalidInput("number formatting failed");
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s) {
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InvalidInput("bad number '" + std::string(s) + "'");
  return x;
}

/// The value a number takes after one trip through the CSV.
inline double round_for_csv(double x) { return parse_number(format_number(x)); }

inline constexpr std::string_view kSweepHeader = "kappa,c,rho_star,feasible,cond_p";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.kappa) << ',' << format_number(r.c) << ',';
    if (r.rho_star) os << format_number(*r.rho_star);
    os << ',' << (r.feasible ? "true" : "false") << ',';
    if (r.cond_p) os << format_number(*r.cond_p);
    os << '\n';
  }
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Parses what write_sweep_csv produced. Provenance fields (grid size, IQC)
/// are not part of the file and keep their defaults.
inline std::vector<SweepRow> parse_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepHeader) throw InvalidInput("missing or unexpected sweep CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != 5) throw InvalidInput("sweep CSV row needs 5 fields: " + line);
    SweepRow r;
    r.kappa = parse_number(f[0]);
    r.c = parse_number(f[1]);
    if (!f[2].empty()) r.rho_star = parse_number(f[2]);
    if (f[3] == "true")
      r.feasible = true;
    else if (f[3] == "false")
      r.feasible = false;
    else
      throw InvalidInput("feasible must be true or false: " + line);
    if (!f[4].empty()) r.cond_p = parse_number(f[4]);
    if (r.feasible != r.rho_star.has_value()) throw InvalidInput("feasible flag disagrees with rho_star: " + line);
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw InvalidInput("count must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = i == count - 1 ? hi : lo + (hi - lo) * i / (count - 1);
  return v;
}

inline std::vector<double> logspace(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw InvalidInput("logspace needs positive bounds");
  auto e = linspace(std::log(lo), std::log(hi), count);
  for (auto& x : e) x = std::exp(x);
  e.front() = lo;
  if (count > 1) e.back() = hi;
  return e;
}

/// Certifies one (kappa, c) point with m = 1.
inline SweepRow certify_point(double kappa, double c, int grid, const IqcChoice& iqc, const CertifyOptions& opts) {
  const FunctionClass fc(1.0, kappa);
  const auto cert = certify(fc, interval_from_c(fc, c), grid, iqc, opts);
  SweepRow r{kappa, c, cert.rho_star, cert.certified(), std::nullopt, grid, iqc.name()};
  if (cert.certified()) r.cond_p = cert.cond_p;
  return r;
}

inline std::vector<SweepRow> sweep_kappa(double c, const std::vector<double>& kappas, int grid, const IqcChoice& iqc,
                                         const CertifyOptions& opts = {}) {
  for (double k : kappas)
    if (!(k >= 1.0)) throw InvalidInput("kappa values must be >= 1");
  return parallel_map(kappas.size(), [&](std::size_t i) { return certify_point(kappas[i], c, grid, iqc, opts); });
}

inline std::vector<SweepRow> sweep_c(double kappa, const std::vector<double>& cs, int grid, const IqcChoice& iqc,
                                     const CertifyOptions& opts = {}) {
  return parallel_map(cs.size(), [&](std::size_t i) { return certify_point(kappa, cs[i], grid, iqc, opts); });
}

// ---------------------------------------------------------------------------
// SVG

struct SvgSeries {
  std::string name;
  std::string color;
  std::vector<double> x;
  std::vector<std::optional<double>> y;  // gaps break the polyline
  bool dashed = false;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label = "rho";
  bool log_x = false;
  double y_min = 0.0;
  double y_max = 1.0;
  std::vector<SvgSeries> series;
};

inline void write_svg(std::ostream& os, const SvgChart& chart) {
  constexpr double W = 640, H = 420, left = 60, right = 20, top = 40, bottom = 50;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  for (const auto& s : chart.series)
    for (double x : s.x) x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x);
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  auto tx = [&](double x) {
    double t = chart.log_x ? (std::log(x) - std::log(x_lo)) / (std::log(x_hi) - std::log(x_lo))
                           : (x - x_lo) / (x_hi - x_lo);
    return left + t * (W - left - right);
  };
  auto ty = [&](double y) {
    double t = (std::clamp(y, chart.y_min, chart.y_max) - chart.y_min) / (chart.y_max - chart.y_min);
    return H - bottom - t * (H - top - bottom);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << chart.title << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double y = chart.y_min + (chart.y_max - chart.y_min) * i / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << ty(y) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << format_number(y) << "</text>\n";
  }
  os << "<text x=\"" << left << "\" y=\"" << H - bottom + 18 << "\" font-size=\"11\">" << format_number(x_lo)
     << "</text>\n";
  os << "<text x=\"" << W - right << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"end\" font-size=\"11\">"
     << format_number(x_hi) << "</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << chart.x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"13\" transform=\"rotate(-90 16 " << H / 2 << ")\">"
     << chart.y_label << "</text>\n";

  for (const auto& s : chart.series) {
    std::ostringstream pts;
    auto flush = [&] {
      if (pts.tellp() > 0) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\""
           << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
        pts.str("");
        pts.clear();
      }
    };
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!s.y[i]) {
        flush();
        continue;
      }
      pts << tx(s.x[i]) << ',' << ty(*s.y[i]) << ' ';
    }
    flush();
  }
  double ly = top + 10;
  for (const auto& s : chart.series) {
    os << "<line x1=\"" << W - 170 << "\" y1=\"" << ly << "\" x2=\"" << W - 145 << "\" y2=\"" << ly << "\" stroke=\""
       << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    os << "<text x=\"" << W - 140 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << s.name << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
}

}  // namespace gdrate
