#include "thinspectra/report_io.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "thinspectra/errors.hpp"

namespace thinspectra {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.9g}", v);
}

void write_limit_table(std::ostream& os, const LimitSpectrum& spectrum) {
  for (const auto& e : spectrum.entries) {
    fmt::print(os, "{}({}) {}\n", num(e.value), e.multiplicity, branch_label(e.branches));
  }
}

void write_limit_csv(std::ostream& os, const LimitSpectrum& spectrum) {
  os << "index,lambda,multiplicity,branches\n";
  int i = 1;
  for (const auto& e : spectrum.entries) {
    fmt::print(os, "{},{},{},{}\n", i++, num(e.value), e.multiplicity, branch_label(e.branches));
  }
}

void write_report_csv(std::ostream& os, const StudyReport& report) {
  os << "n,r,h,k,lambda_n_k,lambda_limit,error,aH1,bH1,ga,gb,bound_ok\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& rec : report.records) {
    if (!rec.complete) continue;
    for (const auto& m : rec.modes) {
      const CorrectorNorms c = m.norms.value_or(CorrectorNorms{nan, nan, nan, nan});
      fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{}\n", rec.n, num(rec.params.r), num(rec.params.h), m.match.k,
                 num(m.match.discrete), num(m.match.limit), num(m.match.error), num(c.aH1), num(c.bH1), num(c.ga),
                 num(c.gb), m.bound_ok ? 1 : 0);
    }
  }
}

void write_rates_csv(std::ostream& os, const StudyReport& report) {
  os << "k,rate,intercept,points\n";
  for (const auto& r : report.rates) {
    fmt::print(os, "{},{},{},{}\n", r.k, num(r.rate), num(r.intercept), r.points);
  }
}

void write_error_svg(std::ostream& os, const StudyReport& report) {
  constexpr double W = 640, H = 420, L = 70, R = 130, T = 30, B = 50;
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                           "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
  struct Series {
    int k;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (int k = 1; k <= report.config.K; ++k) {
    Series s{k, {}};
    for (const auto& rec : report.records) {
      if (!rec.complete || k > static_cast<int>(rec.modes.size())) continue;
      const double e = rec.modes[k - 1].match.error;
      if (!(e > 0.0)) continue;
      const double lx = std::log10(rec.params.r), ly = std::log10(e);
      s.pts.emplace_back(lx, ly);
      xmin = std::min(xmin, lx);
      xmax = std::max(xmax, lx);
      ymin = std::min(ymin, ly);
      ymax = std::max(ymax, ly);
    }
    series.push_back(std::move(s));
  }
  if (!(xmin < xmax)) {
    xmin = std::isfinite(xmin) ? xmin - 0.5 : -1;
    xmax = xmin + 1;
  }
  if (!(ymin < ymax)) {
    ymin = std::isfinite(ymin) ? ymin - 0.5 : -1;
    ymax = ymin + 1;
  }
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  fmt::print(os, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
  fmt::print(os, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", W, H,
             W, H);
  fmt::print(os, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
  fmt::print(os, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", L, H - B, W - R, H - B);
  fmt::print(os, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", L, T, L, H - B);
  fmt::print(os, "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">log10 r_n</text>\n",
             (L + W - R) / 2, H - 12);
  fmt::print(os,
             "<text x=\"16\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">"
             "log10 |lambda_n_k - lambda_k|</text>\n",
             (T + H - B) / 2, (T + H - B) / 2);
  for (double x : {xmin, xmax}) {
    fmt::print(os, "<text x=\"{:.2f}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{:.3g}</text>\n", px(x),
               H - B + 14, x);
  }
  for (double y : {ymin, ymax}) {
    fmt::print(os, "<text x=\"{}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n", L - 4, py(y) + 3,
               y);
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = colors[i % std::size(colors)];
    std::string points;
    for (const auto& [x, y] : s.pts) points += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
    if (!points.empty()) points.pop_back();
    fmt::print(os, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, points);
    fmt::print(os, "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">k = {}</text>\n", W - R + 12,
               T + 16 * (i + 1), color, s.k);
  }
  os << "</svg>\n";
}

void write_study_outputs(const std::string& dir, const StudyReport& report, bool svg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::ConfigError, fmt::format("output.dir: cannot create '{}': {}", dir, ec.message()));
  const std::filesystem::path base(dir);
  auto open = [&](const char* name) {
    std::ofstream f(base / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::ConfigError, fmt::format("output.dir: cannot write '{}'", (base / name).string()));
    return f;
  };
  {
    auto f = open("report.csv");
    write_report_csv(f, report);
  }
  {
    auto f = open("rates.csv");
    write_rates_csv(f, report);
  }
  if (svg) {
    auto f = open("plot.svg");
    write_error_svg(f, report);
  }
}

}  // namespace thinspectra
