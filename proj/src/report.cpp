#include "lcsym/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace lcsym {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Panel {
  std::string title, xlabel, ylabel;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  std::vector<Series> series;
};

constexpr double kPanelWidth = 560.0, kPanelHeight = 320.0;
constexpr double kLeft = 60.0, kRight = 170.0, kTop = 30.0, kBottom = 45.0;

void draw_panel(std::string& svg, const Panel& p, double y0) {
  const double w = kPanelWidth - kLeft - kRight, h = kPanelHeight - kTop - kBottom;
  const double xr = p.xmax > p.xmin ? p.xmax - p.xmin : 1.0;
  const double yr = p.ymax > p.ymin ? p.ymax - p.ymin : 1.0;
  auto sx = [&](double x) { return kLeft + (x - p.xmin) / xr * w; };
  auto sy = [&](double y) { return y0 + kTop + h - (y - p.ymin) / yr * h; };

  svg += "<g>\n";
  svg += "<text x=\"" + fixed(kLeft) + "\" y=\"" + fixed(y0 + 18) + "\" font-size=\"14\">" +
         escape_xml(p.title) + "</text>\n";
  svg += "<rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(y0 + kTop) + "\" width=\"" + fixed(w) +
         "\" height=\"" + fixed(h) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = p.xmin + xr * k / 4.0, yv = p.ymin + yr * k / 4.0;
    svg += "<text x=\"" + fixed(sx(xv)) + "\" y=\"" + fixed(y0 + kTop + h + 16) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + fixed(xv) + "</text>\n";
    svg += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(sy(yv) + 3) +
           "\" font-size=\"10\" text-anchor=\"end\">" + fixed(yv) + "</text>\n";
  }
  svg += "<text x=\"" + fixed(kLeft + w / 2) + "\" y=\"" + fixed(y0 + kPanelHeight - 8) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + escape_xml(p.xlabel) + "</text>\n";
  svg += "<text x=\"14\" y=\"" + fixed(y0 + kTop + h / 2) +
         "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fixed(y0 + kTop + h / 2) + ")\">" + escape_xml(p.ylabel) + "</text>\n";
  for (std::size_t i = 0; i < p.series.size(); ++i) {
    const Series& s = p.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fixed(sx(x)) + "," + fixed(sy(std::clamp(y, p.ymin, p.ymax)));
    }
    if (!pts.empty())
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = y0 + kTop + 12 + 14.0 * static_cast<double>(i);
    svg += "<line x1=\"" + fixed(kLeft + w + 10) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" +
           fixed(kLeft + w + 28) + "\" y2=\"" + fixed(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fixed(kLeft + w + 32) + "\" y=\"" + fixed(ly) + "\" font-size=\"10\">" +
           escape_xml(s.name) + "</text>\n";
  }
  svg += "</g>\n";
}

std::string render(const std::vector<Panel>& panels) {
  const double height = kPanelHeight * static_cast<double>(panels.size());
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kPanelWidth, 0) +
         "\" height=\"" + fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(kPanelWidth, 0) + " " +
         fixed(height, 0) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    draw_panel(svg, panels[i], kPanelHeight * static_cast<double>(i));
  svg += "</svg>\n";
  return svg;
}

template <class Rows>
void require_rows(const Rows& rows) {
  if (rows.empty()) throw std::invalid_argument("table is empty");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string to_csv(const EfficiencyTable& table) {
  require_rows(table.rows);
  std::string out = "density,estimator,n,reps,failures,mc_variance,efficiency\n";
  for (const auto& r : table.rows)
    out += r.density + "," + r.estimator + "," + std::to_string(r.n) + "," +
           std::to_string(r.reps) + "," + std::to_string(r.failures) + "," +
           format_number(r.mc_variance) + "," + format_number(r.efficiency) + "\n";
  return out;
}

std::string to_csv(const InfoCurveTable& table) {
  require_rows(table.rows);
  std::string out = "density,eta,info_eta,ratio\n";
  for (const auto& r : table.rows)
    out += r.density + "," + format_number(r.eta) + "," + format_number(r.info_eta) + "," +
           format_number(r.ratio) + "\n";
  return out;
}

std::string to_csv(const DiagnosticsRun& run) {
  require_rows(run.t);
  std::string out = "t,h\n";
  for (std::size_t i = 0; i < run.t.size(); ++i)
    out += format_number(run.t[i]) + "," + format_number(run.h[i]) + "\n";
  return out;
}

std::string to_svg(const EfficiencyTable& table) {
  require_rows(table.rows);
  std::vector<std::string> densities;
  for (const auto& r : table.rows)
    if (std::find(densities.begin(), densities.end(), r.density) == densities.end())
      densities.push_back(r.density);
  std::vector<Panel> panels;
  for (const auto& d : densities) {
    Panel p;
    p.title = d;
    p.xlabel = "n";
    p.ylabel = "efficiency";
    p.xmin = std::numeric_limits<double>::infinity();
    p.xmax = -p.xmin;
    p.ymax = 1.2;
    for (const auto& r : table.rows) {
      if (r.density != d) continue;
      const double n = static_cast<double>(r.n);
      p.xmin = std::min(p.xmin, n);
      p.xmax = std::max(p.xmax, n);
      if (std::isfinite(r.efficiency)) p.ymax = std::max(p.ymax, std::ceil(r.efficiency * 5.0) / 5.0);
      auto it = std::find_if(p.series.begin(), p.series.end(),
                             [&](const Series& s) { return s.name == r.estimator; });
      if (it == p.series.end()) {
        p.series.push_back({r.estimator, {}});
        it = std::prev(p.series.end());
      }
      it->points.emplace_back(n, r.efficiency);
    }
    panels.push_back(std::move(p));
  }
  return render(panels);
}

std::string to_svg(const InfoCurveTable& table) {
  require_rows(table.rows);
  Panel p;
  p.title = "truncated information ratio";
  p.xlabel = "log10(eta)";
  p.ylabel = "I(eta) / I";
  p.xmin = std::numeric_limits<double>::infinity();
  p.xmax = -p.xmin;
  for (const auto& r : table.rows) {
    const double x = std::log10(r.eta);
    p.xmin = std::min(p.xmin, std::floor(x));
    p.xmax = std::max(p.xmax, std::ceil(x));
    auto it = std::find_if(p.series.begin(), p.series.end(),
                           [&](const Series& s) { return s.name == r.density; });
    if (it == p.series.end()) {
      p.series.push_back({r.density, {}});
      it = std::prev(p.series.end());
    }
    it->points.emplace_back(x, r.infinite_info ? std::nan("") : r.ratio);
  }
  return render({p});
}

std::string to_svg(const DiagnosticsRun& run) {
  require_rows(run.t);
  Panel p;
  p.title = "characterization function";
  p.xlabel = "t";
  p.ylabel = "h(t)";
  p.xmin = 0.0;
  p.xmax = std::max(run.t.back(), 1e-12);
  p.ymin = std::min(0.0, *std::min_element(run.h.begin(), run.h.end()));
  p.ymax = std::max(1e-12, *std::max_element(run.h.begin(), run.h.end()));
  Series s{"h", {}};
  for (std::size_t i = 0; i < run.t.size(); ++i) s.points.emplace_back(run.t[i], run.h[i]);
  p.series.push_back(std::move(s));
  return render({p});
}

std::string diagnostics_summary(const DiagnosticsRun& run) {
  const DiagnosticReport& r = run.report;
  auto line = [](const char* name, bool ok) { return std::string(name) + ": " + (ok ? "pass" : "FAIL") + "\n"; };
  std::string out = "n: " + std::to_string(run.sample.size()) + "\n";
  out += "theta_hat: " + format_number(run.fit.theta_hat) + "\n";
  out += "criterion: " + format_number(run.fit.criterion) + "\n";
  out += "knots: " + std::to_string(run.fit.psi_hat.size()) + "\n";
  out += line("cdf_sandwich", r.cdf_sandwich);
  out += line("variance_bound", r.variance_bound);
  out += line("knot_structure", r.knot_structure);
  out += line("zero_slope_at_origin", r.zero_slope_at_origin);
  out += line("log_bound", r.log_bound);
  out += line("h_nonnegative", r.h_nonnegative);
  out += line("h_zero_at_knots", r.h_zero_at_knots);
  out += "min_h: " + format_number(r.min_h) + "\n";
  out += "max_abs_h_at_knots: " + format_number(r.max_abs_h_at_knots) + "\n";
  for (const auto& f : r.failures) out += "failure: " + f + "\n";
  out += std::string("overall: ") + (r.passed() ? "pass" : "FAIL") + "\n";
  return out;
}

template <class Table>
void emit_csv(const Table& table, const std::filesystem::path& path) {
  write_file(path, to_csv(table));
}

template <class Table>
void emit_svg(const Table& table, const std::filesystem::path& path) {
  write_file(path, to_svg(table));
}

template void emit_csv(const EfficiencyTable&, const std::filesystem::path&);
template void emit_csv(const InfoCurveTable&, const std::filesystem::path&);
template void emit_csv(const DiagnosticsRun&, const std::filesystem::path&);
template void emit_svg(const EfficiencyTable&, const std::filesystem::path&);
template void emit_svg(const InfoCurveTable&, const std::filesystem::path&);
template void emit_svg(const DiagnosticsRun&, const std::filesystem::path&);

}  // namespace lcsym
