#include "gpwells/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace gpwells {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double x) {
    if (!std::isfinite(x)) return;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

// Ticks at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  double step = p;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= raw) {
      step = m * p;
      break;
    }
  std::vector<double> t;
  for (double x = std::ceil(lo / step) * step; x <= hi + 1e-9 * step; x += step)
    t.push_back(std::abs(x) < 1e-12 * step ? 0.0 : x);
  return t;
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw FormatError("short write to " + path);
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<PlotSeries>& series,
                          double guide_y) {
  Range xr, yr;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points)
      if (std::isfinite(x) && std::isfinite(y)) {
        xr.add(x);
        yr.add(y);
      }
  yr.add(guide_y);
  xr.finish();
  yr.finish();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto X = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto Y = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string out = header(kWidth, kHeight);
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(xr.lo, xr.hi)) {
    out += "<line x1=\"" + num(X(t)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(X(t)) + "\" y2=\"" +
           num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(X(t)) + "\" y=\"" + num(kTop + ph + 19) + "\" text-anchor=\"middle\">" +
           num(t) + "</text>\n";
  }
  for (double t : ticks(yr.lo, yr.hi)) {
    out += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(Y(t)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
           num(Y(t)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(Y(t) + 4) + "\" text-anchor=\"end\">" + num(t) +
           "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">" +
         escape(xlabel) + "</text>\n";
  out += "<text transform=\"translate(18," + num(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(ylabel) + "</text>\n";
  if (std::isfinite(guide_y))
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(Y(guide_y)) + "\" x2=\"" + num(kLeft + pw) +
           "\" y2=\"" + num(Y(guide_y)) + "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % 4];
    std::string path;
    for (const auto& [x, y] : series[k].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      path += (path.empty() ? "M" : " L") + num(X(x)) + " " + num(Y(y));
      out += "<circle cx=\"" + num(X(x)) + "\" cy=\"" + num(Y(y)) + "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
    }
    if (!path.empty())
      out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + num(kLeft + pw - 8) + "\" y=\"" + num(kTop + 16 + 15 * double(k)) +
           "\" text-anchor=\"end\" fill=\"" + color + "\">" + escape(series[k].label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string svg_trajectory(const PotentialSpec& spec, const std::vector<SweepRecord>& records) {
  std::vector<std::vector<std::vector<Point>>> wells;
  for (const auto& w : spec.wells) wells.push_back(outline(w));
  Range xr, yr;
  for (const auto& w : wells)
    for (const auto& l : w)
      for (const auto& p : l) {
        xr.add(p.x());
        yr.add(p.y());
      }
  for (const auto& r : records) {
    xr.add(r.zbar.x());
    yr.add(r.zbar.y());
  }
  xr.finish();
  yr.finish();
  // Equal aspect ratio inside a square plot area.
  const double side = std::max(xr.hi - xr.lo, yr.hi - yr.lo);
  const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
  const double box = 460, margin = 40;
  auto X = [&](double x) { return margin + (x - cx + side / 2) / side * box; };
  auto Y = [&](double y) { return margin + (cy + side / 2 - y) / side * box; };

  std::string out = header(box + 2 * margin, box + 2 * margin);
  out += "<text x=\"" + num(margin + box / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">concentration points</text>\n";
  for (const auto& w : wells) {
    std::string path;
    for (const auto& l : w) {
      for (std::size_t i = 0; i < l.size(); ++i)
        path += (i == 0 ? (path.empty() ? "M" : " M") : " L") + num(X(l[i].x())) + " " + num(Y(l[i].y()));
      path += " Z";
    }
    out += "<path d=\"" + path + "\" fill=\"#eef3fa\" fill-rule=\"evenodd\" stroke=\"black\"/>\n";
  }
  std::string path;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& z = records[i].zbar;
    path += (path.empty() ? "M" : " L") + num(X(z.x())) + " " + num(Y(z.y()));
    const double t = records.size() > 1 ? double(i) / double(records.size() - 1) : 1.0;
    const int red = int(40 + 200 * t), blue = int(240 - 200 * t);
    char color[16];
    std::snprintf(color, sizeof color, "#%02x30%02x", red, blue);
    out += "<circle cx=\"" + num(X(z.x())) + "\" cy=\"" + num(Y(z.y())) + "\" r=\"4\" fill=\"" + color +
           "\"><title>a = " + num(records[i].a) + "</title></circle>\n";
  }
  if (!path.empty()) out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"gray\" stroke-width=\"1\"/>\n";
  out += "</svg>\n";
  return out;
}

void write_sweep_plots(const std::string& dir, const PotentialSpec& spec,
                       const std::vector<SweepRecord>& records) {
  PlotSeries energy{"e 4R^2 a* / (gap ln^2 gap)", {}}, eps{"eps |ln gap| / 2R", {}};
  for (const auto& r : records) {
    const double x = std::log(r.gap);
    energy.points.emplace_back(x, r.energy_ratio);
    eps.points.emplace_back(x, r.eps_ratio);
  }
  const std::filesystem::path d(dir);
  write_text((d / "energy_ratio.svg").string(),
             svg_line_plot("energy ratio", "ln(a* - a)", "energy_ratio", {energy}, 1.0));
  write_text((d / "eps_ratio.svg").string(), svg_line_plot("blow-up width ratio", "ln(a* - a)", "eps_ratio", {eps}, 1.0));
  write_text((d / "zbar.svg").string(), svg_trajectory(spec, records));
}

}  // namespace gpwells
