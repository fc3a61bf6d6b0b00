#include "rtpc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "rtpc/error.hpp"
#include "rtpc/io.hpp"

namespace rtpc::plot {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string fmt(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
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

// Round step (1, 2 or 5 times a power of ten) giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::string diff_curve_svg(const std::string& title, const DiffRecord& record, double resp_period_s) {
  double x_max = resp_period_s > 0.0 ? resp_period_s : 1.0;
  if (!record.scan_delays_s.empty()) x_max = std::max(x_max, record.scan_delays_s.back());
  double y_lo = 0.0;
  double y_hi = 0.0;
  for (const auto& v : record.scan_diff_pct) {
    if (!v) continue;
    y_lo = std::min(y_lo, *v);
    y_hi = std::max(y_hi, *v);
  }
  if (y_hi - y_lo < 1.0) {
    y_hi += 0.5;
    y_lo -= 0.5;
  }
  const double y_step = nice_step(y_hi - y_lo, 5);
  y_lo = std::floor(y_lo / y_step) * y_step;
  y_hi = std::ceil(y_hi / y_step) * y_step;
  const double x_step = nice_step(x_max, 6);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * x / x_max; };
  auto py = [&](double y) { return kTop + ph * (y_hi - y) / (y_hi - y_lo); };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth, 0) + "\" height=\"" + fmt(kHeight, 0) +
       "\" viewBox=\"0 0 " + fmt(kWidth, 0) + " " + fmt(kHeight, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(kWidth / 2, 0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
       "</text>\n";

  s += "<g stroke=\"#ddd\" stroke-width=\"1\">\n";
  for (double y = y_lo; y <= y_hi + 1e-9 * y_step; y += y_step) {
    s += "<line x1=\"" + fmt(px(0)) + "\" y1=\"" + fmt(py(y)) + "\" x2=\"" + fmt(px(x_max)) + "\" y2=\"" + fmt(py(y)) +
         "\"/>\n";
  }
  s += "</g>\n";
  s += "<g fill=\"#333\">\n";
  for (double y = y_lo; y <= y_hi + 1e-9 * y_step; y += y_step) {
    s += "<text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(py(y) + 4) + "\" text-anchor=\"end\">" +
         fmt(std::abs(y) < 1e-12 ? 0.0 : y, y_step < 1.0 ? 1 : 0) + "</text>\n";
  }
  for (double x = 0.0; x <= x_max + 1e-9 * x_step; x += x_step) {
    s += "<text x=\"" + fmt(px(x)) + "\" y=\"" + fmt(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         fmt(x, x_step < 1.0 ? 1 : 0) + "</text>\n";
  }
  s += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 10) +
       "\" text-anchor=\"middle\">delay (s)</text>\n";
  s += "<text x=\"16\" y=\"" + fmt(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt(kTop + ph / 2) + ")\">Diff Ex-In (%)</text>\n";
  s += "</g>\n";

  s += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"#333\"/>\n";
  if (y_lo < 0.0 && y_hi > 0.0) {
    s += "<line x1=\"" + fmt(px(0)) + "\" y1=\"" + fmt(py(0)) + "\" x2=\"" + fmt(px(x_max)) + "\" y2=\"" + fmt(py(0)) +
         "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  }

  std::string points;
  auto flush = [&] {
    if (!points.empty()) s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    points.clear();
  };
  for (std::size_t i = 0; i < record.scan_delays_s.size() && i < record.scan_diff_pct.size(); ++i) {
    const auto& v = record.scan_diff_pct[i];
    if (!v) {
      flush();
      continue;
    }
    if (!points.empty()) points += ' ';
    points += fmt(px(record.scan_delays_s[i])) + "," + fmt(py(*v));
  }
  flush();

  if (!record.scan_delays_s.empty()) {
    s += "<circle cx=\"" + fmt(px(record.delay_s)) + "\" cy=\"" + fmt(py(record.max_pct)) +
         "\" r=\"4\" fill=\"#d62728\"/>\n";
    s += "<text x=\"" + fmt(kLeft + pw - 6) + "\" y=\"" + fmt(kTop + 16) + "\" text-anchor=\"end\" fill=\"#d62728\">max " +
         fmt(record.max_pct) + " % at " + fmt(record.delay_s, 3) + " s (" + fmt(record.delay_pct, 1) + " %)</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::filesystem::path> write_plots(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create plot directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& artery : report.arteries) {
    for (const auto p : kAllParameters) {
      const auto& rec = artery.diff_for(p);
      if (rec.scan_delays_s.empty()) continue;
      const std::string name = artery.name + "_" + std::string(to_string(p));
      const auto path = dir / (name + ".svg");
      io::write_text_atomic(path, diff_curve_svg(artery.name + " " + std::string(to_string(p)), rec,
                                                 report.resp_period_s));
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace rtpc::plot
