#include "radet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "radet/error.hpp"

namespace radet {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::vector<std::string> detectors_in(const DetectionReport& report) {
  std::vector<std::string> out;
  for (const auto& r : report.rows) {
    if (std::find(out.begin(), out.end(), r.detector) == out.end()) out.push_back(r.detector);
  }
  return out;
}

std::vector<double> snrs_in(const DetectionReport& report) {
  std::set<double> s;
  for (const auto& r : report.rows) s.insert(r.snr_db);
  return {s.begin(), s.end()};
}

std::vector<int> bins_in(const DetectionReport& report) {
  std::set<int> s;
  for (const auto& r : report.rows) s.insert(r.doppler_bin);
  return {s.begin(), s.end()};
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

// white -> dark blue
std::string heat_color(double pd) {
  if (!std::isfinite(pd)) return "#cccccc";
  const double t = std::clamp(pd, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 * (1 - t) + 8 * t));
  const int g = static_cast<int>(std::lround(255 * (1 - t) + 48 * t));
  const int b = static_cast<int>(std::lround(255 * (1 - t) + 107 * t));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string pd_curve_svg(const DetectionReport& report, const std::string& title) {
  const double w = 640, h = 420, left = 60, right = 150, top = 40, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  const auto snrs = snrs_in(report);
  const auto dets = detectors_in(report);
  const double x0 = snrs.empty() ? 0.0 : snrs.front();
  const double x1 = snrs.size() < 2 ? x0 + 1.0 : snrs.back();
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - y) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = i / 5.0;
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << fmt(sy(y)) << "\" y2=\"" << fmt(sy(y))
       << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << fmt(sy(y) + 4) << "\" text-anchor=\"end\">" << fmt(y)
       << "</text>\n";
  }
  for (double x : snrs) {
    os << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << x
       << "</text>\n";
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">SNR (dB)</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">mean Pd over Doppler bins</text>\n";

  for (std::size_t k = 0; k < dets.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    std::string points;
    for (double x : snrs) {
      const double pd = mean_pd_over_bins(report, dets[k], x);
      if (std::isfinite(pd)) points += fmt(sx(x)) + "," + fmt(sy(pd)) + " ";
    }
    if (!points.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    }
    const double ly = top + 16 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 36 << "\" y1=\"" << ly << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << escape(dets[k]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string pd_heatmap_svg(const DetectionReport& report, const std::string& detector, const std::string& title) {
  const auto snrs = snrs_in(report);
  const auto bins = bins_in(report);
  const double cell = 22, left = 60, top = 40;
  const double w = left + cell * static_cast<double>(snrs.size()) + 90;
  const double h = top + cell * static_cast<double>(bins.size()) + 50;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (std::size_t r = 0; r < bins.size(); ++r) {
    const double y = top + cell * static_cast<double>(r);
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + cell * 0.65 << "\" text-anchor=\"end\">" << bins[r]
       << "</text>\n";
    for (std::size_t c = 0; c < snrs.size(); ++c) {
      const double pd = pd_at(report, detector, bins[r], snrs[c]);
      os << "<rect x=\"" << left + cell * static_cast<double>(c) << "\" y=\"" << y << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"" << heat_color(pd) << "\"><title>d=" << bins[r]
         << " snr=" << snrs[c] << " pd=" << fmt(pd) << "</title></rect>\n";
    }
  }
  const double by = top + cell * static_cast<double>(bins.size());
  for (std::size_t c = 0; c < snrs.size(); ++c) {
    os << "<text x=\"" << left + cell * (static_cast<double>(c) + 0.5) << "\" y=\"" << by + 14
       << "\" text-anchor=\"middle\">" << snrs[c] << "</text>\n";
  }
  os << "<text x=\"" << left << "\" y=\"" << by + 34 << "\">SNR (dB) by Doppler bin, shade = Pd</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_report_plots(const std::filesystem::path& dir, const std::string& family, const DetectionReport& report) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) fail(ErrorKind::io, "cannot write " + p.string());
    os << text;
  };
  write(dir / ("pd_vs_snr_" + family + ".svg"), pd_curve_svg(report, "Pd vs SNR, " + family + " clutter"));
  for (const auto& det : detectors_in(report)) {
    write(dir / ("pd_map_" + family + "_" + det + ".svg"), pd_heatmap_svg(report, det, det + ", " + family));
  }
}

}  // namespace radet
