#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>

#include "jhg/engine.hpp"

namespace jhg {

/// One row per snapshot: round, then every player's popularity.
inline std::string popularity_csv(const GameLog& log) {
  std::ostringstream out;
  out << "round";
  for (std::size_t j = 0; j < log.config.player_count; ++j) out << ",p" << j + 1;
  out << "\n";
  out.precision(17);
  for (std::size_t t = 0; t < log.popularity.size(); ++t) {
    out << t;
    for (double p : log.popularity[t]) out << "," << p;
    out << "\n";
  }
  return out.str();
}

/// Static line chart of popularity over rounds.
inline std::string popularity_svg(const GameLog& log, const std::string& title = "") {
  constexpr double W = 640, H = 360, L = 50, R = 90, T = 30, B = 40;
  const std::size_t rounds = log.popularity.size() > 1 ? log.popularity.size() - 1 : 1;
  double top = 0.0;
  for (const auto& row : log.popularity)
    for (double p : row) top = std::max(top, p);
  if (top <= 0.0) top = 1.0;
  auto x = [&](std::size_t t) { return L + (W - L - R) * static_cast<double>(t) / static_cast<double>(rounds); };
  auto y = [&](double p) { return H - B - (H - T - B) * p / top; };
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                            "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  char buf[128];
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) s << "<text x=\"" << L << "\" y=\"18\" font-size=\"13\">" << title << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = top * k / 4.0;
    std::snprintf(buf, sizeof buf, "%.2f", v);
    s << "<text x=\"" << L - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">round</text>\n";
  s << "<text x=\"" << W - R << "\" y=\"" << H - B + 14 << "\" text-anchor=\"end\">" << rounds << "</text>\n";
  for (std::size_t j = 0; j < log.config.player_count; ++j) {
    const char* colour = palette[j % std::size(palette)];
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < log.popularity.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x(t), y(log.popularity[t][j]));
      s << buf;
    }
    s << "\"/>\n";
    s << "<text x=\"" << W - R + 6 << "\" y=\"" << T + 14.0 * static_cast<double>(j) << "\" fill=\"" << colour << "\">p"
      << j + 1 << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace jhg
