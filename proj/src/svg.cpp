#include "pipeorgan/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace pipeorgan {

namespace {

constexpr int kCell = 18;
constexpr int kPad = 12;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// cold blue through warm red
std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r = static_cast<int>(40 + 215 * t);
  int g = static_cast<int>(70 + 40 * (1.0 - t));
  int b = static_cast<int>(220 * (1.0 - t) + 35 * t);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string layer_color(int64_t layer) {
  static const char* palette[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f",
                                  "#956cb4", "#8c613c", "#dc7ec0", "#797979"};
  if (layer < 0) return "#e8e8e8";
  return palette[layer % 8];
}

double cx(int64_t col) { return kPad + col * kCell + kCell / 2.0; }
double cy(int64_t row) { return kPad + row * kCell + kCell / 2.0; }

}  // namespace

std::string link_heatmap_svg(const Topology& topo, const LoadReport& load) {
  int64_t peak = std::max<int64_t>(load.worst_load, 1);
  std::ostringstream out;
  int w = 2 * kPad + static_cast<int>(topo.cols) * kCell;
  int h = 2 * kPad + static_cast<int>(topo.rows) * kCell;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
  for (auto& link : topo.links) {
    int64_t packets = 0;
    auto it = load.per_link.find(link);
    if (it != load.per_link.end()) packets = it->second.first;
    double t = static_cast<double>(packets) / static_cast<double>(peak);
    out << "<line x1=\"" << fmt(cx(link.a.col)) << "\" y1=\"" << fmt(cy(link.a.row))
        << "\" x2=\"" << fmt(cx(link.b.col)) << "\" y2=\"" << fmt(cy(link.b.row))
        << "\" stroke=\"" << (packets == 0 ? "#d0d0d0" : heat_color(t)) << "\" stroke-width=\""
        << (link.length > 1 ? "1.0" : fmt(1.0 + 3.0 * t)) << "\"/>\n";
  }
  for (int64_t r = 0; r < topo.rows; ++r)
    for (int64_t c = 0; c < topo.cols; ++c)
      out << "<circle cx=\"" << fmt(cx(c)) << "\" cy=\"" << fmt(cy(r))
          << "\" r=\"2.00\" fill=\"#404040\"/>\n";
  out << "</svg>\n";
  return out.str();
}

std::string placement_svg(const Placement& placement) {
  std::ostringstream out;
  int w = 2 * kPad + static_cast<int>(placement.cols) * kCell;
  int h = 2 * kPad + static_cast<int>(placement.rows) * kCell;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
  for (int64_t r = 0; r < placement.rows; ++r)
    for (int64_t c = 0; c < placement.cols; ++c) {
      int64_t layer = placement.owner[r * placement.cols + c];
      out << "<rect x=\"" << kPad + c * kCell << "\" y=\"" << kPad + r * kCell << "\" width=\""
          << kCell - 1 << "\" height=\"" << kCell - 1 << "\" fill=\"" << layer_color(layer)
          << "\"/>\n";
    }
  out << "</svg>\n";
  return out.str();
}

}  // namespace pipeorgan
