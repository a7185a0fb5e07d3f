#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge::app {

namespace {

std::string num(double v) { return csv::format_double(std::round(v * 1e4) / 1e4); }

struct Canvas {
  double scale;
  double ox, oy;  // pixel position of the frame origin
  std::string x(double m) const { return num(ox + m * scale); }
  std::string y(double m) const { return num(oy - m * scale); }
  std::string pt(double mx, double my) const { return x(mx) + "," + y(my); }
};

// Five-stop approximation of viridis.
std::string ramp(double t) {
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k) rgb[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::string render_wedge_svg(const WedgeParams& p, const WedgeSvgOptions& o) {
  require_valid(p);
  if (!(o.px_per_m > 0.0)) throw Error(ErrorKind::Validation, "px_per_m must be positive");
  const double s = o.length_scale;
  const WedgeParams q{p.theta, p.leg * s, p.vertex_dist * s};
  const auto ol = outline(q);
  const double poi = (o.d_poi > 0.0 ? o.d_poi : p.vertex_dist) * s;
  const double half_t = std::tan(q.theta / 2.0);
  const double edge_y = q.vertex_dist * half_t;  // legs cross the screen edge here

  const double pad = 1.0;
  const double left = std::min(ol.base_upper.x, -o.screen_width * s) - pad;
  const double right = std::max(q.vertex_dist, poi) + pad;
  const double top = std::max(ol.base_upper.y, o.screen_height * s / 2.0) + pad;
  const Canvas c{o.px_per_m, -left * o.px_per_m, top * o.px_per_m};
  const double width = (right - left) * o.px_per_m, height = 2.0 * top * o.px_per_m;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  svg += "<desc>px_per_m=" + csv::format_double(o.px_per_m) + "; theta_rad=" + csv::format_double(p.theta) +
         "; leg_m=" + csv::format_double(q.leg) + "; dist_m=" + csv::format_double(q.vertex_dist) + "</desc>\n";
  svg += "<rect id=\"screen\" x=\"" + c.x(-o.screen_width * s) + "\" y=\"" + c.y(o.screen_height * s / 2.0) +
         "\" width=\"" + num(o.screen_width * s * o.px_per_m) + "\" height=\"" +
         num(o.screen_height * s * o.px_per_m) + "\" fill=\"#f4f4f4\" stroke=\"none\"/>\n";
  svg += "<polygon id=\"wedge\" points=\"" + c.pt(ol.vertex.x, ol.vertex.y) + " " +
         c.pt(ol.base_upper.x, ol.base_upper.y) + " " + c.pt(ol.base_lower.x, ol.base_lower.y) +
         "\" fill=\"none\" stroke=\"none\"/>\n";
  svg += "<polygon id=\"onscreen\" points=\"" + c.pt(ol.base_lower.x, ol.base_lower.y) + " " +
         c.pt(ol.base_upper.x, ol.base_upper.y) + " " + c.pt(0.0, edge_y) + " " + c.pt(0.0, -edge_y) +
         "\" fill=\"#d33\" fill-opacity=\"0.35\" stroke=\"#d33\" stroke-width=\"2\"/>\n";
  for (double sign : {1.0, -1.0}) {
    svg += "<line class=\"offscreen\" x1=\"" + c.x(0.0) + "\" y1=\"" + c.y(sign * edge_y) + "\" x2=\"" +
           c.x(q.vertex_dist) + "\" y2=\"" + c.y(0.0) + "\" stroke=\"#d33\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
  }
  svg += "<line id=\"screen-edge\" x1=\"" + c.x(0.0) + "\" y1=\"" + num(0.0) + "\" x2=\"" + c.x(0.0) + "\" y2=\"" +
         num(height) + "\" stroke=\"#000\" stroke-width=\"2\"/>\n";
  svg += "<circle id=\"vertex\" cx=\"" + c.x(q.vertex_dist) + "\" cy=\"" + c.y(0.0) +
         "\" r=\"4\" fill=\"#d33\"/>\n";
  const double r = 6.0;
  svg += "<g id=\"poi\" stroke=\"#06c\" stroke-width=\"2\">";
  svg += "<line x1=\"" + num(c.ox + poi * c.scale - r) + "\" y1=\"" + num(c.oy - r) + "\" x2=\"" +
         num(c.ox + poi * c.scale + r) + "\" y2=\"" + num(c.oy + r) + "\"/>";
  svg += "<line x1=\"" + num(c.ox + poi * c.scale - r) + "\" y1=\"" + num(c.oy + r) + "\" x2=\"" +
         num(c.ox + poi * c.scale + r) + "\" y2=\"" + num(c.oy - r) + "\"/>";
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string render_landscape_svg(const std::string& landscape_csv, double cell_px) {
  struct Cell {
    double cost;
    bool feasible;
  };
  std::map<double, std::map<double, Cell>> by_theta;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double best = lo, best_theta = 0.0, best_leg = 0.0;
  for (const auto& row : csv::parse(landscape_csv, kLandscapeHeader)) {
    const double theta = csv::parse_double(row.fields[0], row.line_no);
    const double leg = csv::parse_double(row.fields[1], row.line_no);
    const double cost = csv::parse_double(row.fields[2], row.line_no);
    const bool feasible = csv::parse_int(row.fields[3], row.line_no) != 0;
    by_theta[theta][leg] = {cost, feasible};
    if (feasible && std::isfinite(cost)) {
      lo = std::min(lo, cost);
      hi = std::max(hi, cost);
      if (cost < best) {
        best = cost;
        best_theta = theta;
        best_leg = leg;
      }
    }
  }
  if (by_theta.empty()) throw Error(ErrorKind::Parse, "landscape CSV has no rows");
  const std::size_t nt = by_theta.size(), nl = by_theta.begin()->second.size();
  const double w = static_cast<double>(nt) * cell_px, h = static_cast<double>(nl) * cell_px;

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" shape-rendering=\"crispEdges\">\n";
  svg += "<desc>x: theta_rad ascending; y: leg_m ascending upward; cost_nats " + csv::format_double(lo) + " .. " +
         csv::format_double(hi) + "</desc>\n";
  const std::string size = num(cell_px);
  std::size_t i = 0;
  for (const auto& [theta, legs] : by_theta) {
    std::size_t j = 0;
    for (const auto& [leg, cell] : legs) {
      const bool shade = cell.feasible && std::isfinite(cell.cost);
      const std::string fill = shade ? ramp(hi > lo ? (cell.cost - lo) / (hi - lo) : 0.0) : "#bbbbbb";
      const bool is_best = shade && theta == best_theta && leg == best_leg;
      svg += "<rect x=\"" + num(static_cast<double>(i) * cell_px) + "\" y=\"" +
             num(h - static_cast<double>(j + 1) * cell_px) + "\" width=\"" + size + "\" height=\"" + size +
             "\" fill=\"" + fill + (is_best ? "\" stroke=\"#f00\" stroke-width=\"1\"/>\n" : "\"/>\n");
      ++j;
    }
    ++i;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace optwedge::app
