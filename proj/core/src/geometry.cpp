#include "optwedge/geometry.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge {

namespace {

// Constants of the vanilla-Wedge heuristic.
constexpr double kVwLogOffset = 20.0;
constexpr double kVwLogDivisor = 12.0;
constexpr double kVwLogGain = 10.0;
constexpr double kVwArcBase = 5.0;
constexpr double kVwArcSlope = 0.3;

std::string describe(const WedgeParams& p) {
  std::ostringstream ss;
  ss << "(theta=" << p.theta << " rad, leg=" << p.leg << " m, dist=" << p.vertex_dist << " m)";
  return ss.str();
}

void check_axis(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw Error(ErrorKind::Validation, std::string("grid axis '") + name + "' is empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw Error(ErrorKind::Validation, std::string("grid axis '") + name + "' has a non-positive entry");
    }
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw Error(ErrorKind::Validation, std::string("grid axis '") + name + "' is not strictly increasing");
    }
  }
}

}  // namespace

bool is_valid(double theta, double leg, double dist) noexcept {
  if (!(theta > 0.0 && theta < kPi)) return false;
  if (!(leg > 0.0) || !std::isfinite(leg)) return false;
  return dist > 0.0 && dist < leg * std::cos(theta / 2.0);
}

void require_valid(const WedgeParams& p) {
  if (!is_valid(p)) throw Error(ErrorKind::Domain, "wedge parameters outside the domain " + describe(p));
}

WedgeParams vw_params(double d_poi) {
  if (!(d_poi > 0.0) || !std::isfinite(d_poi)) {
    throw Error(ErrorKind::Domain, "vw_params requires d_poi > 0, got " + std::to_string(d_poi));
  }
  const double leg = d_poi + std::log((d_poi + kVwLogOffset) / kVwLogDivisor) * kVwLogGain;
  const double theta = (kVwArcBase + kVwArcSlope * d_poi) / leg;
  return {theta, leg, d_poi};
}

Footprint footprint(const WedgeParams& p) {
  require_valid(p);
  return {p.leg * std::cos(p.theta / 2.0) - p.vertex_dist, 2.0 * p.leg * std::sin(p.theta / 2.0)};
}

WedgeOutline outline(const WedgeParams& p) {
  require_valid(p);
  const double along = p.leg * std::cos(p.theta / 2.0);
  const double across = p.leg * std::sin(p.theta / 2.0);
  return {{p.vertex_dist, 0.0}, {p.vertex_dist - along, across}, {p.vertex_dist - along, -across}};
}

ParamGrid ParamGrid::from_degrees(const std::vector<double>& theta_deg, std::vector<double> legs,
                                  std::vector<double> dists) {
  check_axis(theta_deg, "theta_deg");
  check_axis(legs, "leg_m");
  check_axis(dists, "dist_m");
  ParamGrid g;
  g.thetas.reserve(theta_deg.size());
  for (double deg : theta_deg) g.thetas.push_back(deg * kPi / 180.0);
  g.legs = std::move(legs);
  g.dists = std::move(dists);
  return g;
}

ParamGrid ParamGrid::standard() {
  std::vector<double> thetas, legs, dists;
  for (int t = 10; t <= 150; t += 20) thetas.push_back(t);
  for (int l = 2; l <= 12; ++l) legs.push_back(l);
  for (int d = 1; d <= 11; ++d) dists.push_back(d);
  return from_degrees(thetas, std::move(legs), std::move(dists));
}

ParamGrid grid_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("grid json: ") + e.what());
  }
  auto axis = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
      throw Error(ErrorKind::Parse, std::string("grid json: missing array '") + key + "'");
    }
    std::vector<double> v;
    for (const auto& x : j.at(key)) {
      if (!x.is_number()) throw Error(ErrorKind::Parse, std::string("grid json: non-numeric entry in '") + key + "'");
      v.push_back(x.get<double>());
    }
    return v;
  };
  return ParamGrid::from_degrees(axis("theta_deg"), axis("leg_m"), axis("dist_m"));
}

GridEnumeration enumerate_grid(const ParamGrid& grid) {
  GridEnumeration e;
  e.cells.reserve(grid.size());
  for (double theta : grid.thetas) {
    for (double leg : grid.legs) {
      for (double dist : grid.dists) {
        const bool ok = is_valid(theta, leg, dist);
        e.cells.push_back({{theta, leg, dist}, ok});
        e.valid += ok ? 1 : 0;
      }
    }
  }
  e.total = e.cells.size();
  return e;
}

std::string grid_to_csv(const GridEnumeration& e, double length_scale) {
  std::string out = "theta_rad,leg_m,dist_m,valid\n";
  for (const auto& c : e.cells) {
    out += csv::format_double(c.params.theta);
    out += ',';
    out += csv::format_double(c.params.leg * length_scale);
    out += ',';
    out += csv::format_double(c.params.vertex_dist * length_scale);
    out += c.valid ? ",1\n" : ",0\n";
  }
  return out;
}

double view_scale(double view_distance) {
  if (!(view_distance > 0.0) || !std::isfinite(view_distance)) {
    throw Error(ErrorKind::Domain, "view distance must be positive");
  }
  return view_distance / kReferenceViewDistance;
}

}  // namespace optwedge
