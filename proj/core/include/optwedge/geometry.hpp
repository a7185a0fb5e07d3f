#pragma once

#include <string>
#include <vector>

// Wedge parameterisation.
//
// Frame: the origin is the POI's nearest point on the screen edge, +x points
// off-screen along the wedge's perpendicular bisector and y is lateral. The
// invisible vertex sits at (d, 0) and the base endpoints at
// (d - l*cos(theta/2), +-l*sin(theta/2)). Angles are radians, lengths meters,
// referenced to a 10 m viewing distance.
namespace optwedge {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kReferenceViewDistance = 10.0;

/// Aperture theta, leg length l and vertex distance d of one wedge.
struct WedgeParams {
  double theta = 0.0;
  double leg = 0.0;
  double vertex_dist = 0.0;

  friend bool operator==(const WedgeParams&, const WedgeParams&) = default;
};

/// 0 < theta < pi and 0 < d < l*cos(theta/2), strict. Total function.
bool is_valid(double theta, double leg, double dist) noexcept;
inline bool is_valid(const WedgeParams& p) noexcept { return is_valid(p.theta, p.leg, p.vertex_dist); }

/// Throws Error(Domain) when `p` is outside the domain of definition.
void require_valid(const WedgeParams& p);

/// Vanilla-Wedge heuristic: l = d + 10*ln((d + 20)/12), theta = (5 + 0.3*d)/l.
/// The logarithm is natural and theta is read as radians.
WedgeParams vw_params(double d_poi);

struct Footprint {
  double width = 0.0;   // w = l*cos(theta/2) - d, the on-screen depth
  double height = 0.0;  // h = 2*l*sin(theta/2), the base length
};
Footprint footprint(const WedgeParams& p);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Vertex and base endpoints in the frame described above.
struct WedgeOutline {
  Point2 vertex;
  Point2 base_upper;
  Point2 base_lower;
};
WedgeOutline outline(const WedgeParams& p);

struct DrawableArea {
  double max_width = 14.0;
  double max_height = 14.0;
};

/// Aperture, leg and distance sets; stored in radians/meters.
struct ParamGrid {
  std::vector<double> thetas;
  std::vector<double> legs;
  std::vector<double> dists;

  /// Builds a grid from degree-valued apertures; validates the invariants.
  static ParamGrid from_degrees(const std::vector<double>& theta_deg, std::vector<double> legs,
                                std::vector<double> dists);
  /// theta in {10, 30, ..., 150} deg, l in {2..12} m, d in {1..11} m.
  static ParamGrid standard();

  std::size_t size() const noexcept { return thetas.size() * legs.size() * dists.size(); }
};

/// Parses `{"theta_deg": [...], "leg_m": [...], "dist_m": [...]}`.
ParamGrid grid_from_json(const std::string& text);

struct GridCell {
  WedgeParams params;
  bool valid = false;
};

struct GridEnumeration {
  std::vector<GridCell> cells;  // theta-major, then leg, then dist
  std::size_t total = 0;
  std::size_t valid = 0;
};

GridEnumeration enumerate_grid(const ParamGrid& grid);

/// CSV with header `theta_rad,leg_m,dist_m,valid`. Lengths are multiplied by
/// `length_scale` (see view_scale()).
std::string grid_to_csv(const GridEnumeration& e, double length_scale = 1.0);

/// Linear rescaling factor from the 10 m reference setup to `view_distance`.
double view_scale(double view_distance);

}  // namespace optwedge
