#pragma once

#include <string>

#include "optwedge/optimize.hpp"

namespace optwedge::app {

struct WedgeSvgOptions {
  double px_per_m = 20.0;
  double d_poi = 0.0;  // <= 0 places the POI mark on the vertex
  double length_scale = 1.0;
  double screen_width = 14.0;   // drawable area shown left of the edge, meters
  double screen_height = 14.0;
};

/// SVG 1.1 wedge in the screen frame: screen edge at x = 0, off-screen to the
/// right. The on-screen part is a solid polygon, off-screen legs are dashed.
/// The full triangle is emitted as <polygon id="wedge"> and the scale as
/// <desc>px_per_m=...</desc>; y grows upward in meters, downward in pixels.
std::string render_wedge_svg(const WedgeParams& p, const WedgeSvgOptions& options = {});

/// Heatmap of a landscape CSV (theta across, leg up); infeasible cells grey,
/// argmin outlined.
std::string render_landscape_svg(const std::string& landscape_csv, double cell_px = 3.0);

}  // namespace optwedge::app
