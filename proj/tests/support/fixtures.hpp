#pragma once

#include <cmath>
#include <string>

#include "optwedge/models.hpp"

// Analytic cognitive models with known optima.
namespace fixture {

inline std::string data_path(const std::string& rel) { return std::string(OPTWEDGE_TEST_DATA_DIR) + "/" + rel; }

/// b = d_poi - d, sigma = sqrt(eps2): P equals Q everywhere, cost is 0.
inline optwedge::CognitiveModel perfect(double d_poi, double eps2 = 0.1) {
  const double s = std::sqrt(eps2);
  optwedge::CognitiveModel m;
  m.bias = optwedge::AnalyticModel{[d_poi](double, double, double d) { return d_poi - d; }, "perfect.bias"};
  m.sigma_x = optwedge::AnalyticModel{[s](double, double, double) { return s; }, "perfect.sigma"};
  m.sigma_y = m.sigma_x;
  return m;
}

inline constexpr double kBowlTheta = 0.8;
inline constexpr double kBowlLegOffset = 5.0;  // l* = d_poi + 5
inline constexpr double kBowlLegWeight = 0.1;

/// q(theta, l) = (theta - 0.8)^2 + 0.1 (l - l*)^2.
inline double bowl_q(double theta, double leg, double d_poi) {
  const double dt = theta - kBowlTheta, dl = leg - (d_poi + kBowlLegOffset);
  return dt * dt + kBowlLegWeight * dl * dl;
}

/// b = d_poi - d + sqrt(2 eps2 q), sigma = sqrt(eps2): the KL cost reduces to
/// q(theta, l) exactly, for any d.
inline optwedge::CognitiveModel bowl(double d_poi, double eps2 = 0.1) {
  const double s = std::sqrt(eps2);
  optwedge::CognitiveModel m;
  m.bias = optwedge::AnalyticModel{[d_poi, eps2](double t, double l, double d) {
                                     return d_poi - d + std::sqrt(2.0 * eps2 * bowl_q(t, l, d_poi));
                                   },
                                   "bowl.bias"};
  m.sigma_x = optwedge::AnalyticModel{[s](double, double, double) { return s; }, "bowl.sigma"};
  m.sigma_y = m.sigma_x;
  return m;
}

inline optwedge::CognitiveModel constant(double b, double sx, double sy) {
  optwedge::CognitiveModel m;
  m.bias = optwedge::AnalyticModel{[b](double, double, double) { return b; }, "const.bias"};
  m.sigma_x = optwedge::AnalyticModel{[sx](double, double, double) { return sx; }, "const.sx"};
  m.sigma_y = optwedge::AnalyticModel{[sy](double, double, double) { return sy; }, "const.sy"};
  return m;
}

}  // namespace fixture
