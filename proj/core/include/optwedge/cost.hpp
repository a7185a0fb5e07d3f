#pragma once

#include <array>

#include "optwedge/models.hpp"

// Cognitive cost: KL divergence from the ideal distribution Q on the POI to
// the model-predicted estimation distribution P. Costs are in nats.
namespace optwedge {

/// Axis-aligned 2D Gaussian.
struct Gauss2Diag {
  Point2 mean;
  double var_x = 1.0;
  double var_y = 1.0;
};

inline constexpr double kDefaultEps2 = 0.1;

struct CostContext {
  const CognitiveModel* model = nullptr;  // not owned
  double d_poi = 1.0;
  double eps2_x = kDefaultEps2;
  double eps2_y = kDefaultEps2;
};

/// N((d + b, 0), diag(sx^2, sy^2)) from the model's point predictions.
Gauss2Diag predicted_p(const CognitiveModel& model, const WedgeParams& p);

/// N((d_poi, 0), diag(eps_x^2, eps_y^2)).
Gauss2Diag ideal_q(const CostContext& ctx);

/// D_KL(q || p) in closed form, summed over the two independent axes.
double kl_qp(const Gauss2Diag& q, const Gauss2Diag& p);

double cost_f(const CostContext& ctx, const WedgeParams& p);

inline constexpr double kGradientRelStep = 1e-4;

/// Central differences with step rel_step*|x_i| per coordinate; switches to
/// a one-sided difference when a probe would leave the domain. Only the first
/// `n_coords` of (theta, leg, dist) are differentiated; the rest are 0.
std::array<double, 3> cost_grad(const CostContext& ctx, const WedgeParams& p, double rel_step = kGradientRelStep,
                                int n_coords = 3);

}  // namespace optwedge
