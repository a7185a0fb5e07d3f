#include "optwedge/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge {

namespace {

void check_gauss(const Gauss2Diag& g) {
  if (!(g.var_x > 0.0) || !(g.var_y > 0.0)) throw Error(ErrorKind::Domain, "Gaussian variances must be positive");
}

const CognitiveModel& model_of(const CostContext& ctx) {
  if (ctx.model == nullptr) throw Error(ErrorKind::State, "cost context has no model");
  return *ctx.model;
}

double kl_axis(double mean_q, double var_q, double mean_p, double var_p) {
  const double diff = mean_q - mean_p;
  return 0.5 * std::log(var_p / var_q) + (var_q + diff * diff) / (2.0 * var_p) - 0.5;
}

double& coord(WedgeParams& p, int i) { return i == 0 ? p.theta : i == 1 ? p.leg : p.vertex_dist; }

}  // namespace

Gauss2Diag predicted_p(const CognitiveModel& model, const WedgeParams& p) {
  require_valid(p);
  const auto f = model.predict(p.theta, p.leg, p.vertex_dist);
  return {{p.vertex_dist + f.bias, 0.0}, f.sigma_x * f.sigma_x, f.sigma_y * f.sigma_y};
}

Gauss2Diag ideal_q(const CostContext& ctx) {
  if (!(ctx.eps2_x > 0.0) || !(ctx.eps2_y > 0.0)) throw Error(ErrorKind::Domain, "eps^2 must be positive");
  return {{ctx.d_poi, 0.0}, ctx.eps2_x, ctx.eps2_y};
}

double kl_qp(const Gauss2Diag& q, const Gauss2Diag& p) {
  check_gauss(q);
  check_gauss(p);
  return kl_axis(q.mean.x, q.var_x, p.mean.x, p.var_x) + kl_axis(q.mean.y, q.var_y, p.mean.y, p.var_y);
}

double cost_f(const CostContext& ctx, const WedgeParams& p) {
  const double c = kl_qp(ideal_q(ctx), predicted_p(model_of(ctx), p));
  if (!std::isfinite(c)) {
    throw Error(ErrorKind::Numerical, "non-finite cost at (theta=" + csv::format_double(p.theta) + ", leg=" +
                                          csv::format_double(p.leg) + ", dist=" + csv::format_double(p.vertex_dist) + ")");
  }
  return c;
}

std::array<double, 3> cost_grad(const CostContext& ctx, const WedgeParams& p, double rel_step, int n_coords) {
  require_valid(p);
  if (!(rel_step > 0.0)) throw Error(ErrorKind::Domain, "finite-difference step must be positive");
  std::array<double, 3> g{};
  double center = std::numeric_limits<double>::quiet_NaN();
  auto at_center = [&] {
    if (std::isnan(center)) center = cost_f(ctx, p);
    return center;
  };
  for (int i = 0; i < std::min(n_coords, 3); ++i) {
    WedgeParams base = p;
    double h = rel_step * std::abs(coord(base, i));
    if (h == 0.0) h = rel_step;
    for (int attempt = 0; attempt < 60; ++attempt, h *= 0.5) {
      WedgeParams up = p, down = p;
      coord(up, i) += h;
      coord(down, i) -= h;
      const bool up_ok = is_valid(up), down_ok = is_valid(down);
      if (up_ok && down_ok) {
        g[static_cast<std::size_t>(i)] = (cost_f(ctx, up) - cost_f(ctx, down)) / (2.0 * h);
        break;
      }
      if (up_ok) {
        g[static_cast<std::size_t>(i)] = (cost_f(ctx, up) - at_center()) / h;
        break;
      }
      if (down_ok) {
        g[static_cast<std::size_t>(i)] = (at_center() - cost_f(ctx, down)) / h;
        break;
      }
    }
  }
  return g;
}

}  // namespace optwedge
