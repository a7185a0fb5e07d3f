#include "optwedge/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr double kInitialStepLength = 0.1;

using Vec3 = Eigen::Vector3d;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double max_violation(const ConstraintSet& cons, const WedgeParams& p) {
  const auto g = constraint_values(p, cons.drawable);
  double v = 0.0;
  if (cons.limit_width) v = std::max(v, g.g1);
  if (cons.limit_height) v = std::max(v, g.g2);
  return v;
}

std::string at(const WedgeParams& p) {
  return "(theta=" + csv::format_double(p.theta) + ", leg=" + csv::format_double(p.leg) +
         ", dist=" + csv::format_double(p.vertex_dist) + ")";
}

// Descent runs in (theta, w, d) with w = l*cos(theta/2) - d, the footprint
// width. The domain bound d < l*cos(theta/2) becomes the box w >= margin and
// g1 becomes linear; only the leg cap l <= l_max stays curved. d is pinned to
// d_poi for UOW.
class Problem {
 public:
  Problem(const CostContext& ctx, const ConstraintSet& cons, Mode mode)
      : ctx_(ctx), cons_(cons), mode_(mode), leg_max_(cons.leg_cap(ctx.d_poi)) {
    const double m = cons_.margin;
    const double d_min = mode_ == Mode::UOW ? ctx_.d_poi : m;
    if (leg_max_ * std::cos(m / 2.0) - d_min < 2.0 * m) {
      throw Error(ErrorKind::Infeasible,
                  "no feasible wedge: leg cap " + csv::format_double(leg_max_) + " cannot reach past the vertex");
    }
  }

  int dims() const { return mode_ == Mode::BOW ? 3 : 2; }

  WedgeParams params(const Vec3& x) const {
    const double d = mode_ == Mode::BOW ? x[2] : ctx_.d_poi;
    return {x[0], (d + x[1]) / std::cos(x[0] / 2.0), d};
  }

  Vec3 coords(const WedgeParams& p) const {
    const double d = mode_ == Mode::BOW ? p.vertex_dist : ctx_.d_poi;
    return {p.theta, p.leg * std::cos(p.theta / 2.0) - d, d};
  }

  Vec3 project(Vec3 x) const {
    const double m = cons_.margin;
    if (mode_ == Mode::UOW) {
      x[2] = ctx_.d_poi;
    } else {
      x[2] = std::clamp(x[2], m, leg_max_ * std::cos(m / 2.0) - 2.0 * m);
    }
    const double theta_cap = 2.0 * std::acos(std::min(1.0, (x[2] + m) / leg_max_));
    x[0] = std::clamp(x[0], m, std::min(kPi - m, theta_cap));
    x[1] = std::clamp(x[1], m, std::max(m, leg_max_ * std::cos(x[0] / 2.0) - x[2]));
    const auto p = params(x);
    if (!is_valid(p)) throw Error(ErrorKind::Infeasible, "projection left the domain at " + at(p));
    return x;
  }

  double objective(const Vec3& x, double mu) const { return penalized_objective(ctx_, cons_, params(x), mu); }

  Vec3 gradient(const Vec3& x, double mu) const {
    const auto p = params(x);
    const auto gf = cost_grad(ctx_, p, kGradientRelStep, dims());
    Vec3 g(gf[0], gf[1], gf[2]);
    const auto gv = constraint_values(p, cons_.drawable);
    const double c = std::cos(p.theta / 2.0), s = std::sin(p.theta / 2.0);
    if (cons_.limit_width && gv.g1 > 0.0) {
      g += 2.0 * mu * gv.g1 * Vec3(-p.leg * s / 2.0, c, -1.0);
    }
    if (cons_.limit_height && gv.g2 > 0.0) {
      g += 2.0 * mu * gv.g2 * Vec3(p.leg * c, 2.0 * s, 0.0);
    }
    // Chain rule through l(theta, w, d) = (d + w) / cos(theta/2).
    const double dl_dtheta = p.leg * s / (2.0 * c), dl_dw = 1.0 / c;
    Vec3 out(g[0] + g[1] * dl_dtheta, g[1] * dl_dw, g[2] + g[1] * dl_dw);
    if (mode_ != Mode::BOW) out[2] = 0.0;
    return out;
  }

  const ConstraintSet& cons() const { return cons_; }
  Mode mode() const { return mode_; }

 private:
  const CostContext& ctx_;
  const ConstraintSet& cons_;
  Mode mode_;
  double leg_max_;
};

struct Audit {
  int accepted = 0;
  int increasing = 0;
};

// Projected gradient descent with Barzilai-Borwein trial steps and a
// sufficient-decrease backtracking test. Returns true on convergence.
bool descend(const Problem& pr, Vec3& x, double mu, int stage, std::vector<TraceEntry>& trace, int& iterations,
             Audit& audit) {
  const auto& cons = pr.cons();
  double f = pr.objective(x, mu);
  trace.push_back({stage, mu, f});
  Vec3 g = pr.gradient(x, mu);
  Vec3 x_prev = x, g_prev = g;
  bool have_prev = false;
  double alpha = 0.0;

  for (int it = 0; it < cons.max_iterations; ++it) {
    const double gnorm = g.norm();
    if (!(gnorm > 0.0)) return true;
    if (have_prev) {
      const Vec3 s = x - x_prev, y = g - g_prev;
      const double sy = s.dot(y);
      alpha = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * alpha;
    } else {
      alpha = kInitialStepLength / gnorm;
    }

    bool accepted = false;
    Vec3 xt;
    double ft = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, alpha *= 0.5) {
      xt = pr.project(x - alpha * g);
      const double step = (xt - x).norm();
      if (step < cons.step_tol) return true;
      ft = pr.objective(xt, mu);
      if (ft <= f - kArmijo * step * step / alpha) {
        accepted = true;
        break;
      }
    }
    // No decrease along the projected gradient at the resolution of the
    // finite-difference gradient: treat as stationary.
    if (!accepted) return true;

    ++audit.accepted;
    if (ft > f) ++audit.increasing;
    ++iterations;
    x_prev = x;
    g_prev = g;
    have_prev = true;
    x = xt;
    trace.push_back({stage, mu, ft});
    const double change = std::abs(f - ft);
    f = ft;
    if (change < cons.objective_tol) return true;
    g = pr.gradient(x, mu);
  }
  return false;
}

struct Run {
  WedgeParams params;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  bool converged = false;
};

Run run_stages(const Problem& pr, const WedgeParams& start, Audit& audit) {
  const auto& cons = pr.cons();
  Vec3 x = pr.project(pr.coords(start));
  Run r;
  double mu = cons.mu0;
  bool stage_converged = false;
  double violation = 0.0;
  for (int stage = 0; stage < cons.max_stages; ++stage) {
    stage_converged = descend(pr, x, mu, stage, r.trace, r.iterations, audit);
    violation = max_violation(cons, pr.params(x));
    // Stop early only when the penalty is inactive; otherwise keep tightening
    // so the point is settled at the reporting weight.
    if (stage_converged && violation <= 0.0) break;
    if (stage + 1 < cons.max_stages) mu *= cons.growth;
  }
  r.params = pr.params(x);
  r.converged = stage_converged && violation <= cons.feasibility_tol;
  return r;
}

OptimizationResult make_result(const CostContext& ctx, const ConstraintSet& cons, Mode mode, const WedgeParams& p) {
  OptimizationResult r;
  r.mode = mode;
  r.d_poi = ctx.d_poi;
  r.params = p;
  r.pure_cost = cost_f(ctx, p);
  r.constraints = constraint_values(p, cons.drawable);
  r.objective = r.pure_cost + cons.reporting_mu() * penalty(cons, p);
  return r;
}

OptimizationResult pick_best(std::vector<OptimizationResult>& cands, const Audit& audit) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i) {
    if (cands[i].objective < cands[best].objective) best = i;
  }
  auto out = std::move(cands[best]);
  out.accepted_steps = audit.accepted;
  out.increasing_steps = audit.increasing;
  return out;
}

OptimizationResult from_run(const CostContext& ctx, const ConstraintSet& cons, Mode mode, Run run) {
  auto r = make_result(ctx, cons, mode, run.params);
  r.iterations = run.iterations;
  r.converged = run.converged;
  r.trace = std::move(run.trace);
  return r;
}

OptimizationResult from_seed(const CostContext& ctx, const ConstraintSet& cons, Mode mode, const WedgeParams& p) {
  auto r = make_result(ctx, cons, mode, p);
  r.trace.push_back({0, cons.reporting_mu(), r.objective});
  return r;
}

void check_context(const CostContext& ctx) {
  if (ctx.model == nullptr) throw Error(ErrorKind::State, "cost context has no model");
  if (!(ctx.d_poi > 0.0) || !std::isfinite(ctx.d_poi)) throw Error(ErrorKind::Domain, "d_poi must be positive");
}

bool in_margin_domain(const ConstraintSet& cons, double d_poi, const WedgeParams& p) {
  const double m = cons.margin;
  return p.theta >= m && p.theta <= kPi - m && p.leg <= cons.leg_cap(d_poi) && p.vertex_dist >= m &&
         p.leg * std::cos(p.theta / 2.0) - p.vertex_dist >= m && is_valid(p);
}

}  // namespace

std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::VW: return "VW";
    case Mode::UOW: return "UOW";
    case Mode::BOW: return "BOW";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  if (s == "VW" || s == "vw") return Mode::VW;
  if (s == "UOW" || s == "uow") return Mode::UOW;
  if (s == "BOW" || s == "bow") return Mode::BOW;
  throw Error(ErrorKind::Validation, "unknown mode '" + std::string(s) + "'");
}

void ConstraintSet::validate() const {
  if (!(drawable.max_width > 0.0) || !(drawable.max_height > 0.0)) {
    throw Error(ErrorKind::Validation, "drawable area must be positive");
  }
  if (!(mu0 > 0.0)) throw Error(ErrorKind::Validation, "mu0 must be positive");
  if (!(growth > 1.0)) throw Error(ErrorKind::Validation, "penalty growth must exceed 1");
  if (max_stages < 1 || max_iterations < 1) throw Error(ErrorKind::Validation, "stage and iteration caps must be >= 1");
  if (!(margin > 0.0 && margin < 0.5)) throw Error(ErrorKind::Validation, "margin must lie in (0, 0.5)");
  if (seed_grid != 0 && seed_grid < 2) throw Error(ErrorKind::Validation, "seed_grid must be 0 or >= 2");
}

double ConstraintSet::reporting_mu() const { return mu0 * std::pow(growth, max_stages - 1); }

double ConstraintSet::leg_cap(double d_poi) const {
  return leg_max > 0.0 ? leg_max : d_poi + std::hypot(drawable.max_width, drawable.max_height);
}

ConstraintValues constraint_values(const WedgeParams& p, const DrawableArea& area) {
  return {p.leg * std::cos(p.theta / 2.0) - p.vertex_dist - area.max_width,
          2.0 * p.leg * std::sin(p.theta / 2.0) - area.max_height};
}

double penalty(const ConstraintSet& cons, const WedgeParams& p) {
  const auto g = constraint_values(p, cons.drawable);
  double s = 0.0;
  if (cons.limit_width && g.g1 > 0.0) s += g.g1 * g.g1;
  if (cons.limit_height && g.g2 > 0.0) s += g.g2 * g.g2;
  return s;
}

double penalized_objective(const CostContext& ctx, const ConstraintSet& cons, const WedgeParams& p, double mu) {
  return cost_f(ctx, p) + mu * penalty(cons, p);
}

bool trace_non_increasing(const std::vector<TraceEntry>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].stage == trace[i - 1].stage && trace[i].objective > trace[i - 1].objective) return false;
  }
  return true;
}

OptimizationResult evaluate_point(const CostContext& ctx, const ConstraintSet& cons, const WedgeParams& p, Mode mode) {
  check_context(ctx);
  require_valid(p);
  auto r = from_seed(ctx, cons, mode, p);
  r.converged = max_violation(cons, p) <= cons.feasibility_tol;
  return r;
}

OptimizationResult optimize_uow(const CostContext& ctx, const ConstraintSet& cons) {
  check_context(ctx);
  cons.validate();
  const Problem pr(ctx, cons, Mode::UOW);
  const auto vw = vw_params(ctx.d_poi);

  std::vector<WedgeParams> starts{vw};
  if (cons.seed_grid >= 2) {
    const auto land = grid_landscape(ctx, cons, cons.seed_grid);
    if (land.argmin) {
      const auto& c = land.cells[*land.argmin];
      starts.push_back({c.theta, c.leg, ctx.d_poi});
    }
  }

  Audit audit;
  std::vector<OptimizationResult> cands;
  for (const auto& s : starts) cands.push_back(from_run(ctx, cons, Mode::UOW, run_stages(pr, s, audit)));
  for (const auto& s : starts) cands.push_back(from_seed(ctx, cons, Mode::UOW, pr.params(pr.project(pr.coords(s)))));
  return pick_best(cands, audit);
}

OptimizationResult optimize_bow(const CostContext& ctx, const ConstraintSet& cons) {
  return optimize_bow(ctx, cons, optimize_uow(ctx, cons));
}

OptimizationResult optimize_bow(const CostContext& ctx, const ConstraintSet& cons, const OptimizationResult& uow) {
  check_context(ctx);
  cons.validate();
  const Problem pr(ctx, cons, Mode::BOW);
  const auto vw = vw_params(ctx.d_poi);
  const std::vector<WedgeParams> starts{vw, uow.params};

  Audit audit;
  std::vector<OptimizationResult> cands;
  for (const auto& s : starts) cands.push_back(from_run(ctx, cons, Mode::BOW, run_stages(pr, s, audit)));
  // The UOW point itself, scored exactly as UOW scored it.
  auto keep = from_seed(ctx, cons, Mode::BOW, uow.params);
  keep.iterations = uow.iterations;
  keep.converged = uow.converged;
  cands.push_back(std::move(keep));
  cands.push_back(from_seed(ctx, cons, Mode::BOW, pr.params(pr.project(pr.coords(starts[0])))));
  return pick_best(cands, audit);
}

LandscapeSpec default_landscape_spec(const ConstraintSet& cons, double d_poi, int resolution) {
  LandscapeSpec s;
  s.theta_lo = cons.margin;
  s.theta_hi = kPi - cons.margin;
  s.leg_lo = cons.margin;
  s.leg_hi = cons.leg_cap(d_poi);
  s.res_theta = s.res_leg = resolution;
  return s;
}

Landscape grid_landscape(const CostContext& ctx, const ConstraintSet& cons, int resolution) {
  return grid_landscape(ctx, cons, default_landscape_spec(cons, ctx.d_poi, resolution));
}

Landscape grid_landscape(const CostContext& ctx, const ConstraintSet& cons, const LandscapeSpec& spec) {
  check_context(ctx);
  if (spec.res_theta < 2 || spec.res_leg < 2) throw Error(ErrorKind::Domain, "landscape resolution must be >= 2");
  Landscape out;
  out.dist = ctx.d_poi;
  out.spec = spec;
  out.cells.reserve(static_cast<std::size_t>(spec.res_theta) * static_cast<std::size_t>(spec.res_leg));
  const double mu = cons.reporting_mu();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.res_theta; ++i) {
    const double theta = spec.theta_lo + (spec.theta_hi - spec.theta_lo) * i / (spec.res_theta - 1);
    for (int j = 0; j < spec.res_leg; ++j) {
      const double leg = spec.leg_lo + (spec.leg_hi - spec.leg_lo) * j / (spec.res_leg - 1);
      LandscapeCell c{theta, leg, nan(), nan(), false};
      const WedgeParams p{theta, leg, ctx.d_poi};
      if (is_valid(p)) {
        c.cost = cost_f(ctx, p);
        c.objective = c.cost + mu * penalty(cons, p);
        c.feasible = in_margin_domain(cons, ctx.d_poi, p) && max_violation(cons, p) <= 0.0;
      }
      if (c.feasible && c.cost < best) {
        best = c.cost;
        out.argmin = out.cells.size();
      }
      out.cells.push_back(c);
    }
  }
  return out;
}

std::string landscape_to_csv(const Landscape& l, double length_scale) {
  std::string out = std::string(kLandscapeHeader) + "\n";
  for (const auto& c : l.cells) {
    out += csv::format_double(c.theta) + ',' + csv::format_double(c.leg * length_scale) + ',' +
           csv::format_double(c.cost) + (c.feasible ? ",1\n" : ",0\n");
  }
  return out;
}

std::vector<DistanceResult> optimize_all(const CostContext& ctx_template, const std::vector<double>& d_pois,
                                         const ConstraintSet& cons) {
  std::vector<DistanceResult> out;
  out.reserve(d_pois.size());
  for (double d : d_pois) {
    CostContext ctx = ctx_template;
    ctx.d_poi = d;
    try {
      DistanceResult r;
      r.d_poi = d;
      r.vw = evaluate_point(ctx, cons, vw_params(d), Mode::VW);
      r.uow = optimize_uow(ctx, cons);
      r.bow = optimize_bow(ctx, cons, r.uow);
      out.push_back(std::move(r));
    } catch (const Error& e) {
      throw Error(e.kind(), "d_poi=" + csv::format_double(d) + ": " + e.what());
    }
  }
  return out;
}

std::string results_to_csv(const std::vector<DistanceResult>& results, const std::vector<Mode>& modes,
                           double length_scale) {
  std::string out = std::string(kResultHeader) + "\n";
  for (const auto& d : results) {
    for (Mode m : modes) {
      const auto& r = m == Mode::VW ? d.vw : m == Mode::UOW ? d.uow : d.bow;
      out += csv::format_double(d.d_poi * length_scale) + ',' + std::string(to_string(m)) + ',' +
             csv::format_double(r.params.theta) + ',' + csv::format_double(r.params.leg * length_scale) + ',' +
             csv::format_double(r.params.vertex_dist * length_scale) + ',' + csv::format_double(r.pure_cost) + ',' +
             csv::format_double(r.objective) + ',' + csv::format_double(r.constraints.g1 * length_scale) + ',' +
             csv::format_double(r.constraints.g2 * length_scale) + ',' + std::to_string(r.iterations) +
             (r.converged ? ",1\n" : ",0\n");
    }
  }
  return out;
}

std::vector<ResultRow> results_from_csv(const std::string& text) {
  std::vector<ResultRow> out;
  for (const auto& row : csv::parse(text, kResultHeader)) {
    const auto& f = row.fields;
    ResultRow r;
    r.d_poi = csv::parse_double(f[0], row.line_no);
    try {
      r.mode = mode_from_string(f[1]);
    } catch (const Error&) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(row.line_no) + ": unknown mode '" + std::string(f[1]) + "'");
    }
    auto& res = r.result;
    res.mode = r.mode;
    res.d_poi = r.d_poi;
    res.params = {csv::parse_double(f[2], row.line_no), csv::parse_double(f[3], row.line_no),
                  csv::parse_double(f[4], row.line_no)};
    res.pure_cost = csv::parse_double(f[5], row.line_no);
    res.objective = csv::parse_double(f[6], row.line_no);
    res.constraints = {csv::parse_double(f[7], row.line_no), csv::parse_double(f[8], row.line_no)};
    res.iterations = static_cast<int>(csv::parse_int(f[9], row.line_no));
    res.converged = csv::parse_int(f[10], row.line_no) != 0;
    if (!is_valid(res.params)) {
      throw Error(ErrorKind::Validation, "line " + std::to_string(row.line_no) + ": invalid wedge parameters");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace optwedge
