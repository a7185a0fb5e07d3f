#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optwedge/cost.hpp"

// Constrained minimisation of the penalised cognitive objective
//
//   F_mu(x) = f(x) + mu * (max(0, g1)^2 + max(0, g2)^2)
//   g1 = l*cos(theta/2) - d - W,  g2 = 2*l*sin(theta/2) - H
//
// UOW descends over (theta, l) with d pinned to d_poi; BOW also moves d. The
// domain of definition is enforced by projection with an interior margin,
// the drawable-area limits by the staged exterior penalty.
namespace optwedge {

enum class Mode { VW, UOW, BOW };
std::string_view to_string(Mode m) noexcept;
Mode mode_from_string(std::string_view s);

struct ConstraintSet {
  DrawableArea drawable;
  bool limit_width = true;   // g1
  bool limit_height = true;  // g2

  double mu0 = 1.0;
  double growth = 10.0;
  int max_stages = 10;
  int max_iterations = 10000;  // per stage

  double margin = 1e-4;  // interior margin on the domain of definition
  double feasibility_tol = 1e-6;
  double objective_tol = 1e-8;
  double step_tol = 1e-10;

  /// Upper bound on l; <= 0 selects d_poi + hypot(W, H).
  double leg_max = 0.0;
  /// Resolution of the coarse landscape used as an extra UOW start; 0 disables.
  int seed_grid = 64;

  void validate() const;
  /// Penalty weight at the last stage; every reported objective uses it.
  double reporting_mu() const;
  double leg_cap(double d_poi) const;
};

struct ConstraintValues {
  double g1 = 0.0;
  double g2 = 0.0;
};
ConstraintValues constraint_values(const WedgeParams& p, const DrawableArea& area);

double penalty(const ConstraintSet& cons, const WedgeParams& p);
double penalized_objective(const CostContext& ctx, const ConstraintSet& cons, const WedgeParams& p, double mu);

struct TraceEntry {
  int stage = 0;
  double mu = 0.0;
  double objective = 0.0;  // F_mu at the accepted iterate
};

struct OptimizationResult {
  Mode mode = Mode::VW;
  double d_poi = 0.0;
  WedgeParams params;
  double objective = 0.0;  // F at reporting_mu()
  double pure_cost = 0.0;  // f alone
  ConstraintValues constraints;
  int iterations = 0;  // accepted descent steps of the winning start
  bool converged = false;
  std::vector<TraceEntry> trace;  // winning start, starting point included

  // Audit over every start that was run.
  int accepted_steps = 0;
  int increasing_steps = 0;
};

/// True when the objective never increases between consecutive entries of
/// the same penalty stage.
bool trace_non_increasing(const std::vector<TraceEntry>& trace);

/// Scores a fixed parameter set under the reporting objective (VW rows).
OptimizationResult evaluate_point(const CostContext& ctx, const ConstraintSet& cons, const WedgeParams& p,
                                  Mode mode = Mode::VW);

/// Descends from vw_params(d_poi) and, when enabled, from the coarse grid
/// argmin; returns the best start under the reporting objective (ties keep
/// the VW start).
OptimizationResult optimize_uow(const CostContext& ctx, const ConstraintSet& cons);

/// Descends over (theta, l, d) from VW and from the UOW solution. The UOW
/// point is kept as a candidate, so the result never scores worse than UOW.
OptimizationResult optimize_bow(const CostContext& ctx, const ConstraintSet& cons);
/// Same, reusing an already computed UOW result.
OptimizationResult optimize_bow(const CostContext& ctx, const ConstraintSet& cons, const OptimizationResult& uow);

struct LandscapeCell {
  double theta = 0.0;
  double leg = 0.0;
  double cost = 0.0;       // f, NaN outside the domain of definition
  double objective = 0.0;  // F at reporting_mu(), NaN outside the domain
  bool feasible = false;   // inside the margin domain and both limits hold
};

struct LandscapeSpec {
  double theta_lo = 0.0, theta_hi = 0.0;
  double leg_lo = 0.0, leg_hi = 0.0;
  int res_theta = 2, res_leg = 2;
};

/// Theta over [margin, pi - margin], leg over [margin, leg_cap(d_poi)].
LandscapeSpec default_landscape_spec(const ConstraintSet& cons, double d_poi, int resolution);

struct Landscape {
  Mode mode = Mode::UOW;
  double dist = 0.0;  // d slice
  LandscapeSpec spec;
  std::vector<LandscapeCell> cells;  // theta-major, then leg; both ascending
  std::optional<std::size_t> argmin;  // lowest cost among feasible cells; ties keep the smallest theta, then leg
};

/// Dense evaluation of the UOW slice d = ctx.d_poi.
Landscape grid_landscape(const CostContext& ctx, const ConstraintSet& cons, int resolution);
Landscape grid_landscape(const CostContext& ctx, const ConstraintSet& cons, const LandscapeSpec& spec);

inline constexpr const char* kLandscapeHeader = "theta_rad,leg_m,cost_nats,feasible";
std::string landscape_to_csv(const Landscape& l, double length_scale = 1.0);

struct DistanceResult {
  double d_poi = 0.0;
  OptimizationResult vw, uow, bow;
};

/// VW, UOW and BOW for every distance. Errors are rethrown with the distance
/// in the message.
std::vector<DistanceResult> optimize_all(const CostContext& ctx_template, const std::vector<double>& d_pois,
                                         const ConstraintSet& cons);

inline constexpr const char* kResultHeader =
    "d_poi,mode,theta_rad,leg_m,dist_m,cost_nats,objective_nats,g1,g2,iterations,converged";

struct ResultRow {
  double d_poi = 0.0;
  Mode mode = Mode::VW;
  OptimizationResult result;
};

/// One row per (distance, mode); `modes` filters which rows are written.
std::string results_to_csv(const std::vector<DistanceResult>& results, const std::vector<Mode>& modes,
                           double length_scale = 1.0);
std::vector<ResultRow> results_from_csv(const std::string& text);

}  // namespace optwedge
