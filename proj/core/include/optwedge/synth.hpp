#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "optwedge/models.hpp"
#include "optwedge/optimize.hpp"
#include "optwedge/stats.hpp"
#include "optwedge/trials.hpp"

// Synthetic observers: closed-form latent fields stand in for human subjects
// so the whole pipeline can be exercised end to end.
namespace optwedge {

/// b*      = bias_slope * d + bias_offset                 (bias_slope < 0: underestimation grows with d)
/// sigma_x* = sx_base + sx_gain * (1 - theta/pi) * d
/// sigma_y* = sy_base + sy_gain * (theta/pi) * l          (theta trades sigma_x against sigma_y)
struct LatentField {
  double bias_slope = -0.15;
  double bias_offset = 0.3;
  double sx_base = 0.2;
  double sx_gain = 0.15;
  double sy_base = 0.1;
  double sy_gain = 0.12;

  double bias(double theta, double leg, double dist) const noexcept;
  double sigma_x(double theta, double leg, double dist) const noexcept;
  double sigma_y(double theta, double leg, double dist) const noexcept;

  /// Positive bases and non-negative gains keep both sigmas > 0 on the domain.
  void validate() const;

  /// The field itself as an (analytic) cognitive model.
  CognitiveModel as_model(double sigma_floor = kDefaultSigmaFloor) const;
  /// Noise-free factors at every valid grid cell (n_used = n_removed = 0).
  std::vector<CognitiveFactors> exact_factors(const ParamGrid& grid) const;

  static LatentField from_json(const std::string& text);
  std::string to_json() const;
};

struct ObserverConfig {
  int participants = 20;
  int repetitions = 1;
  std::uint64_t seed = 1;
  double outlier_rate = 0.02;
  double outlier_box = 30.0;  // half-width in meters of the uniform replacement box

  void validate() const;
};

struct SyntheticTrials {
  std::vector<TrialRecord> trials;
  std::vector<bool> injected;  // parallel to trials: replaced by an outlier draw
};

/// For each valid cell and each participant x repetition, draws an estimate
/// from N((d + b*, 0), diag(sx*^2, sy*^2)); with probability outlier_rate the
/// draw is replaced by a uniform point in a box centred on the mean. Each cell
/// uses its own generator seeded from (seed, cell index).
SyntheticTrials sample_trials_labeled(const LatentField& field, const ParamGrid& grid, const ObserverConfig& cfg);
std::vector<TrialRecord> sample_trials(const LatentField& field, const ParamGrid& grid, const ObserverConfig& cfg);

/// Draws estimates of `params` for every participant x repetition; the
/// generator is seeded from (cfg.seed, stream).
std::vector<Point2> sample_estimates(const LatentField& field, const WedgeParams& params, const ObserverConfig& cfg,
                                     std::uint64_t stream);

/// Synthetic observers looking at the VW/UOW/BOW wedges of each distance.
std::vector<ConditionEstimates> simulate_conditions(const LatentField& field,
                                                    const std::vector<DistanceResult>& results,
                                                    const ObserverConfig& cfg);

struct RoundtripOptions {
  double outlier_alpha = kDefaultOutlierAlpha;
  FitOptions fit;
  double eps2_x = kDefaultEps2;
  double eps2_y = kDefaultEps2;
  ConstraintSet constraints;
  std::vector<double> d_pois{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  int agreement_resolution = 100;
  ObserverConfig evaluation{22, 2, 7, 0.0, 30.0};
  int bonferroni_m = 3;
};

struct AgreementRow {
  double d_poi = 0.0;
  double uow_objective = 0.0;
  double grid_min = 0.0;
};

struct RecoveryRow {
  Factor target = Factor::Bias;
  double test_mse_vs_truth = 0.0;     // fitted model vs latent field at held-out cells
  double test_mse_vs_observed = 0.0;  // fitted model vs extracted factors at held-out cells
};

struct RoundtripReport {
  SyntheticTrials trials;
  std::vector<CognitiveFactors> factors;
  std::vector<std::string> warnings;
  FitReport fit;
  std::vector<RecoveryRow> recovery;
  std::vector<DistanceResult> results;
  std::vector<AgreementRow> agreement;
  std::vector<EvaluationRow> evaluation;

  /// Every artefact as (file name, content); byte-stable per seed.
  std::vector<std::pair<std::string, std::string>> files() const;
};

/// trials -> factors -> fit (polynomial + GP) -> cost -> optimize_all ->
/// grid agreement -> synthetic evaluation. Errors carry the stage name.
RoundtripReport pipeline_roundtrip(const LatentField& field, const ParamGrid& grid, const ObserverConfig& cfg,
                                   const RoundtripOptions& options = {});

void write_roundtrip(const RoundtripReport& report, const std::string& dir);

}  // namespace optwedge
