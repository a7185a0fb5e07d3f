#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "optwedge/geometry.hpp"

// Evaluation statistics for comparing wedge variants on localisation error.
namespace optwedge {

/// Euclidean distance from `estimate` to the POI at (d_poi, 0).
double localization_error(const Point2& estimate, double d_poi);
double rmse(std::span<const double> errors);

struct PairedSample {
  std::string label_a;
  std::string label_b;
  std::vector<double> differences;  // per-subject error(A) - error(B)
};

enum class WilcoxonMethod { Exact, NormalApprox };
std::string_view to_string(WilcoxonMethod m) noexcept;

struct TestResult {
  double statistic = 0.0;  // W = min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;
  WilcoxonMethod method = WilcoxonMethod::Exact;
  int n_effective = 0;  // after dropping zero differences
};

inline constexpr int kExactWilcoxonMaxN = 20;

enum class WilcoxonPolicy { Auto, ForceExact, ForceNormal };

/// Two-sided signed-rank test. Zero differences are dropped, ties get
/// midranks. Exact enumeration of the sign distribution when n_effective <=
/// kExactWilcoxonMaxN, otherwise the normal approximation with tie and
/// continuity corrections. `comparisons` feeds the Bonferroni adjustment.
TestResult wilcoxon_signed_rank(const PairedSample& s, int comparisons = 1,
                                WilcoxonPolicy policy = WilcoxonPolicy::Auto);

/// min(1, m * p).
double bonferroni(double p, int m);

/// Midranks of |x| (1-based), zeros must already be removed.
std::vector<double> midranks(std::span<const double> abs_values);

inline constexpr const char* kEvaluationHeader = "d_poi,comparison,W,p,p_adj,n_eff,method,rmse_a,rmse_b";

struct EvaluationRow {
  double d_poi = 0.0;
  std::string comparison;  // "VW-UOW"
  TestResult test;
  double rmse_a = 0.0;
  double rmse_b = 0.0;
};

std::string evaluation_to_csv(std::span<const EvaluationRow> rows);

/// Estimates collected for one wedge variant at one distance. `subjects`
/// pairs observations across variants (e.g. "P07#2").
struct ConditionEstimates {
  double d_poi = 0.0;
  std::string variant;  // "VW", "UOW", "BOW"
  std::vector<std::string> subjects;
  std::vector<Point2> estimates;
};

/// For every distance, tests each pair of variants (in the order they first
/// appear) on paired localisation errors. Subjects missing from either side
/// are skipped.
std::vector<EvaluationRow> evaluate_conditions(std::span<const ConditionEstimates> conditions, int comparisons = 3,
                                               WilcoxonPolicy policy = WilcoxonPolicy::Auto);

}  // namespace optwedge
