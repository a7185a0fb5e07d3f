#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "optwedge/geometry.hpp"

namespace optwedge {

/// One estimate of the invisible vertex under a given wedge.
struct TrialRecord {
  std::string participant;
  WedgeParams params;
  double estimate_x = 0.0;  // along +x, off-screen axis
  double estimate_y = 0.0;  // lateral
  int repetition = 0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Bias and individual differences of one condition.
struct CognitiveFactors {
  WedgeParams params;
  double bias = 0.0;  // mean(estimate_x) - d; positive when estimates overshoot
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  int n_used = 0;
  int n_removed = 0;

  friend bool operator==(const CognitiveFactors&, const CognitiveFactors&) = default;
};

inline constexpr double kDefaultOutlierAlpha = 0.05;

/// Upper-alpha quantile of chi-square with 2 degrees of freedom, -2*ln(alpha).
double chi2_2dof_quantile(double alpha);

struct HotellingResult {
  std::vector<std::size_t> kept;     // indices into the input, ascending
  std::vector<std::size_t> removed;  // indices into the input, ascending
  std::vector<double> statistic;     // a(x) for every input point
  double threshold = 0.0;
};

/// Single-pass Hotelling T^2 filter: mean and sample covariance (n-1) come
/// from all points, and a point is dropped iff
/// (x - mu)^T S^-1 (x - mu) > chi2_2dof_quantile(alpha).
/// Throws InsufficientData for fewer than 3 points and DegenerateSample when
/// the sample covariance is singular.
HotellingResult hotelling_filter(std::span<const Point2> points, double alpha = kDefaultOutlierAlpha);

/// Factors of one condition. All trials must share identical params. A
/// condition whose covariance is singular skips the filter.
CognitiveFactors extract_factors(std::span<const TrialRecord> trials, double alpha = kDefaultOutlierAlpha);

/// Groups trials by identical params (sorted by theta, leg, dist) and extracts
/// each condition. Conditions that fail the sample-size requirements are
/// skipped and reported through `warn`.
std::vector<CognitiveFactors> extract_all(std::span<const TrialRecord> trials, double alpha = kDefaultOutlierAlpha,
                                          const std::function<void(const std::string&)>& warn = {});

std::vector<std::vector<TrialRecord>> group_by_condition(std::span<const TrialRecord> trials);

// File formats.
inline constexpr const char* kTrialsHeader = "participant,theta_rad,leg_m,dist_m,est_x_m,est_y_m,rep";
inline constexpr const char* kFactorsHeader = "theta_rad,leg_m,dist_m,b_m,sigma_x_m,sigma_y_m,n_used,n_removed";

std::string trials_to_csv(std::span<const TrialRecord> trials);
std::vector<TrialRecord> trials_from_csv(const std::string& text);
std::vector<TrialRecord> load_trials(const std::string& path);
void save_trials(std::span<const TrialRecord> trials, const std::string& path);

std::string factors_to_csv(std::span<const CognitiveFactors> factors);
std::vector<CognitiveFactors> factors_from_csv(const std::string& text);
std::vector<CognitiveFactors> load_factors(const std::string& path);
void save_factors(std::span<const CognitiveFactors> factors, const std::string& path);

}  // namespace optwedge
