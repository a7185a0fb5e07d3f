#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "optwedge/trials.hpp"

// Regressors for the three cognitive factors b, sigma_x and sigma_y as
// functions of (theta, l, d). Inputs are standardised per feature before both
// model families see them.
namespace optwedge {

enum class Factor { Bias, SigmaX, SigmaY };
std::string_view to_string(Factor f) noexcept;
Factor factor_from_string(std::string_view s);

/// Rows are samples, columns are (theta, leg, dist).
using Inputs = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct FitData {
  Inputs x;
  Eigen::VectorXd y;
};
FitData make_fit_data(std::span<const CognitiveFactors> factors, Factor target);

/// Per-feature mean and scale. Constant features get scale 1.
struct Standardizer {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d scale = Eigen::Vector3d::Ones();

  static Standardizer fit(const Inputs& x);
  Eigen::Vector3d apply(const Eigen::Vector3d& raw) const { return (raw - mean).cwiseQuotient(scale); }
};

/// Exponent triples of every monomial in three variables up to `order`,
/// sorted by total degree then lexicographically descending; the intercept
/// comes first.
std::vector<std::array<int, 3>> monomial_exponents(int order);
std::size_t monomial_count(int order);

class PolyModel {
 public:
  PolyModel() = default;
  PolyModel(int order, Eigen::VectorXd weights, double ridge_lambda, Standardizer standardizer);

  bool fitted() const noexcept { return order_ > 0; }
  int order() const noexcept { return order_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double ridge_lambda() const noexcept { return lambda_; }
  const Standardizer& standardizer() const noexcept { return standardizer_; }

  double predict(double theta, double leg, double dist) const;

  /// Monomial features of standardised inputs, one row per sample.
  Eigen::MatrixXd design(const Inputs& x) const;

  /// For order 1: intercept and slopes on the raw (unstandardised) inputs.
  std::array<double, 4> raw_linear_coefficients() const;

 private:
  int order_ = 0;
  Eigen::VectorXd weights_;
  double lambda_ = 0.0;
  Standardizer standardizer_;
};

struct GpHyper {
  double amplitude = 1.0;                  // Matern variance sigma^2
  std::vector<double> length_scales{1.0};  // one shared, or one per input
  double linear_offset = 1.0;              // sigma_b^2
  double linear_slope = 1.0;               // sigma_v^2
  double noise = 1e-2;                     // observation-noise variance

  std::string describe() const;
};

/// Matern nu = 5/2: s2 * (1 + sqrt5*r/ls + 5r^2/(3ls^2)) * exp(-sqrt5*r/ls).
double matern52(double r, double amplitude, double length_scale = 1.0) noexcept;

class GpModel {
 public:
  GpModel() = default;
  GpModel(GpHyper hyper, Standardizer standardizer, Eigen::MatrixXd train_inputs, Eigen::VectorXd dual);

  /// Fits with fixed hyperparameters. Zero prior mean. Throws Fit when the
  /// kernel matrix plus noise is not numerically positive definite.
  static GpModel fit_fixed(const Inputs& x, const Eigen::VectorXd& y, const GpHyper& hyper);

  bool fitted() const noexcept { return train_.rows() > 0; }
  const GpHyper& hyper() const noexcept { return hyper_; }
  const Standardizer& standardizer() const noexcept { return standardizer_; }
  /// Standardised training inputs, one row per point.
  const Eigen::MatrixXd& train_inputs() const noexcept { return train_; }
  const Eigen::VectorXd& dual_coefficients() const noexcept { return dual_; }

  /// k(a, b) on standardised inputs: Matern-5/2 plus linear.
  double kernel(const Eigen::Vector3d& za, const Eigen::Vector3d& zb) const noexcept;
  double predict(double theta, double leg, double dist) const;

 private:
  GpHyper hyper_;
  Standardizer standardizer_;
  Eigen::MatrixXd train_;
  Eigen::VectorXd dual_;
};

/// Closed-form stand-in (fixtures, latent fields). Not serialisable.
struct AnalyticModel {
  std::function<double(double theta, double leg, double dist)> fn;
  std::string name = "analytic";
};

using FactorModel = std::variant<PolyModel, GpModel, AnalyticModel>;

double predict(const FactorModel& m, double theta, double leg, double dist);
std::string_view family(const FactorModel& m) noexcept;

struct ModelMetadata {
  std::uint64_t seed = 0;
  std::string data_hash;
  std::vector<std::pair<std::string, double>> scores;  // e.g. {"bias.cv_mse", 0.01}
};

inline constexpr double kDefaultSigmaFloor = 1e-3;

/// Three regressors b = f(.), sigma_x = g(.), sigma_y = h(.).
struct CognitiveModel {
  FactorModel bias;
  FactorModel sigma_x;
  FactorModel sigma_y;
  double sigma_floor = kDefaultSigmaFloor;
  ModelMetadata metadata;

  struct Prediction {
    double bias = 0.0;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
  };
  /// Point predictions with sigma clamped at sigma_floor.
  Prediction predict(double theta, double leg, double dist) const;

  const FactorModel& get(Factor f) const;
  FactorModel& get(Factor f);
};

// Cross-validation plumbing. All randomness is a pure function of the seed.

/// Fold index in [0, folds) for each of n samples (balanced, shuffled).
std::vector<int> kfold_assignment(std::size_t n, int folds, std::uint64_t seed);

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
HoldoutSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed);

FitData subset(const FitData& d, std::span<const std::size_t> rows);

struct CvScore {
  std::string candidate;  // e.g. "order=2;lambda=0.01"
  int fold = 0;
  double mse = 0.0;
};

struct PolyFit {
  PolyModel model;
  double cv_mse = 0.0;
  std::vector<CvScore> cv;
};

/// Ridge regression over the full monomial basis; the intercept is not
/// penalised and lambda is chosen by k-fold CV MSE. Requires at least twice
/// as many points as monomials and a full-rank design.
PolyFit fit_poly(const FitData& data, int order, std::span<const double> lambda_grid, int folds = 5,
                 std::uint64_t seed = 0);

struct GpGrid {
  std::vector<double> amplitudes{0.25, 1.0, 4.0};
  std::vector<double> length_scales{0.5, 1.0, 2.0, 4.0};
  std::vector<double> linear_offsets{1.0};
  std::vector<double> linear_slopes{1.0};
  std::vector<double> noises{1e-6, 1e-4, 1e-2, 1e-1};
  bool per_dimension = false;

  std::vector<GpHyper> candidates() const;
};

struct GpFit {
  GpModel model;
  double cv_mse = 0.0;
  std::vector<CvScore> cv;
};

/// Grid search over `grid` by mean k-fold validation MSE, then refits on all
/// of `data`. Candidates that are numerically indefinite in any fold are
/// skipped; Fit is thrown when none survive.
GpFit fit_gp(const FitData& data, const GpGrid& grid, int folds = 5, std::uint64_t seed = 0);

// Metrics.
double mse(std::span<const double> y_true, std::span<const double> y_pred);
double r_squared(std::span<const double> y_true, std::span<const double> y_pred);
/// 1 - (1 - R^2)(n - 1)/(n - p - 1); requires n > p + 1.
double adjusted_r2(std::span<const double> y_true, std::span<const double> y_pred, std::size_t n_features);
double adjusted_r2_from(double r2, std::size_t n, std::size_t n_features);

std::vector<double> predict_all(const FactorModel& m, const Inputs& x);

// Model files: versioned JSON.
inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const CognitiveModel& m);
CognitiveModel model_from_json(const std::string& text);
void save_model(const CognitiveModel& m, const std::string& path);
CognitiveModel load_model(const std::string& path);

inline constexpr const char* kCvReportHeader = "target,family,order_or_hyper,fold,mse";
inline constexpr const char* kMetricsHeader = "target,family,order_or_hyper,cv_mse,test_mse,test_adj_r2";

enum class ModelFamily { Gp, Poly };

struct FitOptions {
  std::vector<int> poly_orders{1, 2, 3};
  std::vector<double> lambda_grid{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  GpGrid gp_grid;
  int folds = 5;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  double sigma_floor = kDefaultSigmaFloor;
  ModelFamily family = ModelFamily::Gp;  // family used for the returned model
};

struct CvRow {
  Factor target = Factor::Bias;
  std::string family;
  CvScore score;
};

struct MetricRow {
  Factor target = Factor::Bias;
  std::string family;
  std::string label;  // order or hyperparameters
  double cv_mse = 0.0;
  double test_mse = 0.0;
  double test_adj_r2 = 0.0;  // NaN for GP (no explanatory-variable count)
};

struct FitReport {
  CognitiveModel model;
  HoldoutSplit split;
  std::vector<CvRow> cv;
  std::vector<MetricRow> metrics;
};

/// Holds out test_fraction of the conditions, fits every polynomial order and
/// the GP on the rest with k-fold CV, scores all of them on the held-out part
/// and assembles the requested family (best CV order for polynomials).
FitReport fit_cognitive_model(std::span<const CognitiveFactors> factors, const FitOptions& options);

std::string cv_report_to_csv(std::span<const CvRow> rows);
std::string metrics_to_csv(std::span<const MetricRow> rows);

}  // namespace optwedge
