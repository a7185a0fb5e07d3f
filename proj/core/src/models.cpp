#include "optwedge/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge {

namespace {

using nlohmann::json;

constexpr double kSqrt5 = 2.23606797749978969641;

Eigen::Vector3d row3(double theta, double leg, double dist) { return {theta, leg, dist}; }

double monomial(const Eigen::Vector3d& z, const std::array<int, 3>& e) {
  double v = 1.0;
  for (int k = 0; k < 3; ++k) {
    for (int p = 0; p < e[static_cast<std::size_t>(k)]; ++p) v *= z[k];
  }
  return v;
}

Eigen::MatrixXd design_matrix(const Inputs& x, const Standardizer& s, int order) {
  const auto exps = monomial_exponents(order);
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(exps.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::Vector3d z = s.apply(x.row(i).transpose());
    for (std::size_t j = 0; j < exps.size(); ++j) out(i, static_cast<Eigen::Index>(j)) = monomial(z, exps[j]);
  }
  return out;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  const Eigen::Index n = x.rows(), m = x.cols();
  if (lambda == 0.0) return x.colPivHouseholderQr().solve(y);
  // Augmented least squares [X; sqrt(l) D] w = [y; 0], D skipping the intercept.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + m - 1, m);
  a.topRows(n) = x;
  const double s = std::sqrt(lambda);
  for (Eigen::Index j = 1; j < m; ++j) a(n + j - 1, j) = s;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + m - 1);
  b.head(n) = y;
  return a.colPivHouseholderQr().solve(b);
}

void check_hyper(const GpHyper& h) {
  const bool ok = h.amplitude >= 0.0 && h.noise > 0.0 && h.linear_offset >= 0.0 && h.linear_slope >= 0.0 &&
                  (h.length_scales.size() == 1 || h.length_scales.size() == 3) &&
                  std::all_of(h.length_scales.begin(), h.length_scales.end(), [](double l) { return l > 0.0; });
  if (!ok) throw Error(ErrorKind::Validation, "invalid GP hyperparameters " + h.describe());
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string lambda_label(int order, double lambda) {
  return "order=" + std::to_string(order) + ";lambda=" + csv::format_double(lambda);
}

// Serialisation helpers.
json standardizer_json(const Standardizer& s) {
  return {{"mean", {s.mean[0], s.mean[1], s.mean[2]}}, {"scale", {s.scale[0], s.scale[1], s.scale[2]}}};
}

Standardizer standardizer_from(const json& j) {
  Standardizer s;
  for (int k = 0; k < 3; ++k) {
    s.mean[k] = j.at("mean").at(static_cast<std::size_t>(k)).get<double>();
    s.scale[k] = j.at("scale").at(static_cast<std::size_t>(k)).get<double>();
  }
  return s;
}

json factor_json(const FactorModel& m) {
  if (const auto* p = std::get_if<PolyModel>(&m)) {
    if (!p->fitted()) throw Error(ErrorKind::State, "cannot save an unfitted polynomial model");
    return {{"family", "poly"},
            {"order", p->order()},
            {"ridge_lambda", p->ridge_lambda()},
            {"standardization", standardizer_json(p->standardizer())},
            {"weights", to_vec(p->weights())}};
  }
  if (const auto* g = std::get_if<GpModel>(&m)) {
    if (!g->fitted()) throw Error(ErrorKind::State, "cannot save an unfitted GP model");
    const auto& h = g->hyper();
    json inputs = json::array();
    for (Eigen::Index i = 0; i < g->train_inputs().rows(); ++i) {
      inputs.push_back({g->train_inputs()(i, 0), g->train_inputs()(i, 1), g->train_inputs()(i, 2)});
    }
    return {{"family", "gp"},
            {"hyper",
             {{"amplitude", h.amplitude},
              {"length_scales", h.length_scales},
              {"linear_offset", h.linear_offset},
              {"linear_slope", h.linear_slope},
              {"noise", h.noise}}},
            {"standardization", standardizer_json(g->standardizer())},
            {"train_inputs", inputs},
            {"dual_coefficients", to_vec(g->dual_coefficients())}};
  }
  throw Error(ErrorKind::Validation, "analytic models cannot be serialised");
}

FactorModel factor_from(const json& j) {
  const auto fam = j.at("family").get<std::string>();
  if (fam == "poly") {
    const auto w = j.at("weights").get<std::vector<double>>();
    return PolyModel(j.at("order").get<int>(), Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                     j.at("ridge_lambda").get<double>(), standardizer_from(j.at("standardization")));
  }
  if (fam == "gp") {
    const auto& hj = j.at("hyper");
    GpHyper h;
    h.amplitude = hj.at("amplitude").get<double>();
    h.length_scales = hj.at("length_scales").get<std::vector<double>>();
    h.linear_offset = hj.at("linear_offset").get<double>();
    h.linear_slope = hj.at("linear_slope").get<double>();
    h.noise = hj.at("noise").get<double>();
    const auto& in = j.at("train_inputs");
    Eigen::MatrixXd train(static_cast<Eigen::Index>(in.size()), 3);
    for (std::size_t i = 0; i < in.size(); ++i) {
      for (std::size_t k = 0; k < 3; ++k) train(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = in.at(i).at(k).get<double>();
    }
    const auto dual = j.at("dual_coefficients").get<std::vector<double>>();
    return GpModel(h, standardizer_from(j.at("standardization")), std::move(train),
                   Eigen::Map<const Eigen::VectorXd>(dual.data(), static_cast<Eigen::Index>(dual.size())));
  }
  throw Error(ErrorKind::Parse, "unknown model family '" + fam + "'");
}

}  // namespace

std::string_view to_string(Factor f) noexcept {
  switch (f) {
    case Factor::Bias: return "bias";
    case Factor::SigmaX: return "sigma_x";
    case Factor::SigmaY: return "sigma_y";
  }
  return "?";
}

Factor factor_from_string(std::string_view s) {
  if (s == "bias" || s == "b") return Factor::Bias;
  if (s == "sigma_x" || s == "sx") return Factor::SigmaX;
  if (s == "sigma_y" || s == "sy") return Factor::SigmaY;
  throw Error(ErrorKind::Validation, "unknown factor '" + std::string(s) + "'");
}

FitData make_fit_data(std::span<const CognitiveFactors> factors, Factor target) {
  FitData d;
  d.x.resize(static_cast<Eigen::Index>(factors.size()), 3);
  d.y.resize(static_cast<Eigen::Index>(factors.size()));
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& c = factors[i];
    const auto r = static_cast<Eigen::Index>(i);
    d.x.row(r) << c.params.theta, c.params.leg, c.params.vertex_dist;
    d.y[r] = target == Factor::Bias ? c.bias : target == Factor::SigmaX ? c.sigma_x : c.sigma_y;
  }
  return d;
}

Standardizer Standardizer::fit(const Inputs& x) {
  Standardizer s;
  if (x.rows() == 0) return s;
  s.mean = x.colwise().mean().transpose();
  for (int k = 0; k < 3; ++k) {
    const double var = (x.col(k).array() - s.mean[k]).square().sum() / static_cast<double>(x.rows());
    s.scale[k] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

std::vector<std::array<int, 3>> monomial_exponents(int order) {
  if (order < 0) throw Error(ErrorKind::Domain, "negative polynomial order");
  std::vector<std::array<int, 3>> out;
  for (int deg = 0; deg <= order; ++deg) {
    for (int a = deg; a >= 0; --a) {
      for (int b = deg - a; b >= 0; --b) out.push_back({a, b, deg - a - b});
    }
  }
  return out;
}

std::size_t monomial_count(int order) {
  const auto n = static_cast<std::size_t>(order);
  return (n + 1) * (n + 2) * (n + 3) / 6;
}

PolyModel::PolyModel(int order, Eigen::VectorXd weights, double ridge_lambda, Standardizer standardizer)
    : order_(order), weights_(std::move(weights)), lambda_(ridge_lambda), standardizer_(standardizer) {
  if (order < 1 || order > 3) throw Error(ErrorKind::Validation, "polynomial order must be 1, 2 or 3");
  if (static_cast<std::size_t>(weights_.size()) != monomial_count(order)) {
    throw Error(ErrorKind::Validation, "weight count does not match the monomial basis");
  }
  if (!(ridge_lambda >= 0.0)) throw Error(ErrorKind::Validation, "ridge lambda must be >= 0");
}

double PolyModel::predict(double theta, double leg, double dist) const {
  if (!fitted()) throw Error(ErrorKind::State, "polynomial model is not fitted");
  const Eigen::Vector3d z = standardizer_.apply(row3(theta, leg, dist));
  const auto exps = monomial_exponents(order_);
  double v = 0.0;
  for (std::size_t j = 0; j < exps.size(); ++j) v += weights_[static_cast<Eigen::Index>(j)] * monomial(z, exps[j]);
  return v;
}

Eigen::MatrixXd PolyModel::design(const Inputs& x) const {
  if (!fitted()) throw Error(ErrorKind::State, "polynomial model is not fitted");
  return design_matrix(x, standardizer_, order_);
}

std::array<double, 4> PolyModel::raw_linear_coefficients() const {
  if (order_ != 1) throw Error(ErrorKind::State, "raw linear coefficients need an order-1 model");
  std::array<double, 4> c{weights_[0], 0.0, 0.0, 0.0};
  // basis order for degree 1 is (1,0,0), (0,1,0), (0,0,1)
  for (int k = 0; k < 3; ++k) {
    const double slope = weights_[k + 1] / standardizer_.scale[k];
    c[static_cast<std::size_t>(k + 1)] = slope;
    c[0] -= slope * standardizer_.mean[k];
  }
  return c;
}

std::string GpHyper::describe() const {
  std::ostringstream ss;
  ss << "amp=" << csv::format_double(amplitude) << ";ls=";
  for (std::size_t i = 0; i < length_scales.size(); ++i) {
    if (i) ss << '/';
    ss << csv::format_double(length_scales[i]);
  }
  ss << ";lin_off=" << csv::format_double(linear_offset) << ";lin_slope=" << csv::format_double(linear_slope)
     << ";noise=" << csv::format_double(noise);
  return ss.str();
}

double matern52(double r, double amplitude, double length_scale) noexcept {
  const double s = kSqrt5 * r / length_scale;
  return amplitude * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

GpModel::GpModel(GpHyper hyper, Standardizer standardizer, Eigen::MatrixXd train_inputs, Eigen::VectorXd dual)
    : hyper_(std::move(hyper)), standardizer_(standardizer), train_(std::move(train_inputs)), dual_(std::move(dual)) {
  check_hyper(hyper_);
  if (train_.cols() != 3 || train_.rows() != dual_.size()) {
    throw Error(ErrorKind::Validation, "GP training inputs and dual coefficients disagree in size");
  }
}

double GpModel::kernel(const Eigen::Vector3d& za, const Eigen::Vector3d& zb) const noexcept {
  double r2 = 0.0;
  if (hyper_.length_scales.size() == 1) {
    r2 = (za - zb).squaredNorm() / (hyper_.length_scales[0] * hyper_.length_scales[0]);
  } else {
    for (int k = 0; k < 3; ++k) {
      const double t = (za[k] - zb[k]) / hyper_.length_scales[static_cast<std::size_t>(k)];
      r2 += t * t;
    }
  }
  return matern52(std::sqrt(r2), hyper_.amplitude) + hyper_.linear_offset + hyper_.linear_slope * za.dot(zb);
}

GpModel GpModel::fit_fixed(const Inputs& x, const Eigen::VectorXd& y, const GpHyper& hyper) {
  check_hyper(hyper);
  if (x.rows() == 0) throw Error(ErrorKind::InsufficientData, "GP fit needs at least one training point");
  GpModel m;
  m.hyper_ = hyper;
  m.standardizer_ = Standardizer::fit(x);
  const Eigen::Index n = x.rows();
  m.train_.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) m.train_.row(i) = m.standardizer_.apply(x.row(i).transpose()).transpose();

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d zi = m.train_.row(i).transpose();
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = m.kernel(zi, m.train_.row(j).transpose());
      k(i, j) = v;
      k(j, i) = v;
    }
    k(i, i) += hyper.noise;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Fit, "kernel matrix is not positive definite for " + hyper.describe());
  }
  m.dual_ = llt.solve(y);
  if (!m.dual_.allFinite()) throw Error(ErrorKind::Fit, "non-finite GP dual coefficients for " + hyper.describe());
  return m;
}

double GpModel::predict(double theta, double leg, double dist) const {
  if (!fitted()) throw Error(ErrorKind::State, "GP model has no training points");
  const Eigen::Vector3d z = standardizer_.apply(row3(theta, leg, dist));
  double v = 0.0;
  for (Eigen::Index i = 0; i < train_.rows(); ++i) v += dual_[i] * kernel(z, train_.row(i).transpose());
  return v;
}

double predict(const FactorModel& m, double theta, double leg, double dist) {
  return std::visit(
      [&](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, AnalyticModel>) {
          if (!model.fn) throw Error(ErrorKind::State, "analytic model has no function");
          return model.fn(theta, leg, dist);
        } else {
          return model.predict(theta, leg, dist);
        }
      },
      m);
}

std::string_view family(const FactorModel& m) noexcept {
  switch (m.index()) {
    case 0: return "poly";
    case 1: return "gp";
    default: return "analytic";
  }
}

CognitiveModel::Prediction CognitiveModel::predict(double theta, double leg, double dist) const {
  Prediction p;
  p.bias = optwedge::predict(bias, theta, leg, dist);
  p.sigma_x = std::max(sigma_floor, optwedge::predict(sigma_x, theta, leg, dist));
  p.sigma_y = std::max(sigma_floor, optwedge::predict(sigma_y, theta, leg, dist));
  return p;
}

const FactorModel& CognitiveModel::get(Factor f) const {
  return f == Factor::Bias ? bias : f == Factor::SigmaX ? sigma_x : sigma_y;
}

FactorModel& CognitiveModel::get(Factor f) { return f == Factor::Bias ? bias : f == Factor::SigmaX ? sigma_x : sigma_y; }

namespace {

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates: std::shuffle's draw sequence is library-defined.
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

std::vector<int> kfold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::Domain, "need at least 2 folds");
  if (n < static_cast<std::size_t>(folds)) throw Error(ErrorKind::InsufficientData, "fewer samples than folds");
  const auto perm = permutation(n, seed);
  std::vector<int> out(n);
  for (std::size_t k = 0; k < n; ++k) out[perm[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  return out;
}

HoldoutSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw Error(ErrorKind::Domain, "test fraction must be in [0, 1)");
  const auto perm = permutation(n, seed);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  HoldoutSplit s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

FitData subset(const FitData& d, std::span<const std::size_t> rows) {
  FitData out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), 3);
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = d.x.row(static_cast<Eigen::Index>(rows[i]));
    out.y[static_cast<Eigen::Index>(i)] = d.y[static_cast<Eigen::Index>(rows[i])];
  }
  return out;
}

namespace {

struct FoldSplit {
  std::vector<std::size_t> train, valid;
};

std::vector<FoldSplit> make_folds(std::size_t n, int folds, std::uint64_t seed) {
  const auto assign = kfold_assignment(n, folds, seed);
  std::vector<FoldSplit> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < folds; ++f) {
      (assign[i] == f ? out[static_cast<std::size_t>(f)].valid : out[static_cast<std::size_t>(f)].train).push_back(i);
    }
  }
  return out;
}

PolyModel fit_poly_fixed(const FitData& d, int order, double lambda) {
  const auto s = Standardizer::fit(d.x);
  const auto x = design_matrix(d.x, s, order);
  return PolyModel(order, ridge_solve(x, d.y, lambda), lambda, s);
}

}  // namespace

PolyFit fit_poly(const FitData& data, int order, std::span<const double> lambda_grid, int folds, std::uint64_t seed) {
  if (order < 1 || order > 3) throw Error(ErrorKind::Domain, "polynomial order must be 1, 2 or 3");
  if (lambda_grid.empty()) throw Error(ErrorKind::Domain, "empty lambda grid");
  for (double l : lambda_grid) {
    if (!(l >= 0.0)) throw Error(ErrorKind::Domain, "ridge lambda must be >= 0");
  }
  const auto n = static_cast<std::size_t>(data.x.rows());
  const auto m = monomial_count(order);
  if (n < 2 * m) {
    throw Error(ErrorKind::Fit, "order-" + std::to_string(order) + " fit needs at least " + std::to_string(2 * m) +
                                    " points, got " + std::to_string(n));
  }
  {
    const auto s = Standardizer::fit(data.x);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design_matrix(data.x, s, order));
    if (static_cast<std::size_t>(qr.rank()) < m) throw Error(ErrorKind::Fit, "design matrix is rank deficient");
  }

  PolyFit out;
  double best = std::numeric_limits<double>::infinity();
  double best_lambda = lambda_grid.front();
  const auto splits = make_folds(n, folds, seed);
  for (double lambda : lambda_grid) {
    double total = 0.0;
    for (std::size_t f = 0; f < splits.size(); ++f) {
      const auto model = fit_poly_fixed(subset(data, splits[f].train), order, lambda);
      const auto valid = subset(data, splits[f].valid);
      const auto pred = predict_all(model, valid.x);
      const double e = mse(std::span<const double>(valid.y.data(), static_cast<std::size_t>(valid.y.size())), pred);
      out.cv.push_back({lambda_label(order, lambda), static_cast<int>(f), e});
      total += e;
    }
    const double mean = total / static_cast<double>(splits.size());
    if (mean < best) {
      best = mean;
      best_lambda = lambda;
    }
  }
  out.model = fit_poly_fixed(data, order, best_lambda);
  out.cv_mse = best;
  return out;
}

std::vector<GpHyper> GpGrid::candidates() const {
  std::vector<std::vector<double>> ls_sets;
  if (per_dimension) {
    for (double a : length_scales)
      for (double b : length_scales)
        for (double c : length_scales) ls_sets.push_back({a, b, c});
  } else {
    for (double a : length_scales) ls_sets.push_back({a});
  }
  std::vector<GpHyper> out;
  for (double amp : amplitudes)
    for (const auto& ls : ls_sets)
      for (double off : linear_offsets)
        for (double slope : linear_slopes)
          for (double noise : noises) out.push_back({amp, ls, off, slope, noise});
  return out;
}

GpFit fit_gp(const FitData& data, const GpGrid& grid, int folds, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.x.rows());
  if (n < 10) throw Error(ErrorKind::InsufficientData, "GP fit needs at least 10 points, got " + std::to_string(n));
  const auto cands = grid.candidates();
  if (cands.empty()) throw Error(ErrorKind::Domain, "empty GP hyperparameter grid");

  const auto splits = make_folds(n, folds, seed);
  std::vector<FitData> train_sets, valid_sets;
  for (const auto& s : splits) {
    train_sets.push_back(subset(data, s.train));
    valid_sets.push_back(subset(data, s.valid));
  }

  GpFit out;
  double best = std::numeric_limits<double>::infinity();
  const GpHyper* best_hyper = nullptr;
  for (const auto& h : cands) {
    std::vector<CvScore> scores;
    double total = 0.0;
    bool ok = true;
    for (std::size_t f = 0; f < splits.size() && ok; ++f) {
      try {
        const auto model = GpModel::fit_fixed(train_sets[f].x, train_sets[f].y, h);
        const auto pred = predict_all(model, valid_sets[f].x);
        const double e = mse(std::span<const double>(valid_sets[f].y.data(), static_cast<std::size_t>(valid_sets[f].y.size())), pred);
        if (!std::isfinite(e)) {
          ok = false;
          break;
        }
        scores.push_back({h.describe(), static_cast<int>(f), e});
        total += e;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Fit) throw;
        ok = false;
      }
    }
    if (!ok) continue;
    out.cv.insert(out.cv.end(), scores.begin(), scores.end());
    const double mean = total / static_cast<double>(splits.size());
    if (mean < best) {
      best = mean;
      best_hyper = &h;
    }
  }
  if (best_hyper == nullptr) throw Error(ErrorKind::Fit, "every GP hyperparameter candidate was numerically indefinite");
  out.model = GpModel::fit_fixed(data.x, data.y, *best_hyper);
  out.cv_mse = best;
  return out;
}

double mse(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) throw Error(ErrorKind::Domain, "mse needs equal, non-empty inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  return s / static_cast<double>(y_true.size());
}

double r_squared(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) throw Error(ErrorKind::Domain, "R^2 needs equal, non-empty inputs");
  const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / static_cast<double>(y_true.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (!(ss_tot > 0.0)) throw Error(ErrorKind::Domain, "R^2 undefined: zero variance in y_true");
  return 1.0 - ss_res / ss_tot;
}

double adjusted_r2_from(double r2, std::size_t n, std::size_t n_features) {
  if (n <= n_features + 1) throw Error(ErrorKind::Domain, "adjusted R^2 needs n > p + 1");
  return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - n_features - 1);
}

double adjusted_r2(std::span<const double> y_true, std::span<const double> y_pred, std::size_t n_features) {
  if (y_true.size() <= n_features + 1) throw Error(ErrorKind::Domain, "adjusted R^2 needs n > p + 1");
  return adjusted_r2_from(r_squared(y_true, y_pred), y_true.size(), n_features);
}

std::vector<double> predict_all(const FactorModel& m, const Inputs& x) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(m, x(i, 0), x(i, 1), x(i, 2));
  return out;
}

std::string model_to_json(const CognitiveModel& m) {
  json scores = json::array();
  for (const auto& [k, v] : m.metadata.scores) scores.push_back({{"name", k}, {"value", v}});
  json j = {{"format", "optwedge-model"},
            {"version", kModelFormatVersion},
            {"sigma_floor", m.sigma_floor},
            {"metadata", {{"seed", m.metadata.seed}, {"data_hash", m.metadata.data_hash}, {"scores", scores}}},
            {"bias", factor_json(m.bias)},
            {"sigma_x", factor_json(m.sigma_x)},
            {"sigma_y", factor_json(m.sigma_y)}};
  return j.dump(1) + "\n";
}

CognitiveModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("model json: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "optwedge-model") throw Error(ErrorKind::Parse, "not an optwedge model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorKind::Version, "model format version " + std::to_string(version) + " is not supported (expected " +
                                          std::to_string(kModelFormatVersion) + ")");
    }
    CognitiveModel m;
    m.sigma_floor = j.at("sigma_floor").get<double>();
    if (!(m.sigma_floor > 0.0)) throw Error(ErrorKind::Validation, "sigma_floor must be positive");
    const auto& meta = j.at("metadata");
    m.metadata.seed = meta.at("seed").get<std::uint64_t>();
    m.metadata.data_hash = meta.at("data_hash").get<std::string>();
    for (const auto& s : meta.at("scores")) m.metadata.scores.emplace_back(s.at("name").get<std::string>(), s.at("value").get<double>());
    m.bias = factor_from(j.at("bias"));
    m.sigma_x = factor_from(j.at("sigma_x"));
    m.sigma_y = factor_from(j.at("sigma_y"));
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("model json: ") + e.what());
  }
}

void save_model(const CognitiveModel& m, const std::string& path) { csv::write_file(path, model_to_json(m)); }

CognitiveModel load_model(const std::string& path) { return model_from_json(csv::read_file(path)); }

FitReport fit_cognitive_model(std::span<const CognitiveFactors> factors, const FitOptions& options) {
  if (options.poly_orders.empty() && options.family == ModelFamily::Poly) {
    throw Error(ErrorKind::Validation, "polynomial family requested without any order");
  }
  FitReport report;
  report.split = holdout_split(factors.size(), options.test_fraction, options.seed);
  report.model.sigma_floor = options.sigma_floor;
  report.model.metadata.seed = options.seed;
  report.model.metadata.data_hash = csv::hex64(csv::fnv1a(factors_to_csv(factors)));

  for (Factor target : {Factor::Bias, Factor::SigmaX, Factor::SigmaY}) {
    const auto all = make_fit_data(factors, target);
    const auto train = subset(all, report.split.train);
    const auto test = subset(all, report.split.test);
    const std::span<const double> y_test(test.y.data(), static_cast<std::size_t>(test.y.size()));

    auto score_test = [&](const FactorModel& m, std::size_t n_features, MetricRow& row) {
      if (test.y.size() == 0) {
        row.test_mse = row.test_adj_r2 = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      const auto pred = predict_all(m, test.x);
      row.test_mse = mse(y_test, pred);
      row.test_adj_r2 = std::numeric_limits<double>::quiet_NaN();
      if (n_features > 0 && y_test.size() > n_features + 1) {
        try {
          row.test_adj_r2 = adjusted_r2(y_test, pred, n_features);
        } catch (const Error&) {
          // zero variance in the held-out targets
        }
      }
    };

    std::optional<PolyFit> best_poly;
    for (int order : options.poly_orders) {
      PolyFit fit;
      try {
        fit = fit_poly(train, order, options.lambda_grid, options.folds, options.seed);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Fit) throw;
        continue;  // too few points for this order
      }
      for (const auto& c : fit.cv) report.cv.push_back({target, "poly", c});
      MetricRow row{target, "poly", lambda_label(order, fit.model.ridge_lambda()), fit.cv_mse, 0.0, 0.0};
      score_test(fit.model, monomial_count(order) - 1, row);
      report.metrics.push_back(row);
      if (!best_poly || fit.cv_mse < best_poly->cv_mse) best_poly = std::move(fit);
    }

    FactorModel chosen;
    if (options.family == ModelFamily::Gp) {
      auto gp = fit_gp(train, options.gp_grid, options.folds, options.seed);
      for (const auto& c : gp.cv) report.cv.push_back({target, "gp", c});
      MetricRow row{target, "gp", gp.model.hyper().describe(), gp.cv_mse, 0.0, 0.0};
      score_test(gp.model, 0, row);
      report.metrics.push_back(row);
      report.model.metadata.scores.emplace_back(std::string(to_string(target)) + ".cv_mse", gp.cv_mse);
      report.model.metadata.scores.emplace_back(std::string(to_string(target)) + ".test_mse", row.test_mse);
      chosen = std::move(gp.model);
    } else {
      if (!best_poly) throw Error(ErrorKind::Fit, "no polynomial order could be fitted");
      report.model.metadata.scores.emplace_back(std::string(to_string(target)) + ".cv_mse", best_poly->cv_mse);
      chosen = std::move(best_poly->model);
    }
    report.model.get(target) = std::move(chosen);
  }
  return report;
}

std::string cv_report_to_csv(std::span<const CvRow> rows) {
  std::string out = std::string(kCvReportHeader) + "\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.target)) + ',' + r.family + ',' + r.score.candidate + ',' +
           std::to_string(r.score.fold) + ',' + csv::format_double(r.score.mse) + '\n';
  }
  return out;
}

std::string metrics_to_csv(std::span<const MetricRow> rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.target)) + ',' + r.family + ',' + r.label + ',' + csv::format_double(r.cv_mse) +
           ',' + csv::format_double(r.test_mse) + ',' + csv::format_double(r.test_adj_r2) + '\n';
  }
  return out;
}

}  // namespace optwedge
