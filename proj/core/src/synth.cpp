#include "optwedge/synth.hpp"

#include <cmath>
#include <filesystem>
#include <random>

#include <json.hpp>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::string subject_id(int participant, int rep) {
  std::string id = "P";
  if (participant + 1 < 10) id += '0';
  id += std::to_string(participant + 1);
  return id + '#' + std::to_string(rep);
}

std::string participant_id(int participant) {
  std::string id = "P";
  if (participant + 1 < 10) id += '0';
  return id + std::to_string(participant + 1);
}

// Draw from the latent distribution; with probability rate, replace by a
// uniform point in a box around the mean. Reports whether it was replaced.
Point2 draw(const LatentField& f, const WedgeParams& p, const ObserverConfig& cfg, std::mt19937_64& rng,
            bool& injected) {
  const double mean_x = p.vertex_dist + f.bias(p.theta, p.leg, p.vertex_dist);
  std::normal_distribution<double> nx(mean_x, f.sigma_x(p.theta, p.leg, p.vertex_dist));
  std::normal_distribution<double> ny(0.0, f.sigma_y(p.theta, p.leg, p.vertex_dist));
  Point2 pt{nx(rng), ny(rng)};
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  injected = coin(rng) < cfg.outlier_rate;
  if (injected) {
    std::uniform_real_distribution<double> box(-cfg.outlier_box, cfg.outlier_box);
    pt = {mean_x + box(rng), box(rng)};
  }
  return pt;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
  }
}

}  // namespace

double LatentField::bias(double, double, double dist) const noexcept { return bias_slope * dist + bias_offset; }

double LatentField::sigma_x(double theta, double, double dist) const noexcept {
  return sx_base + sx_gain * (1.0 - theta / kPi) * dist;
}

double LatentField::sigma_y(double theta, double leg, double) const noexcept {
  return sy_base + sy_gain * (theta / kPi) * leg;
}

void LatentField::validate() const {
  const bool ok = sx_base > 0.0 && sy_base > 0.0 && sx_gain >= 0.0 && sy_gain >= 0.0 && std::isfinite(bias_slope) &&
                  std::isfinite(bias_offset);
  if (!ok) throw Error(ErrorKind::Validation, "latent field needs positive sigma bases and non-negative gains");
}

CognitiveModel LatentField::as_model(double sigma_floor) const {
  validate();
  const LatentField f = *this;
  CognitiveModel m;
  m.bias = AnalyticModel{[f](double t, double l, double d) { return f.bias(t, l, d); }, "latent.bias"};
  m.sigma_x = AnalyticModel{[f](double t, double l, double d) { return f.sigma_x(t, l, d); }, "latent.sigma_x"};
  m.sigma_y = AnalyticModel{[f](double t, double l, double d) { return f.sigma_y(t, l, d); }, "latent.sigma_y"};
  m.sigma_floor = sigma_floor;
  return m;
}

std::vector<CognitiveFactors> LatentField::exact_factors(const ParamGrid& grid) const {
  std::vector<CognitiveFactors> out;
  for (const auto& c : enumerate_grid(grid).cells) {
    if (!c.valid) continue;
    const auto& p = c.params;
    out.push_back({p, bias(p.theta, p.leg, p.vertex_dist), sigma_x(p.theta, p.leg, p.vertex_dist),
                   sigma_y(p.theta, p.leg, p.vertex_dist), 0, 0});
  }
  return out;
}

LatentField LatentField::from_json(const std::string& text) {
  LatentField f;
  try {
    const auto j = nlohmann::json::parse(text);
    f.bias_slope = j.value("bias_slope", f.bias_slope);
    f.bias_offset = j.value("bias_offset", f.bias_offset);
    f.sx_base = j.value("sx_base", f.sx_base);
    f.sx_gain = j.value("sx_gain", f.sx_gain);
    f.sy_base = j.value("sy_base", f.sy_base);
    f.sy_gain = j.value("sy_gain", f.sy_gain);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("latent field json: ") + e.what());
  }
  f.validate();
  return f;
}

std::string LatentField::to_json() const {
  const nlohmann::json j = {{"bias_slope", bias_slope}, {"bias_offset", bias_offset}, {"sx_base", sx_base},
                            {"sx_gain", sx_gain},       {"sy_base", sy_base},         {"sy_gain", sy_gain}};
  return j.dump(2) + "\n";
}

void ObserverConfig::validate() const {
  if (participants < 1 || repetitions < 1) throw Error(ErrorKind::Validation, "participants and repetitions must be >= 1");
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) throw Error(ErrorKind::Validation, "outlier rate must lie in [0, 1)");
  if (!(outlier_box > 0.0)) throw Error(ErrorKind::Validation, "outlier box must be positive");
}

SyntheticTrials sample_trials_labeled(const LatentField& field, const ParamGrid& grid, const ObserverConfig& cfg) {
  field.validate();
  cfg.validate();
  SyntheticTrials out;
  const auto cells = enumerate_grid(grid).cells;
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    if (!cells[idx].valid) continue;
    auto rng = make_rng(cfg.seed, idx);
    for (int p = 0; p < cfg.participants; ++p) {
      for (int r = 0; r < cfg.repetitions; ++r) {
        bool injected = false;
        const auto pt = draw(field, cells[idx].params, cfg, rng, injected);
        out.trials.push_back({participant_id(p), cells[idx].params, pt.x, pt.y, r});
        out.injected.push_back(injected);
      }
    }
  }
  return out;
}

std::vector<TrialRecord> sample_trials(const LatentField& field, const ParamGrid& grid, const ObserverConfig& cfg) {
  return sample_trials_labeled(field, grid, cfg).trials;
}

std::vector<Point2> sample_estimates(const LatentField& field, const WedgeParams& params, const ObserverConfig& cfg,
                                     std::uint64_t stream) {
  field.validate();
  cfg.validate();
  require_valid(params);
  auto rng = make_rng(cfg.seed, stream);
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(cfg.participants * cfg.repetitions));
  for (int p = 0; p < cfg.participants; ++p) {
    for (int r = 0; r < cfg.repetitions; ++r) {
      bool injected = false;
      out.push_back(draw(field, params, cfg, rng, injected));
    }
  }
  return out;
}

std::vector<ConditionEstimates> simulate_conditions(const LatentField& field,
                                                    const std::vector<DistanceResult>& results,
                                                    const ObserverConfig& cfg) {
  std::vector<std::string> subjects;
  for (int p = 0; p < cfg.participants; ++p) {
    for (int r = 0; r < cfg.repetitions; ++r) subjects.push_back(subject_id(p, r));
  }
  std::vector<ConditionEstimates> out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& d = results[i];
    const std::pair<Mode, const OptimizationResult*> variants[] = {
        {Mode::VW, &d.vw}, {Mode::UOW, &d.uow}, {Mode::BOW, &d.bow}};
    for (std::size_t v = 0; v < 3; ++v) {
      ConditionEstimates c;
      c.d_poi = d.d_poi;
      c.variant = std::string(to_string(variants[v].first));
      c.subjects = subjects;
      c.estimates = sample_estimates(field, variants[v].second->params, cfg, 3 * i + v);
      out.push_back(std::move(c));
    }
  }
  return out;
}

RoundtripReport pipeline_roundtrip(const LatentField& field, const ParamGrid& grid, const ObserverConfig& cfg,
                                   const RoundtripOptions& options) {
  RoundtripReport rep;
  rep.trials = stage("simulate", [&] { return sample_trials_labeled(field, grid, cfg); });
  rep.factors = stage("extract", [&] {
    return extract_all(rep.trials.trials, options.outlier_alpha,
                       [&](const std::string& w) { rep.warnings.push_back(w); });
  });
  rep.fit = stage("fit", [&] { return fit_cognitive_model(rep.factors, options.fit); });

  stage("recovery", [&] {
    for (Factor target : {Factor::Bias, Factor::SigmaX, Factor::SigmaY}) {
      std::vector<double> truth, observed, pred;
      for (std::size_t idx : rep.fit.split.test) {
        const auto& c = rep.factors[idx];
        const auto& p = c.params;
        truth.push_back(target == Factor::Bias     ? field.bias(p.theta, p.leg, p.vertex_dist)
                        : target == Factor::SigmaX ? field.sigma_x(p.theta, p.leg, p.vertex_dist)
                                                   : field.sigma_y(p.theta, p.leg, p.vertex_dist));
        observed.push_back(target == Factor::Bias ? c.bias : target == Factor::SigmaX ? c.sigma_x : c.sigma_y);
        pred.push_back(predict(rep.fit.model.get(target), p.theta, p.leg, p.vertex_dist));
      }
      if (!pred.empty()) rep.recovery.push_back({target, mse(truth, pred), mse(observed, pred)});
    }
    return 0;
  });

  const CostContext ctx{&rep.fit.model, 1.0, options.eps2_x, options.eps2_y};
  rep.results = stage("optimize", [&] { return optimize_all(ctx, options.d_pois, options.constraints); });

  if (options.agreement_resolution >= 2) {
    stage("agreement", [&] {
      for (const auto& r : rep.results) {
        CostContext c = ctx;
        c.d_poi = r.d_poi;
        const auto land = grid_landscape(c, options.constraints, options.agreement_resolution);
        const double grid_min =
            land.argmin ? land.cells[*land.argmin].cost : std::numeric_limits<double>::quiet_NaN();
        rep.agreement.push_back({r.d_poi, r.uow.objective, grid_min});
      }
      return 0;
    });
  }

  rep.evaluation = stage("evaluate", [&] {
    const auto conds = simulate_conditions(field, rep.results, options.evaluation);
    return evaluate_conditions(conds, options.bonferroni_m);
  });
  return rep;
}

std::vector<std::pair<std::string, std::string>> RoundtripReport::files() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("trials.csv", trials_to_csv(trials.trials));
  out.emplace_back("factors.csv", factors_to_csv(factors));
  out.emplace_back("cv_report.csv", cv_report_to_csv(fit.cv));
  out.emplace_back("model_metrics.csv", metrics_to_csv(fit.metrics));
  out.emplace_back("model.json", model_to_json(fit.model));

  std::string rec = "target,test_mse_vs_truth,test_mse_vs_observed\n";
  for (const auto& r : recovery) {
    rec += std::string(to_string(r.target)) + ',' + csv::format_double(r.test_mse_vs_truth) + ',' +
           csv::format_double(r.test_mse_vs_observed) + '\n';
  }
  out.emplace_back("recovery.csv", rec);
  out.emplace_back("results.csv", results_to_csv(results, {Mode::VW, Mode::UOW, Mode::BOW}));

  std::string agr = "d_poi,uow_objective_nats,grid_min_nats\n";
  for (const auto& a : agreement) {
    agr += csv::format_double(a.d_poi) + ',' + csv::format_double(a.uow_objective) + ',' +
           csv::format_double(a.grid_min) + '\n';
  }
  out.emplace_back("agreement.csv", agr);
  out.emplace_back("evaluation.csv", evaluation_to_csv(evaluation));
  return out;
}

void write_roundtrip(const RoundtripReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir + "': " + ec.message());
  for (const auto& [name, content] : report.files()) {
    csv::write_file((std::filesystem::path(dir) / name).string(), content);
  }
}

}  // namespace optwedge
