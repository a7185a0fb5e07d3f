#include "run_config.hpp"

#include <cmath>
#include <string_view>

#include <json.hpp>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge::app {

using Json = nlohmann::ordered_json;

namespace {

Json to_json(const RunConfig& c) {
  const auto& o = c.optimizer;
  const auto& f = c.models.fit;
  const auto& g = f.gp_grid;
  const auto& lf = c.synth.field;
  const auto& ob = c.synth.observers;
  return Json{
      {"seed", c.seed},
      {"paths",
       {{"trials", c.paths.trials}, {"factors", c.paths.factors}, {"model", c.paths.model}, {"reports", c.paths.reports}}},
      {"geometry",
       {{"max_width_m", c.geometry.max_width},
        {"max_height_m", c.geometry.max_height},
        {"view_distance_m", c.geometry.view_distance},
        {"grid", {{"theta_deg", c.geometry.theta_deg}, {"leg_m", c.geometry.leg_m}, {"dist_m", c.geometry.dist_m}}}}},
      {"cost", {{"eps2_x_m2", c.cost.eps2_x}, {"eps2_y_m2", c.cost.eps2_y}, {"sigma_floor_m", c.cost.sigma_floor}}},
      {"optimizer",
       {{"mu0", o.mu0},
        {"growth", o.growth},
        {"max_stages", o.max_stages},
        {"max_iterations", o.max_iterations},
        {"margin", o.margin},
        {"feasibility_tol", o.feasibility_tol},
        {"objective_tol", o.objective_tol},
        {"step_tol", o.step_tol},
        {"leg_max_m", o.leg_max},
        {"seed_grid", o.seed_grid},
        {"limit_width", o.limit_width},
        {"limit_height", o.limit_height}}},
      {"models",
       {{"family", c.models.family},
        {"poly_orders", f.poly_orders},
        {"lambda_grid", f.lambda_grid},
        {"folds", f.folds},
        {"test_fraction", f.test_fraction},
        {"gp",
         {{"amplitudes", g.amplitudes},
          {"length_scales", g.length_scales},
          {"linear_offsets", g.linear_offsets},
          {"linear_slopes", g.linear_slopes},
          {"noises", g.noises},
          {"per_dimension", g.per_dimension}}}}},
      {"trials", {{"outlier_alpha", c.outlier_alpha}}},
      {"synth",
       {{"field",
         {{"bias_slope", lf.bias_slope},
          {"bias_offset", lf.bias_offset},
          {"sx_base", lf.sx_base},
          {"sx_gain", lf.sx_gain},
          {"sy_base", lf.sy_base},
          {"sy_gain", lf.sy_gain}}},
        {"participants", ob.participants},
        {"repetitions", ob.repetitions},
        {"outlier_rate", ob.outlier_rate},
        {"outlier_box_m", ob.outlier_box}}},
      {"stats",
       {{"bonferroni_m", c.stats.bonferroni_m},
        {"participants", c.stats.participants},
        {"repetitions", c.stats.repetitions},
        {"wilcoxon", c.stats.wilcoxon}}},
      {"d_poi", c.d_poi},
      {"landscape", {{"resolution", c.landscape_resolution}}},
  };
}

// Overlays `user` on `base`, refusing keys the base does not know.
void overlay(Json& base, const Json& user, const std::string& where) {
  if (!user.is_object()) throw Error(ErrorKind::Parse, "config" + where + ": expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where + "." + key;
    if (!base.contains(key)) throw Error(ErrorKind::Validation, "config: unknown key '" + path.substr(1) + "'");
    auto& slot = base[key];
    if (slot.is_object()) {
      overlay(slot, value, path);
    } else {
      slot = value;
    }
  }
}

RunConfig from_full_json(const Json& j) {
  RunConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();

  const auto& p = j.at("paths");
  c.paths = {p.at("trials").get<std::string>(), p.at("factors").get<std::string>(), p.at("model").get<std::string>(),
             p.at("reports").get<std::string>()};

  const auto& g = j.at("geometry");
  c.geometry.max_width = g.at("max_width_m").get<double>();
  c.geometry.max_height = g.at("max_height_m").get<double>();
  c.geometry.view_distance = g.at("view_distance_m").get<double>();
  c.geometry.theta_deg = g.at("grid").at("theta_deg").get<std::vector<double>>();
  c.geometry.leg_m = g.at("grid").at("leg_m").get<std::vector<double>>();
  c.geometry.dist_m = g.at("grid").at("dist_m").get<std::vector<double>>();

  const auto& k = j.at("cost");
  c.cost = {k.at("eps2_x_m2").get<double>(), k.at("eps2_y_m2").get<double>(), k.at("sigma_floor_m").get<double>()};

  const auto& o = j.at("optimizer");
  auto& cs = c.optimizer;
  cs.mu0 = o.at("mu0").get<double>();
  cs.growth = o.at("growth").get<double>();
  cs.max_stages = o.at("max_stages").get<int>();
  cs.max_iterations = o.at("max_iterations").get<int>();
  cs.margin = o.at("margin").get<double>();
  cs.feasibility_tol = o.at("feasibility_tol").get<double>();
  cs.objective_tol = o.at("objective_tol").get<double>();
  cs.step_tol = o.at("step_tol").get<double>();
  cs.leg_max = o.at("leg_max_m").get<double>();
  cs.seed_grid = o.at("seed_grid").get<int>();
  cs.limit_width = o.at("limit_width").get<bool>();
  cs.limit_height = o.at("limit_height").get<bool>();

  const auto& m = j.at("models");
  c.models.family = m.at("family").get<std::string>();
  auto& f = c.models.fit;
  f.poly_orders = m.at("poly_orders").get<std::vector<int>>();
  f.lambda_grid = m.at("lambda_grid").get<std::vector<double>>();
  f.folds = m.at("folds").get<int>();
  f.test_fraction = m.at("test_fraction").get<double>();
  const auto& gp = m.at("gp");
  f.gp_grid.amplitudes = gp.at("amplitudes").get<std::vector<double>>();
  f.gp_grid.length_scales = gp.at("length_scales").get<std::vector<double>>();
  f.gp_grid.linear_offsets = gp.at("linear_offsets").get<std::vector<double>>();
  f.gp_grid.linear_slopes = gp.at("linear_slopes").get<std::vector<double>>();
  f.gp_grid.noises = gp.at("noises").get<std::vector<double>>();
  f.gp_grid.per_dimension = gp.at("per_dimension").get<bool>();

  c.outlier_alpha = j.at("trials").at("outlier_alpha").get<double>();

  const auto& s = j.at("synth");
  const auto& lf = s.at("field");
  c.synth.field = {lf.at("bias_slope").get<double>(), lf.at("bias_offset").get<double>(),
                   lf.at("sx_base").get<double>(),    lf.at("sx_gain").get<double>(),
                   lf.at("sy_base").get<double>(),    lf.at("sy_gain").get<double>()};
  c.synth.observers.participants = s.at("participants").get<int>();
  c.synth.observers.repetitions = s.at("repetitions").get<int>();
  c.synth.observers.outlier_rate = s.at("outlier_rate").get<double>();
  c.synth.observers.outlier_box = s.at("outlier_box_m").get<double>();

  const auto& st = j.at("stats");
  c.stats = {st.at("bonferroni_m").get<int>(), st.at("participants").get<int>(), st.at("repetitions").get<int>(),
             st.at("wilcoxon").get<std::string>()};

  c.d_poi = j.at("d_poi").get<std::vector<double>>();
  c.landscape_resolution = j.at("landscape").at("resolution").get<int>();
  return c;
}

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw Error(ErrorKind::Validation, std::string("config: ") + key + " " + what);
}

}  // namespace

void RunConfig::validate() const {
  require(geometry.max_width > 0.0, "geometry.max_width_m", "must be positive");
  require(geometry.max_height > 0.0, "geometry.max_height_m", "must be positive");
  require(geometry.view_distance > 0.0, "geometry.view_distance_m", "must be positive");
  require(cost.eps2_x > 0.0 && cost.eps2_y > 0.0, "cost.eps2_*_m2", "must be positive");
  require(cost.sigma_floor > 0.0, "cost.sigma_floor_m", "must be positive");
  require(models.family == "gp" || models.family == "poly", "models.family", "must be \"gp\" or \"poly\"");
  require(!models.fit.poly_orders.empty(), "models.poly_orders", "must not be empty");
  for (int order : models.fit.poly_orders) require(order >= 1 && order <= 3, "models.poly_orders", "entries must be 1..3");
  require(!models.fit.lambda_grid.empty(), "models.lambda_grid", "must not be empty");
  for (double l : models.fit.lambda_grid) require(l >= 0.0, "models.lambda_grid", "entries must be >= 0");
  require(models.fit.folds >= 2, "models.folds", "must be >= 2");
  require(models.fit.test_fraction > 0.0 && models.fit.test_fraction < 1.0, "models.test_fraction", "must lie in (0, 1)");
  for (double n : models.fit.gp_grid.noises) require(n > 0.0, "models.gp.noises", "entries must be positive");
  require(outlier_alpha > 0.0 && outlier_alpha < 1.0, "trials.outlier_alpha", "must lie in (0, 1)");
  require(stats.bonferroni_m >= 1, "stats.bonferroni_m", "must be >= 1");
  require(stats.participants >= 1 && stats.repetitions >= 1, "stats.participants/repetitions", "must be >= 1");
  require(stats.wilcoxon == "auto" || stats.wilcoxon == "exact" || stats.wilcoxon == "normal", "stats.wilcoxon",
          "must be auto, exact or normal");
  require(!d_poi.empty(), "d_poi", "must not be empty");
  for (double d : d_poi) require(d > 0.0 && std::isfinite(d), "d_poi", "entries must be positive");
  require(landscape_resolution >= 2, "landscape.resolution", "must be >= 2");
  grid();
  constraints().validate();
  synth.field.validate();
  observers().validate();
}

ParamGrid RunConfig::grid() const { return ParamGrid::from_degrees(geometry.theta_deg, geometry.leg_m, geometry.dist_m); }

ConstraintSet RunConfig::constraints() const {
  ConstraintSet c = optimizer;
  c.drawable = {geometry.max_width, geometry.max_height};
  return c;
}

FitOptions RunConfig::fit_options() const {
  FitOptions f = models.fit;
  f.seed = seed;
  f.sigma_floor = cost.sigma_floor;
  f.family = models.family == "poly" ? ModelFamily::Poly : ModelFamily::Gp;
  return f;
}

ObserverConfig RunConfig::observers() const {
  ObserverConfig o = synth.observers;
  o.seed = seed;
  return o;
}

ObserverConfig RunConfig::evaluation_observers() const {
  // Separate stream from the modelling observers; no planted outliers.
  return {stats.participants, stats.repetitions, seed + 1, 0.0, synth.observers.outlier_box};
}

WilcoxonPolicy RunConfig::wilcoxon_policy() const {
  if (stats.wilcoxon == "exact") return WilcoxonPolicy::ForceExact;
  if (stats.wilcoxon == "normal") return WilcoxonPolicy::ForceNormal;
  return WilcoxonPolicy::Auto;
}

RunConfig config_from_json(const std::string& text) {
  Json merged = to_json(RunConfig{});
  try {
    overlay(merged, Json::parse(text), "");
    auto c = from_full_json(merged);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) { return config_from_json(csv::read_file(path)); }

std::string config_to_json(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

std::string config_hash(const RunConfig& c) { return csv::hex64(csv::fnv1a(config_to_json(c))); }

std::vector<double> parse_distance_list(const std::string& spec) {
  auto bad = [&] { return Error(ErrorKind::Validation, "bad distance list '" + spec + "' (use 1..11, 1,2,5 or 3)"); };
  std::vector<double> out;
  const auto range = spec.find("..");
  try {
    if (range != std::string::npos) {
      const double lo = csv::parse_double(std::string_view(spec).substr(0, range), 0);
      const double hi = csv::parse_double(std::string_view(spec).substr(range + 2), 0);
      if (!(lo <= hi) || lo != std::floor(lo) || hi != std::floor(hi) || hi - lo > 1e6) throw bad();
      for (double d = lo; d <= hi; d += 1.0) out.push_back(d);
    } else {
      for (auto field : csv::split(spec)) out.push_back(csv::parse_double(field, 0));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw bad();
    throw;
  }
  for (double d : out) {
    if (!(d > 0.0) || !std::isfinite(d)) throw bad();
  }
  return out;
}

}  // namespace optwedge::app
