#include "cli.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optwedge/csv.hpp"
#include "optwedge/synth.hpp"
#include "render.hpp"
#include "run_config.hpp"

namespace optwedge::app {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Parse: return kExitParse;
    case ErrorKind::Domain:
    case ErrorKind::Validation: return kExitValidation;
    case ErrorKind::Infeasible: return kExitInfeasible;
    case ErrorKind::Numerical: return kExitNumerical;
    case ErrorKind::InsufficientData:
    case ErrorKind::DegenerateSample:
    case ErrorKind::Fit: return kExitFit;
    case ErrorKind::Version: return kExitVersion;
    case ErrorKind::State: return kExitInternal;
  }
  return kExitInternal;
}

namespace {

inline constexpr const char* kEstimatesHeader = "d_poi,variant,subject,est_x_m,est_y_m";

// Flags shared by every subcommand. Bound variables start at the standard
// defaults so --help shows them; only flags actually given override the
// config file.
struct Common {
  RunConfig defaults;
  std::string config_path;
  std::uint64_t seed = defaults.seed;
  double width = defaults.geometry.max_width;
  double height = defaults.geometry.max_height;
  double view_distance = defaults.geometry.view_distance;
  double eps2 = defaults.cost.eps2_x;
  std::string out;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* width_opt = nullptr;
  CLI::Option* height_opt = nullptr;
  CLI::Option* view_opt = nullptr;
  CLI::Option* eps2_opt = nullptr;

  void attach(CLI::App* cmd, const std::string& out_help) {
    cmd->add_option("--config", config_path, "JSON run config; missing keys take the standard defaults")
        ->check(CLI::ExistingFile);
    seed_opt = cmd->add_option("--seed", seed, "RNG seed for simulation, splits and folds");
    width_opt = cmd->add_option("--width", width, "Drawable-area width W in meters");
    height_opt = cmd->add_option("--height", height, "Drawable-area height H in meters");
    view_opt = cmd->add_option("--view-distance", view_distance,
                               "Viewing distance in meters; output lengths scale by view_distance/10");
    eps2_opt = cmd->add_option("--eps2", eps2, "Ideal-distribution variance eps_x^2 = eps_y^2 in m^2");
    cmd->add_option("--out", out, out_help);
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed_opt->count()) c.seed = seed;
    if (width_opt->count()) c.geometry.max_width = width;
    if (height_opt->count()) c.geometry.max_height = height;
    if (view_opt->count()) c.geometry.view_distance = view_distance;
    if (eps2_opt->count()) c.cost.eps2_x = c.cost.eps2_y = eps2;
    return c;
  }
};

struct ModelSource {
  std::string model_path;
  std::string field_path;
  bool latent = false;

  void attach(CLI::App* cmd) {
    auto* m = cmd->add_option("--model", model_path, "Fitted model JSON (default: paths.model from the config)");
    auto* f = cmd->add_option("--field", field_path, "Use a latent-field JSON as an analytic model instead")
                  ->check(CLI::ExistingFile);
    auto* l = cmd->add_flag("--latent", latent, "Use the config's synth.field as an analytic model");
    m->excludes(f)->excludes(l);
    f->excludes(l);
  }

  CognitiveModel load(const RunConfig& c) const {
    if (!field_path.empty()) return LatentField::from_json(csv::read_file(field_path)).as_model(c.cost.sigma_floor);
    if (latent) return c.synth.field.as_model(c.cost.sigma_floor);
    return load_model(model_path.empty() ? c.paths.model : model_path);
  }
};

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + parent.string() + "': " + ec.message());
}

void write_output(const std::string& path, const std::string& content) {
  ensure_parent(path);
  csv::write_file(path, content);
}

// Effective config beside the primary output.
void dump_config(const RunConfig& c, const std::string& primary, const std::string& command) {
  const auto dir = fs::path(primary).parent_path();
  write_output((dir / (command + ".config.json")).string(), config_to_json(c));
}

std::string default_out(const RunConfig& c, const std::string& given, const std::string& name) {
  return given.empty() ? (fs::path(c.paths.reports) / name).string() : given;
}

std::string estimates_to_csv(const std::vector<ConditionEstimates>& conds, double s) {
  std::string out = std::string(kEstimatesHeader) + "\n";
  for (const auto& c : conds) {
    for (std::size_t i = 0; i < c.estimates.size(); ++i) {
      out += csv::format_double(c.d_poi * s) + ',' + c.variant + ',' + c.subjects[i] + ',' +
             csv::format_double(c.estimates[i].x * s) + ',' + csv::format_double(c.estimates[i].y * s) + '\n';
    }
  }
  return out;
}

std::vector<ConditionEstimates> estimates_from_csv(const std::string& text) {
  std::vector<ConditionEstimates> out;
  std::map<std::pair<double, std::string>, std::size_t> index;
  for (const auto& row : csv::parse(text, kEstimatesHeader)) {
    const auto& f = row.fields;
    const double d = csv::parse_double(f[0], row.line_no);
    const std::string variant(f[1]);
    const auto key = std::make_pair(d, variant);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({d, variant, {}, {}});
    }
    auto& c = out[it->second];
    c.subjects.emplace_back(f[2]);
    c.estimates.push_back({csv::parse_double(f[3], row.line_no), csv::parse_double(f[4], row.line_no)});
  }
  return out;
}

std::vector<DistanceResult> distance_results(const std::vector<ResultRow>& rows, double s) {
  std::map<double, DistanceResult> by_d;
  std::map<double, int> seen;
  for (const auto& r : rows) {
    auto& d = by_d[r.d_poi];
    d.d_poi = r.d_poi / s;
    OptimizationResult res = r.result;
    res.params.leg /= s;
    res.params.vertex_dist /= s;
    (r.mode == Mode::VW ? d.vw : r.mode == Mode::UOW ? d.uow : d.bow) = res;
    seen[r.d_poi] |= 1 << static_cast<int>(r.mode);
  }
  std::vector<DistanceResult> out;
  for (auto& [d, r] : by_d) {
    if (seen[d] != 7) {
      throw Error(ErrorKind::Validation,
                  "results for d_poi=" + csv::format_double(d) + " lack one of VW/UOW/BOW (run optimize --mode all)");
    }
    out.push_back(std::move(r));
  }
  return out;
}

WedgeParams parse_params(const std::string& spec) {
  const auto fields = csv::split(spec);
  if (fields.size() != 3) throw Error(ErrorKind::Validation, "--params expects theta_rad,leg_m,dist_m");
  WedgeParams p{csv::parse_double(fields[0], 0), csv::parse_double(fields[1], 0), csv::parse_double(fields[2], 0)};
  require_valid(p);
  return p;
}

std::vector<Mode> parse_modes(const std::string& mode) {
  if (mode == "all") return {Mode::VW, Mode::UOW, Mode::BOW};
  return {mode_from_string(mode)};
}

void error_record(std::ostream& err, const std::string& command, const std::string& kind, const std::string& message,
                  int code) {
  const nlohmann::ordered_json j = {
      {"error", {{"command", command}, {"kind", kind}, {"message", message}, {"exit_code", code}}}};
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimise Wedge off-screen cues against a cognitive cost model", "optwedge"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", "optwedge 0.1.0");

  std::function<void()> action;
  std::string command;

  // Prints the config hash, runs `body`, dumps the config beside `primary`.
  auto runner = [&](const std::string& name, Common& common, std::function<std::string(const RunConfig&)> body) {
    return [&, name, body] {
      command = name;
      const RunConfig cfg = common.resolve();
      cfg.validate();
      out << "config_hash=" << config_hash(cfg) << '\n';
      const std::string primary = body(cfg);
      dump_config(cfg, primary, name);
    };
  };

  // grid
  Common grid_c;
  std::string grid_json;
  auto* grid = app.add_subcommand("grid", "Enumerate the (theta, l, d) grid with validity flags");
  grid_c.attach(grid, "Output CSV (default: <reports>/grid.csv)");
  grid->add_option("--grid", grid_json, "Grid JSON {theta_deg, leg_m, dist_m} (default: standard 968-cell grid)")
      ->check(CLI::ExistingFile);
  grid->callback([&] {
    action = runner("grid", grid_c, [&](const RunConfig& cfg) {
      const ParamGrid g = grid_json.empty() ? cfg.grid() : grid_from_json(csv::read_file(grid_json));
      const auto e = enumerate_grid(g);
      const auto path = default_out(cfg, grid_c.out, "grid.csv");
      write_output(path, grid_to_csv(e, cfg.length_scale()));
      out << "grid: " << e.total << " combinations, " << e.valid << " valid (reference count 375)\n";
      out << "wrote " << path << '\n';
      return path;
    });
  });

  // simulate
  Common sim_c;
  std::string sim_field;
  int participants = sim_c.defaults.synth.observers.participants;
  int repetitions = sim_c.defaults.synth.observers.repetitions;
  double outlier_rate = sim_c.defaults.synth.observers.outlier_rate;
  auto* sim = app.add_subcommand("simulate", "Draw synthetic trials from a latent field over the grid");
  sim_c.attach(sim, "Output trials CSV (default: paths.trials)");
  sim->add_option("--field", sim_field, "Latent-field JSON (default: synth.field)")->check(CLI::ExistingFile);
  auto* part_opt = sim->add_option("--participants", participants, "Synthetic participants per condition");
  auto* rep_opt = sim->add_option("--repetitions", repetitions, "Repetitions per participant");
  auto* rate_opt = sim->add_option("--outlier-rate", outlier_rate, "Share of trials replaced by uniform outliers");
  sim->callback([&] {
    action = runner("simulate", sim_c, [&](RunConfig cfg) {
      if (!sim_field.empty()) cfg.synth.field = LatentField::from_json(csv::read_file(sim_field));
      if (part_opt->count()) cfg.synth.observers.participants = participants;
      if (rep_opt->count()) cfg.synth.observers.repetitions = repetitions;
      if (rate_opt->count()) cfg.synth.observers.outlier_rate = outlier_rate;
      const auto trials = sample_trials(cfg.synth.field, cfg.grid(), cfg.observers());
      const auto path = sim_c.out.empty() ? cfg.paths.trials : sim_c.out;
      write_output(path, trials_to_csv(trials));
      out << "simulate: " << trials.size() << " trials\nwrote " << path << '\n';
      return path;
    });
  });

  // fit
  Common fit_c;
  std::string fit_trials, fit_factors_in, family = fit_c.defaults.models.family;
  auto* fit = app.add_subcommand("fit", "Extract cognitive factors and fit the b, sigma_x, sigma_y regressors");
  fit_c.attach(fit, "Output model JSON (default: paths.model)");
  auto* trials_opt = fit->add_option("--trials", fit_trials, "Trials CSV (default: paths.trials)");
  auto* factors_opt = fit->add_option("--factors-in", fit_factors_in, "Fit from a factors CSV instead of trials");
  trials_opt->excludes(factors_opt);
  auto* family_opt =
      fit->add_option("--family", family, "Model family kept for the cost")->check(CLI::IsMember({"gp", "poly"}));
  fit->callback([&] {
    action = runner("fit", fit_c, [&](RunConfig cfg) {
      if (family_opt->count()) cfg.models.family = family;
      std::vector<CognitiveFactors> factors;
      if (!fit_factors_in.empty()) {
        factors = load_factors(fit_factors_in);
      } else {
        const auto trials = load_trials(fit_trials.empty() ? cfg.paths.trials : fit_trials);
        factors = extract_all(trials, cfg.outlier_alpha, [&](const std::string& w) { out << "warning: " << w << '\n'; });
        save_factors(factors, cfg.paths.factors);
        out << "fit: " << factors.size() << " conditions\nwrote " << cfg.paths.factors << '\n';
      }
      const auto report = fit_cognitive_model(factors, cfg.fit_options());
      const auto path = fit_c.out.empty() ? cfg.paths.model : fit_c.out;
      ensure_parent(path);
      save_model(report.model, path);
      const auto dir = fs::path(path).parent_path();
      write_output((dir / "cv_report.csv").string(), cv_report_to_csv(report.cv));
      write_output((dir / "model_metrics.csv").string(), metrics_to_csv(report.metrics));
      for (const auto& m : report.metrics) {
        out << "  " << to_string(m.target) << ' ' << m.family << ' ' << m.label
            << " test_mse=" << csv::format_double(m.test_mse) << '\n';
      }
      out << "wrote " << path << '\n';
      return path;
    });
  });

  // optimize
  Common opt_c;
  ModelSource opt_src;
  std::string opt_d, opt_mode = "all";
  auto* opt = app.add_subcommand("optimize", "VW / UOW / BOW parameters for each POI distance");
  opt_c.attach(opt, "Output results CSV (default: <reports>/results.csv)");
  opt_src.attach(opt);
  opt->add_option("--d-poi", opt_d, "POI distances: 1..11, 1,2,5 or 3 (default: d_poi from the config)");
  opt->add_option("--mode", opt_mode, "Rows to write")->check(CLI::IsMember({"all", "vw", "uow", "bow"}));
  opt->callback([&] {
    action = runner("optimize", opt_c, [&](RunConfig cfg) {
      if (!opt_d.empty()) cfg.d_poi = parse_distance_list(opt_d);
      const auto model = opt_src.load(cfg);
      const CostContext ctx{&model, 1.0, cfg.cost.eps2_x, cfg.cost.eps2_y};
      const auto results = optimize_all(ctx, cfg.d_poi, cfg.constraints());
      const auto path = default_out(cfg, opt_c.out, "results.csv");
      write_output(path, results_to_csv(results, parse_modes(opt_mode), cfg.length_scale()));
      for (const auto& r : results) {
        out << "  d_poi=" << csv::format_double(r.d_poi) << " VW=" << csv::format_double(r.vw.objective)
            << " UOW=" << csv::format_double(r.uow.objective) << " BOW=" << csv::format_double(r.bow.objective) << '\n';
      }
      out << "wrote " << path << '\n';
      return path;
    });
  });

  // landscape
  Common land_c;
  ModelSource land_src;
  double land_d = 1.0;
  int resolution = land_c.defaults.landscape_resolution;
  std::string land_svg;
  auto* land = app.add_subcommand("landscape", "Dense UOW-slice cost landscape over (theta, l)");
  land_c.attach(land, "Output landscape CSV (default: <reports>/landscape_d<d>.csv)");
  land_src.attach(land);
  land->add_option("--d-poi", land_d, "POI distance of the slice (d = d_poi)");
  auto* res_opt = land->add_option("--resolution", resolution, "Cells per axis");
  land->add_option("--svg", land_svg, "Also write a heatmap SVG here");
  land->callback([&] {
    action = runner("landscape", land_c, [&](RunConfig cfg) {
      if (res_opt->count()) cfg.landscape_resolution = resolution;
      cfg.validate();
      const auto model = land_src.load(cfg);
      const CostContext ctx{&model, land_d, cfg.cost.eps2_x, cfg.cost.eps2_y};
      const auto l = grid_landscape(ctx, cfg.constraints(), cfg.landscape_resolution);
      const auto text = landscape_to_csv(l, cfg.length_scale());
      const auto path = default_out(cfg, land_c.out, "landscape_d" + csv::format_double(land_d) + ".csv");
      write_output(path, text);
      if (l.argmin) {
        const auto& c = l.cells[*l.argmin];
        out << "landscape: argmin theta=" << csv::format_double(c.theta) << " leg=" << csv::format_double(c.leg)
            << " cost=" << csv::format_double(c.cost) << '\n';
      } else {
        out << "landscape: no feasible cell\n";
      }
      if (!land_svg.empty()) write_output(land_svg, render_landscape_svg(text));
      out << "wrote " << path << '\n';
      return path;
    });
  });

  // evaluate
  Common eval_c;
  std::string eval_results, eval_field, eval_estimates;
  auto* eval = app.add_subcommand("evaluate", "Paired Wilcoxon tests of localisation error between variants");
  eval_c.attach(eval, "Output evaluation CSV (default: <reports>/evaluation.csv)");
  auto* er = eval->add_option("--results", eval_results, "Results CSV from optimize (default: <reports>/results.csv)");
  eval->add_option("--field", eval_field, "Latent field the synthetic observers follow (default: synth.field)")
      ->check(CLI::ExistingFile);
  auto* ee = eval->add_option("--estimates", eval_estimates,
                              std::string("Observed estimates CSV (") + kEstimatesHeader + ") instead of simulation");
  er->excludes(ee);
  eval->callback([&] {
    action = runner("evaluate", eval_c, [&](RunConfig cfg) {
      const double s = cfg.length_scale();
      const auto path = default_out(cfg, eval_c.out, "evaluation.csv");
      std::vector<ConditionEstimates> conds;
      if (!eval_estimates.empty()) {
        conds = estimates_from_csv(csv::read_file(eval_estimates));
      } else {
        if (!eval_field.empty()) cfg.synth.field = LatentField::from_json(csv::read_file(eval_field));
        const auto rows = results_from_csv(
            csv::read_file(eval_results.empty() ? (fs::path(cfg.paths.reports) / "results.csv").string() : eval_results));
        conds = simulate_conditions(cfg.synth.field, distance_results(rows, s), cfg.evaluation_observers());
        const auto est_path = (fs::path(path).parent_path() / "estimates.csv").string();
        write_output(est_path, estimates_to_csv(conds, s));
        out << "wrote " << est_path << '\n';
      }
      const auto rows = evaluate_conditions(conds, cfg.stats.bonferroni_m, cfg.wilcoxon_policy());
      write_output(path, evaluation_to_csv(rows));
      for (const auto& r : rows) {
        out << "  d_poi=" << csv::format_double(r.d_poi) << ' ' << r.comparison
            << " p_adj=" << csv::format_double(r.test.p_adjusted) << '\n';
      }
      out << "wrote " << path << '\n';
      return path;
    });
  });

  // render
  Common ren_c;
  std::string ren_params, ren_landscape;
  double ren_vw = 0.0, ren_poi = 0.0, px_per_m = 20.0;
  auto* ren = app.add_subcommand("render", "SVG of a wedge or of a landscape CSV");
  ren_c.attach(ren, "Output SVG (default: <reports>/wedge.svg or landscape.svg)");
  auto* rp = ren->add_option("--params", ren_params, "Wedge as theta_rad,leg_m,dist_m");
  auto* rv = ren->add_option("--vw", ren_vw, "Render vw_params(d_poi) for this distance");
  auto* rl = ren->add_option("--landscape", ren_landscape, "Landscape CSV to draw as a heatmap")->check(CLI::ExistingFile);
  rp->excludes(rv)->excludes(rl);
  rv->excludes(rl);
  ren->add_option("--d-poi", ren_poi, "POI mark position in meters (default: on the vertex)");
  ren->add_option("--px-per-m", px_per_m, "Declared drawing scale in pixels per meter");
  ren->callback([&] {
    action = runner("render", ren_c, [&](const RunConfig& cfg) {
      std::string svg, name;
      if (!ren_landscape.empty()) {
        svg = render_landscape_svg(csv::read_file(ren_landscape));
        name = "landscape.svg";
      } else {
        if (ren_params.empty() && !rv->count()) throw Error(ErrorKind::Validation, "render needs --params, --vw or --landscape");
        const WedgeParams p = ren_params.empty() ? vw_params(ren_vw) : parse_params(ren_params);
        WedgeSvgOptions o;
        o.px_per_m = px_per_m;
        o.d_poi = ren_poi;
        o.length_scale = cfg.length_scale();
        o.screen_width = cfg.geometry.max_width;
        o.screen_height = cfg.geometry.max_height;
        svg = render_wedge_svg(p, o);
        name = "wedge.svg";
      }
      const auto path = default_out(cfg, ren_c.out, name);
      write_output(path, svg);
      out << "wrote " << path << '\n';
      return path;
    });
  });

  // pipeline
  Common pipe_c;
  auto* pipe = app.add_subcommand("pipeline", "simulate -> fit -> optimize -> evaluate on the configured latent field");
  pipe_c.attach(pipe, "Output directory (default: <reports>)");
  pipe->callback([&] {
    action = runner("pipeline", pipe_c, [&](const RunConfig& cfg) {
      RoundtripOptions o;
      o.outlier_alpha = cfg.outlier_alpha;
      o.fit = cfg.fit_options();
      o.eps2_x = cfg.cost.eps2_x;
      o.eps2_y = cfg.cost.eps2_y;
      o.constraints = cfg.constraints();
      o.d_pois = cfg.d_poi;
      o.agreement_resolution = cfg.landscape_resolution;
      o.evaluation = cfg.evaluation_observers();
      o.bonferroni_m = cfg.stats.bonferroni_m;
      const auto rep = pipeline_roundtrip(cfg.synth.field, cfg.grid(), cfg.observers(), o);
      const auto dir = pipe_c.out.empty() ? cfg.paths.reports : pipe_c.out;
      write_roundtrip(rep, dir);
      for (const auto& w : rep.warnings) out << "warning: " << w << '\n';
      out << "pipeline: " << rep.trials.trials.size() << " trials, " << rep.factors.size() << " conditions, "
          << rep.results.size() << " distances\nwrote " << dir << '\n';
      return (fs::path(dir) / "results.csv").string();
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, command.empty() ? "optwedge" : command, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    error_record(err, command, std::string(to_string(e.kind())), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    error_record(err, command, "internal", e.what(), kExitInternal);
    return kExitInternal;
  }
}

}  // namespace optwedge::app
