#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optwedge/models.hpp"
#include "optwedge/optimize.hpp"
#include "optwedge/stats.hpp"
#include "optwedge/synth.hpp"

namespace optwedge::app {

// Every knob of a run. Defaults reproduce the reference setup; lengths are in
// meters of the 10 m reference setup and only rescaled on output.
struct RunConfig {
  std::uint64_t seed = 1;

  struct Paths {
    std::string trials = "trials.csv";
    std::string factors = "factors.csv";
    std::string model = "model.json";
    std::string reports = "reports";
  } paths;

  struct Geometry {
    double max_width = 14.0;
    double max_height = 14.0;
    double view_distance = kReferenceViewDistance;
    std::vector<double> theta_deg{10, 30, 50, 70, 90, 110, 130, 150};
    std::vector<double> leg_m{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<double> dist_m{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  } geometry;

  struct Cost {
    double eps2_x = kDefaultEps2;
    double eps2_y = kDefaultEps2;
    double sigma_floor = kDefaultSigmaFloor;
  } cost;

  ConstraintSet optimizer;  // drawable area is taken from geometry

  struct Models {
    std::string family = "gp";
    FitOptions fit;
  } models;

  double outlier_alpha = kDefaultOutlierAlpha;

  struct Synth {
    LatentField field;
    ObserverConfig observers;
  } synth;

  struct Stats {
    int bonferroni_m = 3;
    int participants = 22;
    int repetitions = 2;
    std::string wilcoxon = "auto";
  } stats;

  std::vector<double> d_poi{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  int landscape_resolution = 200;

  /// Throws Error(Validation) naming the offending key.
  void validate() const;

  ParamGrid grid() const;
  ConstraintSet constraints() const;
  FitOptions fit_options() const;
  ObserverConfig observers() const;
  ObserverConfig evaluation_observers() const;
  WilcoxonPolicy wilcoxon_policy() const;
  double length_scale() const { return view_scale(geometry.view_distance); }
};

/// Keys missing from `text` keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
/// Every field, including defaults. Stable key order.
std::string config_to_json(const RunConfig& c);
/// FNV-1a of config_to_json().
std::string config_hash(const RunConfig& c);

/// "1..11", "1,2,5" or "3".
std::vector<double> parse_distance_list(const std::string& spec);

}  // namespace optwedge::app
