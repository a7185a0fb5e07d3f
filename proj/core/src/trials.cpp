#include "optwedge/trials.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge {

namespace {

struct Moments2 {
  double mean_x = 0.0, mean_y = 0.0;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;  // sample covariance, n-1
};

template <typename GetX, typename GetY>
Moments2 moments(std::size_t n, GetX gx, GetY gy) {
  Moments2 m;
  for (std::size_t i = 0; i < n; ++i) {
    m.mean_x += gx(i);
    m.mean_y += gy(i);
  }
  m.mean_x /= static_cast<double>(n);
  m.mean_y /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = gx(i) - m.mean_x;
    const double dy = gy(i) - m.mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  const double denom = static_cast<double>(n - 1);
  m.sxx /= denom;
  m.syy /= denom;
  m.sxy /= denom;
  return m;
}

// Relative tolerance on the smaller covariance eigenvalue.
constexpr double kSingularRatio = 1e-12;

bool singular(const Moments2& m) {
  const double tr = m.sxx + m.syy;
  if (!(tr > 0.0)) return true;
  const double det = m.sxx * m.syy - m.sxy * m.sxy;
  // lambda_min ~ det / tr for the 2x2 case
  return det <= kSingularRatio * tr * tr;
}

std::string row_label(std::size_t line_no) { return "line " + std::to_string(line_no); }

}  // namespace

double chi2_2dof_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::Domain, "alpha must lie in (0, 1)");
  return -2.0 * std::log(alpha);
}

HotellingResult hotelling_filter(std::span<const Point2> points, double alpha) {
  if (points.size() < 3) {
    throw Error(ErrorKind::InsufficientData,
                "hotelling_filter needs at least 3 points, got " + std::to_string(points.size()));
  }
  const auto m = moments(
      points.size(), [&](std::size_t i) { return points[i].x; }, [&](std::size_t i) { return points[i].y; });
  if (singular(m)) throw Error(ErrorKind::DegenerateSample, "sample covariance is singular");

  const double det = m.sxx * m.syy - m.sxy * m.sxy;
  const double ixx = m.syy / det, iyy = m.sxx / det, ixy = -m.sxy / det;

  HotellingResult r;
  r.threshold = chi2_2dof_quantile(alpha);
  r.statistic.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i].x - m.mean_x;
    const double dy = points[i].y - m.mean_y;
    const double a = dx * dx * ixx + 2.0 * dx * dy * ixy + dy * dy * iyy;
    r.statistic.push_back(a);
    (a > r.threshold ? r.removed : r.kept).push_back(i);
  }
  return r;
}

CognitiveFactors extract_factors(std::span<const TrialRecord> trials, double alpha) {
  if (trials.size() < 3) {
    throw Error(ErrorKind::InsufficientData,
                "condition needs at least 3 trials, got " + std::to_string(trials.size()));
  }
  const WedgeParams params = trials.front().params;
  for (const auto& t : trials) {
    if (!(t.params == params)) throw Error(ErrorKind::Domain, "extract_factors: trials mix different conditions");
  }

  std::vector<Point2> pts;
  pts.reserve(trials.size());
  for (const auto& t : trials) pts.push_back({t.estimate_x, t.estimate_y});

  const auto all = moments(
      pts.size(), [&](std::size_t i) { return pts[i].x; }, [&](std::size_t i) { return pts[i].y; });

  std::vector<std::size_t> used;
  std::size_t removed = 0;
  if (singular(all)) {
    used.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) used[i] = i;
  } else {
    auto f = hotelling_filter(pts, alpha);
    used = std::move(f.kept);
    removed = f.removed.size();
  }
  if (used.size() < 2) {
    throw Error(ErrorKind::InsufficientData, "fewer than 2 trials left after outlier removal");
  }

  const auto m = moments(
      used.size(), [&](std::size_t i) { return pts[used[i]].x; }, [&](std::size_t i) { return pts[used[i]].y; });
  CognitiveFactors c;
  c.params = params;
  c.bias = m.mean_x - params.vertex_dist;
  c.sigma_x = std::sqrt(m.sxx);
  c.sigma_y = std::sqrt(m.syy);
  c.n_used = static_cast<int>(used.size());
  c.n_removed = static_cast<int>(removed);
  return c;
}

std::vector<std::vector<TrialRecord>> group_by_condition(std::span<const TrialRecord> trials) {
  std::map<std::tuple<double, double, double>, std::vector<TrialRecord>> groups;
  for (const auto& t : trials) {
    groups[{t.params.theta, t.params.leg, t.params.vertex_dist}].push_back(t);
  }
  std::vector<std::vector<TrialRecord>> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<CognitiveFactors> extract_all(std::span<const TrialRecord> trials, double alpha,
                                          const std::function<void(const std::string&)>& warn) {
  std::vector<CognitiveFactors> out;
  for (const auto& g : group_by_condition(trials)) {
    try {
      out.push_back(extract_factors(g, alpha));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      if (warn) {
        const auto& p = g.front().params;
        warn("skipping condition (theta=" + csv::format_double(p.theta) + ", leg=" + csv::format_double(p.leg) +
             ", dist=" + csv::format_double(p.vertex_dist) + "): " + e.what());
      }
    }
  }
  return out;
}

std::string trials_to_csv(std::span<const TrialRecord> trials) {
  std::string out = std::string(kTrialsHeader) + "\n";
  for (const auto& t : trials) {
    if (t.participant.find(',') != std::string::npos) {
      throw Error(ErrorKind::Validation, "participant id must not contain ','");
    }
    out += t.participant + ',' + csv::format_double(t.params.theta) + ',' + csv::format_double(t.params.leg) + ',' +
           csv::format_double(t.params.vertex_dist) + ',' + csv::format_double(t.estimate_x) + ',' +
           csv::format_double(t.estimate_y) + ',' + std::to_string(t.repetition) + '\n';
  }
  return out;
}

std::vector<TrialRecord> trials_from_csv(const std::string& text) {
  std::vector<TrialRecord> out;
  for (const auto& row : csv::parse(text, kTrialsHeader)) {
    const auto& f = row.fields;
    TrialRecord t;
    t.participant = std::string(f[0]);
    t.params = {csv::parse_double(f[1], row.line_no), csv::parse_double(f[2], row.line_no),
                csv::parse_double(f[3], row.line_no)};
    t.estimate_x = csv::parse_double(f[4], row.line_no);
    t.estimate_y = csv::parse_double(f[5], row.line_no);
    t.repetition = static_cast<int>(csv::parse_int(f[6], row.line_no));
    if (!is_valid(t.params)) {
      throw Error(ErrorKind::Validation, row_label(row.line_no) + ": invalid wedge parameters (theta=" +
                                             std::string(f[1]) + ", leg=" + std::string(f[2]) +
                                             ", dist=" + std::string(f[3]) + ")");
    }
    if (!std::isfinite(t.estimate_x) || !std::isfinite(t.estimate_y)) {
      throw Error(ErrorKind::Validation, row_label(row.line_no) + ": non-finite estimate");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TrialRecord> load_trials(const std::string& path) { return trials_from_csv(csv::read_file(path)); }

void save_trials(std::span<const TrialRecord> trials, const std::string& path) {
  csv::write_file(path, trials_to_csv(trials));
}

std::string factors_to_csv(std::span<const CognitiveFactors> factors) {
  std::string out = std::string(kFactorsHeader) + "\n";
  for (const auto& c : factors) {
    out += csv::format_double(c.params.theta) + ',' + csv::format_double(c.params.leg) + ',' +
           csv::format_double(c.params.vertex_dist) + ',' + csv::format_double(c.bias) + ',' +
           csv::format_double(c.sigma_x) + ',' + csv::format_double(c.sigma_y) + ',' + std::to_string(c.n_used) +
           ',' + std::to_string(c.n_removed) + '\n';
  }
  return out;
}

std::vector<CognitiveFactors> factors_from_csv(const std::string& text) {
  std::vector<CognitiveFactors> out;
  for (const auto& row : csv::parse(text, kFactorsHeader)) {
    const auto& f = row.fields;
    CognitiveFactors c;
    c.params = {csv::parse_double(f[0], row.line_no), csv::parse_double(f[1], row.line_no),
                csv::parse_double(f[2], row.line_no)};
    c.bias = csv::parse_double(f[3], row.line_no);
    c.sigma_x = csv::parse_double(f[4], row.line_no);
    c.sigma_y = csv::parse_double(f[5], row.line_no);
    c.n_used = static_cast<int>(csv::parse_int(f[6], row.line_no));
    c.n_removed = static_cast<int>(csv::parse_int(f[7], row.line_no));
    if (!is_valid(c.params)) {
      throw Error(ErrorKind::Validation, row_label(row.line_no) + ": invalid wedge parameters");
    }
    if (!(c.sigma_x >= 0.0) || !(c.sigma_y >= 0.0) || !std::isfinite(c.bias)) {
      throw Error(ErrorKind::Validation, row_label(row.line_no) + ": invalid factor values");
    }
    out.push_back(c);
  }
  return out;
}

std::vector<CognitiveFactors> load_factors(const std::string& path) {
  return factors_from_csv(csv::read_file(path));
}

void save_factors(std::span<const CognitiveFactors> factors, const std::string& path) {
  csv::write_file(path, factors_to_csv(factors));
}

}  // namespace optwedge
