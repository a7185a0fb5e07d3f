#include "optwedge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"

namespace optwedge {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(W+ <= w) under H0 for the given (doubled, integral) ranks, by dynamic
// programming over the 2^n equally likely sign assignments.
double exact_lower_tail(const std::vector<long long>& doubled_ranks, long long doubled_w) {
  const long long total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0LL);
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long long reach = 0;
  for (long long r : doubled_ranks) {
    for (long long s = reach; s >= 0; --s) {
      if (count[static_cast<std::size_t>(s)] != 0.0) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
    }
    reach += r;
  }
  double below = 0.0;
  for (long long s = 0; s <= std::min(doubled_w, total); ++s) below += count[static_cast<std::size_t>(s)];
  return below / std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
}

}  // namespace

double localization_error(const Point2& estimate, double d_poi) {
  if (!std::isfinite(estimate.x) || !std::isfinite(estimate.y) || !std::isfinite(d_poi)) {
    throw Error(ErrorKind::Domain, "localization_error needs finite inputs");
  }
  return std::hypot(estimate.x - d_poi, estimate.y);
}

double rmse(std::span<const double> errors) {
  if (errors.empty()) throw Error(ErrorKind::Domain, "rmse of an empty list");
  double s = 0.0;
  for (double e : errors) s += e * e;
  return std::sqrt(s / static_cast<double>(errors.size()));
}

std::string_view to_string(WilcoxonMethod m) noexcept {
  return m == WilcoxonMethod::Exact ? "exact" : "normal-approx";
}

std::vector<double> midranks(std::span<const double> abs_values) {
  const std::size_t n = abs_values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return abs_values[a] < abs_values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_values[order[j + 1]] == abs_values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

TestResult wilcoxon_signed_rank(const PairedSample& s, int comparisons, WilcoxonPolicy policy) {
  std::vector<double> nonzero;
  for (double d : s.differences) {
    if (!std::isfinite(d)) throw Error(ErrorKind::Domain, "non-finite paired difference");
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) throw Error(ErrorKind::DegenerateSample, "all paired differences are zero");

  std::vector<double> abs_values(nonzero.size());
  std::transform(nonzero.begin(), nonzero.end(), abs_values.begin(), [](double d) { return std::abs(d); });
  const auto ranks = midranks(abs_values);

  TestResult r;
  r.n_effective = static_cast<int>(nonzero.size());
  for (std::size_t i = 0; i < nonzero.size(); ++i) (nonzero[i] > 0.0 ? r.w_plus : r.w_minus) += ranks[i];
  r.statistic = std::min(r.w_plus, r.w_minus);

  const bool exact = policy == WilcoxonPolicy::ForceExact ||
                     (policy == WilcoxonPolicy::Auto && r.n_effective <= kExactWilcoxonMaxN);
  if (exact) {
    r.method = WilcoxonMethod::Exact;
    std::vector<long long> doubled(ranks.size());
    std::transform(ranks.begin(), ranks.end(), doubled.begin(), [](double x) { return std::llround(2.0 * x); });
    r.p_value = std::min(1.0, 2.0 * exact_lower_tail(doubled, std::llround(2.0 * r.statistic)));
  } else {
    r.method = WilcoxonMethod::NormalApprox;
    const double n = r.n_effective;
    const double mean = n * (n + 1.0) / 4.0;
    std::vector<double> sorted = abs_values;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double dev = std::max(0.0, std::abs(r.statistic - mean) - 0.5);
    const double z = var > 0.0 ? dev / std::sqrt(var) : 0.0;
    r.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
  }
  r.p_adjusted = bonferroni(r.p_value, comparisons);
  return r;
}

double bonferroni(double p, int m) {
  if (m < 1) throw Error(ErrorKind::Domain, "Bonferroni family size must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::Domain, "p-value outside [0, 1]");
  return std::min(1.0, static_cast<double>(m) * p);
}

std::string evaluation_to_csv(std::span<const EvaluationRow> rows) {
  std::string out = std::string(kEvaluationHeader) + "\n";
  for (const auto& r : rows) {
    out += csv::format_double(r.d_poi) + ',' + r.comparison + ',' + csv::format_double(r.test.statistic) + ',' +
           csv::format_double(r.test.p_value) + ',' + csv::format_double(r.test.p_adjusted) + ',' +
           std::to_string(r.test.n_effective) + ',' + std::string(to_string(r.test.method)) + ',' +
           csv::format_double(r.rmse_a) + ',' + csv::format_double(r.rmse_b) + '\n';
  }
  return out;
}

std::vector<EvaluationRow> evaluate_conditions(std::span<const ConditionEstimates> conditions, int comparisons,
                                               WilcoxonPolicy policy) {
  std::vector<double> distances;
  for (const auto& c : conditions) {
    if (c.subjects.size() != c.estimates.size()) {
      throw Error(ErrorKind::Validation, "condition " + c.variant + ": subjects and estimates differ in length");
    }
    if (std::find(distances.begin(), distances.end(), c.d_poi) == distances.end()) distances.push_back(c.d_poi);
  }

  std::vector<EvaluationRow> rows;
  for (double d : distances) {
    std::vector<const ConditionEstimates*> at_d;
    for (const auto& c : conditions) {
      if (c.d_poi == d) at_d.push_back(&c);
    }
    for (std::size_t a = 0; a < at_d.size(); ++a) {
      for (std::size_t b = a + 1; b < at_d.size(); ++b) {
        std::map<std::string, double> err_b;
        for (std::size_t i = 0; i < at_d[b]->subjects.size(); ++i) {
          err_b[at_d[b]->subjects[i]] = localization_error(at_d[b]->estimates[i], d);
        }
        PairedSample s{at_d[a]->variant, at_d[b]->variant, {}};
        std::vector<double> ea, eb;
        for (std::size_t i = 0; i < at_d[a]->subjects.size(); ++i) {
          const auto it = err_b.find(at_d[a]->subjects[i]);
          if (it == err_b.end()) continue;
          const double e = localization_error(at_d[a]->estimates[i], d);
          ea.push_back(e);
          eb.push_back(it->second);
          s.differences.push_back(e - it->second);
        }
        if (s.differences.empty()) {
          throw Error(ErrorKind::InsufficientData, "no paired subjects for " + s.label_a + " vs " + s.label_b +
                                                       " at d_poi=" + csv::format_double(d));
        }
        EvaluationRow row;
        row.d_poi = d;
        row.comparison = s.label_a + "-" + s.label_b;
        try {
          row.test = wilcoxon_signed_rank(s, comparisons, policy);
        } catch (const Error& e) {
          // identical errors on every pair: no evidence either way
          if (e.kind() != ErrorKind::DegenerateSample) throw;
          row.test = TestResult{};
        }
        row.rmse_a = rmse(ea);
        row.rmse_b = rmse(eb);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace optwedge
