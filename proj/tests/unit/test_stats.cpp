#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "optwedge/error.hpp"
#include "optwedge/stats.hpp"
#include "oracles.hpp"

using namespace optwedge;

namespace {

PairedSample sample(std::vector<double> d) { return {"A", "B", std::move(d)}; }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::State;
}

}  // namespace

TEST(LocalizationError, Examples) {
  EXPECT_EQ(localization_error({4.0, 0.0}, 4.0), 0.0);
  EXPECT_DOUBLE_EQ(localization_error({7.0, 4.0}, 4.0), 5.0);
  EXPECT_DOUBLE_EQ(localization_error({1.0, -4.0}, 4.0), 5.0);
}

TEST(Rmse, ExamplesAndProperties) {
  EXPECT_EQ(rmse(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(rmse(std::vector<double>{1, 1, 1, 1}), 1.0);
  EXPECT_EQ(kind_of([] { rmse(std::vector<double>{}); }), ErrorKind::Domain);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<double> e(37);
  for (auto& v : e) v = u(rng);
  const double base = rmse(e);
  auto shuffled = e;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_NEAR(rmse(shuffled), base, 1e-14);
  for (double c : {0.0, 0.5, 3.0}) {
    auto scaled = e;
    for (auto& v : scaled) v *= c;
    EXPECT_NEAR(rmse(scaled), c * base, 1e-13);
  }
}

TEST(Wilcoxon, AllPositiveFive) {
  const auto r = wilcoxon_signed_rank(sample({1, 2, 3, 4, 5}));
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.w_plus, 15.0);
  EXPECT_EQ(r.w_minus, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.0625);
  EXPECT_EQ(r.method, WilcoxonMethod::Exact);
  EXPECT_EQ(r.n_effective, 5);
}

TEST(Wilcoxon, SymmetricPairIsOne) {
  const auto r = wilcoxon_signed_rank(sample({-2.5, 2.5}));
  EXPECT_EQ(r.w_plus, r.w_minus);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Wilcoxon, ZerosDroppedAndTiesMidranked) {
  const auto r = wilcoxon_signed_rank(sample({0.0, 1.0, -1.0, 2.0, 0.0, 3.0}));
  EXPECT_EQ(r.n_effective, 4);
  EXPECT_EQ(r.w_minus, 1.5);
  EXPECT_EQ(r.w_plus, 8.5);
  EXPECT_EQ(midranks(std::vector<double>{1, 1, 2, 3}), (std::vector<double>{1.5, 1.5, 3, 4}));
  EXPECT_EQ(kind_of([] { wilcoxon_signed_rank(sample({0.0, 0.0})); }), ErrorKind::DegenerateSample);
  EXPECT_THROW(wilcoxon_signed_rank(sample({})), Error);
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.3, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 12;
    std::vector<double> d(static_cast<std::size_t>(n));
    for (auto& v : d) v = noise(rng);
    // Every fifth sample gets ties on purpose.
    if (trial % 5 == 0 && n > 2) d[1] = -d[0];
    const auto r = wilcoxon_signed_rank(sample(d), 1, WilcoxonPolicy::ForceExact);
    EXPECT_NEAR(r.p_value, oracle::wilcoxon_enumerate(d), 1e-12) << "trial " << trial;
  }
}

TEST(Wilcoxon, NormalApproximationTracksExactOnSubsample) {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> shifted(0.25, 1.0);
  std::vector<double> d(44);
  for (auto& v : d) v = shifted(rng);
  const auto full = wilcoxon_signed_rank(sample(d));
  EXPECT_EQ(full.method, WilcoxonMethod::NormalApprox);
  EXPECT_EQ(full.n_effective, 44);
  const std::vector<double> sub(d.begin(), d.begin() + 15);
  const auto exact = wilcoxon_signed_rank(sample(sub), 1, WilcoxonPolicy::ForceExact);
  const auto approx = wilcoxon_signed_rank(sample(sub), 1, WilcoxonPolicy::ForceNormal);
  EXPECT_EQ(exact.method, WilcoxonMethod::Exact);
  EXPECT_EQ(approx.method, WilcoxonMethod::NormalApprox);
  EXPECT_NEAR(approx.p_value, exact.p_value, 0.02);
  EXPECT_NEAR(exact.p_value, oracle::wilcoxon_enumerate(sub), 1e-12);
}

TEST(Bonferroni, Examples) {
  EXPECT_DOUBLE_EQ(bonferroni(0.0625, 3), 0.1875);
  EXPECT_EQ(bonferroni(0.5, 3), 1.0);
  EXPECT_EQ(bonferroni(0.123, 1), 0.123);
  EXPECT_LE(bonferroni(0.01, 2), bonferroni(0.01, 5));
  EXPECT_LE(bonferroni(0.01, 3), bonferroni(0.02, 3));
  EXPECT_THROW(bonferroni(0.1, 0), Error);
  const auto r = wilcoxon_signed_rank(sample({1, 2, 3, 4, 5}), 3);
  EXPECT_DOUBLE_EQ(r.p_adjusted, 0.1875);
  EXPECT_GE(r.p_adjusted, r.p_value);
}

TEST(Evaluate, PairsSubjectsAcrossVariants) {
  std::vector<ConditionEstimates> c(2);
  c[0] = {3.0, "VW", {"s1", "s2", "s3", "s4", "s5"}, {{4, 0}, {5, 0}, {6, 0}, {7, 0}, {8, 0}}};
  c[1] = {3.0, "UOW", {"s5", "s4", "s3", "s2", "s1", "extra"}, {{3, 0}, {3, 0}, {3, 0}, {3, 0}, {3, 0}, {9, 9}}};
  const auto rows = evaluate_conditions(c, 3);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].comparison, "VW-UOW");
  EXPECT_EQ(rows[0].test.n_effective, 5);
  EXPECT_DOUBLE_EQ(rows[0].test.p_value, 0.0625);
  EXPECT_DOUBLE_EQ(rows[0].test.p_adjusted, 0.1875);
  EXPECT_DOUBLE_EQ(rows[0].rmse_a, std::sqrt((1 + 4 + 9 + 16 + 25) / 5.0));
  EXPECT_EQ(rows[0].rmse_b, 0.0);
  const auto csv = evaluation_to_csv(rows);
  EXPECT_EQ(csv.rfind(std::string(kEvaluationHeader) + "\n", 0), 0u);
}
