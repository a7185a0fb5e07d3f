#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "optwedge/csv.hpp"
#include "optwedge/error.hpp"
#include "optwedge/geometry.hpp"
#include "oracles.hpp"

using namespace optwedge;

namespace {

double deg(double d) { return d * kPi / 180.0; }

void expect_kind(ErrorKind kind, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(VwParams, MatchesHandEvaluation) {
  const auto a = vw_params(1.0);
  EXPECT_NEAR(a.leg, 6.596157879354227, 1e-12);
  EXPECT_NEAR(a.theta, 0.8034980509773483, 1e-12);
  EXPECT_EQ(a.vertex_dist, 1.0);
  const auto b = vw_params(11.0);
  EXPECT_NEAR(b.leg, 20.49080554697146, 1e-12);
  EXPECT_NEAR(b.theta, 0.40505972207748275, 1e-12);
}

TEST(VwParams, RejectsNonPositiveDistance) {
  expect_kind(ErrorKind::Domain, [] { vw_params(-8.0); });
  expect_kind(ErrorKind::Domain, [] { vw_params(0.0); });
}

TEST(VwParams, ArcLengthIdentityAndMonotoneLeg) {
  double prev = 0.0;
  for (double d = 0.25; d <= 30.0; d += 0.25) {
    const auto p = vw_params(d);
    EXPECT_NEAR(p.theta * p.leg, 5.0 + 0.3 * d, 1e-12);
    EXPECT_GT(p.leg, prev);
    prev = p.leg;
  }
}

TEST(Footprint, RightAngleLimit) {
  const auto f = footprint({kPi / 2, std::sqrt(2.0), 1e-12});
  EXPECT_NEAR(f.width, 1.0, 1e-9);
  EXPECT_NEAR(f.height, 2.0, 1e-12);
}

TEST(Footprint, VwAtOneMeter) {
  // Direct evaluation; the rounded figures quoted for this case elsewhere
  // (5.073, 5.162) are off in the third decimal.
  const auto f = footprint({0.80350, 6.5962, 1.0});
  EXPECT_NEAR(f.width, 5.070998, 1e-6);
  EXPECT_NEAR(f.height, 5.158619, 1e-6);
}

TEST(Footprint, BoundaryWidthEqualsGap) {
  const double theta = 1.0, leg = 5.0, eps = 1e-6;
  const auto f = footprint({theta, leg, leg * std::cos(theta / 2) - eps});
  EXPECT_NEAR(f.width, eps, 1e-12);
}

TEST(Footprint, InvalidParamsThrow) { expect_kind(ErrorKind::Domain, [] { footprint({deg(150), 2, 1}); }); }

TEST(Footprint, PositiveOnValidGrid) {
  for (const auto& c : enumerate_grid(ParamGrid::standard()).cells) {
    if (!c.valid) continue;
    const auto f = footprint(c.params);
    EXPECT_GT(f.width, 0.0);
    EXPECT_GT(f.height, 0.0);
    EXPECT_TRUE(std::isfinite(f.width) && std::isfinite(f.height));
  }
}

TEST(Outline, FrameConvention) {
  const WedgeParams p{1.2, 4.0, 2.5};
  const auto o = outline(p);
  EXPECT_EQ(o.vertex.x, 2.5);
  EXPECT_EQ(o.vertex.y, 0.0);
  EXPECT_NEAR(o.base_upper.x, 2.5 - 4.0 * std::cos(0.6), 1e-15);
  EXPECT_NEAR(o.base_upper.y, 4.0 * std::sin(0.6), 1e-15);
  EXPECT_NEAR(o.base_lower.y, -o.base_upper.y, 0.0);
}

TEST(IsValid, Examples) {
  EXPECT_FALSE(is_valid(deg(150), 2, 1));
  EXPECT_TRUE(is_valid(deg(10), 12, 11));
  EXPECT_FALSE(is_valid(kPi, 5, 1));
  EXPECT_FALSE(is_valid(0.0, 5, 1));
  EXPECT_FALSE(is_valid(1.0, 5, 0.0));
  EXPECT_FALSE(is_valid(1.0, -5, -1.0));
  EXPECT_FALSE(is_valid(1.0, 2.0, 2.0 * std::cos(0.5)));  // boundary excluded
  EXPECT_FALSE(is_valid(NAN, 2, 1));
}

TEST(IsValid, HomogeneousInLegAndDistance) {
  for (double t : {0.2, 1.0, 2.0, 3.0}) {
    for (double l : {1.0, 3.0, 7.0}) {
      for (double d : {0.5, 2.0, 6.0}) {
        for (double k : {0.01, 0.5, 3.0, 100.0}) EXPECT_EQ(is_valid(t, l, d), is_valid(t, k * l, k * d));
      }
    }
  }
}

TEST(Grid, StandardGridCounts) {
  const auto e = enumerate_grid(ParamGrid::standard());
  EXPECT_EQ(e.total, 968u);
  EXPECT_EQ(e.cells.size(), 968u);
  const std::vector<double> t{10, 30, 50, 70, 90, 110, 130, 150};
  const std::vector<double> ls{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const std::vector<double> ds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  EXPECT_EQ(e.valid, oracle::count_valid(t, ls, ds));
  // Brute force gives 384, nine more than the 375 quoted for the original study.
  EXPECT_EQ(e.valid, 384u);
}

TEST(Grid, SingleCell) {
  const auto e = enumerate_grid(ParamGrid::from_degrees({90}, {2}, {1}));
  ASSERT_EQ(e.total, 1u);
  EXPECT_EQ(e.valid, 1u);
  EXPECT_TRUE(e.cells[0].valid);
}

TEST(Grid, TotalIsProductAndOrderThetaMajor) {
  const auto g = ParamGrid::from_degrees({20, 40, 60}, {1, 2}, {0.5, 1, 1.5, 2});
  const auto e = enumerate_grid(g);
  EXPECT_EQ(e.total, 24u);
  EXPECT_EQ(e.cells[1].params.vertex_dist, 1.0);
  EXPECT_EQ(e.cells[4].params.leg, 2.0);
  EXPECT_EQ(e.cells[8].params.theta, deg(40));
}

TEST(Grid, RejectsBadLists) {
  expect_kind(ErrorKind::Validation, [] { ParamGrid::from_degrees({}, {1}, {1}); });
  expect_kind(ErrorKind::Validation, [] { ParamGrid::from_degrees({10, 10}, {1}, {1}); });
  expect_kind(ErrorKind::Validation, [] { ParamGrid::from_degrees({10}, {2, 1}, {1}); });
  expect_kind(ErrorKind::Validation, [] { ParamGrid::from_degrees({10}, {1}, {-1}); });
}

TEST(Grid, JsonMatchesStandardFixture) {
  const auto g = grid_from_json(csv::read_file(fixture::data_path("fixtures/standard_grid.json")));
  const auto p = ParamGrid::standard();
  EXPECT_EQ(g.thetas, p.thetas);
  EXPECT_EQ(g.legs, p.legs);
  EXPECT_EQ(g.dists, p.dists);
  expect_kind(ErrorKind::Parse, [] { grid_from_json("{\"theta_deg\": [10]"); });
}

TEST(Grid, CsvShape) {
  const auto e = enumerate_grid(ParamGrid::standard());
  const auto text = grid_to_csv(e);
  EXPECT_EQ(text.rfind("theta_rad,leg_m,dist_m,valid\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 969);
  const auto scaled = grid_to_csv(enumerate_grid(ParamGrid::from_degrees({90}, {2}, {1})), 2.0);
  EXPECT_NE(scaled.find(",4,2,1\n"), std::string::npos);
}

TEST(ViewScale, Linear) {
  EXPECT_EQ(view_scale(10.0), 1.0);
  EXPECT_EQ(view_scale(5.0), 0.5);
  expect_kind(ErrorKind::Domain, [] { view_scale(0.0); });
}
