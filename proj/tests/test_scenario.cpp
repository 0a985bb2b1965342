#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include "cgr/scenario.hpp"

using namespace cgr;

namespace {

double dist(const Vec3& a, const Vec3& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

ScenarioSpec short_spec(int sats, int planes, int hours) {
  ScenarioSpec s;
  s.constellation.sats = sats;
  s.constellation.planes = planes;
  s.horizon_s = hours * 3600;
  return s;
}

}  // namespace

TEST(Orbit, ConstantRadius) {
  const ConstellationSpec spec;
  EXPECT_DOUBLE_EQ(spec.radius_m, 7.151e6);
  for (int sat : {0, 5, 15})
    for (double t : {0.0, 1234.5, 86400.0}) EXPECT_NEAR(dist(propagate(spec, sat, t), {0, 0, 0}), 7.151e6, 1e-3);
}

TEST(Orbit, PeriodFromKepler) {
  const ConstellationSpec spec;
  // T = 2 pi sqrt(a^3 / mu) with a = 7151 km
  const double a = 7151e3;
  const double period = 2 * std::numbers::pi * std::sqrt(a * a * a / 3.986004418e14);
  EXPECT_NEAR(period, 6018.1, 0.1);
  EXPECT_NEAR(2 * std::numbers::pi / spec.mean_motion(), period, 1e-6);
  for (int sat : {0, 7}) {
    EXPECT_LT(dist(propagate(spec, sat, period), propagate(spec, sat, 0)), 1.0);
    EXPECT_GT(dist(propagate(spec, sat, period / 2), propagate(spec, sat, 0)), 2 * a - 1.0);
  }
}

TEST(Orbit, WalkerLayout) {
  const ConstellationSpec spec;  // 4 planes of 4
  EXPECT_EQ(spec.per_plane(), 4);
  EXPECT_EQ(spec.plane_of(5), 1);
  EXPECT_DOUBLE_EQ(spec.raan_deg(0), 0.0);
  EXPECT_DOUBLE_EQ(spec.raan_deg(5), 90.0);
  EXPECT_DOUBLE_EQ(spec.raan_deg(15), 270.0);
  EXPECT_DOUBLE_EQ(spec.initial_anomaly_deg(5), 90.0);
  EXPECT_DOUBLE_EQ(spec.initial_anomaly_deg(6), 180.0);
  EXPECT_EQ(plane_hop_distance(spec, 0, 12), 1);
  EXPECT_EQ(plane_hop_distance(spec, 0, 8), 2);
  // same plane, equal spacing: neighbours stay at the same distance
  for (double t : {0.0, 777.0, 4000.0})
    EXPECT_NEAR(dist(propagate(spec, 0, t), propagate(spec, 1, t)), 7151e3 * std::sqrt(2.0), 1e-3);
  ConstellationSpec bad;
  bad.sats = 5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = {};
  bad.radius_m = 6000e3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Visibility, EarthBlocksLineOfSight) {
  VisibilityRule open;
  open.max_range_m = 1e9;
  ConstellationSpec four;  // 90 degrees apart in a plane: chord dips to r cos 45 < R
  EXPECT_FALSE(visible(propagate(four, 0, 0), propagate(four, 2, 0), open, 0));
  EXPECT_FALSE(visible(propagate(four, 0, 0), propagate(four, 1, 0), open, 0));
  ConstellationSpec eight;
  eight.sats = 8;
  eight.planes = 1;  // 45 degrees apart: chord stays at r cos 22.5 > R
  EXPECT_TRUE(visible(propagate(eight, 0, 0), propagate(eight, 1, 0), open, 0));
  EXPECT_FALSE(visible(propagate(eight, 0, 0), propagate(eight, 1, 0), open, 3));
  EXPECT_FALSE(visible(propagate(eight, 0, 0), propagate(eight, 1, 0), VisibilityRule{}, 0));  // 5.5 Mm apart
}

TEST(Visibility, GroundElevation) {
  const double r = kEarthRadius;
  const Vec3 gs{r, 0, 0};
  EXPECT_NEAR(elevation_deg(gs, {r + 500e3, 0, 0}), 90.0, 1e-9);
  EXPECT_NEAR(elevation_deg(gs, {r, 1000e3, 0}), 0.0, 1e-9);
  VisibilityRule rule;
  EXPECT_TRUE(visible_from_ground(gs, {r, 1000e3, 0}, rule));
  EXPECT_FALSE(visible_from_ground(gs, {r - 1, 1000e3, 0}, rule));
  rule.gs_min_elevation_deg = 10.0;
  EXPECT_FALSE(visible_from_ground(gs, {r, 1000e3, 0}, rule));
  EXPECT_FALSE(visible_from_ground(gs, {r + 5000e3, 0, 0}, rule));  // out of range
  // the station turns with the Earth: back in place after one sidereal rotation
  const GroundStation g{"g", 10.0, 20.0, true, true};
  const double sidereal = 2 * std::numbers::pi / kEarthRotation;
  EXPECT_LT(dist(ground_position(g, 0, kDefaultEpochJd), ground_position(g, sidereal, kDefaultEpochJd)), 1e-3);
}

TEST(Visibility, Runs) {
  EXPECT_EQ(visibility_runs({false, true, true, true, false}, 1), (std::vector<TimeInterval>{{1000, 4000}}));
  EXPECT_EQ(visibility_runs({true, false, true}, 2), (std::vector<TimeInterval>{{0, 2000}, {4000, 6000}}));
  EXPECT_TRUE(visibility_runs({false, false}, 1).empty());
  EXPECT_TRUE(visibility_runs({}, 1).empty());
}

TEST(Plan, NothingVisible) {
  // two satellites on opposite sides of one plane; stations out of range
  auto s = short_spec(2, 1, 1);
  s.rule.max_range_m = 1.0;
  EXPECT_TRUE(build_contact_plan(s).empty());
}

// Zero phasing with an even plane count puts satellites of opposite planes on
// the same point at t = 0; they see each other at any range.
TEST(Plan, ZeroPhasingCoincidence) {
  const ConstellationSpec spec{4, 8};
  EXPECT_LT(dist(propagate(spec, 0, 0), propagate(spec, 5, 0)), 1e-6);
  auto s = short_spec(8, 4, 1);
  s.rule.max_range_m = 1.0;
  const auto cp = build_contact_plan(s);
  EXPECT_EQ(cp.size(), 8u);
  for (const auto& [id, c] : cp.contacts()) EXPECT_EQ(c.interval(), (TimeInterval{0, 1000}));
}

TEST(Plan, SymmetricSortedAndParallelMatchesSerial) {
  const auto s = short_spec(8, 4, 2);
  const auto cp = build_contact_plan(s);
  ASSERT_FALSE(cp.empty());
  EXPECT_EQ(serialize_contact_plan(cp), serialize_contact_plan(build_contact_plan_serial(s)));
  std::set<std::tuple<NodeId, NodeId, TimeMs, TimeMs>> links;
  for (const auto& [id, c] : cp.contacts()) links.insert({c.sender, c.receiver, c.t_start, c.t_end});
  std::tuple<TimeMs, std::uint32_t, std::uint32_t> prev{-1, 0, 0};
  for (const auto& [id, c] : cp.contacts()) {
    EXPECT_EQ(c.rate, 400);
    EXPECT_EQ(c.t_start % 1000, 0);
    const bool sat_pair = cp.node_info(c.sender).kind == NodeKind::satellite &&
                          cp.node_info(c.receiver).kind == NodeKind::satellite;
    if (sat_pair) EXPECT_TRUE(links.count({c.receiver, c.sender, c.t_start, c.t_end}));
    const std::tuple<TimeMs, std::uint32_t, std::uint32_t> key{c.t_start, c.sender.value, c.receiver.value};
    EXPECT_LT(prev, key);
    prev = key;
  }
  EXPECT_EQ(cp.node_info(cp.node("sat1")).kind, NodeKind::satellite);
  EXPECT_EQ(cp.node_info(cp.node("GS1")).kind, NodeKind::ground_station);
}

// Sanity band for plan size and mean contact duration over a day.
TEST(Plan, DayLongStatistics) {
  const auto cp = build_contact_plan(short_spec(16, 4, 24));
  double total = 0;
  for (const auto& [id, c] : cp.contacts()) total += static_cast<double>(c.duration()) / 1000.0;
  const double mean = total / static_cast<double>(cp.size());
  EXPECT_GE(cp.size(), 1739u);
  EXPECT_LE(cp.size(), 5217u);
  EXPECT_GE(mean, 417.0);
  EXPECT_LE(mean, 1252.0);
}
