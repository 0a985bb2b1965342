#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cgr/contact_plan.hpp"

namespace cgr {

using Vec3 = std::array<double, 3>;

inline constexpr double kEarthMu = 3.986004418e14;       // m^3/s^2
inline constexpr double kEarthRotation = 7.2921159e-5;   // rad/s
inline constexpr double kEarthRadius = 6371e3;           // m
/// 2020-08-19 20:55 UTC
inline constexpr double kDefaultEpochJd = 2459081.371528;

/// Walker-delta layout with zero phasing and circular orbits.
struct ConstellationSpec {
  int planes = 4;
  int sats = 16;
  double inclination_deg = 52.0;
  double radius_m = 7151e3;
  double epoch_jd = kDefaultEpochJd;

  /// Throws std::invalid_argument.
  void validate() const;
  [[nodiscard]] int per_plane() const { return sats / planes; }
  [[nodiscard]] int plane_of(int sat) const { return sat / per_plane(); }
  [[nodiscard]] double raan_deg(int sat) const;
  [[nodiscard]] double initial_anomaly_deg(int sat) const;
  [[nodiscard]] double mean_motion() const;  // rad/s
};

struct GroundStation {
  std::string name;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  bool uplink = false;    // emits contacts towards satellites
  bool downlink = false;  // receives contacts from satellites
};

/// Arbitrary defaults: GS1 near Rennes, GS2 near New York, links both ways.
[[nodiscard]] std::vector<GroundStation> default_ground_stations();

struct VisibilityRule {
  double max_range_m = 4500e3;
  std::optional<int> plane_hops = 2;
  double gs_min_elevation_deg = 0.0;
  double earth_radius_m = kEarthRadius;
};

[[nodiscard]] Vec3 propagate(const ConstellationSpec& spec, int sat, double t_s);
[[nodiscard]] Vec3 ground_position(const GroundStation& gs, double t_s, double epoch_jd,
                                   double earth_radius_m = kEarthRadius);
/// Greenwich mean sidereal angle in radians.
[[nodiscard]] double gmst_rad(double jd);

/// Cyclic distance between the planes of two satellites.
[[nodiscard]] int plane_hop_distance(const ConstellationSpec& spec, int a, int b);

/// Satellite to satellite: clear line of sight, within range and within the
/// plane-hop limit when one is given.
[[nodiscard]] bool visible(const Vec3& a, const Vec3& b, const VisibilityRule& rule, std::optional<int> hop_count);
/// Ground station to satellite: elevation at or above the threshold, within range.
[[nodiscard]] bool visible_from_ground(const Vec3& gs, const Vec3& sat, const VisibilityRule& rule);
[[nodiscard]] double elevation_deg(const Vec3& gs, const Vec3& sat);

struct ScenarioSpec {
  ConstellationSpec constellation;
  std::vector<GroundStation> ground_stations = default_ground_stations();
  VisibilityRule rule;
  int horizon_s = 86400;
  int step_s = 1;
  RateBps rate = 400;
};

/// Visibility sampled every step; each maximal visible run becomes a
/// contact [first, last + step). Satellites are named sat1..satN.
/// Contact ids follow (t_start, sender, receiver) order.
[[nodiscard]] ContactPlan build_contact_plan(const ScenarioSpec& spec);
/// Same plan computed pair by pair on one thread.
[[nodiscard]] ContactPlan build_contact_plan_serial(const ScenarioSpec& spec);

/// Maximal true runs of a sampled visibility pattern as [first, last + step) in ms.
[[nodiscard]] std::vector<TimeInterval> visibility_runs(const std::vector<bool>& samples, int step_s);

}  // namespace cgr
