#include "cgr/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace cgr {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Segment a-b clears the sphere of radius r centred at the origin.
bool clear_of_sphere(const Vec3& a, const Vec3& b, double r) {
  const Vec3 d = sub(b, a);
  const double dd = dot(d, d);
  double t = dd > 0 ? -dot(a, d) / dd : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec3 p{a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]};
  return dot(p, p) >= r * r;
}

}  // namespace

void ConstellationSpec::validate() const {
  if (planes < 1) throw std::invalid_argument("planes must be >= 1");
  if (sats < 1) throw std::invalid_argument("sats must be >= 1");
  if (sats % planes != 0)
    throw std::invalid_argument(fmt::format("sats ({}) must be divisible by planes ({})", sats, planes));
  if (radius_m <= kEarthRadius) throw std::invalid_argument("orbit radius must exceed the Earth radius");
}

double ConstellationSpec::raan_deg(int sat) const { return 360.0 * plane_of(sat) / planes; }

double ConstellationSpec::initial_anomaly_deg(int sat) const { return 360.0 * (sat % per_plane()) / per_plane(); }

double ConstellationSpec::mean_motion() const { return std::sqrt(kEarthMu / (radius_m * radius_m * radius_m)); }

std::vector<GroundStation> default_ground_stations() {
  return {{"GS1", 48.11, -1.68, true, true}, {"GS2", 40.71, -74.0, true, true}};
}

Vec3 propagate(const ConstellationSpec& spec, int sat, double t_s) {
  const double raan = spec.raan_deg(sat) * kDeg;
  const double inc = spec.inclination_deg * kDeg;
  const double u = spec.initial_anomaly_deg(sat) * kDeg + spec.mean_motion() * t_s;
  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(inc), si = std::sin(inc);
  return {spec.radius_m * (co * cu - so * su * ci), spec.radius_m * (so * cu + co * su * ci),
          spec.radius_m * (su * si)};
}

double gmst_rad(double jd) {
  const double deg = std::fmod(280.46061837 + 360.98564736629 * (jd - 2451545.0), 360.0);
  return (deg < 0 ? deg + 360.0 : deg) * kDeg;
}

Vec3 ground_position(const GroundStation& gs, double t_s, double epoch_jd, double earth_radius_m) {
  const double lat = gs.lat_deg * kDeg;
  const double lon = gs.lon_deg * kDeg + gmst_rad(epoch_jd) + kEarthRotation * t_s;
  return {earth_radius_m * std::cos(lat) * std::cos(lon), earth_radius_m * std::cos(lat) * std::sin(lon),
          earth_radius_m * std::sin(lat)};
}

int plane_hop_distance(const ConstellationSpec& spec, int a, int b) {
  const int d = std::abs(spec.plane_of(a) - spec.plane_of(b));
  return std::min(d, spec.planes - d);
}

bool visible(const Vec3& a, const Vec3& b, const VisibilityRule& rule, std::optional<int> hop_count) {
  if (rule.plane_hops && hop_count && *hop_count > *rule.plane_hops) return false;
  if (norm(sub(a, b)) > rule.max_range_m) return false;
  return clear_of_sphere(a, b, rule.earth_radius_m);
}

double elevation_deg(const Vec3& gs, const Vec3& sat) {
  const Vec3 d = sub(sat, gs);
  return std::asin(std::clamp(dot(d, gs) / (norm(d) * norm(gs)), -1.0, 1.0)) / kDeg;
}

bool visible_from_ground(const Vec3& gs, const Vec3& sat, const VisibilityRule& rule) {
  if (norm(sub(sat, gs)) > rule.max_range_m) return false;
  return elevation_deg(gs, sat) >= rule.gs_min_elevation_deg;
}

std::vector<TimeInterval> visibility_runs(const std::vector<bool>& samples, int step_s) {
  std::vector<TimeInterval> out;
  const TimeMs step = static_cast<TimeMs>(step_s) * 1000;
  std::size_t i = 0;
  while (i < samples.size()) {
    if (!samples[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < samples.size() && samples[j + 1]) ++j;
    out.push_back({static_cast<TimeMs>(i) * step, static_cast<TimeMs>(j) * step + step});
    i = j + 1;
  }
  return out;
}

namespace {

// One visibility question: endpoints are satellite indices, or ground
// stations encoded as -1 - index.
struct PairJob {
  int a = 0;
  int b = 0;
  bool both_ways = false;  // satellite pairs: emit a->b and b->a
};

std::vector<PairJob> pair_jobs(const ScenarioSpec& s) {
  std::vector<PairJob> jobs;
  const int n = s.constellation.sats;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) jobs.push_back({a, b, true});
  for (int g = 0; g < static_cast<int>(s.ground_stations.size()); ++g)
    for (int sat = 0; sat < n; ++sat) {
      if (s.ground_stations[g].uplink) jobs.push_back({-1 - g, sat, false});
      if (s.ground_stations[g].downlink) jobs.push_back({sat, -1 - g, false});
    }
  return jobs;
}

std::vector<TimeInterval> job_runs(const ScenarioSpec& s, const PairJob& job) {
  const auto samples_n = static_cast<std::size_t>(s.horizon_s / s.step_s);
  std::vector<bool> vis(samples_n);
  const auto& c = s.constellation;
  for (std::size_t k = 0; k < samples_n; ++k) {
    const double t = static_cast<double>(k) * s.step_s;
    if (job.a >= 0 && job.b >= 0) {
      vis[k] = visible(propagate(c, job.a, t), propagate(c, job.b, t), s.rule, plane_hop_distance(c, job.a, job.b));
    } else {
      const int g = job.a < 0 ? -1 - job.a : -1 - job.b;
      const int sat = job.a < 0 ? job.b : job.a;
      vis[k] = visible_from_ground(ground_position(s.ground_stations[g], t, c.epoch_jd, s.rule.earth_radius_m),
                                   propagate(c, sat, t), s.rule);
    }
  }
  return visibility_runs(vis, s.step_s);
}

ContactPlan assemble(const ScenarioSpec& s, const std::vector<PairJob>& jobs,
                     const std::vector<std::vector<TimeInterval>>& runs) {
  std::vector<NodeInfo> nodes;
  const int n = s.constellation.sats;
  for (int i = 0; i < n; ++i)
    nodes.push_back({NodeId{static_cast<std::uint32_t>(i)}, fmt::format("sat{}", i + 1), NodeKind::satellite});
  for (std::size_t g = 0; g < s.ground_stations.size(); ++g)
    nodes.push_back({NodeId{static_cast<std::uint32_t>(n + g)}, s.ground_stations[g].name, NodeKind::ground_station});
  auto node_of = [n](int e) { return NodeId{static_cast<std::uint32_t>(e >= 0 ? e : n + (-1 - e))}; };

  std::vector<Contact> contacts;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    for (const TimeInterval& iv : runs[j]) {
      Contact c;
      c.sender = node_of(jobs[j].a);
      c.receiver = node_of(jobs[j].b);
      c.t_start = iv.begin;
      c.t_end = iv.end;
      c.rate = s.rate;
      contacts.push_back(c);
      if (jobs[j].both_ways) {
        std::swap(c.sender, c.receiver);
        contacts.push_back(c);
      }
    }
  std::sort(contacts.begin(), contacts.end(), [](const Contact& x, const Contact& y) {
    return std::tie(x.t_start, x.sender.value, x.receiver.value) < std::tie(y.t_start, y.sender.value, y.receiver.value);
  });
  for (std::size_t i = 0; i < contacts.size(); ++i) contacts[i].id = contacts[i].origin_id = static_cast<ContactId>(i + 1);
  return ContactPlan(nodes, contacts);
}

void check(const ScenarioSpec& s) {
  s.constellation.validate();
  if (s.step_s < 1) throw std::invalid_argument("step must be >= 1 s");
  if (s.horizon_s < s.step_s) throw std::invalid_argument("horizon must cover at least one step");
  if (s.rate < 1) throw std::invalid_argument("rate must be positive");
  if (!(s.rule.max_range_m > 0)) throw std::invalid_argument("max_range must be positive");
}

}  // namespace

ContactPlan build_contact_plan(const ScenarioSpec& spec) {
  check(spec);
  const auto jobs = pair_jobs(spec);
  std::vector<std::vector<TimeInterval>> runs(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) runs[static_cast<std::size_t>(i)] = job_runs(spec, jobs[static_cast<std::size_t>(i)]);
  return assemble(spec, jobs, runs);
}

ContactPlan build_contact_plan_serial(const ScenarioSpec& spec) {
  check(spec);
  const auto jobs = pair_jobs(spec);
  std::vector<std::vector<TimeInterval>> runs;
  runs.reserve(jobs.size());
  for (const auto& j : jobs) runs.push_back(job_runs(spec, j));
  return assemble(spec, jobs, runs);
}

}  // namespace cgr
