#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgr/capacity.hpp"
#include "cgr/contact_plan.hpp"
#include "cgr/router.hpp"

namespace cgr {

enum class Algorithm { proposed, benchmark };

[[nodiscard]] std::string to_string(Algorithm a);
[[nodiscard]] Algorithm parse_algorithm(std::string_view s);  // throws std::invalid_argument

/// Stand-in for an unbounded link rate: 1 ms per 1000-bit bundle.
inline constexpr RateBps kInfiniteRate = 1'000'000'000;

struct SimConfig {
  Algorithm algorithm = Algorithm::proposed;
  int n_bundles = 200;
  Bits bundle_size = 800;
  TimeMs period = 2'000'000;          // workload spread
  std::optional<RateBps> rate;        // overrides every contact rate when set
  std::optional<int> buffer_bundles;  // per-node buffer in bundles; nullopt = unbounded
  int k = 10;
  std::optional<TimeMs> horizon;      // default: end of the last contact
  TimeMs time_step = 1000;
  double margin_fraction = 0.0;       // safety margin withheld from source routing (proposed)
  std::string source = "GS1";
  std::string destination = "GS2";
  std::uint64_t seed = 0;
  TimeMs jitter = 0;                  // uniform workload jitter in [0, jitter)

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

/// Bundle i created at i * period / n.
[[nodiscard]] std::vector<Bundle> generate_workload(int n_bundles, Bits size, TimeMs period, NodeId source,
                                                    NodeId destination, TimeMs jitter = 0, std::uint64_t seed = 0);

enum class TraceKind { generate, tx_start, tx_end, arrive, depart, deliver, bounce };

struct TraceRecord {
  TimeMs t = 0;
  TraceKind kind = TraceKind::generate;
  BundleId bundle = 0;
  NodeId node;              // node concerned (sender for tx_start, receiver for tx_end)
  ContactId contact = -1;
  ContactId origin = -1;
};

struct BundleMetrics {
  BundleId id = 0;
  TimeMs t_gen = 0;
  std::optional<TimeMs> t_delivered;
  int hops = 0;
  int reroutes = 0;
  int source_retries = 0;
};

struct Metrics {
  std::vector<BundleMetrics> per_bundle;
  double avg_time_ms = 0.0;  // delivered bundles only
  std::int64_t delivered = 0;
  std::int64_t undelivered = 0;
  std::int64_t reroutes_total = 0;
  std::int64_t source_retries_total = 0;
  std::int64_t link_collisions = 0;   // transmissions that found their link busy
  std::int64_t buffer_breaches = 0;   // realized occupancy above capacity (trace replay)
};

struct SimResult {
  SimConfig config;
  Metrics metrics;
  std::vector<CpSizeSample> cp_size;
  std::vector<TraceRecord> trace;
  std::vector<OverlayRecord> overlays;      // proposed only
  CommitJournal journal;                    // proposed only
  std::vector<std::optional<Bits>> capacity;  // per node, as simulated
  std::int64_t initial_cp_size = 0;
};

[[nodiscard]] SimResult run_simulation(const ContactPlan& scenario, const SimConfig& cfg);

/// Sweep points executed with OpenMP; results come back in input order.
[[nodiscard]] std::vector<SimResult> run_sweep(const ContactPlan& scenario, std::span<const SimConfig> points);
/// Same results, one point after the other.
[[nodiscard]] std::vector<SimResult> run_sweep_serial(const ContactPlan& scenario, std::span<const SimConfig> points);

/// Both algorithms for every (rate, N_b) with unbounded buffers.
[[nodiscard]] std::vector<SimConfig> capacity_experiment_points(const SimConfig& base, std::span<const RateBps> rates,
                                                                std::span<const int> n_bundles);
/// Both algorithms for every (buffer, N_b) at the stand-in infinite rate.
[[nodiscard]] std::vector<SimConfig> buffer_experiment_points(const SimConfig& base,
                                                              std::span<const std::optional<int>> buffers,
                                                              std::span<const int> n_bundles);

/// Peak of realized occupancy per node replayed from a trace.
[[nodiscard]] std::vector<Bits> realized_peaks(std::span<const TraceRecord> trace, std::size_t node_count,
                                               Bits bundle_size, NodeId source, NodeId destination);

[[nodiscard]] std::string per_bundle_csv(const Metrics& m);
[[nodiscard]] std::string summary_header();
[[nodiscard]] std::string summary_row(const SimResult& r);
[[nodiscard]] std::string summary_csv(std::span<const SimResult> results);

}  // namespace cgr
