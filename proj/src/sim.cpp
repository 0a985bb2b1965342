#include "cgr/sim.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "cgr/benchmark.hpp"

namespace cgr {

std::string to_string(Algorithm a) { return a == Algorithm::proposed ? "proposed" : "benchmark"; }

Algorithm parse_algorithm(std::string_view s) {
  if (s == "proposed") return Algorithm::proposed;
  if (s == "benchmark") return Algorithm::benchmark;
  throw std::invalid_argument(fmt::format("unknown algorithm '{}'", s));
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (n_bundles < 1) fail("n_bundles must be >= 1");
  if (bundle_size < 1) fail("bundle_size must be >= 1");
  if (period < 1) fail("period must be >= 1 ms");
  if (rate && *rate < 1) fail("rate must be positive");
  if (buffer_bundles && *buffer_bundles < 1) fail("buffer must hold at least one bundle");
  if (k < 1) fail("k must be >= 1");
  if (horizon && *horizon < 1) fail("horizon must be positive");
  if (time_step < 1) fail("time_step must be >= 1 ms");
  if (!(margin_fraction >= 0.0 && margin_fraction < 1.0)) fail("margin must lie in [0, 1)");
  if (source == destination) fail("source and destination must differ");
  if (jitter < 0) fail("jitter must be >= 0");
}

std::vector<Bundle> generate_workload(int n_bundles, Bits size, TimeMs period, NodeId source, NodeId destination,
                                      TimeMs jitter, std::uint64_t seed) {
  if (n_bundles < 1) throw std::invalid_argument("generate_workload: n_bundles must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Bundle> out;
  out.reserve(static_cast<std::size_t>(n_bundles));
  for (int i = 0; i < n_bundles; ++i) {
    TimeMs t = static_cast<TimeMs>(i) * period / n_bundles;
    if (jitter > 0) t += std::uniform_int_distribution<TimeMs>(0, jitter - 1)(rng);
    out.push_back(Bundle{i, size, source, destination, t});
  }
  return out;
}

namespace {

enum class EvKind { contact_close, tx_end, tx_start, bundle_generated, retry_route };

struct Event {
  TimeMs t;
  EvKind kind;
  BundleId bundle;
  std::uint64_t seq;

  bool operator>(const Event& o) const {
    return std::tie(t, kind, bundle, seq) > std::tie(o.t, o.kind, o.bundle, o.seq);
  }
};

struct LinkState {
  TimeMs busy_until = kTimeMin;
  std::set<BundleId> waiting;           // ready bundles, served lowest id first
  std::multiset<TimeMs> pending_ends;   // scheduled ends of bundles queued for this link
};

struct BundleRt {
  Bundle b;
  Route route;
  std::size_t hop = 0;
  NodeId at;
  std::vector<NodeId> visited;
  std::optional<std::pair<ContactId, TimeMs>> pending;  // (origin, scheduled end) registered for ETO
};

class Simulator {
 public:
  Simulator(const ContactPlan& scenario, const SimConfig& cfg);
  SimResult run();

 private:
  void push(TimeMs t, EvKind k, BundleId b) { events_.push(Event{t, k, b, seq_++}); }
  void trace(TimeMs t, TraceKind k, const BundleRt& b, NodeId node, const Hop* h = nullptr) {
    res_.trace.push_back({t, k, b.b.id, node, h ? h->contact : -1, h ? h->origin : -1});
  }
  void sample(TimeMs s);

  void attempt_route(BundleRt& b, TimeMs now);
  void on_ready(BundleRt& b, TimeMs now);
  void on_tx_end(BundleRt& b, TimeMs now);
  void transmit(BundleRt& b, TimeMs now);
  void serve(ContactId origin, TimeMs now);
  void reroute(BundleRt& b, TimeMs now, ContactId problem);
  void register_pending(BundleRt& b);
  void unregister_pending(BundleRt& b);
  void schedule_retry(BundleRt& b, TimeMs now);
  EtoFn eto() {
    return [this](const Contact& c) {
      const LinkState& l = links_[c.origin_id];
      TimeMs t = l.busy_until;
      if (!l.pending_ends.empty()) t = std::max(t, *l.pending_ends.rbegin());
      return t;
    };
  }

  SimConfig cfg_;
  ContactPlan plan_;  // original contacts (rates applied), never mutated
  NodeId src_, dst_;
  TimeMs horizon_ = 0;
  std::vector<std::optional<Bits>> cap_;

  std::optional<ProposedRouter> router_;
  ContactPlan bench_cp_;
  LinearVolumeLedger ledger_;
  NeighborBufferView view_;
  RouteList route_list_;

  std::vector<BundleRt> bundles_;
  std::map<ContactId, LinkState> links_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  TimeMs next_sample_ = 0;
  SimResult res_;
};

Simulator::Simulator(const ContactPlan& scenario, const SimConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  plan_ = cfg_.rate ? with_uniform_rate(scenario, *cfg_.rate) : scenario;
  src_ = plan_.node(cfg_.source);
  dst_ = plan_.node(cfg_.destination);
  horizon_ = 0;
  for (const auto& [id, c] : plan_.contacts()) horizon_ = std::max(horizon_, c.t_end);
  if (cfg_.horizon) horizon_ = *cfg_.horizon;

  cap_.assign(plan_.node_count(), std::nullopt);
  if (cfg_.buffer_bundles)
    for (std::uint32_t i = 0; i < cap_.size(); ++i)
      if (NodeId{i} != src_ && NodeId{i} != dst_) cap_[i] = *cfg_.buffer_bundles * cfg_.bundle_size;

  if (cfg_.algorithm == Algorithm::proposed) {
    ContactPlan routing = cfg_.margin_fraction > 0 ? partition_safety_margin(plan_, cfg_.margin_fraction).source : plan_;
    BufferTables tables(plan_.node_count(), std::nullopt);
    for (std::uint32_t i = 0; i < cap_.size(); ++i) {
      std::optional<Bits> c = cap_[i];
      if (c && cfg_.margin_fraction > 0)
        c = static_cast<Bits>(static_cast<double>(*c) * (1.0 - cfg_.margin_fraction));
      tables.set_capacity(NodeId{i}, c);
    }
    res_.initial_cp_size = static_cast<std::int64_t>(routing.size());
    router_.emplace(std::move(routing), std::move(tables), ProposedConfig{cfg_.bundle_size, cfg_.time_step});
  } else {
    bench_cp_ = plan_;
    ledger_ = LinearVolumeLedger(plan_);
    view_ = NeighborBufferView(plan_.node_count(), std::nullopt);
    for (std::uint32_t i = 0; i < cap_.size(); ++i) view_.set_capacity(NodeId{i}, cap_[i]);
    res_.initial_cp_size = static_cast<std::int64_t>(plan_.size());
  }

  for (const Bundle& b : generate_workload(cfg_.n_bundles, cfg_.bundle_size, cfg_.period, src_, dst_, cfg_.jitter,
                                           cfg_.seed)) {
    BundleRt rt;
    rt.b = b;
    rt.at = src_;
    rt.visited = {src_};
    bundles_.push_back(std::move(rt));
    res_.metrics.per_bundle.push_back(BundleMetrics{b.id, b.t_created, std::nullopt, 0, 0, 0});
    push(b.t_created, EvKind::bundle_generated, b.id);
  }
  res_.config = cfg_;
  res_.capacity = cap_;
}

void Simulator::sample(TimeMs s) {
  std::int64_t size = 0;
  if (router_) {
    router_->expire(s);
    size = static_cast<std::int64_t>(router_->plan().size());
  } else {
    remove_expired(bench_cp_, s);
    size = static_cast<std::int64_t>(bench_cp_.size());
  }
  const double norm = res_.initial_cp_size > 0 ? static_cast<double>(res_.initial_cp_size) : 1.0;
  res_.cp_size.push_back({s, size, static_cast<double>(size) / norm});
}

void Simulator::schedule_retry(BundleRt& b, TimeMs now) {
  const TimeMs next = now + cfg_.time_step;
  if (next <= horizon_) push(next, EvKind::retry_route, b.b.id);
}

void Simulator::register_pending(BundleRt& b) {
  const Hop& h = b.route.hops[b.hop];
  links_[h.origin].pending_ends.insert(h.tx_end);
  b.pending = {h.origin, h.tx_end};
}

void Simulator::unregister_pending(BundleRt& b) {
  if (!b.pending) return;
  auto& ends = links_[b.pending->first].pending_ends;
  ends.erase(ends.find(b.pending->second));
  b.pending.reset();
}

void Simulator::attempt_route(BundleRt& b, TimeMs now) {
  auto& m = res_.metrics.per_bundle[static_cast<std::size_t>(b.b.id)];
  std::optional<Route> r;
  if (router_) {
    r = router_->route_bundle(b.b, now);
  } else {
    r = source_route(b.b, bench_cp_, ledger_, cfg_.k, route_list_, now, eto());
  }
  if (!r) {
    ++m.source_retries;
    schedule_retry(b, now);
    return;
  }
  b.route = std::move(*r);
  b.hop = 0;
  if (!router_) register_pending(b);
  push(b.route.hops.front().tx_start, EvKind::tx_start, b.b.id);
}

void Simulator::transmit(BundleRt& b, TimeMs now) {
  Hop& h = b.route.hops[b.hop];
  const Contact& c = plan_.contact(h.origin);
  const TimeMs end = now + transmission_time(b.b.size, c.rate);
  if (router_ && (now != h.tx_start || end > c.t_end)) ++res_.metrics.per_bundle[static_cast<std::size_t>(b.b.id)].reroutes;
  LinkState& link = links_[h.origin];
  link.busy_until = end;
  unregister_pending(b);
  trace(now, TraceKind::tx_start, b, h.from, &h);
  if (b.at != src_) trace(now, TraceKind::depart, b, h.from, &h);
  // later hops keep their contacts; only their times move
  h.tx_start = now;
  h.tx_end = end;
  TimeMs arr = end;
  for (std::size_t i = b.hop + 1; !router_ && i < b.route.hops.size(); ++i) {
    Hop& n = b.route.hops[i];
    const Contact& nc = plan_.contact(n.origin);
    n.tx_start = std::max(arr, nc.t_start);
    n.tx_end = n.tx_start + transmission_time(b.b.size, nc.rate);
    arr = n.tx_end;
  }
  b.route.bdt = b.route.hops.back().tx_end;
  push(end, EvKind::tx_end, b.b.id);
}

void Simulator::serve(ContactId origin, TimeMs now) {
  LinkState& link = links_[origin];
  while (link.busy_until <= now && !link.waiting.empty()) {
    const BundleId id = *link.waiting.begin();
    link.waiting.erase(link.waiting.begin());
    BundleRt& b = bundles_[static_cast<std::size_t>(id)];
    if (router_) {
      transmit(b, now);
      return;
    }
    const Hop& h = b.route.hops[b.hop];
    const Contact& c = plan_.contact(h.contact);
    const TimeMs tx = transmission_time(b.b.size, c.rate);
    if (now + tx > c.t_end) {
      reroute(b, now, h.contact);
      continue;
    }
    if (h.to != dst_) {
      const Contact& next = plan_.contact(b.route.hops[b.hop + 1].contact);
      const TimeMs arrival = now + tx;
      const TimeMs wait = std::max<TimeMs>(0, next.t_start - arrival);
      const TimeMs tx2 = transmission_time(b.b.size, next.rate);
      const Booking booking{id, b.b.size, now, arrival + wait, arrival + wait + tx2};
      if (!view_.try_book(h.to, booking)) {
        reroute(b, now, h.contact);
        continue;
      }
    }
    transmit(b, now);
    return;
  }
}

void Simulator::reroute(BundleRt& b, TimeMs now, ContactId problem) {
  auto& m = res_.metrics.per_bundle[static_cast<std::size_t>(b.b.id)];
  ++m.reroutes;
  unregister_pending(b);
  RerouteRequest req;
  req.node = b.at;
  req.now = now;
  req.visited = b.visited;
  req.excluded = {problem};
  for (std::size_t i = b.hop; i < b.route.hops.size(); ++i) req.unused_hops.push_back(b.route.hops[i].contact);
  auto r = reroute_from_node(b.b, bench_cp_, ledger_, cfg_.k, req, eto());
  if (r) {
    b.route.hops.resize(b.hop);
    b.route.hops.insert(b.route.hops.end(), r->hops.begin(), r->hops.end());
    b.route.bdt = r->bdt;
    register_pending(b);
    push(b.route.hops[b.hop].tx_start, EvKind::tx_start, b.b.id);
    return;
  }
  // sent back to the source at no cost; the bounce counts as a reroute of its own
  if (b.at != src_) {
    trace(now, TraceKind::bounce, b, b.at);
    ++m.reroutes;
  }
  b.at = src_;
  b.visited = {src_};
  b.route = Route{};
  b.hop = 0;
  schedule_retry(b, now);
}

void Simulator::on_ready(BundleRt& b, TimeMs now) {
  const Hop& h = b.route.hops[b.hop];
  LinkState& link = links_[h.origin];
  if (router_ && link.busy_until > now) ++res_.metrics.link_collisions;
  link.waiting.insert(b.b.id);
  serve(h.origin, now);
}

void Simulator::on_tx_end(BundleRt& b, TimeMs now) {
  const Hop h = b.route.hops[b.hop];
  auto& m = res_.metrics.per_bundle[static_cast<std::size_t>(b.b.id)];
  trace(now, TraceKind::tx_end, b, h.to, &h);
  b.at = h.to;
  b.visited.push_back(h.to);
  ++m.hops;
  if (h.to == dst_) {
    trace(now, TraceKind::deliver, b, h.to, &h);
    m.t_delivered = now;
  } else {
    trace(now, TraceKind::arrive, b, h.to, &h);
    ++b.hop;
    if (!router_) register_pending(b);
    push(std::max(now, b.route.hops[b.hop].tx_start), EvKind::tx_start, b.b.id);
  }
  serve(h.origin, now);
}

SimResult Simulator::run() {
  while (!events_.empty()) {
    const Event e = events_.top();
    if (e.t > horizon_) break;
    events_.pop();
    for (; next_sample_ <= e.t; next_sample_ += 1000) sample(next_sample_);
    BundleRt& b = bundles_[static_cast<std::size_t>(e.bundle)];
    switch (e.kind) {
      case EvKind::bundle_generated:
        trace(e.t, TraceKind::generate, b, src_);
        attempt_route(b, e.t);
        break;
      case EvKind::retry_route:
        attempt_route(b, e.t);
        break;
      case EvKind::tx_start:
        on_ready(b, e.t);
        break;
      case EvKind::tx_end:
        on_tx_end(b, e.t);
        break;
      case EvKind::contact_close:
        break;
    }
  }
  for (; next_sample_ <= horizon_; next_sample_ += 1000) sample(next_sample_);

  if (router_) {
    res_.overlays = router_->overlays();
    res_.journal = router_->journal();
    // temporary restrictions show up in the sample of the second they happen in
    std::vector<std::int64_t> extra(res_.cp_size.size(), 0);
    for (const auto& o : res_.overlays) {
      const auto idx = static_cast<std::size_t>(o.time / 1000);
      if (idx < extra.size()) extra[idx] = std::max(extra[idx], o.added);
    }
    const double norm = res_.initial_cp_size > 0 ? static_cast<double>(res_.initial_cp_size) : 1.0;
    for (std::size_t i = 0; i < extra.size(); ++i) {
      res_.cp_size[i].size += extra[i];
      res_.cp_size[i].normalized = static_cast<double>(res_.cp_size[i].size) / norm;
    }
  }

  Metrics& m = res_.metrics;
  double total = 0.0;
  for (const auto& pb : m.per_bundle) {
    m.reroutes_total += pb.reroutes;
    m.source_retries_total += pb.source_retries;
    if (pb.t_delivered) {
      ++m.delivered;
      total += static_cast<double>(*pb.t_delivered - pb.t_gen);
    } else {
      ++m.undelivered;
    }
  }
  m.avg_time_ms = m.delivered > 0 ? total / static_cast<double>(m.delivered) : 0.0;
  const auto peaks = realized_peaks(res_.trace, plan_.node_count(), cfg_.bundle_size, src_, dst_);
  for (std::size_t i = 0; i < peaks.size(); ++i)
    if (cap_[i] && peaks[i] > *cap_[i]) ++m.buffer_breaches;
  return std::move(res_);
}

}  // namespace

SimResult run_simulation(const ContactPlan& scenario, const SimConfig& cfg) { return Simulator(scenario, cfg).run(); }

std::vector<SimResult> run_sweep_serial(const ContactPlan& scenario, std::span<const SimConfig> points) {
  std::vector<SimResult> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(run_simulation(scenario, p));
  return out;
}

std::vector<SimResult> run_sweep(const ContactPlan& scenario, std::span<const SimConfig> points) {
  std::vector<SimResult> out(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = run_simulation(scenario, points[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<SimConfig> capacity_experiment_points(const SimConfig& base, std::span<const RateBps> rates,
                                                  std::span<const int> n_bundles) {
  std::vector<SimConfig> out;
  for (Algorithm a : {Algorithm::proposed, Algorithm::benchmark})
    for (RateBps r : rates)
      for (int nb : n_bundles) {
        SimConfig c = base;
        c.algorithm = a;
        c.rate = r;
        c.n_bundles = nb;
        c.buffer_bundles.reset();
        out.push_back(c);
      }
  return out;
}

std::vector<SimConfig> buffer_experiment_points(const SimConfig& base, std::span<const std::optional<int>> buffers,
                                                std::span<const int> n_bundles) {
  std::vector<SimConfig> out;
  for (Algorithm a : {Algorithm::proposed, Algorithm::benchmark})
    for (const auto& buf : buffers)
      for (int nb : n_bundles) {
        SimConfig c = base;
        c.algorithm = a;
        c.rate = kInfiniteRate;
        c.n_bundles = nb;
        c.buffer_bundles = buf;
        out.push_back(c);
      }
  return out;
}

std::vector<Bits> realized_peaks(std::span<const TraceRecord> trace, std::size_t node_count, Bits bundle_size,
                                 NodeId source, NodeId destination) {
  std::vector<std::vector<std::pair<TimeMs, Bits>>> changes(node_count);
  for (const auto& r : trace) {
    if (r.node == source || r.node == destination || r.node.value >= node_count) continue;
    if (r.kind == TraceKind::arrive) changes[r.node.value].push_back({r.t, bundle_size});
    if (r.kind == TraceKind::depart || r.kind == TraceKind::bounce) changes[r.node.value].push_back({r.t, -bundle_size});
  }
  std::vector<Bits> peaks(node_count, 0);
  for (std::size_t n = 0; n < node_count; ++n) {
    auto& v = changes[n];
    // a departure and an arrival at the same instant do not overlap
    std::sort(v.begin(), v.end());
    Bits level = 0;
    for (std::size_t i = 0; i < v.size();) {
      const TimeMs t = v[i].first;
      for (; i < v.size() && v[i].first == t; ++i) level += v[i].second;
      peaks[n] = std::max(peaks[n], level);
    }
  }
  return peaks;
}

std::string per_bundle_csv(const Metrics& m) {
  std::string out = "bundle_id,t_gen_ms,t_delivered_ms,hops,reroutes,delivered\n";
  for (const auto& b : m.per_bundle)
    out += fmt::format("{},{},{},{},{},{}\n", b.id, b.t_gen, b.t_delivered ? fmt::format("{}", *b.t_delivered) : "",
                       b.hops, b.reroutes, b.t_delivered ? 1 : 0);
  return out;
}

std::string summary_header() { return "algorithm,N_b,rate_bps,buffer_bundles,avg_time_ms,reroutes_total,undelivered\n"; }

std::string summary_row(const SimResult& r) {
  const auto& c = r.config;
  const std::string rate = !c.rate ? "plan" : *c.rate == kInfiniteRate ? "inf" : fmt::format("{}", *c.rate);
  const std::string buf = c.buffer_bundles ? fmt::format("{}", *c.buffer_bundles) : "inf";
  return fmt::format("{},{},{},{},{:.3f},{},{}\n", to_string(c.algorithm), c.n_bundles, rate, buf,
                     r.metrics.avg_time_ms, r.metrics.reroutes_total, r.metrics.undelivered);
}

std::string summary_csv(std::span<const SimResult> results) {
  std::string out = summary_header();
  for (const auto& r : results) out += summary_row(r);
  return out;
}

}  // namespace cgr
