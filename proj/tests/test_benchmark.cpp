#include <gtest/gtest.h>

#include <random>

#include "cgr/benchmark.hpp"
#include "cgr/capacity.hpp"
#include "oracle.hpp"

using namespace cgr;

namespace {

constexpr TimeMs s_ = 1000;

Contact make(ContactId id, std::uint32_t from, std::uint32_t to, TimeMs start, TimeMs end, RateBps rate = 400) {
  return {id, id, NodeId{from}, NodeId{to}, start, end, rate, false};
}

ContactPlan nodes(int n) {
  ContactPlan cp;
  for (int i = 0; i < n; ++i) cp.add_node("n" + std::to_string(i), NodeKind::satellite);
  return cp;
}

// 0 -> 1 direct, or 0 -> 2 -> 1
ContactPlan diamond(TimeMs direct_end) {
  auto cp = nodes(3);
  cp.insert(make(1, 0, 1, 0, direct_end));
  cp.insert(make(2, 0, 2, 0, 100 * s_));
  cp.insert(make(3, 2, 1, 0, 100 * s_));
  return cp;
}

const EtoFn kNoQueue{};

}  // namespace

TEST(Ledger, DebitAndCredit) {
  auto cp = nodes(2);
  cp.insert(make(1, 0, 1, 0, 4 * s_));  // 1600 bits
  LinearVolumeLedger l(cp);
  EXPECT_EQ(l.initial(1), 1600);
  l.debit(1, 800);
  l.debit(1, 800);
  EXPECT_EQ(l.remaining(1), 0);
  EXPECT_THROW(l.debit(1, 1), std::logic_error);
  EXPECT_THROW(l.debit(9, 1), std::logic_error);
  l.credit(1, 800);
  EXPECT_EQ(l.remaining(1), 800);
  l.credit(1, 5000);
  EXPECT_EQ(l.remaining(1), 1600);
  EXPECT_EQ(l.remaining(9), 0);
}

TEST(Booking, ValueAt) {
  const Booking b{0, 1000, 0, 10, 20};
  EXPECT_EQ(b.value_at(-1), 0);
  EXPECT_EQ(b.value_at(0), 1000);
  EXPECT_EQ(b.value_at(10), 1000);
  EXPECT_EQ(b.value_at(15), 500);
  EXPECT_EQ(b.value_at(19), 100);
  EXPECT_EQ(b.value_at(20), 0);
  const Booking instant{0, 7, 0, 5, 5};
  EXPECT_EQ(instant.value_at(4), 7);
  EXPECT_EQ(instant.value_at(5), 0);
}

TEST(NeighborView, FitsAndBook) {
  NeighborBufferView v(2, 1500);
  v.set_capacity(NodeId{1}, std::nullopt);
  EXPECT_TRUE(v.try_book(NodeId{0}, {0, 1000, 0, 10, 20}));
  EXPECT_EQ(v.occupancy(NodeId{0}, 5), 1000);
  EXPECT_FALSE(v.fits(NodeId{0}, 5, 600));
  EXPECT_TRUE(v.fits(NodeId{0}, 15, 1000));
  EXPECT_FALSE(v.try_book(NodeId{0}, {1, 600, 5, 30, 40}));
  EXPECT_TRUE(v.try_book(NodeId{0}, {2, 1000, 15, 30, 40}));
  EXPECT_TRUE(v.try_book(NodeId{1}, {3, 1'000'000, 0, 1, 2}));
  EXPECT_EQ(v.total_booked(), 1'002'000);
  EXPECT_THROW(v.try_book(NodeId{0}, {4, 1, 10, 5, 20}), std::invalid_argument);
}

// Everything booked is either still held or drained, at any time.
TEST(NeighborView, BookingConservation) {
  std::mt19937_64 rng(4);
  NeighborBufferView v(3, 5000);
  std::vector<Booking> accepted;
  TimeMs t = 0;
  for (int k = 0; k < 300; ++k) {
    t += static_cast<TimeMs>(rng() % 50);
    const TimeMs ds = t + static_cast<TimeMs>(rng() % 100);
    const Booking b{k, 1 + static_cast<Bits>(rng() % 2000), t, ds, ds + static_cast<TimeMs>(rng() % 100)};
    if (v.try_book(NodeId{static_cast<std::uint32_t>(rng() % 3)}, b)) accepted.push_back(b);
  }
  ASSERT_FALSE(accepted.empty());
  for (TimeMs q = accepted.back().start; q <= t + 300; q += 7) {
    Bits held = 0, booked = 0;
    for (const auto& b : accepted) {
      booked += b.size;
      held += q < b.start ? b.size : b.value_at(q);
    }
    ASSERT_EQ(v.total_drained(q) + held, booked) << q;
  }
}

TEST(Candidate, Evaluate) {
  const auto cp = diamond(100 * s_);
  LinearVolumeLedger l(cp);
  const Bundle b{0, 800, NodeId{0}, NodeId{1}, 0};
  const auto direct = evaluate_candidate(cp, {1}, b, NodeId{0}, 0, kNoQueue, l);
  ASSERT_TRUE(direct);
  EXPECT_EQ(direct->bdt, 2 * s_);
  const auto queued = evaluate_candidate(cp, {1}, b, NodeId{0}, 0, [](const Contact&) { return TimeMs{3 * s_}; }, l);
  EXPECT_EQ(queued->hops[0].tx_start, 3 * s_);
  const auto two = evaluate_candidate(cp, {2, 3}, b, NodeId{0}, 0, [](const Contact&) { return TimeMs{3 * s_}; }, l);
  // only the first hop waits for the queue
  EXPECT_EQ(two->hops[1].tx_start, 5 * s_);
  EXPECT_FALSE(evaluate_candidate(cp, {3}, b, NodeId{0}, 0, kNoQueue, l));   // wrong sender
  EXPECT_FALSE(evaluate_candidate(cp, {2}, b, NodeId{0}, 0, kNoQueue, l));   // ends at 2
  EXPECT_FALSE(evaluate_candidate(cp, {}, b, NodeId{0}, 0, kNoQueue, l));
  EXPECT_FALSE(evaluate_candidate(cp, {1}, b, NodeId{0}, 99 * s_, kNoQueue, l));  // does not fit
}

TEST(Candidate, BestKeepsListOrderOnTies) {
  auto cp = nodes(2);
  cp.insert(make(1, 0, 1, 0, 100 * s_));
  cp.insert(make(2, 0, 1, 0, 100 * s_));
  LinearVolumeLedger l(cp);
  const Bundle b{0, 800, NodeId{0}, NodeId{1}, 0};
  EXPECT_EQ(best_candidate(cp, {{2}, {1}}, b, NodeId{0}, 0, kNoQueue, l)->hops[0].contact, 2);
  EXPECT_EQ(best_candidate(cp, {{1}, {2}}, b, NodeId{0}, 0, kNoQueue, l)->hops[0].contact, 1);
  EXPECT_FALSE(best_candidate(cp, {}, b, NodeId{0}, 0, kNoQueue, l));
}

TEST(SourceRoute, FirstBundleMatchesDijkstra) {
  std::mt19937_64 rng(8);
  const oracle::PlanGen gen;
  int found = 0;
  for (int round = 0; round < 300; ++round) {
    const auto cp = gen(rng);
    const auto n = static_cast<std::uint32_t>(cp.node_count());
    const Bundle b{0, 800, NodeId{0}, NodeId{1 + static_cast<std::uint32_t>(rng() % (n - 1))}, 0};
    LinearVolumeLedger l(cp);
    RouteList cache;
    const auto r = source_route(b, cp, l, 3, cache, 0, kNoQueue);
    const auto d = dijkstra_route(cp, b, 0);
    ASSERT_EQ(r.has_value(), d.has_value()) << round;
    if (!r) continue;
    ++found;
    EXPECT_EQ(r->bdt, d->bdt);
    for (const Hop& h : r->hops) EXPECT_EQ(l.remaining(h.contact), l.initial(h.contact) - 800);
  }
  EXPECT_GT(found, 30);
}

TEST(SourceRoute, SkipsContactWithoutVolume) {
  const auto cp = diamond(1 * s_);  // 400 bits direct
  LinearVolumeLedger l(cp);
  RouteList cache;
  const auto r = source_route(Bundle{0, 800, NodeId{0}, NodeId{1}, 0}, cp, l, 3, cache, 0, kNoQueue);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->contact_ids(), (std::vector<ContactId>{2, 3}));
}

// Linear accounting refuses the third bundle even though time would allow it.
TEST(SourceRoute, LedgerRunsOut) {
  auto cp = nodes(2);
  cp.insert(make(1, 0, 1, 0, 4 * s_));
  LinearVolumeLedger l(cp);
  RouteList cache;
  for (int i = 0; i < 2; ++i)
    EXPECT_TRUE(source_route(Bundle{i, 800, NodeId{0}, NodeId{1}, 0}, cp, l, 2, cache, 0, kNoQueue));
  EXPECT_FALSE(source_route(Bundle{2, 800, NodeId{0}, NodeId{1}, 0}, cp, l, 2, cache, 0, kNoQueue));
  EXPECT_EQ(l.remaining(1), 0);
  EXPECT_THROW(source_route(Bundle{3, 800, NodeId{0}, NodeId{1}, 0}, cp, l, 0, cache, 0, kNoQueue),
               std::invalid_argument);
}

TEST(SourceRoute, CacheFollowsRevision) {
  auto cp = diamond(10 * s_);
  LinearVolumeLedger l(cp);
  RouteList cache;
  ASSERT_TRUE(source_route(Bundle{0, 800, NodeId{0}, NodeId{1}, 0}, cp, l, 3, cache, 0, kNoQueue));
  EXPECT_TRUE(cache.valid_for(cp.revision()));
  EXPECT_EQ(cache.routes.size(), 2u);
  ASSERT_EQ(remove_expired(cp, 10 * s_), 1u);
  EXPECT_FALSE(cache.valid_for(cp.revision()));
  const auto r = source_route(Bundle{1, 800, NodeId{0}, NodeId{1}, 10 * s_}, cp, l, 3, cache, 10 * s_, kNoQueue);
  ASSERT_TRUE(r);
  EXPECT_EQ(cache.routes.size(), 1u);
  EXPECT_EQ(r->contact_ids(), (std::vector<ContactId>{2, 3}));
}

TEST(Reroute, CreditsStayLocal) {
  // bundle sits at node 2 with its old hop 3 debited; 3 is the only way on
  const auto cp = diamond(1 * s_);
  LinearVolumeLedger l(cp);
  const Bundle b{0, 800, NodeId{0}, NodeId{1}, 0};
  l.debit(3, contact_volume(cp.contact(3)) - 100);
  RerouteRequest req{NodeId{2}, 5 * s_, {NodeId{0}, NodeId{2}}, {}, {}};
  EXPECT_FALSE(reroute_from_node(b, cp, l, 3, req, kNoQueue));
  req.unused_hops = {3};
  const auto r = reroute_from_node(b, cp, l, 3, req, kNoQueue);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->contact_ids(), (std::vector<ContactId>{3}));
  EXPECT_EQ(r->hops[0].tx_start, 5 * s_);
  EXPECT_EQ(l.remaining(3), 100);
}

TEST(Reroute, HonoursVisitedAndExcluded) {
  auto cp = nodes(4);
  cp.insert(make(1, 1, 3, 0, 100 * s_));
  cp.insert(make(2, 1, 0, 0, 100 * s_));
  cp.insert(make(3, 0, 3, 0, 100 * s_));
  cp.insert(make(4, 1, 2, 0, 100 * s_));
  cp.insert(make(5, 2, 3, 0, 100 * s_));
  const LinearVolumeLedger l(cp);
  const Bundle b{0, 800, NodeId{0}, NodeId{3}, 0};
  RerouteRequest req{NodeId{1}, 0, {NodeId{0}, NodeId{1}}, {1}, {}};
  const auto r = reroute_from_node(b, cp, l, 3, req, kNoQueue);
  ASSERT_TRUE(r);
  // the direct hop is excluded and going back through 0 is a loop
  EXPECT_EQ(r->contact_ids(), (std::vector<ContactId>{4, 5}));
  req.excluded = {1, 4};
  EXPECT_FALSE(reroute_from_node(b, cp, l, 3, req, kNoQueue));
}
