#include <doctest.h>

#include <map>

#include "aest/engine.hpp"

using namespace aest;

namespace {

struct Recorder : RunObserver {
  std::vector<TraceEvent> events;
  void on_event(const TraceEvent& e) override { events.push_back(e); }
};

auto order_key(const TraceEvent& e) {
  return std::make_tuple(e.round, static_cast<int>(e.stage), static_cast<int>(e.step), e.id, e.seq);
}

bool same_events(const std::vector<TraceEvent>& a, const std::vector<TraceEvent>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto& x = a[k];
    const auto& y = b[k];
    if (order_key(x) != order_key(y) || x.kind != y.kind || x.message != y.message ||
        x.peer != y.peer || x.level != y.level || x.correct != y.correct || x.known != y.known ||
        x.reason != y.reason) {
      return false;
    }
  }
  return true;
}

RunConfig single_processor() {
  RunConfig c;
  c.n = 1;
  c.params = EstimationParams(0.5, 0.1);
  c.model = LinearFraction{0.0};
  c.crash_pattern = NoCrashes{};
  c.reliability = ConstantReliability{1.0};
  return c;
}

}  // namespace

TEST_CASE("n = 1 queries itself, professes to itself and halts") {
  Recorder rec;
  const auto r = run(single_processor(), &rec);
  CHECK(r.completion == Completion::all_halted);
  REQUIRE(r.halt_rounds()[0]);
  // 53 correct self-results are needed; the 53rd lands in round 52, which is
  // also the round of the first (and halting) self-Profess.
  CHECK(*r.halt_rounds()[0] == 52);
  CHECK(r.metrics.rounds_to_all_halt == 53);
  REQUIRE(r.estimates[0].size() == 1);
  CHECK(r.estimates[0][0].value() == gamma1(EstimationParams(0.5, 0.1)) / 52);

  std::size_t enlighten = 0, halts = 0, professes = 0;
  for (const auto& e : rec.events) {
    if (e.kind == EventKind::send && e.message == MessageKind::request) CHECK(e.peer == 0u);
    if (e.kind == EventKind::enlighten) {
      ++enlighten;
      CHECK(e.round == 52);
      CHECK(e.stage == Stage::response);
    }
    if (e.kind == EventKind::send && e.message == MessageKind::profess) ++professes;
    if (e.kind == EventKind::halt) ++halts;
  }
  CHECK(enlighten == 1);
  CHECK(professes == 1);
  CHECK(halts == 1);
  CHECK(rec.events.back().kind == EventKind::halt);
  CHECK(r.metrics.ledger_balanced());
  // 9 steps per round.
  CHECK(r.metrics.work_steps == 53 * 9);
  CHECK(r.metrics.messages_total == 53 * 3);
}

TEST_CASE("same config gives identical runs and traces") {
  RunConfig c;
  c.n = 48;
  c.params = EstimationParams(0.5, 0.2);
  c.model = LinearFraction{0.25};
  c.crash_pattern = SpreadCrashes{20};
  c.reliability = UniformReliability{0.4, 1.0};
  c.seed = 12;
  Recorder a, b;
  const auto ra = run(c, &a);
  const auto rb = run(c, &b);
  CHECK(same_events(a.events, b.events));
  CHECK(ra.metrics.messages_total == rb.metrics.messages_total);
  CHECK(ra.metrics.per_processor_halt_round == rb.metrics.per_processor_halt_round);
  for (std::size_t i = 0; i < c.n; ++i) CHECK(ra.estimates[i] == rb.estimates[i]);

  c.seed = 13;
  Recorder d;
  run(c, &d);
  CHECK_FALSE(same_events(a.events, d.events));
}

TEST_CASE("trace order and accounting on a crashy run") {
  RunConfig c;
  c.n = 40;
  c.params = EstimationParams(0.5, 0.2);
  c.model = LinearFraction{0.5};
  c.crash_pattern = SpreadCrashes{15};
  c.reliability = UniformReliability{0.5, 1.0};
  c.seed = 4;
  Recorder rec;
  const auto r = run(c, &rec);
  CHECK(r.completion == Completion::all_halted);
  for (std::size_t k = 1; k < rec.events.size(); ++k) {
    CHECK(order_key(rec.events[k - 1]) < order_key(rec.events[k]));
  }
  std::map<ProcessorId, int> crashes;
  std::uint64_t sends = 0, arrivals = 0;
  for (const auto& e : rec.events) {
    if (e.kind == EventKind::crash) {
      ++crashes[e.id];
      CHECK(r.schedule.crash_round(e.id) == e.round);
    }
    if (e.kind == EventKind::send) ++sends;
    if (e.kind == EventKind::receive || e.kind == EventKind::drop) ++arrivals;
  }
  for (const auto& [id, count] : crashes) CHECK(count == 1);
  CHECK(crashes.size() == r.schedule.crash_count());
  CHECK(sends == r.metrics.messages_total);
  CHECK(arrivals == r.metrics.messages_total);
  CHECK(r.metrics.ledger_balanced());
  CHECK(r.metrics.dropped_to_crashed > 0);
  const auto acc = accuracy(r);
  CHECK(acc.missed_crashes == 0);
}

TEST_CASE("the round cap stops a run") {
  auto c = single_processor();
  c.max_rounds = 10;
  const auto r = run(c);
  CHECK(r.completion == Completion::round_cap_hit);
  CHECK(r.rounds_executed == 10);
  CHECK(r.metrics.rounds_to_all_halt == 10);
  CHECK(r.estimates[0].empty());
}

TEST_CASE("default round caps") {
  RunConfig c;
  c.n = 1024;
  c.model = LinearFraction{0.25};
  CHECK(default_max_rounds(c) == 640);
  c.model = FractionalPolynomial{};
  CHECK(default_max_rounds(c) == 8192);
  c.n = 2;
  CHECK(default_max_rounds(c) == 8 * 53);
}

TEST_CASE("config validation") {
  RunConfig c;
  c.n = 0;
  CHECK_THROWS_AS(run(c), DomainError);
  c.n = 5;
  c.model = PolyLog{2.0, 1.0};
  CHECK_THROWS_AS(run(c), DomainError);
  c.model = LinearFraction{};
  c.reliability = ExplicitReliability{{0.5, 0.5}};
  CHECK_THROWS_AS(run(c), DomainError);
}

TEST_CASE("deliver routes and drops") {
  CrashSchedule schedule(4);
  schedule.set_crash(2, 3);
  std::vector<std::uint8_t> halted = {0, 0, 0, 1};
  Mailbox<int> box(4);
  std::vector<DroppedMessage> dropped;
  RunMetrics m;
  const auto kind = [](int) { return MessageKind::request; };

  std::vector<Addressed<int>> msgs = {{0, 1, 10}, {1, 2, 11}, {0, 3, 12}, {3, 1, 13}, {2, 2, 14}};
  deliver(std::span(msgs), schedule, halted, 3, box, dropped, m, kind);
  CHECK(box.inbox(1).size() == 2);
  CHECK(box.inbox(1)[0] == 10);
  CHECK(box.inbox(1)[1] == 13);
  CHECK(box.inbox(2).empty());
  REQUIRE(dropped.size() == 3);
  CHECK(dropped[0].to == 2);
  CHECK(dropped[0].reason == DropReason::crashed);
  CHECK(dropped[2].reason == DropReason::halted);
  CHECK(m.delivered == 2);
  CHECK(m.dropped_to_crashed == 2);
  CHECK(m.dropped_to_halted == 1);

  // Before its crash round the processor still receives.
  std::vector<Addressed<int>> early = {{1, 2, 20}};
  deliver(std::span(early), schedule, halted, 2, box, dropped, m, kind);
  CHECK(box.inbox(2).size() == 1);
  CHECK(box.inbox(1).empty());

  std::vector<Addressed<int>> none;
  deliver(std::span(none), schedule, halted, 2, box, dropped, m, kind);
  for (ProcessorId i = 0; i < 4; ++i) CHECK(box.inbox(i).empty());
}

TEST_CASE("work accounting per step") {
  RunMetrics m;
  account_step(m, 0, {}, {0, 0, 0, 5}, 0);
  CHECK(m.messages_total == 5);
  CHECK(m.messages(MessageKind::profess) == 5);
  CHECK(m.work_steps == 1);
  account_step(m, 0, {}, {}, 0);
  CHECK(m.messages_total == 5);
  CHECK(m.work_steps == 2);
}

TEST_CASE("n = 256 linear-fraction reference run") {
  RunConfig c;
  c.n = 256;
  c.params = EstimationParams(0.5, 0.1);
  c.model = LinearFraction{0.25};
  c.crash_pattern = UpfrontCrashes{};
  c.reliability = UniformReliability{0.5, 1.0};
  c.seed = 7;
  const auto r = run(c);
  CHECK(r.completion == Completion::all_halted);
  CHECK(r.metrics.rounds_to_all_halt <= default_max_rounds(c));
  const auto acc = accuracy(r);
  CHECK(acc.missed_crashes == 0);
  CHECK(acc.fraction_within_band >= 0.9);
}
