#include <doctest.h>

#include <algorithm>

#include "aest/protocol.hpp"

using namespace aest;

namespace {

const EstimationParams kParams(0.5, 0.1);

Profess profess_from(ProcessorId src, Level level, KnowledgeSnapshot k = nullptr) {
  return Profess{std::move(k), level, src};
}

}  // namespace

TEST_CASE("priority order") {
  CHECK(priority_less({2, 9}, {3, 1}));
  CHECK(priority_less({3, 1}, {3, 7}));
  CHECK_FALSE(priority_less({3, 7}, {3, 7}));
}

TEST_CASE("constants") {
  const ProtocolConstants c1(1, kParams);
  CHECK(c1.request_cap == 1);
  CHECK(c1.halt_level == 0);
  CHECK(c1.required_correct == 53);
  const ProtocolConstants c(1024, kParams);
  CHECK(c.request_cap == 10);
  CHECK(c.halt_level == 10);
  CHECK_THROWS_AS(ProtocolConstants(0, kParams), DomainError);
}

TEST_CASE("profess fan-out") {
  CHECK(profess_fanout(0, 1024) == 5);
  CHECK(profess_fanout(1, 1024) == 10);
  CHECK(profess_fanout(3, 1024) == 40);
  CHECK(profess_fanout(0, 1) == 1);
  CHECK(profess_fanout(0, 3) == 1);
  CHECK(profess_fanout(900, 16) == 64 * 16 * 4);
}

TEST_CASE("query_send") {
  const ProtocolConstants c1(1, kParams);
  ProcessorState s1(0, c1);
  auto rng = rng_stream(1, 0, 0, StreamDomain::query);
  const auto out = query_send(s1, rng, c1);
  CHECK(out.to == 0);
  REQUIRE(s1.pending_query);
  CHECK(s1.pending_query->target == 0);

  const ProtocolConstants c(64, kParams);
  ProcessorState a(5, c), b(5, c);
  auto ra = rng_stream(3, 5, 2, StreamDomain::query);
  auto rb = rng_stream(3, 5, 2, StreamDomain::query);
  CHECK(query_send(a, ra, c).to == query_send(b, rb, c).to);
}

TEST_CASE("query_compute caps the served requests") {
  const ProtocolConstants c(1024, kParams);
  ProcessorState s(0, c);
  std::vector<TaskRequest> inbox;
  for (ProcessorId k = 0; k < 14; ++k) inbox.push_back({k, k * 3});
  auto rng = rng_stream(1, 0, 0, StreamDomain::query);
  const auto plan = query_compute(s, inbox, rng, c, [] { return true; });
  CHECK(plan.responses.size() == 10);
  CHECK(plan.dropped == 4);
  std::vector<ProcessorId> who;
  for (const auto& r : plan.responses) {
    CHECK(r.correct);
    who.push_back(r.requester);
  }
  CHECK(std::ranges::is_sorted(who));
  CHECK(std::ranges::adjacent_find(who) == who.end());

  const auto empty = query_compute(s, {}, rng, c, [] { return true; });
  CHECK(empty.responses.empty());

  std::vector<TaskRequest> few = {{1, 4}, {2, 9}};
  const auto plan2 = query_compute(s, few, rng, c, [] { return false; });
  REQUIRE(plan2.responses.size() == 2);
  CHECK_FALSE(plan2.responses[0].correct);
  CHECK(plan2.dropped == 0);
}

TEST_CASE("response_receive records the outcome") {
  const ProtocolConstants c(8, kParams);
  RecordBook book;
  auto fresh = [&] {
    ProcessorState s(2, c);
    s.round = 7;
    s.pending_query = PendingQuery{4, 1};
    return s;
  };
  SUBCASE("correct") {
    auto s = fresh();
    std::vector<TaskResponse> in = {{true, 4}};
    const auto r = response_receive(s, in, book);
    CHECK(r.outcome == Outcome::correct);
    CHECK(book.at(r.record).record == ResultRecord{Outcome::correct, 2, 7});
    CHECK(book.at(r.record).target == 4);
    CHECK(s.knowledge.contains(r.record));
    CHECK_FALSE(s.pending_query);
  }
  SUBCASE("silence means a crash record") {
    auto s = fresh();
    std::vector<TaskResponse> in = {{true, 3}};
    const auto r = response_receive(s, in, book);
    CHECK(r.outcome == Outcome::no_response);
    CHECK(s.knowledge.has_crash_record(4));
  }
  SUBCASE("incorrect") {
    auto s = fresh();
    std::vector<TaskResponse> in = {{false, 4}};
    CHECK(response_receive(s, in, book).outcome == Outcome::incorrect);
  }
}

TEST_CASE("response_compute enlightenment") {
  const ProtocolConstants c(2, kParams);
  RecordBook book;
  ProcessorState s(0, c);
  for (Round r = 0; r < 53; ++r) s.knowledge.insert(book.append(0, {Outcome::correct, 0, r}), book);
  CHECK_FALSE(response_compute(s));
  for (Round r = 0; r < 52; ++r) s.knowledge.insert(book.append(1, {Outcome::correct, 1, r}), book);
  CHECK_FALSE(response_compute(s));
  s.knowledge.insert(book.append(1, {Outcome::correct, 1, 52}), book);
  CHECK(response_compute(s));
  CHECK(s.enlightened);
  CHECK_FALSE(response_compute(s));

  ProcessorState t(1, c);
  t.knowledge.insert(book.append(0, {Outcome::no_response, 1, 0}), book);
  t.knowledge.insert(book.append(1, {Outcome::no_response, 1, 1}), book);
  CHECK(response_compute(t));
}

TEST_CASE("gossip_send") {
  const ProtocolConstants c(1024, kParams);
  auto rng = rng_stream(4, 0, 0, StreamDomain::gossip);
  ProcessorState s(0, c);
  auto share = gossip_send(s, rng, c);
  CHECK(std::holds_alternative<Share>(share.message));
  CHECK(share.destinations.size() == 1);
  CHECK(level_of(share.message) == 0);

  s.enlightened = true;
  auto p0 = gossip_send(s, rng, c);
  CHECK(is_profess(p0.message));
  CHECK(level_of(p0.message) == 0);
  CHECK(p0.destinations.size() <= 5);
  CHECK(p0.destinations.size() >= 1);
  CHECK(std::ranges::is_sorted(p0.destinations));
  CHECK(s.level == 1);
  auto p1 = gossip_send(s, rng, c);
  CHECK(p1.destinations.size() <= 10);
  CHECK(s.level == 2);
}

TEST_CASE("gossip_receive") {
  const ProtocolConstants c(16, kParams);
  SUBCASE("a Profess enlightens") {
    ProcessorState s(1, c);
    std::vector<GossipMessage> in = {profess_from(3, 0)};
    CHECK(gossip_receive(s, in, c).became_enlightened);
    CHECK(s.enlightened);
  }
  SUBCASE("higher priority resets the level") {
    ProcessorState s(5, c);
    s.enlightened = true;
    s.level = 3;
    std::vector<GossipMessage> in = {profess_from(9, 3)};
    CHECK(gossip_receive(s, in, c).level_reset);
    CHECK(s.level == 0);
  }
  SUBCASE("lower priority leaves the level") {
    ProcessorState s(9, c);
    s.enlightened = true;
    s.level = 3;
    std::vector<GossipMessage> in = {profess_from(5, 3)};
    gossip_receive(s, in, c);
    CHECK(s.level == 3);
  }
  SUBCASE("a Share does not reset by default") {
    ProcessorState s(1, c);
    s.enlightened = true;
    s.level = 2;
    std::vector<GossipMessage> in = {Share{nullptr, 0, 9}};
    gossip_receive(s, in, c);
    CHECK(s.level == 2);
    const ProtocolConstants literal(16, kParams, true);
    s.level = 0;
    gossip_receive(s, in, literal);
    CHECK(s.level == 0);
  }
  SUBCASE("empty inbox") {
    ProcessorState s(1, c);
    const auto r = gossip_receive(s, {}, c);
    CHECK_FALSE(r.became_enlightened);
    CHECK_FALSE(s.enlightened);
  }
}

TEST_CASE("gossip_compute merges and halts") {
  const ProtocolConstants c(4, kParams);
  RecordBook book;
  ProcessorState a(0, c), b(1, c);
  a.knowledge.insert(book.append(2, {Outcome::correct, 0, 0}), book);
  b.knowledge.insert(book.append(3, {Outcome::correct, 1, 0}), book);

  std::vector<GossipMessage> in = {Share{b.knowledge.snapshot(), 0, 1}};
  CHECK_FALSE(gossip_compute(a, in, c, book));
  CHECK(a.knowledge.size() == 2);
  CHECK(a.round == 1);
  CHECK_FALSE(gossip_compute(a, in, c, book));
  CHECK(a.knowledge.size() == 2);

  std::vector<GossipMessage> low = {profess_from(1, 1, b.knowledge.snapshot())};
  CHECK_FALSE(gossip_compute(a, low, c, book));
  std::vector<GossipMessage> high = {profess_from(1, 2, b.knowledge.snapshot())};
  CHECK(gossip_compute(a, high, c, book));
  CHECK(a.halted);
  CHECK(a.estimates.size() == 4);
}
