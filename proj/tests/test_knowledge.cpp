#include <doctest.h>

#include <random>
#include <set>

#include "aest/knowledge.hpp"

using namespace aest;

TEST_CASE("RecordSet behaves like a set of ids") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    RecordSet a, b;
    std::set<RecordId> ra, rb;
    const RecordId span = 1 + static_cast<RecordId>(gen() % 2000);
    for (int k = 0; k < 600; ++k) {
      const auto x = static_cast<RecordId>(gen() % span);
      CHECK(a.insert(x) == ra.insert(x).second);
      const auto y = static_cast<RecordId>(gen() % span);
      CHECK(b.insert(y) == rb.insert(y).second);
    }
    CHECK(a.count() == ra.size());
    std::set<RecordId> fresh;
    a.absorb(b, [&](RecordId id) { fresh.insert(id); });
    std::set<RecordId> expect_fresh;
    for (auto y : rb) {
      if (ra.insert(y).second) expect_fresh.insert(y);
    }
    CHECK(fresh == expect_fresh);
    CHECK(a.count() == ra.size());
    CHECK(a.is_superset_of(b));
    std::vector<RecordId> listed;
    a.for_each([&](RecordId id) { listed.push_back(id); });
    CHECK(listed == std::vector<RecordId>(ra.begin(), ra.end()));
    for (RecordId x = 0; x < span + 70; ++x) CHECK(a.contains(x) == ra.contains(x));
  }
}

TEST_CASE("a complete prefix collapses and stays correct") {
  RecordSet s;
  for (RecordId x = 0; x < 1000; ++x) s.insert(x);
  CHECK(s.count() == 1000);
  CHECK(s.tail_words() <= 1);
  CHECK(s.contains(999));
  CHECK_FALSE(s.contains(1000));
  CHECK_FALSE(s.insert(5));

  RecordSet sparse;
  sparse.insert(3);
  sparse.insert(5000);
  CHECK_FALSE(sparse.is_superset_of(s));
  CHECK_FALSE(s.is_superset_of(sparse));
  std::size_t fresh = 0;
  sparse.absorb(s, [&](RecordId) { ++fresh; });
  CHECK(fresh == 999);
  CHECK(sparse.count() == 1001);
  CHECK(sparse.is_superset_of(s));
}

TEST_CASE("for_each_until stops early") {
  RecordSet s;
  for (RecordId x = 0; x < 300; x += 3) s.insert(x);
  std::vector<RecordId> seen;
  s.for_each_until([&](RecordId id) {
    seen.push_back(id);
    return seen.size() < 4;
  });
  CHECK(seen == std::vector<RecordId>{0, 3, 6, 9});
}

TEST_CASE("Knowledge tallies and enlightenment") {
  RecordBook book;
  Knowledge k(2, 3);
  CHECK_FALSE(k.all_targets_satisfied());
  for (Round r = 0; r < 3; ++r) {
    CHECK(k.insert(book.append(0, {Outcome::correct, 0, r}), book));
  }
  CHECK(k.target_satisfied(0));
  CHECK_FALSE(k.target_satisfied(1));
  const auto id = book.append(1, {Outcome::incorrect, 1, 3});
  k.insert(id, book);
  CHECK_FALSE(k.insert(id, book));
  CHECK_FALSE(k.all_targets_satisfied());
  k.insert(book.append(1, {Outcome::no_response, 1, 4}), book);
  CHECK(k.has_crash_record(1));
  CHECK(k.all_targets_satisfied());
  CHECK(k.size() == 5);
  CHECK(k.correct_count(0) == 3);
}

TEST_CASE("required count is the ceiling of Gamma_1") {
  CHECK(Knowledge::required_correct_for(52.64) == 53);
  CHECK(Knowledge::required_correct_for(53.0) == 53);
  Knowledge trivial(3, 0);
  CHECK(trivial.all_targets_satisfied());
}

TEST_CASE("merge is idempotent and counts only new records") {
  RecordBook book;
  Knowledge a(4, 1), b(4, 1);
  for (Round r = 0; r < 10; ++r) {
    a.insert(book.append(r % 4, {Outcome::correct, 0, r}), book);
    b.insert(book.append(r % 4, {Outcome::correct, 1, r}), book);
  }
  CHECK(a.merge(b.records(), book) == 10);
  CHECK(a.merge(b.records(), book) == 0);
  CHECK(a.size() == 20);
  CHECK(a.all_targets_satisfied());
}

TEST_CASE("streamed estimates equal the grouped estimation") {
  std::mt19937_64 gen(21);
  const EstimationParams params(0.5, 0.3);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + gen() % 12;
    RecordBook book;
    Knowledge k(n, Knowledge::required_correct_for(gamma1(params)));
    for (Round r = 0; r < 150; ++r) {
      for (ProcessorId s = 0; s < n; ++s) {
        const auto target = static_cast<ProcessorId>(gen() % n);
        const auto roll = gen() % 100;
        const Outcome o = roll < 1 && t % 3 == 0 ? Outcome::no_response
                          : roll < 70            ? Outcome::correct
                                                 : Outcome::incorrect;
        const auto id = book.append(target, {o, s, r});
        if (gen() % 4 != 0) k.insert(id, book);
      }
    }
    REQUIRE(book.in_replay_order());
    const auto streamed = k.estimates(book, params);
    const auto grouped = estimation(k.by_target(book), params);
    REQUIRE(streamed.size() == grouped.size());
    for (std::size_t j = 0; j < n; ++j) CHECK(streamed[j] == grouped[j]);
  }
}

TEST_CASE("out-of-order books fall back to sorting") {
  RecordBook book;
  const EstimationParams params(0.5, 0.3);
  Knowledge k(1, Knowledge::required_correct_for(gamma1(params)));
  for (Round r = 200; r-- > 0;) k.insert(book.append(0, {Outcome::correct, 0, r}), book);
  CHECK_FALSE(book.in_replay_order());
  CHECK(k.estimates(book, params)[0] == estimation(k.by_target(book), params)[0]);
}
