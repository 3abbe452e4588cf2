#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "aest/estimator.hpp"
#include "aest/types.hpp"

namespace aest {

using RecordId = std::uint32_t;

struct BookEntry {
  ProcessorId target;
  ResultRecord record;
};

/// Append-only ledger of every result record created during a run.
///
/// A processor creates at most one record per round, so (src, rnd) names a
/// record uniquely and its target and outcome never change afterwards. Records
/// are signed by their creator, so knowledge can travel as a set of record ids
/// that any processor resolves through the book.
class RecordBook {
 public:
  RecordId append(ProcessorId target, const ResultRecord& record);
  const BookEntry& at(RecordId id) const { return entries_[id]; }
  std::size_t size() const { return entries_.size(); }
  /// Packed target << 2 | outcome code (0 incorrect, 1 correct, 2 no response).
  std::uint32_t tag(RecordId id) const { return tags_[id]; }
  /// True while ids were handed out in (rnd, src) order, i.e. id order is
  /// the canonical replay order.
  bool in_replay_order() const { return in_order_; }

 private:
  std::vector<BookEntry> entries_;
  std::vector<std::uint32_t> tags_;
  bool in_order_ = true;
};

/// Set of record ids: a prefix of ids known in full plus a bitset tail.
///
/// Old records reach every processor within a few gossip rounds, so the
/// prefix absorbs most of the set and copies and merges only touch the tail.
class RecordSet {
 public:
  bool contains(RecordId id) const {
    const std::size_t w = id / 64;
    return ((word(w) >> (id % 64)) & 1U) != 0;
  }
  /// Returns true when the id was not yet present.
  bool insert(RecordId id);
  bool is_superset_of(const RecordSet& other) const;
  std::size_t count() const;
  /// Number of 64-bit words past the complete prefix.
  std::size_t tail_words() const { return tail_.size(); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    const std::size_t end = full_ + tail_.size();
    for (std::size_t w = 0; w < end; ++w) {
      std::uint64_t bits = word(w);
      while (bits != 0) {
        const int b = __builtin_ctzll(bits);
        fn(static_cast<RecordId>(w * 64 + static_cast<std::size_t>(b)));
        bits &= bits - 1;
      }
    }
  }

  /// Visits ids in ascending order while fn(id) returns true.
  template <typename Fn>
  void for_each_until(Fn&& fn) const {
    const std::size_t end = full_ + tail_.size();
    for (std::size_t w = 0; w < end; ++w) {
      std::uint64_t bits = word(w);
      while (bits != 0) {
        const int b = __builtin_ctzll(bits);
        if (!fn(static_cast<RecordId>(w * 64 + static_cast<std::size_t>(b)))) return;
        bits &= bits - 1;
      }
    }
  }

  /// Adds every id of `other`; calls fn(id) for each id that was new.
  template <typename Fn>
  void absorb(const RecordSet& other, Fn&& fn) {
    const std::size_t end = std::max(full_ + tail_.size(), other.full_ + other.tail_.size());
    if (end <= full_) return;
    tail_.resize(end - full_, 0);
    for (std::size_t w = full_; w < end; ++w) {
      std::uint64_t& mine = tail_[w - full_];
      std::uint64_t fresh = other.word(w) & ~mine;
      if (fresh == 0) continue;
      mine |= fresh;
      while (fresh != 0) {
        const int b = __builtin_ctzll(fresh);
        fn(static_cast<RecordId>(w * 64 + static_cast<std::size_t>(b)));
        fresh &= fresh - 1;
      }
    }
    normalize();
  }

 private:
  std::uint64_t word(std::size_t w) const {
    if (w < full_) return ~std::uint64_t{0};
    w -= full_;
    return w < tail_.size() ? tail_[w] : 0;
  }
  void normalize();

  std::size_t full_ = 0;              // words [0, full_) are all ones
  std::vector<std::uint64_t> tail_;   // words [full_, full_ + tail_.size())
};

using KnowledgeSnapshot = std::shared_ptr<const RecordSet>;

/// Per-processor knowledge R[1..n]: the known record set plus per-target
/// tallies that keep the enlightenment test O(1).
class Knowledge {
 public:
  /// `required_correct` is the smallest integer count >= Gamma_1.
  Knowledge(std::size_t n, std::uint32_t required_correct);

  static std::uint32_t required_correct_for(double gamma1_value);

  /// Returns true when the record was new.
  bool insert(RecordId id, const RecordBook& book);
  /// Returns the number of records that were new.
  std::size_t merge(const RecordSet& other, const RecordBook& book);

  bool contains(RecordId id) const { return records_.contains(id); }
  std::size_t size() const { return size_; }
  std::size_t population() const { return n_; }
  std::uint32_t required_correct() const { return required_; }

  std::uint32_t correct_count(ProcessorId target) const;
  bool has_crash_record(ProcessorId target) const;
  /// Gamma_1 correct results or a crash record for this target.
  bool target_satisfied(ProcessorId target) const;
  std::size_t satisfied_targets() const { return satisfied_; }
  bool all_targets_satisfied() const { return satisfied_ == n_; }

  const RecordSet& records() const { return records_; }
  KnowledgeSnapshot snapshot() const { return std::make_shared<const RecordSet>(records_); }

  std::vector<ResultRecord> records_for(ProcessorId target, const RecordBook& book) const;
  /// Records grouped by target, each group in record-id order.
  std::vector<std::vector<ResultRecord>> by_target(const RecordBook& book) const;

  /// estimation() over this knowledge. When the book is in replay order the
  /// records are streamed once instead of grouped and sorted per target.
  std::vector<EstimateValue> estimates(const RecordBook& book,
                                       const EstimationParams& params) const;

 private:
  void ensure_tallies();
  void account(std::uint32_t tag) {
    ++size_;
    const std::uint32_t j = tag >> 2;
    const bool was = correct_[j] >= required_ || crash_[j] != 0;
    correct_[j] += tag & 1U;
    crash_[j] |= static_cast<std::uint8_t>(tag >> 1) & 1U;
    satisfied_ += static_cast<std::size_t>(!was && (correct_[j] >= required_ || crash_[j] != 0));
  }

  std::size_t n_;
  std::uint32_t required_;
  RecordSet records_;
  std::size_t size_ = 0;
  std::size_t satisfied_ = 0;
  // Allocated on first insert; processors that crash at round 0 never pay for them.
  std::vector<std::uint32_t> correct_;
  std::vector<std::uint8_t> crash_;
};

}  // namespace aest
