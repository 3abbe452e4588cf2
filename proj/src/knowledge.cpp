#include "aest/knowledge.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace aest {

RecordId RecordBook::append(ProcessorId target, const ResultRecord& record) {
  if (entries_.size() >= std::numeric_limits<RecordId>::max()) {
    throw std::length_error("record book is full");
  }
  if (target >= (std::uint32_t{1} << 30)) throw std::length_error("target id too large");
  if (!entries_.empty()) {
    const auto& last = entries_.back().record;
    if (!(last.rnd < record.rnd || (last.rnd == record.rnd && last.src < record.src))) {
      in_order_ = false;
    }
  }
  entries_.push_back({target, record});
  const std::uint32_t code = record.res == Outcome::correct     ? 1U
                             : record.res == Outcome::incorrect ? 0U
                                                                : 2U;
  tags_.push_back(target << 2 | code);
  return static_cast<RecordId>(entries_.size() - 1);
}

void RecordSet::normalize() {
  std::size_t k = 0;
  while (k < tail_.size() && tail_[k] == ~std::uint64_t{0}) ++k;
  if (k > 0) {
    tail_.erase(tail_.begin(), tail_.begin() + static_cast<std::ptrdiff_t>(k));
    full_ += k;
  }
  while (!tail_.empty() && tail_.back() == 0) tail_.pop_back();
}

bool RecordSet::insert(RecordId id) {
  const std::size_t w = id / 64;
  if (w < full_) return false;
  if (w - full_ >= tail_.size()) tail_.resize(w - full_ + 1, 0);
  std::uint64_t& slot = tail_[w - full_];
  const std::uint64_t mask = std::uint64_t{1} << (id % 64);
  if ((slot & mask) != 0) return false;
  slot |= mask;
  if (w == full_ && slot == ~std::uint64_t{0}) normalize();
  return true;
}

bool RecordSet::is_superset_of(const RecordSet& other) const {
  const std::size_t end = other.full_ + other.tail_.size();
  for (std::size_t w = full_; w < end; ++w) {
    if ((other.word(w) & ~word(w)) != 0) return false;
  }
  return true;
}

std::size_t RecordSet::count() const {
  std::size_t c = full_ * 64;
  for (auto w : tail_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

Knowledge::Knowledge(std::size_t n, std::uint32_t required_correct)
    : n_(n), required_(required_correct), satisfied_(required_correct == 0 ? n : 0) {
  if (n == 0) throw DomainError("knowledge needs at least one processor");
}

std::uint32_t Knowledge::required_correct_for(double gamma1_value) {
  if (!(gamma1_value > 0.0)) return 0;
  return static_cast<std::uint32_t>(std::ceil(gamma1_value));
}

bool Knowledge::insert(RecordId id, const RecordBook& book) {
  if (!records_.insert(id)) return false;
  ensure_tallies();
  account(book.tag(id));
  return true;
}

std::size_t Knowledge::merge(const RecordSet& other, const RecordBook& book) {
  const std::size_t before = size_;
  ensure_tallies();
  records_.absorb(other, [&](RecordId id) { account(book.tag(id)); });
  return size_ - before;
}

void Knowledge::ensure_tallies() {
  if (correct_.empty()) {
    correct_.assign(n_, 0);
    crash_.assign(n_, 0);
  }
}

std::uint32_t Knowledge::correct_count(ProcessorId target) const {
  return correct_.empty() ? 0 : correct_[target];
}

bool Knowledge::has_crash_record(ProcessorId target) const {
  return !crash_.empty() && crash_[target] != 0;
}

bool Knowledge::target_satisfied(ProcessorId target) const {
  return correct_count(target) >= required_ || has_crash_record(target);
}

std::vector<ResultRecord> Knowledge::records_for(ProcessorId target,
                                                 const RecordBook& book) const {
  std::vector<ResultRecord> out;
  records_.for_each([&](RecordId id) {
    const auto& e = book.at(id);
    if (e.target == target) out.push_back(e.record);
  });
  return out;
}

std::vector<std::vector<ResultRecord>> Knowledge::by_target(const RecordBook& book) const {
  std::vector<std::vector<ResultRecord>> out(n_);
  records_.for_each([&](RecordId id) {
    const auto& e = book.at(id);
    out[e.target].push_back(e.record);
  });
  return out;
}

std::vector<EstimateValue> Knowledge::estimates(const RecordBook& book,
                                                const EstimationParams& params) const {
  if (!book.in_replay_order()) return estimation(by_target(book), params);

  const double threshold = gamma1(params);
  std::vector<EstimateValue> out(n_, EstimateValue::undetermined());
  std::vector<std::uint32_t> seen(n_, 0);
  std::vector<std::uint32_t> correct(n_, 0);
  std::vector<std::uint8_t> open(n_, 1);
  std::size_t remaining = n_;
  for (std::size_t j = 0; j < n_; ++j) {
    if (has_crash_record(static_cast<ProcessorId>(j))) {
      out[j] = EstimateValue::crashed();
      open[j] = 0;
      --remaining;
    }
  }
  // Record ids ascend in replay order, so each target's first crossing of
  // the threshold is found in a single pass.
  const std::uint32_t required = required_correct_for(threshold);
  if (remaining > 0) {
    records_.for_each_until([&](RecordId id) {
      const std::uint32_t tag = book.tag(id);
      const std::uint32_t j = tag >> 2;
      const std::uint32_t live = open[j];
      const std::uint32_t hit = tag & live & 1U;
      correct[j] += hit;
      seen[j] += live;  // includes the crossing record itself
      if ((hit & static_cast<std::uint32_t>(correct[j] >= required)) == 0) return true;
      if (seen[j] > 1) out[j] = EstimateValue::of(threshold / static_cast<double>(seen[j] - 1));
      open[j] = 0;
      return --remaining > 0;
    });
  }
  return out;
}

}  // namespace aest
