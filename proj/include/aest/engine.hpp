#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "aest/adversary.hpp"
#include "aest/estimator.hpp"
#include "aest/metrics.hpp"
#include "aest/protocol.hpp"
#include "aest/types.hpp"

namespace aest {

struct RunConfig {
  std::size_t n = 1;
  EstimationParams params{0.5, 0.1};
  AdversaryModel model = LinearFraction{};
  CrashPattern crash_pattern = UpfrontCrashes{};
  ReliabilitySpec reliability = ConstantReliability{1.0};
  std::uint64_t seed = 0;
  std::optional<Round> max_rounds;  // default_max_rounds() when unset
  bool literal_ell_reset = false;
};

/// 64 * ceil(log2 n) for the lf model and 8 * n otherwise, never below
/// 8 * ceil(Gamma_1): even at n = 1 a processor needs about Gamma_1 rounds of
/// its own queries before it can become enlightened.
Round default_max_rounds(const RunConfig& config);
Round effective_max_rounds(const RunConfig& config);

/// Throws DomainError for an unusable configuration, including an adversary
/// model that cannot be met at this n.
void validate(const RunConfig& config);

enum class Completion { all_halted, round_cap_hit };

struct RunResult {
  RunConfig config;
  ReliabilityAssignment reliability;
  CrashSchedule schedule;
  std::vector<std::vector<EstimateValue>> estimates;  // empty for processors that never halted
  RunMetrics metrics;
  Completion completion = Completion::round_cap_hit;
  Round rounds_executed = 0;

  const std::vector<std::optional<Round>>& halt_rounds() const {
    return metrics.per_processor_halt_round;
  }
};

AccuracyReport accuracy(const RunResult& run);

enum class EventKind : std::uint8_t { send, receive, enlighten, ell_reset, halt, crash, drop };
enum class DropReason : std::uint8_t { none, crashed, halted };

std::string_view to_string(EventKind k);
std::string_view to_string(DropReason r);

struct TraceEvent {
  Round round = 0;
  Stage stage = Stage::query;
  Step step = Step::send;
  ProcessorId id = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::send;
  // Payload; which fields matter depends on `kind`.
  std::optional<MessageKind> message;
  std::optional<ProcessorId> peer;  // destination of a send, origin of a receive or drop
  std::optional<Level> level;
  std::optional<bool> correct;      // task responses
  std::optional<std::uint64_t> known;  // knowledge size of the processor `id`
  DropReason reason = DropReason::none;
};

/// Hooks into a run. All events of a run arrive in (round, stage, step, id,
/// seq) order.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual bool wants(EventKind /*kind*/) const { return true; }
  virtual void on_event(const TraceEvent& /*event*/) {}
  /// After the gossip compute step of every executed round.
  virtual void on_round_end(Round /*round*/, std::span<const ProcessorState> /*states*/) {}
};

template <typename Msg>
struct Addressed {
  ProcessorId from;
  ProcessorId to;
  Msg msg;
};

struct DroppedMessage {
  ProcessorId from;
  ProcessorId to;
  MessageKind kind;
  DropReason reason;
};

/// Per-destination inboxes reused across steps.
template <typename Msg>
class Mailbox {
 public:
  explicit Mailbox(std::size_t n) : boxes_(n) {}

  void clear() {
    for (auto id : touched_) boxes_[id].clear();
    touched_.clear();
  }
  void put(ProcessorId to, Msg msg) {
    if (boxes_[to].empty()) touched_.push_back(to);
    boxes_[to].push_back(std::move(msg));
  }
  std::span<const Msg> inbox(ProcessorId id) const { return boxes_[id]; }
  std::size_t population() const { return boxes_.size(); }

 private:
  std::vector<std::vector<Msg>> boxes_;
  std::vector<ProcessorId> touched_;
};

/// Routes one step's sends. Messages to processors crashed at `round` or
/// already halted are dropped and listed in `dropped` in (destination, send)
/// order; all others land in the destination's inbox in send order.
template <typename Msg, typename KindOf>
void deliver(std::span<Addressed<Msg>> messages, const CrashSchedule& schedule,
             std::span<const std::uint8_t> halted, Round round, Mailbox<Msg>& into,
             std::vector<DroppedMessage>& dropped, RunMetrics& metrics, KindOf&& kind_of) {
  into.clear();
  dropped.clear();
  for (auto& m : messages) {
    if (!is_live(schedule, m.to, round)) {
      dropped.push_back({m.from, m.to, kind_of(m.msg), DropReason::crashed});
      ++metrics.dropped_to_crashed;
    } else if (halted[m.to] != 0) {
      dropped.push_back({m.from, m.to, kind_of(m.msg), DropReason::halted});
      ++metrics.dropped_to_halted;
    } else {
      into.put(m.to, std::move(m.msg));
      ++metrics.delivered;
    }
  }
  std::ranges::stable_sort(dropped, {}, &DroppedMessage::to);
}

/// Executes rounds until every processor has halted or crashed, or the round
/// cap is reached. Identical configs give identical results and traces.
RunResult run(const RunConfig& config, RunObserver* observer = nullptr);

}  // namespace aest
