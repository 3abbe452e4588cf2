#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "aest/estimator.hpp"
#include "aest/knowledge.hpp"
#include "aest/rng.hpp"
#include "aest/types.hpp"

namespace aest {

struct TaskRequest {
  std::uint64_t task_token;
  ProcessorId src;
};

struct TaskResponse {
  bool correct;
  ProcessorId src;
};

struct Share {
  KnowledgeSnapshot knowledge;
  Level level;
  ProcessorId src;
};

struct Profess {
  KnowledgeSnapshot knowledge;
  Level level;
  ProcessorId src;
};

using GossipMessage = std::variant<Share, Profess>;

inline Level level_of(const GossipMessage& m) {
  return std::visit([](const auto& x) { return x.level; }, m);
}
inline ProcessorId sender_of(const GossipMessage& m) {
  return std::visit([](const auto& x) { return x.src; }, m);
}
inline bool is_profess(const GossipMessage& m) { return std::holds_alternative<Profess>(m); }

struct Priority {
  Level level;
  ProcessorId id;
};

/// Lexicographic strict order on (level, id).
constexpr bool priority_less(Priority a, Priority b) {
  return a.level < b.level || (a.level == b.level && a.id < b.id);
}

/// Constants shared by every processor of one run.
struct ProtocolConstants {
  ProtocolConstants(std::size_t n, EstimationParams params, bool literal_ell_reset = false);

  std::size_t n;
  EstimationParams params;
  double gamma1;
  std::uint32_t required_correct;
  /// Most requests a processor serves per round: max(1, ceil(log2 n)).
  std::uint32_t request_cap;
  /// A received Profess with level >= this triggers halting: ceil(log2 n).
  Level halt_level;
  /// Reset the level on any higher-priority message instead of only on Profess.
  bool literal_ell_reset;
};

/// Number of Profess destinations drawn at `level`: ceil(2^(level-1) * log2 n),
/// at least 1.
std::uint64_t profess_fanout(Level level, std::size_t n);

struct PendingQuery {
  ProcessorId target;
  std::uint64_t task_token;
};

struct ProcessorState {
  ProcessorState(ProcessorId id, const ProtocolConstants& constants);

  ProcessorId id;
  Round round = 0;
  Level level = 0;
  bool enlightened = false;
  bool halted = false;
  Knowledge knowledge;
  std::vector<EstimateValue> estimates;  // filled at halt
  std::optional<PendingQuery> pending_query;

  Priority priority() const { return {level, id}; }
};

struct OutgoingRequest {
  ProcessorId to;
  TaskRequest request;
};

struct PlannedResponse {
  bool correct;
  ProcessorId requester;
};

struct QueryPlan {
  std::vector<PlannedResponse> responses;
  std::size_t dropped = 0;  // requests beyond the cap
};

struct OutgoingResponse {
  ProcessorId to;
  TaskResponse response;
};

struct ResponseReceipt {
  RecordId record;
  Outcome outcome;
  ProcessorId target;
};

struct OutgoingGossip {
  GossipMessage message;
  std::vector<ProcessorId> destinations;  // distinct ids
};

struct GossipReceipt {
  bool became_enlightened = false;
  bool level_reset = false;
};

/// Query/send: pick a uniform target (self allowed) and a test task.
OutgoingRequest query_send(ProcessorState& state, RngStream& rng, const ProtocolConstants& c);

/// Query/compute: serve at most request_cap requests, a uniform subset when
/// more arrive. `reliability_draw` decides the correctness of one served task.
QueryPlan query_compute(ProcessorState& state, std::span<const TaskRequest> inbox,
                        RngStream& rng, const ProtocolConstants& c,
                        const std::function<bool()>& reliability_draw);

/// Response/send.
std::vector<OutgoingResponse> response_send(const ProcessorState& state, const QueryPlan& plan);

/// Response/receive: record <1|0|-1, self, r> about the queried target.
/// Responses from anyone but the pending target are ignored.
ResponseReceipt response_receive(ProcessorState& state, std::span<const TaskResponse> inbox,
                                 RecordBook& book);

/// Response/compute: returns true when the processor just became enlightened.
bool response_compute(ProcessorState& state);

/// Gossip/send: Profess to a random set when enlightened (then level += 1),
/// otherwise Share with one random processor.
OutgoingGossip gossip_send(ProcessorState& state, RngStream& rng, const ProtocolConstants& c);

/// Gossip/receive: enlightenment by Profess and priority-based level reset.
GossipReceipt gossip_receive(ProcessorState& state, std::span<const GossipMessage> inbox,
                             const ProtocolConstants& c);

/// Gossip/compute: merge received knowledge; halt with estimates when a
/// Profess of level >= halt_level arrived, otherwise advance the round.
/// Returns true when the processor halted.
bool gossip_compute(ProcessorState& state, std::span<const GossipMessage> inbox,
                    const ProtocolConstants& c, const RecordBook& book);

}  // namespace aest
