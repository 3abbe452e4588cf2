#include "aest/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aest {

ProtocolConstants::ProtocolConstants(std::size_t n_, EstimationParams params_,
                                     bool literal_ell_reset_)
    : n(n_),
      params(params_),
      gamma1(aest::gamma1(params_)),
      required_correct(Knowledge::required_correct_for(gamma1)),
      request_cap(std::max<std::uint32_t>(1, ceil_log2(n_))),
      halt_level(ceil_log2(n_)),
      literal_ell_reset(literal_ell_reset_) {
  if (n_ == 0) throw DomainError("n must be at least 1");
}

std::uint64_t profess_fanout(Level level, std::size_t n) {
  const double log_n = static_cast<double>(ceil_log2(n));
  // Past a few multiples of n log n every id is drawn anyway; clamp so the
  // draw loop stays bounded for processors that keep climbing levels.
  const double cap = 64.0 * static_cast<double>(n) * std::max(1.0, log_n);
  const double raw = std::ldexp(log_n, static_cast<int>(std::min<Level>(level, 1000)) - 1);
  const double count = std::min(std::ceil(raw), cap);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(count));
}

ProcessorState::ProcessorState(ProcessorId id_, const ProtocolConstants& constants)
    : id(id_), knowledge(constants.n, constants.required_correct) {}

OutgoingRequest query_send(ProcessorState& state, RngStream& rng, const ProtocolConstants& c) {
  const auto q = static_cast<ProcessorId>(rng.uniform_index(c.n));
  const std::uint64_t token = rng();
  state.pending_query = PendingQuery{q, token};
  return {q, TaskRequest{token, state.id}};
}

QueryPlan query_compute(ProcessorState& /*state*/, std::span<const TaskRequest> inbox,
                        RngStream& rng, const ProtocolConstants& c,
                        const std::function<bool()>& reliability_draw) {
  QueryPlan plan;
  std::vector<std::size_t> chosen(inbox.size());
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (inbox.size() > c.request_cap) {
    // Partial Fisher-Yates: the first request_cap slots become a uniform subset.
    for (std::size_t k = 0; k < c.request_cap; ++k) {
      const auto pick = k + static_cast<std::size_t>(rng.uniform_index(chosen.size() - k));
      std::swap(chosen[k], chosen[pick]);
    }
    plan.dropped = inbox.size() - c.request_cap;
    chosen.resize(c.request_cap);
    std::ranges::sort(chosen);
  }
  plan.responses.reserve(chosen.size());
  for (auto idx : chosen) {
    plan.responses.push_back({reliability_draw(), inbox[idx].src});
  }
  return plan;
}

std::vector<OutgoingResponse> response_send(const ProcessorState& state, const QueryPlan& plan) {
  std::vector<OutgoingResponse> out;
  out.reserve(plan.responses.size());
  for (const auto& r : plan.responses) {
    out.push_back({r.requester, TaskResponse{r.correct, state.id}});
  }
  return out;
}

ResponseReceipt response_receive(ProcessorState& state, std::span<const TaskResponse> inbox,
                                 RecordBook& book) {
  if (!state.pending_query) throw std::logic_error("response_receive without a pending query");
  const ProcessorId q = state.pending_query->target;
  Outcome outcome = Outcome::no_response;
  for (const auto& m : inbox) {
    if (m.src == q) {
      outcome = m.correct ? Outcome::correct : Outcome::incorrect;
      break;
    }
  }
  const RecordId id = book.append(q, ResultRecord{outcome, state.id, state.round});
  state.knowledge.insert(id, book);
  state.pending_query.reset();
  return {id, outcome, q};
}

bool response_compute(ProcessorState& state) {
  if (state.enlightened || !state.knowledge.all_targets_satisfied()) return false;
  state.enlightened = true;
  return true;
}

OutgoingGossip gossip_send(ProcessorState& state, RngStream& rng, const ProtocolConstants& c) {
  OutgoingGossip out;
  if (state.enlightened) {
    const std::uint64_t draws = profess_fanout(state.level, c.n);
    std::vector<std::uint8_t> picked(c.n, 0);
    for (std::uint64_t k = 0; k < draws; ++k) {
      const auto d = static_cast<ProcessorId>(rng.uniform_index(c.n));
      if (!picked[d]) {
        picked[d] = 1;
        out.destinations.push_back(d);
      }
    }
    std::ranges::sort(out.destinations);
    out.message = Profess{state.knowledge.snapshot(), state.level, state.id};
    ++state.level;
  } else {
    out.destinations.push_back(static_cast<ProcessorId>(rng.uniform_index(c.n)));
    out.message = Share{state.knowledge.snapshot(), state.level, state.id};
  }
  return out;
}

GossipReceipt gossip_receive(ProcessorState& state, std::span<const GossipMessage> inbox,
                             const ProtocolConstants& c) {
  GossipReceipt receipt;
  if (!state.enlightened && std::ranges::any_of(inbox, is_profess)) {
    state.enlightened = true;
    receipt.became_enlightened = true;
  }
  const Priority self = state.priority();
  for (const auto& m : inbox) {
    if (!c.literal_ell_reset && !is_profess(m)) continue;
    if (priority_less(self, Priority{level_of(m), sender_of(m)})) {
      receipt.level_reset = state.level != 0;
      state.level = 0;
      break;
    }
  }
  return receipt;
}

bool gossip_compute(ProcessorState& state, std::span<const GossipMessage> inbox,
                    const ProtocolConstants& c, const RecordBook& book) {
  const RecordSet* last = nullptr;
  bool halt = false;
  for (const auto& m : inbox) {
    const auto& snap = std::visit([](const auto& x) -> const KnowledgeSnapshot& {
      return x.knowledge;
    }, m);
    if (snap && snap.get() != last) {
      state.knowledge.merge(*snap, book);
      last = snap.get();
    }
    // Only Profess carries a meaningful level: a Share always has level 0.
    if (is_profess(m) && level_of(m) >= c.halt_level) halt = true;
  }
  if (halt) {
    state.estimates = state.knowledge.estimates(book, c.params);
    state.halted = true;
    return true;
  }
  ++state.round;
  return false;
}

}  // namespace aest
