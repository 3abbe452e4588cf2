#include "aest/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace aest {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::send: return "send";
    case EventKind::receive: return "receive";
    case EventKind::enlighten: return "enlighten";
    case EventKind::ell_reset: return "ell_reset";
    case EventKind::halt: return "halt";
    case EventKind::crash: return "crash";
    case EventKind::drop: return "drop";
  }
  return "?";
}

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::none: return "none";
    case DropReason::crashed: return "crashed";
    case DropReason::halted: return "halted";
  }
  return "?";
}

Round default_max_rounds(const RunConfig& config) {
  const std::uint64_t log_n = std::max<std::uint32_t>(1, ceil_log2(config.n));
  const std::uint64_t by_model = std::holds_alternative<LinearFraction>(config.model)
                                     ? 64 * log_n
                                     : 8 * static_cast<std::uint64_t>(config.n);
  const auto floor = static_cast<std::uint64_t>(8.0 * std::ceil(gamma1(config.params)));
  return static_cast<Round>(std::min<std::uint64_t>(std::max(by_model, floor), 1U << 30));
}

Round effective_max_rounds(const RunConfig& config) {
  return config.max_rounds.value_or(default_max_rounds(config));
}

void validate(const RunConfig& config) {
  if (config.n == 0) throw DomainError("n must be at least 1");
  if (config.n > (1U << 24)) throw DomainError("n is too large");
  if (config.max_rounds && *config.max_rounds == 0) {
    throw DomainError("max_rounds must be at least 1");
  }
  min_survivors(config.model, config.n);
  if (const auto* spread = std::get_if<SpreadCrashes>(&config.crash_pattern);
      spread && spread->rounds == 0) {
    throw DomainError("spread crash pattern needs at least one round");
  }
  if (const auto* ex = std::get_if<ExplicitReliability>(&config.reliability);
      ex && ex->p.size() != config.n) {
    throw DomainError("explicit reliability list length must equal n");
  }
}

AccuracyReport accuracy(const RunResult& run) {
  return accuracy(run.estimates, run.halt_rounds(), run.reliability, run.schedule,
                  run.config.params);
}

namespace {

constexpr std::size_t kEventKinds = 7;

MessageKind kind_of_gossip(const GossipMessage& m) {
  return is_profess(m) ? MessageKind::profess : MessageKind::share;
}

class Tracer {
 public:
  explicit Tracer(RunObserver* observer) : observer_(observer) {
    for (std::size_t k = 0; k < kEventKinds; ++k) {
      wants_[k] = observer_ != nullptr && observer_->wants(static_cast<EventKind>(k));
    }
  }

  bool on(EventKind k) const { return wants_[static_cast<std::size_t>(k)]; }

  void emit(TraceEvent ev) {
    ev.seq = seq_++;
    observer_->on_event(ev);
  }

 private:
  RunObserver* observer_;
  std::array<bool, kEventKinds> wants_{};
  std::uint64_t seq_ = 0;
};

class Simulation {
 public:
  Simulation(const RunConfig& config, RunObserver* observer)
      : config_(config),
        n_(config.n),
        constants_(config.n, config.params, config.literal_ell_reset),
        observer_(observer),
        tracer_(observer),
        result_{.config = config,
                .reliability = assign_probabilities(config.n, config.reliability, config.seed),
                .schedule = generate_crash_schedule(config.n, config.model,
                                                    config.crash_pattern, config.seed),
                .estimates = {},
                .metrics = {},
                .completion = Completion::round_cap_hit,
                .rounds_executed = 0},
        halted_(n_, 0),
        requests_(n_),
        responses_(n_),
        gossip_(n_) {
    states_.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      states_.emplace_back(static_cast<ProcessorId>(i), constants_);
    }
    result_.estimates.resize(n_);
    result_.metrics.per_processor_halt_round.assign(n_, std::nullopt);
    plans_.resize(n_);
    rng_.assign(n_, RngStream(0));
  }

  RunResult execute() {
    const Round cap = effective_max_rounds(config_);
    bool finished = false;
    for (Round r = 0; r < cap; ++r) {
      collect_active(r);
      if (active_.empty()) {
        finished = true;
        break;
      }
      query_stage(r);
      response_stage(r);
      gossip_stage(r);
      result_.rounds_executed = r + 1;
      if (observer_ != nullptr) observer_->on_round_end(r, states_);
    }
    if (!finished) {
      collect_active(result_.rounds_executed);
      finished = active_.empty();
    }
    result_.completion = finished ? Completion::all_halted : Completion::round_cap_hit;

    auto& m = result_.metrics;
    std::uint64_t last_halt = 0;
    bool any = false;
    for (const auto& h : m.per_processor_halt_round) {
      if (h) {
        last_halt = std::max<std::uint64_t>(last_halt, *h);
        any = true;
      }
    }
    m.rounds_to_all_halt = finished ? (any ? last_halt + 1 : 0) : result_.rounds_executed;
    return std::move(result_);
  }

 private:
  void collect_active(Round r) {
    active_.clear();
    crashing_.clear();
    for (std::size_t i = 0; i < n_; ++i) {
      const auto id = static_cast<ProcessorId>(i);
      if (halted_[i] != 0) continue;
      if (is_live(result_.schedule, id, r)) {
        active_.push_back(id);
      } else if (result_.schedule.crash_round(id) == r) {
        crashing_.push_back(id);
      }
    }
  }

  StepClock clock(Round r, Stage stage, Step step) const { return {r, stage, step}; }

  TraceEvent event(const StepClock& c, ProcessorId id, EventKind kind) const {
    TraceEvent ev;
    ev.round = c.round;
    ev.stage = c.stage;
    ev.step = c.step;
    ev.id = id;
    ev.kind = kind;
    return ev;
  }

  void trace_send(const StepClock& c, ProcessorId from, ProcessorId to, MessageKind kind,
                  std::optional<Level> level = std::nullopt,
                  std::optional<bool> correct = std::nullopt) {
    if (!tracer_.on(EventKind::send)) return;
    auto ev = event(c, from, EventKind::send);
    ev.message = kind;
    ev.peer = to;
    ev.level = level;
    ev.correct = correct;
    if (kind == MessageKind::share || kind == MessageKind::profess) {
      ev.known = states_[from].knowledge.size();
    }
    tracer_.emit(ev);
  }

  // Emits receive events for active processors and drop events for the rest,
  // in destination order. `on_received(id)` runs the protocol's receive step
  // for each active processor right after its receive events.
  template <typename Msg, typename Describe, typename OnReceived>
  void receive_step(Round r, Stage stage, const Mailbox<Msg>& box, Describe&& describe,
                    OnReceived&& on_received) {
    const auto c = clock(r, stage, Step::receive);
    std::size_t d = 0;
    for (ProcessorId id : active_) {
      for (; d < dropped_.size() && dropped_[d].to < id; ++d) trace_drop(c, dropped_[d]);
      if (tracer_.on(EventKind::receive)) {
        for (const auto& msg : box.inbox(id)) {
          auto ev = event(c, id, EventKind::receive);
          describe(msg, ev);
          tracer_.emit(ev);
        }
      }
      on_received(id, c);
      account_step(result_.metrics, id, c, {}, 0);
    }
    for (; d < dropped_.size(); ++d) trace_drop(c, dropped_[d]);
  }

  void trace_drop(const StepClock& c, const DroppedMessage& m) {
    if (!tracer_.on(EventKind::drop)) return;
    auto ev = event(c, m.to, EventKind::drop);
    ev.message = m.kind;
    ev.peer = m.from;
    ev.reason = m.reason;
    tracer_.emit(ev);
  }

  void query_stage(Round r) {
    // send
    auto c = clock(r, Stage::query, Step::send);
    sent_requests_.clear();
    std::size_t k = 0;
    for (ProcessorId id : active_) {
      for (; k < crashing_.size() && crashing_[k] < id; ++k) trace_crash(c, crashing_[k]);
      rng_[id] = rng_stream(config_.seed, id, r, StreamDomain::query);
      const auto out = query_send(states_[id], rng_[id], constants_);
      sent_requests_.push_back({id, out.to, out.request});
      trace_send(c, id, out.to, MessageKind::request);
      account_step(result_.metrics, id, c, {1, 0, 0, 0}, 0);
    }
    for (; k < crashing_.size(); ++k) trace_crash(c, crashing_[k]);

    deliver(std::span(sent_requests_), result_.schedule, halted_, r, requests_, dropped_,
            result_.metrics, [](const TaskRequest&) { return MessageKind::request; });
    receive_step(
        r, Stage::query, requests_,
        [](const TaskRequest& m, TraceEvent& ev) {
          ev.message = MessageKind::request;
          ev.peer = m.src;
        },
        [](ProcessorId, const StepClock&) {});

    // compute
    c = clock(r, Stage::query, Step::compute);
    for (ProcessorId id : active_) {
      auto& rng = rng_[id];
      const double p = result_.reliability[id];
      plans_[id] = query_compute(states_[id], requests_.inbox(id), rng, constants_,
                                 [&rng, p] { return rng.bernoulli(p); });
      result_.metrics.dropped_requests += plans_[id].dropped;
      account_step(result_.metrics, id, c, {}, plans_[id].responses.size());
    }
  }

  void response_stage(Round r) {
    auto c = clock(r, Stage::response, Step::send);
    sent_responses_.clear();
    for (ProcessorId id : active_) {
      const auto outs = response_send(states_[id], plans_[id]);
      for (const auto& o : outs) {
        sent_responses_.push_back({id, o.to, o.response});
        trace_send(c, id, o.to, MessageKind::response, std::nullopt, o.response.correct);
      }
      account_step(result_.metrics, id, c, {0, outs.size(), 0, 0}, 0);
    }

    deliver(std::span(sent_responses_), result_.schedule, halted_, r, responses_, dropped_,
            result_.metrics, [](const TaskResponse&) { return MessageKind::response; });
    receive_step(
        r, Stage::response, responses_,
        [](const TaskResponse& m, TraceEvent& ev) {
          ev.message = MessageKind::response;
          ev.peer = m.src;
          ev.correct = m.correct;
        },
        [&](ProcessorId id, const StepClock&) {
          const auto receipt = response_receive(states_[id], responses_.inbox(id), book_);
          if (receipt.outcome == Outcome::no_response &&
              is_live(result_.schedule, receipt.target, r)) {
            ++result_.metrics.false_crash_detections;
            if (halted_[receipt.target] != 0) ++result_.metrics.halted_target_detections;
          }
        });

    c = clock(r, Stage::response, Step::compute);
    for (ProcessorId id : active_) {
      if (response_compute(states_[id]) && tracer_.on(EventKind::enlighten)) {
        auto ev = event(c, id, EventKind::enlighten);
        ev.known = states_[id].knowledge.size();
        tracer_.emit(ev);
      }
      account_step(result_.metrics, id, c, {}, 0);
    }
  }

  void gossip_stage(Round r) {
    auto c = clock(r, Stage::gossip, Step::send);
    sent_gossip_.clear();
    for (ProcessorId id : active_) {
      auto rng = rng_stream(config_.seed, id, r, StreamDomain::gossip);
      const Level level_before = states_[id].level;
      auto out = gossip_send(states_[id], rng, constants_);
      const MessageKind kind = kind_of_gossip(out.message);
      for (ProcessorId to : out.destinations) {
        sent_gossip_.push_back({id, to, out.message});
        trace_send(c, id, to, kind, level_before);
      }
      MessageCounts counts{};
      counts[static_cast<std::size_t>(kind)] = out.destinations.size();
      account_step(result_.metrics, id, c, counts, 0);
    }

    deliver(std::span(sent_gossip_), result_.schedule, halted_, r, gossip_, dropped_,
            result_.metrics, kind_of_gossip);
    receive_step(
        r, Stage::gossip, gossip_,
        [](const GossipMessage& m, TraceEvent& ev) {
          ev.message = kind_of_gossip(m);
          ev.peer = sender_of(m);
          ev.level = level_of(m);
        },
        [&](ProcessorId id, const StepClock& rc) {
          auto& s = states_[id];
          const Level before = s.level;
          const auto receipt = gossip_receive(s, gossip_.inbox(id), constants_);
          if (receipt.became_enlightened && tracer_.on(EventKind::enlighten)) {
            auto ev = event(rc, id, EventKind::enlighten);
            ev.known = s.knowledge.size();
            tracer_.emit(ev);
          }
          if (receipt.level_reset && tracer_.on(EventKind::ell_reset)) {
            auto ev = event(rc, id, EventKind::ell_reset);
            ev.level = before;
            tracer_.emit(ev);
          }
        });

    c = clock(r, Stage::gossip, Step::compute);
    for (ProcessorId id : active_) {
      auto& s = states_[id];
      if (gossip_compute(s, gossip_.inbox(id), constants_, book_)) {
        halted_[id] = 1;
        result_.metrics.per_processor_halt_round[id] = r;
        result_.estimates[id] = s.estimates;
        if (tracer_.on(EventKind::halt)) {
          auto ev = event(c, id, EventKind::halt);
          ev.level = s.level;
          ev.known = s.knowledge.size();
          tracer_.emit(ev);
        }
      }
      account_step(result_.metrics, id, c, {}, 0);
    }
  }

  void trace_crash(const StepClock& c, ProcessorId id) {
    if (tracer_.on(EventKind::crash)) tracer_.emit(event(c, id, EventKind::crash));
  }

  const RunConfig& config_;
  std::size_t n_;
  ProtocolConstants constants_;
  RunObserver* observer_;
  Tracer tracer_;
  RunResult result_;
  RecordBook book_;
  std::vector<ProcessorState> states_;
  std::vector<std::uint8_t> halted_;
  std::vector<ProcessorId> active_;
  std::vector<ProcessorId> crashing_;
  std::vector<RngStream> rng_;
  std::vector<QueryPlan> plans_;
  std::vector<Addressed<TaskRequest>> sent_requests_;
  std::vector<Addressed<TaskResponse>> sent_responses_;
  std::vector<Addressed<GossipMessage>> sent_gossip_;
  std::vector<DroppedMessage> dropped_;
  Mailbox<TaskRequest> requests_;
  Mailbox<TaskResponse> responses_;
  Mailbox<GossipMessage> gossip_;
};

}  // namespace

RunResult run(const RunConfig& config, RunObserver* observer) {
  validate(config);
  return Simulation(config, observer).execute();
}

}  // namespace aest
