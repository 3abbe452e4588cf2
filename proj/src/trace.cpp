#include "aest/trace.hpp"

#include <algorithm>
#include <ostream>

namespace aest {

namespace {

constexpr EventKind kAllKinds[] = {EventKind::send,      EventKind::receive, EventKind::enlighten,
                                   EventKind::ell_reset, EventKind::halt,    EventKind::crash,
                                   EventKind::drop};

void append_field(std::string& out, std::string_view key, std::uint64_t v) {
  out += ",\"";
  out += key;
  out += "\":";
  out += std::to_string(v);
}

void append_field(std::string& out, std::string_view key, std::string_view v) {
  out += ",\"";
  out += key;
  out += "\":\"";
  out += v;
  out += '"';
}

}  // namespace

std::vector<EventKind> parse_event_filter(std::string_view text) {
  std::vector<EventKind> out;
  if (text.empty() || text == "all") return out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto name = text.substr(0, comma);
    const auto* it = std::ranges::find_if(kAllKinds, [&](EventKind k) { return to_string(k) == name; });
    if (it == std::end(kAllKinds)) {
      throw DomainError("unknown trace event kind '" + std::string(name) + "'");
    }
    if (std::ranges::find(out, *it) == out.end()) out.push_back(*it);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  std::ranges::sort(out);
  return out;
}

std::string format_event(const TraceEvent& e) {
  std::string out = "{\"round\":";
  out.reserve(160);
  out += std::to_string(e.round);
  append_field(out, "stage", to_string(e.stage));
  append_field(out, "step", to_string(e.step));
  append_field(out, "id", e.id);
  append_field(out, "seq", e.seq);
  append_field(out, "kind", to_string(e.kind));
  if (e.message) append_field(out, "msg", to_string(*e.message));
  if (e.peer) append_field(out, "peer", *e.peer);
  if (e.level) append_field(out, "level", *e.level);
  if (e.correct) {
    out += ",\"correct\":";
    out += *e.correct ? "true" : "false";
  }
  if (e.known) append_field(out, "known", *e.known);
  if (e.reason != DropReason::none) append_field(out, "reason", to_string(e.reason));
  out += '}';
  return out;
}

std::string trace_header(const RunConfig& config, const std::vector<EventKind>& filter) {
  Json j;
  j["schema"] = kTraceSchema;
  j["config"] = config_to_json(config);
  Json f = Json::array();
  for (auto k : filter.empty() ? std::vector<EventKind>(std::begin(kAllKinds), std::end(kAllKinds))
                               : filter) {
    f.push_back(to_string(k));
  }
  j["filter"] = f;
  return j.dump();
}

std::string trace_footer(const RunResult& run, std::uint64_t events) {
  Json j;
  j["end"] = true;
  j["completion"] = run.completion == Completion::all_halted ? "all_halted" : "round_cap_hit";
  j["rounds_executed"] = run.rounds_executed;
  j["T"] = run.metrics.rounds_to_all_halt;
  j["W"] = run.metrics.work_steps;
  j["M"] = run.metrics.messages_total;
  j["events"] = events;
  return j.dump();
}

TraceWriter::TraceWriter(Sink sink, const RunConfig& config, std::vector<EventKind> filter)
    : sink_(std::move(sink)), filter_(std::move(filter)) {
  std::ranges::sort(filter_);
  sink_(trace_header(config, filter_));
}

bool TraceWriter::wants(EventKind kind) const {
  return filter_.empty() || std::ranges::binary_search(filter_, kind);
}

void TraceWriter::on_event(const TraceEvent& event) {
  ++events_;
  sink_(format_event(event));
}

void TraceWriter::finish(const RunResult& run) { sink_(trace_footer(run, events_)); }

RunResult run_traced(const RunConfig& config, std::ostream& out,
                     const std::vector<EventKind>& filter) {
  TraceWriter writer(
      [&out](std::string_view line) {
        out << line << '\n';
        if (!out) throw std::runtime_error("trace write failed");
      },
      config, filter);
  auto result = run(config, &writer);
  writer.finish(result);
  out.flush();
  return result;
}

ReplayReport replay_trace(std::istream& trace) {
  ReplayReport report;
  std::string header;
  if (!std::getline(trace, header)) throw DomainError("trace is empty");
  Json doc;
  try {
    doc = Json::parse(header);
  } catch (const Json::parse_error& e) {
    throw DomainError(std::string("trace header is not JSON: ") + e.what());
  }
  if (!doc.contains("schema") || doc["schema"] != kTraceSchema) {
    throw DomainError("unsupported trace schema");
  }
  const RunConfig config = config_from_json(doc.at("config"));
  std::vector<EventKind> filter;
  for (const auto& k : doc.at("filter")) {
    const auto parsed = parse_event_filter(k.get<std::string>());
    filter.insert(filter.end(), parsed.begin(), parsed.end());
  }
  if (filter.size() == std::size(kAllKinds)) filter.clear();

  std::uint64_t line_no = 0;
  bool mismatch = false;
  std::string expected;
  auto compare = [&](std::string_view actual) {
    ++line_no;
    if (mismatch) return;
    if (line_no == 1) {
      expected = header;
    } else if (!std::getline(trace, expected)) {
      expected.clear();
      mismatch = true;
    }
    if (!mismatch && expected == actual) {
      ++report.lines_compared;
      return;
    }
    mismatch = true;
    report.first_mismatch_line = line_no;
    report.expected = expected;
    report.actual = std::string(actual);
  };

  TraceWriter writer(compare, config, filter);
  const auto result = run(config, &writer);
  writer.finish(result);
  if (!mismatch) {
    std::string extra;
    if (std::getline(trace, extra)) {
      report.first_mismatch_line = line_no + 1;
      report.expected = extra;
      mismatch = true;
    }
  }
  report.identical = !mismatch;
  return report;
}

}  // namespace aest
