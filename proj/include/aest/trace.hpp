#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aest/config_io.hpp"
#include "aest/engine.hpp"

namespace aest {

inline constexpr std::string_view kTraceSchema = "aest-trace/1";

/// Comma-separated event kinds, e.g. "halt,crash". "all" or empty selects all.
std::vector<EventKind> parse_event_filter(std::string_view text);

/// One JSON object per event with a fixed key order; optional payload keys
/// appear only when set.
std::string format_event(const TraceEvent& event);

std::string trace_header(const RunConfig& config, const std::vector<EventKind>& filter);
std::string trace_footer(const RunResult& run, std::uint64_t events);

/// Writes a trace as JSON lines: header, one line per event, footer.
/// The sink receives each line without its trailing newline.
class TraceWriter : public RunObserver {
 public:
  using Sink = std::function<void(std::string_view)>;

  TraceWriter(Sink sink, const RunConfig& config, std::vector<EventKind> filter = {});

  bool wants(EventKind kind) const override;
  void on_event(const TraceEvent& event) override;
  /// Emits the footer line.
  void finish(const RunResult& run);
  std::uint64_t events_written() const { return events_; }

 private:
  Sink sink_;
  std::vector<EventKind> filter_;
  std::uint64_t events_ = 0;
};

/// Runs `config` and streams its trace to `out`.
RunResult run_traced(const RunConfig& config, std::ostream& out,
                     const std::vector<EventKind>& filter = {});

struct ReplayReport {
  bool identical = false;
  std::uint64_t lines_compared = 0;
  std::optional<std::uint64_t> first_mismatch_line;  // 1-based
  std::string expected;  // line from the file
  std::string actual;    // regenerated line
};

/// Re-executes the run described by a trace header and compares the
/// regenerated trace with the stream line by line.
ReplayReport replay_trace(std::istream& trace);

}  // namespace aest
