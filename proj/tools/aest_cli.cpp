// Command-line front end: run, sweep, verify, replay.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aest/acceptance.hpp"
#include "aest/config_io.hpp"
#include "aest/engine.hpp"
#include "aest/sweep.hpp"
#include "aest/trace.hpp"

namespace {

using aest::Json;

// Flags that mirror config keys. Only flags given on the command line end up
// in the overlay, so they override the config file and nothing else.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::size_t> n;
  std::optional<double> epsilon, delta, f, a, c, coeff;
  std::optional<std::string> model, p_spec, crash_pattern;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> max_rounds;
  bool literal_ell_reset = false;

  void attach(CLI::App* app, bool with_n) {
    app->add_option("--config", config_path, "JSON config file; flags override its keys")
        ->check(CLI::ExistingFile);
    if (with_n) {
      app->add_option("--n", n, "number of processors")->check(CLI::PositiveNumber);
    }
    app->add_option("--epsilon", epsilon, "relative error, in (0, 1)");
    app->add_option("--delta", delta, "failure probability, in (0, 1)");
    app->add_option("--model", model, "crash model")->check(CLI::IsMember({"lf", "fp", "pl"}));
    app->add_option("--f", f, "lf: crashed fraction bound");
    app->add_option("--a", a, "fp: survivors >= coeff * n^a");
    app->add_option("--c", c, "pl: survivors >= coeff * log2(n)^c");
    app->add_option("--coeff", coeff, "fp/pl bound coefficient");
    app->add_option("--p-spec", p_spec, "const:P | uniform:LO,HI | list:P1,P2,...");
    app->add_option("--crash-pattern", crash_pattern, "none | upfront | spread[:ROUNDS]");
    app->add_option("--seed", seed, "run seed");
    app->add_option("--max-rounds", max_rounds, "round cap")->check(CLI::PositiveNumber);
    app->add_flag("--literal-ell-reset", literal_ell_reset,
                  "reset the level on any higher-priority message, not only Profess");
  }

  Json document() const {
    Json doc = config_path.empty() ? Json::object() : aest::load_json_file(config_path);
    if (!doc.is_object()) throw aest::DomainError("config file must hold a JSON object");
    if (n) doc["n"] = *n;
    if (epsilon) doc["epsilon"] = *epsilon;
    if (delta) doc["delta"] = *delta;
    if (model) {
      // A new model invalidates parameters of the old one taken from the file.
      if (doc.contains("model") && doc["model"] != *model) {
        for (const char* k : {"f", "a", "c", "coeff"}) doc.erase(k);
      }
      doc["model"] = *model;
    }
    if (f) doc["f"] = *f;
    if (a) doc["a"] = *a;
    if (c) doc["c"] = *c;
    if (coeff) doc["coeff"] = *coeff;
    if (p_spec) doc["p_spec"] = *p_spec;
    if (crash_pattern) doc["crash_pattern"] = *crash_pattern;
    if (seed) doc["seed"] = *seed;
    if (max_rounds) doc["max_rounds"] = *max_rounds;
    if (literal_ell_reset) doc["literal_ell_reset"] = true;
    return doc;
  }

  aest::RunConfig resolve() const { return aest::config_from_json(document()); }
};

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty() || v == 0) {
      throw aest::DomainError("bad grid entry '" + item + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size() && !text.empty()) {
    const auto comma = text.find(',', pos);
    out.push_back(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized reliability estimation simulator"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "single simulation; summary JSON to stdout or --out");
  ConfigFlags run_flags;
  run_flags.attach(run_cmd, true);
  std::string trace_path, trace_filter, run_out;
  run_cmd->add_option("--trace", trace_path, "write a JSON-lines trace to PATH");
  run_cmd->add_option("--trace-filter", trace_filter,
                      "comma-separated event kinds to trace (default all)");
  run_cmd->add_option("--out", run_out, "directory for summary.json");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "grid of runs; CSV to stdout or --out");
  ConfigFlags sweep_flags;
  sweep_flags.attach(sweep_cmd, false);
  std::string grid_text, vary = "none", values_text, sweep_out;
  std::size_t trials = 1;
  std::optional<double> delta_alpha;
  unsigned sweep_jobs = 1;
  sweep_cmd->add_option("--grid", grid_text, "comma-separated n values, increasing")->required();
  sweep_cmd->add_option("--trials", trials, "seeds per grid point")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--vary", vary, "swept dimension")
      ->check(CLI::IsMember({"none", "model", "epsilon", "delta", "f"}));
  sweep_cmd->add_option("--values", values_text, "comma-separated values of --vary");
  sweep_cmd->add_option("--delta-alpha", delta_alpha, "use delta = n^-alpha per grid point");
  sweep_cmd->add_option("--jobs", sweep_jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep_out, "directory for sweep.csv and sweep.json");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "acceptance suites; one line per criterion");
  std::string criteria_text;
  unsigned verify_jobs = 1;
  verify_cmd->add_option("--criteria", criteria_text, "comma-separated ids (default all)");
  verify_cmd->add_option("--jobs", verify_jobs, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "re-execute a trace and compare byte for byte");
  std::string replay_path;
  replay_cmd->add_option("trace", replay_path, "trace file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const Json doc = run_flags.document();
      if (!doc.contains("n")) throw CLI::RequiredError("--n (or n in --config)");
      const auto config = aest::config_from_json(doc);
      std::optional<aest::RunResult> result;
      if (!trace_path.empty()) {
        std::ofstream trace(trace_path);
        if (!trace) throw std::runtime_error("cannot open " + trace_path);
        result.emplace(aest::run_traced(config, trace, aest::parse_event_filter(trace_filter)));
      } else {
        result.emplace(aest::run(config));
      }
      const std::string summary = aest::summary_json(*result).dump(2) + "\n";
      if (run_out.empty()) {
        std::cout << summary;
      } else {
        std::filesystem::create_directories(run_out);
        write_file(std::filesystem::path(run_out) / "summary.json", summary);
      }
      return 0;
    }

    if (sweep_cmd->parsed()) {
      aest::ExperimentSpec spec;
      spec.grid = parse_grid(grid_text);
      spec.trials = trials;
      Json doc = sweep_flags.document();
      doc["n"] = spec.grid.front();
      spec.base = aest::config_from_json(doc);
      spec.dimension = aest::parse_sweep_dimension(vary);
      spec.values = split(values_text);
      spec.delta_alpha = delta_alpha;
      spec.out_dir = sweep_out;
      spec.jobs = sweep_jobs;
      const auto result = aest::sweep(spec, [](const aest::TrialRow& row) {
        std::fprintf(stderr, "n=%zu trial=%zu T=%.0f\n", row.n, row.trial, row.T);
      });
      if (sweep_out.empty()) {
        aest::write_csv(std::cout, spec, result);
      } else {
        aest::write_sweep_outputs(spec, result);
      }
      return 0;
    }

    if (verify_cmd->parsed()) {
      std::vector<int> ids;
      for (const auto& s : split(criteria_text)) ids.push_back(std::stoi(s));
      if (ids.empty()) {
        for (int k = 1; k <= aest::kCriterionCount; ++k) ids.push_back(k);
      }
      bool all = true;
      for (int id : ids) {
        const auto r = aest::run_criterion(id, {verify_jobs});
        std::cout << aest::format_result(r) << std::endl;
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }

    if (replay_cmd->parsed()) {
      std::ifstream in(replay_path);
      const auto rep = aest::replay_trace(in);
      if (rep.identical) {
        std::cout << "identical: " << rep.lines_compared << " lines\n";
        return 0;
      }
      std::cout << "differs at line " << rep.first_mismatch_line.value_or(0) << "\n  trace:  "
                << rep.expected << "\n  replay: " << rep.actual << "\n";
      return 1;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const aest::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
