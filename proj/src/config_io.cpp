#include "aest/config_io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace aest {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw DomainError("bad number '" + std::string(text) + "' in " + std::string(what));
  }
  return v;
}

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_double(text.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T get_number(const Json& doc, const char* key) {
  const auto& v = doc.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw DomainError(std::string(key) + " must be an integer");
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > std::numeric_limits<T>::max()) throw DomainError(std::string(key) + " is too large");
      return static_cast<T>(u);
    }
    const auto s = v.get<std::int64_t>();
    if (s < 0) throw DomainError(std::string(key) + " must not be negative");
    if (static_cast<std::uint64_t>(s) > std::numeric_limits<T>::max()) {
      throw DomainError(std::string(key) + " is too large");
    }
    return static_cast<T>(s);
  } else {
    if (!v.is_number()) throw DomainError(std::string(key) + " must be a number");
    return v.get<T>();
  }
}

std::string get_string(const Json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_string()) throw DomainError(std::string(key) + " must be a string");
  return v.get<std::string>();
}

}  // namespace

ReliabilitySpec parse_p_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DomainError("p-spec must look like const:P, uniform:LO,HI or list:P1,...");
  }
  const auto kind = text.substr(0, colon);
  const auto body = text.substr(colon + 1);
  if (kind == "const") return ConstantReliability{parse_double(body, "p-spec")};
  if (kind == "uniform") {
    const auto v = parse_list(body, "p-spec");
    if (v.size() != 2) throw DomainError("uniform p-spec needs exactly two bounds");
    return UniformReliability{v[0], v[1]};
  }
  if (kind == "list") return ExplicitReliability{parse_list(body, "p-spec")};
  throw DomainError("unknown p-spec kind '" + std::string(kind) + "'");
}

std::string format_p_spec(const ReliabilitySpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantReliability>) {
          return "const:" + format_double(s.p);
        } else if constexpr (std::is_same_v<S, UniformReliability>) {
          return "uniform:" + format_double(s.lo) + "," + format_double(s.hi);
        } else {
          std::string out = "list:";
          for (std::size_t k = 0; k < s.p.size(); ++k) {
            if (k > 0) out += ',';
            out += format_double(s.p[k]);
          }
          return out;
        }
      },
      spec);
}

CrashPattern parse_crash_pattern(std::string_view text) {
  if (text == "none") return NoCrashes{};
  if (text == "upfront") return UpfrontCrashes{};
  if (text == "spread") return SpreadCrashes{};
  if (text.starts_with("spread:")) {
    const auto body = text.substr(7);
    Round rounds = 0;
    const auto res = std::from_chars(body.data(), body.data() + body.size(), rounds);
    if (res.ec != std::errc{} || res.ptr != body.data() + body.size() || rounds == 0) {
      throw DomainError("spread crash pattern needs a positive round count");
    }
    return SpreadCrashes{rounds};
  }
  throw DomainError("unknown crash pattern '" + std::string(text) + "'");
}

std::string format_crash_pattern(const CrashPattern& pattern) {
  if (std::holds_alternative<NoCrashes>(pattern)) return "none";
  if (std::holds_alternative<UpfrontCrashes>(pattern)) return "upfront";
  return "spread:" + std::to_string(std::get<SpreadCrashes>(pattern).rounds);
}

Json config_to_json(const RunConfig& config) {
  Json j;
  j["n"] = config.n;
  j["epsilon"] = config.params.epsilon();
  j["delta"] = config.params.delta();
  j["model"] = model_name(config.model);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearFraction>) {
          j["f"] = m.f;
        } else if constexpr (std::is_same_v<M, FractionalPolynomial>) {
          j["a"] = m.a;
          j["coeff"] = m.coeff;
        } else {
          j["c"] = m.c;
          j["coeff"] = m.coeff;
        }
      },
      config.model);
  j["p_spec"] = format_p_spec(config.reliability);
  j["crash_pattern"] = format_crash_pattern(config.crash_pattern);
  j["seed"] = config.seed;
  if (config.max_rounds) {
    j["max_rounds"] = *config.max_rounds;
  } else {
    j["max_rounds"] = nullptr;
  }
  j["literal_ell_reset"] = config.literal_ell_reset;
  return j;
}

RunConfig config_from_json(const Json& doc, const RunConfig& base) {
  if (!doc.is_object()) throw DomainError("config must be a key-value object");
  static const std::set<std::string> known = {
      "n",      "epsilon", "delta",         "model", "f",          "a", "c", "coeff",
      "p_spec", "seed",    "crash_pattern", "max_rounds", "literal_ell_reset"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw DomainError("unknown config key '" + key + "'");
  }

  RunConfig out = base;
  if (doc.contains("n")) out.n = get_number<std::size_t>(doc, "n");
  const double eps = doc.contains("epsilon") ? get_number<double>(doc, "epsilon")
                                             : base.params.epsilon();
  const double delta = doc.contains("delta") ? get_number<double>(doc, "delta")
                                             : base.params.delta();
  out.params = EstimationParams(eps, delta);

  const std::string name = doc.contains("model") ? get_string(doc, "model")
                                                 : model_name(base.model);
  if (name != model_name(base.model)) {
    if (name == "lf") {
      out.model = LinearFraction{};
    } else if (name == "fp") {
      out.model = FractionalPolynomial{};
    } else if (name == "pl") {
      out.model = PolyLog{};
    } else {
      throw DomainError("unknown model '" + name + "' (expected lf, fp or pl)");
    }
  }
  auto reject = [&](const char* key) {
    if (doc.contains(key)) {
      throw DomainError(std::string("parameter '") + key + "' does not apply to model " + name);
    }
  };
  std::visit(
      [&](auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearFraction>) {
          if (doc.contains("f")) m.f = get_number<double>(doc, "f");
          reject("a");
          reject("c");
          reject("coeff");
        } else if constexpr (std::is_same_v<M, FractionalPolynomial>) {
          if (doc.contains("a")) m.a = get_number<double>(doc, "a");
          if (doc.contains("coeff")) m.coeff = get_number<double>(doc, "coeff");
          reject("f");
          reject("c");
        } else {
          if (doc.contains("c")) m.c = get_number<double>(doc, "c");
          if (doc.contains("coeff")) m.coeff = get_number<double>(doc, "coeff");
          reject("f");
          reject("a");
        }
      },
      out.model);
  validate_model(out.model);

  if (doc.contains("p_spec")) out.reliability = parse_p_spec(get_string(doc, "p_spec"));
  if (doc.contains("crash_pattern")) {
    out.crash_pattern = parse_crash_pattern(get_string(doc, "crash_pattern"));
  }
  if (doc.contains("seed")) out.seed = get_number<std::uint64_t>(doc, "seed");
  if (doc.contains("max_rounds")) {
    if (doc.at("max_rounds").is_null()) {
      out.max_rounds.reset();
    } else {
      out.max_rounds = get_number<Round>(doc, "max_rounds");
    }
  }
  if (doc.contains("literal_ell_reset")) {
    if (!doc.at("literal_ell_reset").is_boolean()) {
      throw DomainError("literal_ell_reset must be a boolean");
    }
    out.literal_ell_reset = doc.at("literal_ell_reset").get<bool>();
  }
  return out;
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

Json summary_json(const RunResult& run) {
  const auto& m = run.metrics;
  const auto acc = accuracy(run);
  const ProtocolConstants c(run.config.n, run.config.params, run.config.literal_ell_reset);

  Json j;
  j["schema"] = "aest-summary/1";
  j["config"] = config_to_json(run.config);
  j["completion"] = run.completion == Completion::all_halted ? "all_halted" : "round_cap_hit";
  j["rounds_executed"] = run.rounds_executed;
  j["max_rounds"] = effective_max_rounds(run.config);

  Json derived;
  derived["gamma"] = gamma(run.config.params);
  derived["gamma1"] = c.gamma1;
  derived["request_cap"] = c.request_cap;
  derived["halt_level"] = c.halt_level;
  derived["crashed"] = run.schedule.crash_count();
  derived["survivors"] = run.schedule.survivors();
  std::size_t halted = 0;
  for (const auto& h : run.halt_rounds()) halted += h.has_value() ? 1 : 0;
  derived["halted"] = halted;
  j["derived"] = derived;

  Json mj;
  mj["T"] = m.rounds_to_all_halt;
  mj["W"] = m.work_steps;
  mj["M"] = m.messages_total;
  Json by_type;
  for (auto k : {MessageKind::request, MessageKind::response, MessageKind::share,
                 MessageKind::profess}) {
    by_type[std::string(to_string(k))] = m.messages(k);
  }
  mj["messages_by_type"] = by_type;
  mj["tasks_executed"] = m.tasks_executed;
  mj["false_crash_detections"] = m.false_crash_detections;
  mj["halted_target_detections"] = m.halted_target_detections;
  mj["dropped_requests"] = m.dropped_requests;
  mj["delivered"] = m.delivered;
  mj["dropped_to_crashed"] = m.dropped_to_crashed;
  mj["dropped_to_halted"] = m.dropped_to_halted;
  mj["ledger_balanced"] = m.ledger_balanced();
  j["metrics"] = mj;

  Json aj;
  aj["live_pairs"] = acc.live_pairs;
  aj["within_band_pairs"] = acc.within_band_pairs;
  aj["fraction_within_band"] = acc.fraction_within_band;
  aj["crashed_pairs"] = acc.crashed_pairs;
  aj["true_positives"] = acc.true_positives;
  aj["false_positives"] = acc.false_positives;
  aj["missed_crashes"] = acc.missed_crashes;
  aj["undetermined"] = acc.undetermined;
  j["accuracy"] = aj;
  return j;
}

}  // namespace aest
