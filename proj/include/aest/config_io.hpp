#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "aest/engine.hpp"

namespace aest {

using Json = nlohmann::ordered_json;

/// "const:P", "uniform:LO,HI" or "list:P1,P2,...".
ReliabilitySpec parse_p_spec(std::string_view text);
std::string format_p_spec(const ReliabilitySpec& spec);

/// "none", "upfront" or "spread[:ROUNDS]".
CrashPattern parse_crash_pattern(std::string_view text);
std::string format_crash_pattern(const CrashPattern& pattern);

/// Flat key-value form of a RunConfig. Keys: n, epsilon, delta, model, f, a,
/// c, coeff, p_spec, crash_pattern, seed, max_rounds, literal_ell_reset.
/// Only the parameters of the selected model are written.
Json config_to_json(const RunConfig& config);

/// Applies the keys present in `doc` on top of `base`. Unknown keys and
/// parameters that do not belong to the selected model are errors.
RunConfig config_from_json(const Json& doc, const RunConfig& base = {});

Json load_json_file(const std::filesystem::path& path);

/// Schema "aest-summary/1": effective config, completion, metrics, accuracy.
Json summary_json(const RunResult& run);

}  // namespace aest
