#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aest/config_io.hpp"
#include "aest/engine.hpp"

namespace aest {

enum class SweepDimension { none, model, epsilon, delta, f };

std::string_view to_string(SweepDimension d);
SweepDimension parse_sweep_dimension(std::string_view text);

struct ExperimentSpec {
  std::vector<std::size_t> grid;  // strictly increasing
  std::size_t trials = 1;
  RunConfig base;
  SweepDimension dimension = SweepDimension::none;
  /// Values of the swept dimension: model names or numbers. Ignored for none.
  std::vector<std::string> values;
  /// When set, each point uses delta = n^-alpha instead of base delta.
  std::optional<double> delta_alpha;
  std::filesystem::path out_dir;  // empty: no files
  unsigned jobs = 1;
};

/// Throws DomainError when the grid is empty or unsorted, trials is zero, or
/// a swept value cannot be applied.
void validate(const ExperimentSpec& spec);

/// Effective config of one grid point; the trial seed is base.seed + trial.
RunConfig point_config(const ExperimentSpec& spec, const std::string& value, std::size_t n,
                       std::size_t trial);

struct TrialRow {
  std::string value;  // swept value, empty for none
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool completed = false;
  double T = 0, W = 0, M = 0;
  double in_band = 0;
  std::uint64_t false_positives = 0;
  std::uint64_t undetermined = 0;
  std::uint64_t false_crash_detections = 0;
};

struct Moments {
  double mean = 0;
  double sd = 0;  // sample standard deviation, 0 for a single trial
};

struct AggregateRow {
  std::string value;
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t completed = 0;
  Moments T, W, M;
  Moments T_norm, W_norm, M_norm;  // T/log2 n, W/(n log2 n), M/(n log2^2 n)
  Moments in_band;
  double false_positives = 0;
  double undetermined = 0;
  double false_crash_detections = 0;
};

struct SweepResult {
  std::vector<TrialRow> trials;         // value-major, then n, then trial
  std::vector<AggregateRow> aggregates; // one per (value, n)
};

/// Runs every (value, n, trial) point, in parallel when spec.jobs > 1. The
/// result does not depend on the number of jobs. A failing run is rethrown
/// with its grid coordinates.
SweepResult sweep(const ExperimentSpec& spec,
                  const std::function<void(const TrialRow&)>& progress = {});

/// Fixed header:
/// kind,vary,value,n,trial,seed,completed,T,W,M,T_norm,W_norm,M_norm,in_band,
/// false_positives,undetermined,false_crash_detections,T_sd,W_sd,M_sd,in_band_sd
/// Trial rows have kind "trial"; per-point rows have kind "mean" with
/// `completed` counting completed trials and other columns holding means.
void write_csv(std::ostream& out, const ExperimentSpec& spec, const SweepResult& result);

Json spec_to_json(const ExperimentSpec& spec);

/// Writes sweep.csv and sweep.json (the experiment with its base config) to spec.out_dir.
void write_sweep_outputs(const ExperimentSpec& spec, const SweepResult& result);

}  // namespace aest
