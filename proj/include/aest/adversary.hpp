#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aest/types.hpp"

namespace aest {

// ---------------------------------------------------------------------------
// Reliability
// ---------------------------------------------------------------------------

struct ConstantReliability {
  double p;
};
struct UniformReliability {
  double lo;
  double hi;
};
struct ExplicitReliability {
  std::vector<double> p;
};
using ReliabilitySpec = std::variant<ConstantReliability, UniformReliability, ExplicitReliability>;

/// Hidden per-processor probabilities of returning a correct result.
class ReliabilityAssignment {
 public:
  explicit ReliabilityAssignment(std::vector<double> p);

  double operator[](ProcessorId id) const { return p_[id]; }
  std::size_t size() const { return p_.size(); }
  const std::vector<double>& values() const { return p_; }

 private:
  std::vector<double> p_;
};

ReliabilityAssignment assign_probabilities(std::size_t n, const ReliabilitySpec& spec,
                                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Crash models
// ---------------------------------------------------------------------------

/// Survivors >= (1 - f) n. f = 0 means no crashes.
struct LinearFraction {
  double f = 0.25;
};
/// Survivors >= coeff * n^a.
struct FractionalPolynomial {
  double a = 0.5;
  double coeff = 1.0;
};
/// Survivors >= coeff * (log2 n)^c.
struct PolyLog {
  double c = 1.0;
  double coeff = 1.0;
};
using AdversaryModel = std::variant<LinearFraction, FractionalPolynomial, PolyLog>;

void validate_model(const AdversaryModel& model);
std::string model_name(const AdversaryModel& model);

/// Smallest admissible survivor count: ceil of the model bound, at least 1.
/// Throws DomainError when the bound exceeds n.
std::size_t min_survivors(const AdversaryModel& model, std::size_t n);

struct NoCrashes {};
struct UpfrontCrashes {};
struct SpreadCrashes {
  Round rounds = 32;
};
using CrashPattern = std::variant<NoCrashes, UpfrontCrashes, SpreadCrashes>;

/// Crash round per processor; processors without an entry never crash.
class CrashSchedule {
 public:
  explicit CrashSchedule(std::size_t n) : crash_round_(n) {}

  void set_crash(ProcessorId id, Round round);
  std::optional<Round> crash_round(ProcessorId id) const { return crash_round_[id]; }
  std::size_t population() const { return crash_round_.size(); }
  std::size_t crash_count() const;
  std::size_t survivors() const { return population() - crash_count(); }

  friend bool operator==(const CrashSchedule&, const CrashSchedule&) = default;

 private:
  std::vector<std::optional<Round>> crash_round_;
};

/// Crashes the largest number of processors the model allows, chosen
/// uniformly, with rounds set by `pattern`.
CrashSchedule generate_crash_schedule(std::size_t n, const AdversaryModel& model,
                                      const CrashPattern& pattern, std::uint64_t seed);

struct ScheduleReport {
  bool ok;
  std::size_t survivors;
  double required;  // the model bound before rounding
  double margin;    // survivors - required; negative means deficit
};

ScheduleReport validate_schedule(const CrashSchedule& schedule, const AdversaryModel& model,
                                 std::size_t n);

/// True iff `id` has no crash entry or crashes after `round`.
bool is_live(const CrashSchedule& schedule, ProcessorId id, Round round);

}  // namespace aest
