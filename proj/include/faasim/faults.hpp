#pragma once

#include <optional>
#include <string>
#include <vector>

#include "faasim/core.hpp"

namespace faasim {

/// A single injectable fault. Scenario-bound mechanisms (F1-F4) must carry
/// their scenario; invalid_dependency and container_kill are standalone
/// mechanisms and carry none.
struct PlannedFault {
  std::optional<Scenario> scenario;
  FaultMechanism mechanism = FaultMechanism::uncaught_exception;
  std::string target_function;
  double probability = 1.0;
};

struct FaultPlan {
  enum class Mode { deterministic_per_request, probabilistic };

  std::vector<PlannedFault> specs;
  std::uint64_t seed = 0;
  Mode mode = Mode::deterministic_per_request;
  /// Init duration forced onto a cold_sync_timeout target. Must exceed the
  /// caller's timeout budget for the scenario to fire.
  std::uint64_t inflated_cold_ms = 900000;
};

struct Injection {
  std::optional<Scenario> scenario;
  FaultMechanism mechanism = FaultMechanism::uncaught_exception;
  std::string target_function;
  VirtualTime injection_time;
};

struct GroundTruthEntry {
  std::string request_id;
  std::optional<Injection> injected;
};

/// Validates probabilities and scenario/mechanism bindings.
/// Throws std::invalid_argument on a malformed plan.
FaultPlan plan_faults(std::vector<PlannedFault> specs, std::uint64_t seed,
                      FaultPlan::Mode mode = FaultPlan::Mode::deterministic_per_request);

/// Per-run injection engine. Owns the plan's generator; draws are made once
/// per submitted request, inside the single-threaded simulation loop.
class FaultEngine {
 public:
  explicit FaultEngine(FaultPlan plan);

  /// Draws the active faults for a new request and opens its ground-truth
  /// entry. In deterministic_per_request mode at most one spec activates.
  void begin_request(const std::string& request_id);

  // Queries used by the platform while simulating the request's tree.
  bool body_throws(const std::string& function, TriggerMode trigger) const;
  bool external_call_hangs(const std::string& function) const;
  /// Returns the forced init duration when the function is a
  /// cold_sync_timeout target.
  std::optional<std::uint64_t> forced_cold_init_ms(const std::string& function) const;
  bool init_fails(const std::string& function) const;
  bool killed(const std::string& function) const;

  /// Records that a drawn fault actually fired; fills the ground-truth
  /// injection for the current request (first firing wins).
  void record_fired(const std::string& function, FaultMechanism mechanism, VirtualTime at);

  const std::vector<GroundTruthEntry>& ground_truth() const { return truth_; }
  const std::vector<PlannedFault>& active() const { return active_; }

 private:
  const PlannedFault* find_active(const std::string& function, FaultMechanism m) const;

  FaultPlan plan_;
  Rng rng_;
  std::vector<PlannedFault> active_;
  std::vector<GroundTruthEntry> truth_;
};

}  // namespace faasim
