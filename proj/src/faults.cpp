#include "faasim/faults.hpp"

#include <stdexcept>

namespace faasim {

FaultPlan plan_faults(std::vector<PlannedFault> specs, std::uint64_t seed, FaultPlan::Mode mode) {
  for (const auto& s : specs) {
    if (s.probability < 0.0 || s.probability > 1.0) {
      throw std::invalid_argument("fault probability outside [0,1] for target '" +
                                  s.target_function + "'");
    }
    if (s.scenario) {
      if (s.mechanism != mechanism_for(*s.scenario)) {
        throw std::invalid_argument("scenario " + to_string(*s.scenario) +
                                    " is bound to mechanism " +
                                    to_string(mechanism_for(*s.scenario)) + ", got " +
                                    to_string(s.mechanism));
      }
    } else {
      if (s.mechanism != FaultMechanism::invalid_dependency &&
          s.mechanism != FaultMechanism::container_kill) {
        throw std::invalid_argument("mechanism " + to_string(s.mechanism) +
                                    " requires a scenario binding");
      }
    }
  }
  FaultPlan plan;
  plan.specs = std::move(specs);
  plan.seed = seed;
  plan.mode = mode;
  return plan;
}

FaultEngine::FaultEngine(FaultPlan plan) : plan_(std::move(plan)), rng_(plan_.seed) {}

void FaultEngine::begin_request(const std::string& request_id) {
  active_.clear();
  for (const auto& spec : plan_.specs) {
    if (rng_.bernoulli(spec.probability)) {
      active_.push_back(spec);
      if (plan_.mode == FaultPlan::Mode::deterministic_per_request) break;
    }
  }
  truth_.push_back({request_id, std::nullopt});
}

const PlannedFault* FaultEngine::find_active(const std::string& function,
                                             FaultMechanism m) const {
  for (const auto& f : active_) {
    if (f.mechanism == m && f.target_function == function) return &f;
  }
  return nullptr;
}

bool FaultEngine::body_throws(const std::string& function, TriggerMode trigger) const {
  if (find_active(function, FaultMechanism::uncaught_exception)) return true;
  if (trigger == TriggerMode::async &&
      find_active(function, FaultMechanism::async_downstream_bug)) {
    return true;
  }
  return false;
}

bool FaultEngine::external_call_hangs(const std::string& function) const {
  return find_active(function, FaultMechanism::external_api_timeout) != nullptr;
}

std::optional<std::uint64_t> FaultEngine::forced_cold_init_ms(const std::string& function) const {
  if (find_active(function, FaultMechanism::cold_sync_timeout)) return plan_.inflated_cold_ms;
  return std::nullopt;
}

bool FaultEngine::init_fails(const std::string& function) const {
  return find_active(function, FaultMechanism::invalid_dependency) != nullptr;
}

bool FaultEngine::killed(const std::string& function) const {
  return find_active(function, FaultMechanism::container_kill) != nullptr;
}

void FaultEngine::record_fired(const std::string& function, FaultMechanism mechanism,
                               VirtualTime at) {
  if (truth_.empty() || truth_.back().injected) return;
  const PlannedFault* spec = find_active(function, mechanism);
  if (!spec) return;
  truth_.back().injected = Injection{spec->scenario, mechanism, function, at};
}

}  // namespace faasim
