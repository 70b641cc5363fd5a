#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "faasim/core.hpp"
#include "faasim/evidence.hpp"
#include "faasim/faults.hpp"
#include "faasim/tracing.hpp"

namespace faasim {

struct FunctionSpec {
  std::string name;
  std::uint64_t base_exec_ms = 100;
  int memory_mb = 128;
  std::uint64_t timeout_ms = 300000;
  std::vector<std::string> external_calls;
  bool instrumented = true;
};

enum class EdgeMode { sync, async };

struct Edge {
  std::string caller;
  std::string callee;
  EdgeMode mode = EdgeMode::sync;
  /// Fan out one async invocation per workload record.
  bool per_record = false;
  /// Additionally multiply by images_per_record (per_record edges only).
  bool per_image = false;
};

struct CompositionSpec {
  std::map<std::string, FunctionSpec> functions;
  std::vector<Edge> edges;
  std::string entry;
};

struct PlatformProfile {
  enum class Name { aws_like, openwhisk_like };
  Name name = Name::openwhisk_like;
  /// Response code policy is fixed by the platform family: aws_like always
  /// returns a success code, openwhisk_like surfaces failures in the code.
  bool always_success_code() const { return name == Name::aws_like; }
  /// Async failures never alter the response on either platform.
  static constexpr bool async_failure_surfaced_in_response = false;
  /// Reserved; retries are outside the evaluated scope.
  bool async_retries = false;
};

std::string to_string(PlatformProfile::Name n);

enum class StepKind { validation, resource_allocation, cold_start_init, invocation };
enum class Outcome { success, error, timeout };

std::string to_string(StepKind s);
std::string to_string(Outcome o);

struct ExecutionStep {
  StepKind step = StepKind::validation;
  VirtualTime start;
  VirtualTime end;
};

struct InvocationRecord {
  std::string invocation_id;
  std::string request_id;
  std::string function;
  std::vector<ExecutionStep> steps;
  Outcome outcome = Outcome::success;
  bool cold = false;
  std::optional<std::string> parent_invocation;
  TriggerMode trigger_mode = TriggerMode::entry;
  VirtualTime start;
  VirtualTime end;
  /// Duration of the invocation step (the measured function execution time).
  std::uint64_t exec_ms = 0;
  /// Developer-driven span flushes performed by this invocation.
  std::uint64_t flushes = 0;
};

struct ResponseEnvelope {
  std::string request_id;
  EvidenceContent code = EvidenceContent::success;
  EvidenceContent body = EvidenceContent::success;
  std::string message;
};

struct RequestPayload {
  int records = 0;
  int images_per_record = 1;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RuntimePoolConfig {
  std::uint64_t cold_start_ms = 500;
  std::uint64_t warm_ttl_ms = 600000;  // 10 minutes
};

/// Deterministic virtual-time FaaS platform. Single-threaded per handle;
/// a handle may be moved between threads but never shared mutably.
class Platform {
 public:
  Platform(CompositionSpec spec, PlatformProfile profile, TracingConfig tracing,
           FaultPlan fault_plan, std::uint64_t seed, RuntimePoolConfig pool = {});

  /// Runs the whole request tree (sync path and async fan-out) to
  /// quiescence and returns the shaped response.
  ResponseEnvelope submit_request(const RequestPayload& payload, bool client_sample_flag);

  /// Ledger in deterministic (time, sequence) order.
  std::vector<InvocationRecord> run_to_quiescence();

  const std::vector<InvocationRecord>& ledger() const { return ledger_; }
  const std::vector<ResponseEnvelope>& responses() const { return responses_; }
  const LogStore& logs() const { return logs_; }
  const Collector& collector() const { return collector_; }
  const std::vector<GroundTruthEntry>& ground_truth() const { return faults_.ground_truth(); }
  /// trace_id per sampled request; absent entries mean unsampled or mode none.
  const std::map<std::string, std::string>& request_traces() const { return request_traces_; }
  const CompositionSpec& composition() const { return spec_; }
  const PlatformProfile& profile() const { return profile_; }
  const TracingConfig& tracing() const { return tracing_; }
  std::uint64_t platform_flush_charge_ms() const { return platform_flush_charge_ms_; }
  std::size_t registered_functions() const { return spec_.functions.size(); }

  /// Hard cap on invocations per request; exceeding it aborts the run.
  std::uint64_t event_safety_limit = 1000000;

 private:
  struct PendingAsync {
    VirtualTime at;
    std::uint64_t seq;
    std::string function;
    std::optional<TraceContext> ctx;
    std::string parent_invocation;
  };

  struct InvocationResult {
    VirtualTime end;
    Outcome outcome = Outcome::success;
  };

  void validate() const;
  InvocationResult execute_invocation(const std::string& function, TriggerMode trigger,
                                      VirtualTime at, std::optional<TraceContext> inbound_ctx,
                                      std::optional<std::string> parent_invocation,
                                      const RequestPayload& payload, bool sampled,
                                      const std::string& request_id);
  bool take_warm(const std::string& function, VirtualTime at);
  void put_warm(const std::string& function, VirtualTime at);
  void log_info(const std::string& fn, VirtualTime t, const std::string& msg,
                const std::string& request_id);
  void log_error(const std::string& fn, VirtualTime t, const std::string& msg,
                 const std::string& request_id, bool platform, bool timeout);

  CompositionSpec spec_;
  PlatformProfile profile_;
  TracingConfig tracing_;
  FaultEngine faults_;
  RuntimePoolConfig pool_cfg_;
  Rng rng_;

  VirtualTime now_;
  std::uint64_t request_seq_ = 0;
  std::uint64_t invocation_seq_ = 0;
  std::uint64_t async_seq_ = 0;
  std::uint64_t events_this_request_ = 0;
  // fn -> (available_from, expiry) per idle runtime
  std::map<std::string, std::vector<std::pair<VirtualTime, VirtualTime>>> warm_;
  std::deque<PendingAsync> async_queue_;

  std::vector<InvocationRecord> ledger_;
  std::vector<ResponseEnvelope> responses_;
  LogStore logs_;
  Collector collector_;
  std::map<std::string, std::string> request_traces_;
  std::uint64_t platform_flush_charge_ms_ = 0;
};

/// Validates the composition and builds a ready platform with an empty
/// runtime pool. Throws ValidationError on cyclic edges, unknown entry or
/// dangling edge endpoints.
std::unique_ptr<Platform> deploy(CompositionSpec spec, PlatformProfile profile,
                                 TracingConfig tracing, FaultPlan fault_plan,
                                 std::uint64_t seed, RuntimePoolConfig pool = {});

}  // namespace faasim
