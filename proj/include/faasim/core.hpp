#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace faasim {

/// Simulated time in whole milliseconds. The simulator core never reads a
/// wall clock; every timestamp is derived from this type.
struct VirtualTime {
  std::uint64_t millis = 0;

  friend auto operator<=>(const VirtualTime&, const VirtualTime&) = default;
  VirtualTime operator+(std::uint64_t ms) const { return {millis + ms}; }
  std::uint64_t operator-(const VirtualTime& other) const { return millis - other.millis; }
};

/// Deterministic seeded generator (splitmix64). All identifiers and
/// probabilistic draws in a run come from instances of this, never from
/// std:: distributions, so output is stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform double in [0, 1).
  double next_double();
  bool bernoulli(double p) { return next_double() < p; }
  /// Lowercase hex string of `digits` nibbles.
  std::string hex(int digits);

 private:
  std::uint64_t state_;
};

struct TraceContext {
  std::string trace_id;  // 32 lowercase hex chars (128 bit)
  std::string span_id;   // 16 lowercase hex chars (64 bit)
  bool sampled = false;

  friend bool operator==(const TraceContext&, const TraceContext&) = default;
};

enum class SpanKind {
  gateway,
  controller,
  invoker,
  init,
  invocation,
  function_internal,
  external_call,
};

std::string to_string(SpanKind kind);

struct Span {
  TraceContext context;
  std::optional<std::string> parent_span_id;
  std::string name;
  SpanKind kind = SpanKind::function_internal;
  VirtualTime start;
  VirtualTime end;
  std::map<std::string, std::string> tags;
  std::string component;  // originator label, e.g. function or platform part
};

struct Trace {
  std::string trace_id;
  std::vector<Span> spans;

  /// True when every non-root span's parent resolves inside the set and
  /// exactly one root exists.
  bool is_tree() const;
};

enum class Scenario { F1, F2, F3, F4 };

enum class FaultMechanism {
  uncaught_exception,
  external_api_timeout,
  cold_sync_timeout,
  async_downstream_bug,
  invalid_dependency,
  container_kill,
};

std::string to_string(Scenario s);
std::string to_string(FaultMechanism m);

/// Fixed scenario->mechanism binding for F1-F4.
FaultMechanism mechanism_for(Scenario s);

struct FaultSpec {
  Scenario scenario = Scenario::F1;
  FaultMechanism mechanism = FaultMechanism::uncaught_exception;
  std::string target_function;
  double probability = 1.0;
};

enum class TriggerMode { sync, async, entry };

std::string to_string(TriggerMode t);

enum class Channel { response, log, trace };
enum class Position { upstream, downstream, platform, client };
enum class EvidenceContent { success, error, error_timeout, absent };

std::string to_string(Channel c);
std::string to_string(Position p);
std::string to_string(EvidenceContent c);

struct EvidenceRecord {
  Channel channel = Channel::response;
  std::string source;  // component / function name or record role
  Position position = Position::client;
  EvidenceContent content = EvidenceContent::absent;
  std::optional<std::string> message;
  std::string request_id;
  VirtualTime time;
};

/// Normalized, comparable digest of one channel's evidence. Two evidence
/// sets compare equal iff a developer reading only that channel could not
/// tell them apart. Only fault-indicating records (error / error_timeout)
/// participate; request-specific identifiers are stripped.
struct EvidenceSignature {
  Channel channel = Channel::response;
  std::vector<std::pair<std::string, EvidenceContent>> entries;  // (source-role, content), sorted
  bool no_evidence = false;

  friend bool operator==(const EvidenceSignature&, const EvidenceSignature&) = default;
  std::string to_key() const;
};

enum class TriState { yes, no, not_applicable };

std::string to_string(TriState t);

struct ObservabilityVerdict {
  bool visible = false;
  TriState unambiguous = TriState::not_applicable;
  bool consistent = false;
  bool partial_visible = false;
  bool partial_unambiguous = false;
  bool partial_consistent = false;

  /// Invariant check: unambiguous == not_applicable iff !visible.
  bool well_formed() const {
    return (unambiguous == TriState::not_applicable) == !visible;
  }
};

TraceContext new_root_context(Rng& rng, bool sampled);
TraceContext child_context(const TraceContext& parent, Rng& rng);

EvidenceSignature signature_of(const std::vector<EvidenceRecord>& records, Channel channel);

}  // namespace faasim
