#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faasim/core.hpp"

namespace faasim {

enum class TracingMode {
  none,
  developer_driven,
  platform_supported,
  // platform_supported plus auto-instrumentation of external calls,
  // modelling SDK patching as offered by AWS X-Ray.
  platform_supported_auto,
};

std::string to_string(TracingMode m);

bool is_platform_mode(TracingMode m);

struct SamplerConfig {
  enum class Kind { event_based, probability_based };
  Kind kind = Kind::probability_based;
  double probability = 1.0;                       // probability_based only
  std::string event_flag_header = "X-Trace-Sample";  // event_based only
};

struct TracingConfig {
  TracingMode mode = TracingMode::none;
  SamplerConfig sampling;
  /// Virtual-time cost of one span-batch flush. In developer_driven mode it
  /// is charged to the reporting function's invocation; in platform modes it
  /// goes to platform overhead accounting.
  std::uint64_t report_overhead_ms = 5;
  /// Extra invocation latency from instrumented platform components
  /// (controller/invoker hooks), platform modes only.
  std::uint64_t platform_hook_overhead_ms = 8;
  bool collector_down = false;
  /// Whether function bodies wrap their outbound third-party calls in spans.
  /// platform_supported_auto instruments them regardless.
  bool instrument_external_calls = true;
  /// Rare large flush delays, for modelling latency tails. Disabled by default.
  std::uint64_t tail_flush_ms = 0;
  double tail_flush_probability = 0.0;

  bool externals_instrumented() const {
    return instrument_external_calls || mode == TracingMode::platform_supported_auto;
  }
};

class Collector {
 public:
  void add(const Span& span);
  const std::map<std::string, Trace>& traces() const { return traces_; }
  const Trace* find(const std::string& trace_id) const;
  std::uint64_t dropped_batches() const { return dropped_batches_; }
  void note_dropped_batch() { ++dropped_batches_; }
  std::size_t span_count() const;

 private:
  std::map<std::string, Trace> traces_;
  std::uint64_t dropped_batches_ = 0;
};

/// Per-request sampling decision. Event-based sampling keys off a client
/// flag; probability-based sampling is a seeded Bernoulli draw.
bool sample_decision(const SamplerConfig& config, bool event_flag_present, Rng& rng);

/// Env-var wire format for the propagated context: "traceid-spanid-flags".
inline constexpr const char* kTraceContextEnvKey = "TRACE_CONTEXT";

std::string serialize_context(const TraceContext& ctx);
std::optional<TraceContext> parse_context(const std::string& value);

void inject_context(std::map<std::string, std::string>& env, const TraceContext& ctx);
std::optional<TraceContext> extract_context(const std::map<std::string, std::string>& env);

/// Builds a closed function-side span (function_internal or external_call)
/// around one body step.
Span instrument_call(SpanKind kind, const std::string& name, const TraceContext& ctx,
                     std::optional<std::string> parent_span_id, VirtualTime start,
                     VirtualTime end, const std::string& function);

enum class PlatformEvent { gateway_received, controller_scheduled, invoker_init, invoker_run };

/// Builds a closed platform-side span for a lifecycle event.
Span platform_hook(PlatformEvent event, const TraceContext& ctx,
                   std::optional<std::string> parent_span_id, VirtualTime start, VirtualTime end,
                   const std::string& function);

/// Appends a span batch to the collector. Fire-and-forget: an unavailable
/// collector loses the batch and increments the drop counter.
void report_spans(Collector& collector, const std::vector<Span>& batch, bool collector_down);

/// Zipkin v2 JSON array of all collected spans, ordered by (timestamp, id).
std::string export_zipkin_v2(const Collector& collector);

}  // namespace faasim
