#include "faasim/tracing.hpp"

#include <algorithm>

#include <json.hpp>

namespace faasim {

namespace {
// Zipkin timestamps are microseconds since epoch; virtual time 0 maps to a
// fixed synthetic epoch so exports are reproducible.
constexpr std::uint64_t kEpochOffsetMicros = 1600000000000000ULL;
}  // namespace

std::string to_string(TracingMode m) {
  switch (m) {
    case TracingMode::none: return "none";
    case TracingMode::developer_driven: return "developer_driven";
    case TracingMode::platform_supported: return "platform_supported";
    case TracingMode::platform_supported_auto: return "platform_supported_auto";
  }
  return "?";
}

bool is_platform_mode(TracingMode m) {
  return m == TracingMode::platform_supported || m == TracingMode::platform_supported_auto;
}

void Collector::add(const Span& span) {
  auto& trace = traces_[span.context.trace_id];
  trace.trace_id = span.context.trace_id;
  trace.spans.push_back(span);
}

const Trace* Collector::find(const std::string& trace_id) const {
  auto it = traces_.find(trace_id);
  return it == traces_.end() ? nullptr : &it->second;
}

std::size_t Collector::span_count() const {
  std::size_t n = 0;
  for (const auto& [id, t] : traces_) n += t.spans.size();
  return n;
}

bool sample_decision(const SamplerConfig& config, bool event_flag_present, Rng& rng) {
  if (config.kind == SamplerConfig::Kind::event_based) return event_flag_present;
  return rng.bernoulli(config.probability);
}

std::string serialize_context(const TraceContext& ctx) {
  return ctx.trace_id + "-" + ctx.span_id + "-" + (ctx.sampled ? "01" : "00");
}

std::optional<TraceContext> parse_context(const std::string& value) {
  // 32 hex, '-', 16 hex, '-', 2 flag chars
  if (value.size() != 32 + 1 + 16 + 1 + 2) return std::nullopt;
  if (value[32] != '-' || value[49] != '-') return std::nullopt;
  TraceContext ctx;
  ctx.trace_id = value.substr(0, 32);
  ctx.span_id = value.substr(33, 16);
  ctx.sampled = value.substr(50, 2) == "01";
  return ctx;
}

void inject_context(std::map<std::string, std::string>& env, const TraceContext& ctx) {
  if (!ctx.sampled) return;
  env[kTraceContextEnvKey] = serialize_context(ctx);
}

std::optional<TraceContext> extract_context(const std::map<std::string, std::string>& env) {
  auto it = env.find(kTraceContextEnvKey);
  if (it == env.end()) return std::nullopt;
  return parse_context(it->second);
}

Span instrument_call(SpanKind kind, const std::string& name, const TraceContext& ctx,
                     std::optional<std::string> parent_span_id, VirtualTime start,
                     VirtualTime end, const std::string& function) {
  Span span;
  span.context = ctx;
  span.parent_span_id = std::move(parent_span_id);
  span.name = name;
  span.kind = kind;
  span.start = start;
  span.end = end;
  span.component = function;
  span.tags["faas.function"] = function;
  return span;
}

Span platform_hook(PlatformEvent event, const TraceContext& ctx,
                   std::optional<std::string> parent_span_id, VirtualTime start, VirtualTime end,
                   const std::string& function) {
  Span span;
  span.context = ctx;
  span.parent_span_id = std::move(parent_span_id);
  span.start = start;
  span.end = end;
  switch (event) {
    case PlatformEvent::gateway_received:
      span.kind = SpanKind::gateway;
      span.name = "gateway";
      span.component = "gateway";
      break;
    case PlatformEvent::controller_scheduled:
      span.kind = SpanKind::controller;
      span.name = "controller.schedule";
      span.component = "controller";
      break;
    case PlatformEvent::invoker_init:
      span.kind = SpanKind::init;
      span.name = "invoker.init";
      span.component = "invoker";
      break;
    case PlatformEvent::invoker_run:
      span.kind = SpanKind::invocation;
      span.name = "invoker.run";
      span.component = "invoker";
      break;
  }
  if (!function.empty()) span.tags["faas.function"] = function;
  return span;
}

void report_spans(Collector& collector, const std::vector<Span>& batch, bool collector_down) {
  if (batch.empty()) return;
  if (collector_down) {
    collector.note_dropped_batch();
    return;
  }
  for (const auto& span : batch) collector.add(span);
}

std::string export_zipkin_v2(const Collector& collector) {
  std::vector<const Span*> spans;
  for (const auto& [id, trace] : collector.traces()) {
    for (const auto& s : trace.spans) spans.push_back(&s);
  }
  std::sort(spans.begin(), spans.end(), [](const Span* a, const Span* b) {
    if (a->start != b->start) return a->start < b->start;
    return a->context.span_id < b->context.span_id;
  });

  nlohmann::json out = nlohmann::json::array();
  for (const Span* s : spans) {
    nlohmann::json j;
    j["id"] = s->context.span_id;
    j["traceId"] = s->context.trace_id;
    if (s->parent_span_id) j["parentId"] = *s->parent_span_id;
    j["name"] = s->name;
    j["timestamp"] = kEpochOffsetMicros + s->start.millis * 1000;
    j["duration"] = (s->end - s->start) * 1000;
    j["localEndpoint"]["serviceName"] = s->component;
    nlohmann::json tags = nlohmann::json::object();
    for (const auto& [k, v] : s->tags) tags[k] = v;
    j["tags"] = tags;
    out.push_back(j);
  }
  return out.dump(2);
}

}  // namespace faasim
