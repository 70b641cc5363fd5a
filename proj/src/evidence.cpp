#include "faasim/evidence.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "faasim/platform.hpp"

namespace faasim {

const std::vector<LogLine> LogStore::kEmpty = {};

void LogStore::append(const std::string& function, LogLine line) {
  lines_[function].push_back(std::move(line));
}

const std::vector<LogLine>& LogStore::lines(const std::string& function) const {
  auto it = lines_.find(function);
  return it == lines_.end() ? kEmpty : it->second;
}

std::vector<EvidenceRecord> collect_response(const ResponseEnvelope& envelope) {
  EvidenceRecord code;
  code.channel = Channel::response;
  code.source = "response.code";
  code.position = Position::client;
  code.content = envelope.code;
  code.request_id = envelope.request_id;

  EvidenceRecord body;
  body.channel = Channel::response;
  body.source = "response.body";
  body.position = Position::client;
  body.content = envelope.body;
  body.message = envelope.message;
  body.request_id = envelope.request_id;
  return {code, body};
}

std::vector<EvidenceRecord> collect_logs(const LogStore& store,
                                         const std::vector<InvocationRecord>& ledger,
                                         const std::string& request_id,
                                         const std::string& entry_function) {
  // Functions that took part in this request, entry first, then by first
  // invocation start for a stable order.
  std::vector<std::string> functions;
  for (const auto& rec : ledger) {
    if (rec.request_id != request_id) continue;
    if (std::find(functions.begin(), functions.end(), rec.function) == functions.end()) {
      functions.push_back(rec.function);
    }
  }
  std::vector<EvidenceRecord> out;
  for (const auto& fn : functions) {
    EvidenceRecord r;
    r.channel = Channel::log;
    r.source = fn;
    r.position = fn == entry_function ? Position::upstream : Position::downstream;
    r.request_id = request_id;
    bool any = false, error = false, timeout = false;
    VirtualTime last;
    std::optional<std::string> msg;
    for (const auto& line : store.lines(fn)) {
      if (line.request_id != request_id) continue;
      any = true;
      last = std::max(last, line.time);
      if (line.level == LogLine::Level::error) {
        error = true;
        if (!msg) msg = line.message;
      }
      if (line.timeout_line) timeout = true;
    }
    if (!any) continue;  // no observation at all: record stays absent
    r.content = timeout ? EvidenceContent::error_timeout
                        : (error ? EvidenceContent::error : EvidenceContent::success);
    r.message = msg;
    r.time = last;
    out.push_back(r);
  }
  return out;
}

std::vector<EvidenceRecord> collect_trace_evidence(const Collector& collector,
                                                   const std::string& trace_id,
                                                   const std::string& request_id,
                                                   const std::string& entry_function) {
  std::vector<EvidenceRecord> out;
  const Trace* trace = collector.find(trace_id);
  if (!trace || trace->spans.empty()) return out;

  auto span_function = [](const Span& s) -> std::string {
    auto it = s.tags.find("faas.function");
    return it == s.tags.end() ? std::string() : it->second;
  };
  auto position_of = [&](const Span& s) {
    const std::string fn = span_function(s);
    if (fn.empty()) return Position::platform;
    return fn == entry_function ? Position::upstream : Position::downstream;
  };
  auto is_fault_tagged = [](const Span& s) { return s.tags.count("error"); };
  auto is_timeout = [](const Span& s) { return s.tags.count("timeout"); };

  // One record per error/timeout-tagged span.
  for (const Span& s : trace->spans) {
    if (!is_fault_tagged(s)) continue;
    EvidenceRecord r;
    r.channel = Channel::trace;
    r.source = to_string(s.kind);
    r.position = position_of(s);
    r.content = is_timeout(s) ? EvidenceContent::error_timeout : EvidenceContent::error;
    auto msg = s.tags.find("error.message");
    if (msg != s.tags.end()) r.message = msg->second;
    r.request_id = request_id;
    r.time = s.end;
    out.push_back(r);
  }

  // A cold-start init span that outlasted a timed-out caller explains the
  // caller's timeout; platform-supported traces surface this as evidence.
  for (const Span& init : trace->spans) {
    if (init.kind != SpanKind::init) continue;
    const std::string init_fn = span_function(init);
    bool explains = false;
    for (const Span& other : trace->spans) {
      if (&other == &init || !is_timeout(other)) continue;
      if (other.kind != SpanKind::function_internal && other.kind != SpanKind::invocation) continue;
      if (span_function(other) == init_fn) continue;
      if (init.end >= other.end) explains = true;
    }
    if (explains) {
      EvidenceRecord r;
      r.channel = Channel::trace;
      r.source = "init";
      r.position = position_of(init);
      r.content = EvidenceContent::error_timeout;
      r.message = "cold-start initialization outlasted the caller's timeout budget";
      r.request_id = request_id;
      r.time = init.end;
      out.push_back(r);
    }
  }

  // Structural record: which (position, step) pairs the trace covers.
  std::set<std::string> coverage;
  for (const Span& s : trace->spans) {
    coverage.insert(to_string(position_of(s)) + ":" + to_string(s.kind));
  }
  EvidenceRecord structure;
  structure.channel = Channel::trace;
  structure.source = "coverage";
  structure.position = Position::platform;
  structure.content = EvidenceContent::success;
  std::string joined;
  for (const auto& c : coverage) {
    if (!joined.empty()) joined += ",";
    joined += c;
  }
  structure.message = joined;
  structure.request_id = request_id;
  out.push_back(structure);

  std::stable_sort(out.begin(), out.end(), [](const EvidenceRecord& a, const EvidenceRecord& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.source < b.source;
  });
  return out;
}

std::string evidence_set_to_json(const EvidenceSet& set) {
  auto records = [](const std::vector<EvidenceRecord>& rs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rs) {
      nlohmann::json j;
      j["channel"] = to_string(r.channel);
      j["source"] = r.source;
      j["position"] = to_string(r.position);
      j["content"] = to_string(r.content);
      if (r.message) j["message"] = *r.message;
      j["request_id"] = r.request_id;
      j["time_ms"] = r.time.millis;
      arr.push_back(j);
    }
    return arr;
  };
  nlohmann::json j;
  j["request_id"] = set.request_id;
  j["response"] = records(set.response);
  j["logs"] = records(set.logs);
  j["traces"] = records(set.traces);
  return j.dump();
}

}  // namespace faasim
