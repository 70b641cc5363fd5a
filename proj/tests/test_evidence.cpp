#include <doctest.h>

#include <json.hpp>

#include "faasim/evidence.hpp"
#include "faasim/platform.hpp"

using namespace faasim;

TEST_CASE("response evidence has exactly code and body records") {
  ResponseEnvelope env;
  env.request_id = "req-0";
  env.code = EvidenceContent::success;
  env.body = EvidenceContent::error;
  env.message = "boom";
  auto records = collect_response(env);
  REQUIRE(records.size() == 2);
  CHECK(records[0].source == "response.code");
  CHECK(records[0].content == EvidenceContent::success);
  CHECK(records[0].position == Position::client);
  CHECK(records[1].source == "response.body");
  CHECK(records[1].content == EvidenceContent::error);
  CHECK(records[1].message == "boom");
}

namespace {

InvocationRecord inv(const std::string& fn, const std::string& req) {
  InvocationRecord r;
  r.function = fn;
  r.request_id = req;
  return r;
}

LogLine line(LogLine::Level level, const std::string& req, bool timeout = false) {
  LogLine l;
  l.level = level;
  l.message = level == LogLine::Level::error ? "err" : "ok";
  l.request_id = req;
  l.timeout_line = timeout;
  return l;
}

}  // namespace

TEST_CASE("log evidence positions and content precedence") {
  LogStore store;
  std::vector<InvocationRecord> ledger = {inv("entry", "r1"), inv("worker", "r1"),
                                          inv("silent", "r1")};
  store.append("entry", line(LogLine::Level::info, "r1"));
  store.append("worker", line(LogLine::Level::info, "r1"));
  store.append("worker", line(LogLine::Level::error, "r1"));
  // Lines of other requests must not leak in.
  store.append("entry", line(LogLine::Level::error, "r2"));

  auto records = collect_logs(store, ledger, "r1", "entry");
  REQUIRE(records.size() == 2);  // 'silent' wrote nothing: record absent
  CHECK(records[0].source == "entry");
  CHECK(records[0].position == Position::upstream);
  CHECK(records[0].content == EvidenceContent::success);
  CHECK(records[1].source == "worker");
  CHECK(records[1].position == Position::downstream);
  CHECK(records[1].content == EvidenceContent::error);
}

TEST_CASE("timeout log lines dominate plain errors") {
  LogStore store;
  std::vector<InvocationRecord> ledger = {inv("entry", "r1")};
  store.append("entry", line(LogLine::Level::error, "r1"));
  store.append("entry", line(LogLine::Level::error, "r1", true));
  auto records = collect_logs(store, ledger, "r1", "entry");
  REQUIRE(records.size() == 1);
  CHECK(records[0].content == EvidenceContent::error_timeout);
}

TEST_CASE("trace evidence surfaces error-tagged spans") {
  Rng rng(1);
  TraceContext root = new_root_context(rng, true);
  Span ok = instrument_call(SpanKind::invocation, "a", root, std::nullopt, VirtualTime{0},
                            VirtualTime{10}, "entry");
  TraceContext child = child_context(root, rng);
  Span bad = instrument_call(SpanKind::function_internal, "b", child, root.span_id,
                             VirtualTime{2}, VirtualTime{8}, "worker");
  bad.tags["error"] = "true";
  bad.tags["error.message"] = "exploded";
  Collector collector;
  report_spans(collector, {ok, bad}, false);

  auto records = collect_trace_evidence(collector, root.trace_id, "r1", "entry");
  // One record for the tagged span plus the structural coverage record.
  REQUIRE(records.size() == 2);
  const EvidenceRecord* fault = nullptr;
  const EvidenceRecord* coverage = nullptr;
  for (const auto& r : records) {
    if (r.source == "coverage") coverage = &r;
    else fault = &r;
  }
  REQUIRE(fault != nullptr);
  CHECK(fault->source == "function_internal");
  CHECK(fault->position == Position::downstream);
  CHECK(fault->content == EvidenceContent::error);
  CHECK(fault->message == "exploded");
  REQUIRE(coverage != nullptr);
  CHECK(coverage->content == EvidenceContent::success);
}

TEST_CASE("unknown trace ids yield empty evidence") {
  Collector collector;
  CHECK(collect_trace_evidence(collector, "nope", "r1", "entry").empty());
}

TEST_CASE("evidence set serializes to parseable json") {
  EvidenceSet set;
  set.request_id = "req-7";
  ResponseEnvelope env;
  env.request_id = "req-7";
  env.body = EvidenceContent::error;
  set.response = collect_response(env);
  auto j = nlohmann::json::parse(evidence_set_to_json(set));
  CHECK(j["request_id"] == "req-7");
  REQUIRE(j["response"].size() == 2);
  CHECK(j["response"][1]["content"] == "error");
  CHECK(j["logs"].is_array());
  CHECK(j["traces"].is_array());
}
