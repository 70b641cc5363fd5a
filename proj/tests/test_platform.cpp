#include <doctest.h>

#include <algorithm>

#include "faasim/platform.hpp"

using namespace faasim;

namespace {

CompositionSpec single(const std::string& name) {
  CompositionSpec spec;
  spec.functions[name] = {.name = name, .base_exec_ms = 100};
  spec.entry = name;
  return spec;
}

CompositionSpec pair_spec(EdgeMode mode) {
  CompositionSpec spec;
  spec.functions["up"] = {.name = "up", .base_exec_ms = 100};
  spec.functions["down"] = {.name = "down", .base_exec_ms = 100};
  spec.edges.push_back({"up", "down", mode});
  spec.entry = "up";
  return spec;
}

std::unique_ptr<Platform> make(CompositionSpec spec, TracingMode mode = TracingMode::none,
                               FaultPlan plan = {}, std::uint64_t seed = 11,
                               PlatformProfile::Name profile = PlatformProfile::Name::openwhisk_like) {
  TracingConfig tracing;
  tracing.mode = mode;
  PlatformProfile prof;
  prof.name = profile;
  return deploy(std::move(spec), prof, tracing, std::move(plan), seed);
}

}  // namespace

TEST_CASE("deploy rejects malformed compositions") {
  SUBCASE("unknown entry") {
    CompositionSpec spec = single("a");
    spec.entry = "missing";
    CHECK_THROWS_AS(make(std::move(spec)), ValidationError);
  }
  SUBCASE("dangling edge endpoint") {
    CompositionSpec spec = single("a");
    spec.edges.push_back({"a", "ghost", EdgeMode::sync});
    CHECK_THROWS_AS(make(std::move(spec)), ValidationError);
  }
  SUBCASE("cyclic sync edges") {
    CompositionSpec spec = pair_spec(EdgeMode::sync);
    spec.edges.push_back({"down", "up", EdgeMode::sync});
    CHECK_THROWS_AS(make(std::move(spec)), ValidationError);
  }
  SUBCASE("cold_sync_timeout target must be a sync callee") {
    FaultPlan plan =
        plan_faults({{Scenario::F3, FaultMechanism::cold_sync_timeout, "down", 1.0}}, 1);
    CHECK_THROWS_AS(make(pair_spec(EdgeMode::async), TracingMode::none, plan), ValidationError);
    CHECK_NOTHROW(make(pair_spec(EdgeMode::sync), TracingMode::none, plan));
  }
  SUBCASE("async_downstream_bug target must be an async callee") {
    FaultPlan plan =
        plan_faults({{Scenario::F4, FaultMechanism::async_downstream_bug, "down", 1.0}}, 1);
    CHECK_THROWS_AS(make(pair_spec(EdgeMode::sync), TracingMode::none, plan), ValidationError);
    CHECK_NOTHROW(make(pair_spec(EdgeMode::async), TracingMode::none, plan));
  }
}

TEST_CASE("clean sync request: ledger shape and step ordering") {
  auto platform = make(pair_spec(EdgeMode::sync));
  ResponseEnvelope env = platform->submit_request({}, false);
  CHECK(env.code == EvidenceContent::success);
  CHECK(env.body == EvidenceContent::success);

  const auto& ledger = platform->ledger();
  REQUIRE(ledger.size() == 2);
  for (const auto& rec : ledger) {
    CHECK(rec.outcome == Outcome::success);
    CHECK(rec.cold);  // empty pool: first hit of each function is cold
    // validation -> allocation -> [init] -> invocation is a strict subsequence.
    std::vector<StepKind> kinds;
    for (const auto& s : rec.steps) kinds.push_back(s.step);
    std::vector<StepKind> expected = {StepKind::validation, StepKind::resource_allocation,
                                      StepKind::cold_start_init, StepKind::invocation};
    CHECK(kinds == expected);
    for (std::size_t i = 1; i < rec.steps.size(); ++i) {
      CHECK(rec.steps[i - 1].end <= rec.steps[i].start);
    }
  }
  CHECK(ledger[1].parent_invocation == ledger[0].invocation_id);
  CHECK(ledger[1].trigger_mode == TriggerMode::sync);
}

TEST_CASE("warm runtimes skip the init step") {
  auto platform = make(single("a"));
  platform->submit_request({}, false);
  platform->submit_request({}, false);
  const auto& ledger = platform->ledger();
  REQUIRE(ledger.size() == 2);
  CHECK(ledger[0].cold);
  CHECK(!ledger[1].cold);
  auto has_init = [](const InvocationRecord& r) {
    return std::any_of(r.steps.begin(), r.steps.end(),
                       [](const ExecutionStep& s) { return s.step == StepKind::cold_start_init; });
  };
  CHECK(has_init(ledger[0]));
  CHECK(!has_init(ledger[1]));
}

TEST_CASE("invocation conservation: one record per entry plus traversed edge") {
  auto platform = make(pair_spec(EdgeMode::async));
  platform->submit_request({}, false);
  CHECK(platform->ledger().size() == 2);  // 1 entry + 1 async edge
  platform->submit_request({}, false);
  CHECK(platform->ledger().size() == 4);
}

TEST_CASE("async fault isolation: the response never sees downstream failures") {
  FaultPlan plan =
      plan_faults({{Scenario::F4, FaultMechanism::async_downstream_bug, "down", 1.0}}, 3);
  for (auto profile : {PlatformProfile::Name::aws_like, PlatformProfile::Name::openwhisk_like}) {
    auto platform = make(pair_spec(EdgeMode::async), TracingMode::none, plan, 11, profile);
    ResponseEnvelope env = platform->submit_request({}, false);
    CHECK(env.code == EvidenceContent::success);
    CHECK(env.body == EvidenceContent::success);
    REQUIRE(platform->ledger().size() == 2);
    CHECK(platform->ledger()[1].outcome == Outcome::error);
  }
}

TEST_CASE("response code policy differs per profile") {
  FaultPlan plan = plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "a", 1.0}}, 4);
  auto aws = make(single("a"), TracingMode::none, plan, 11, PlatformProfile::Name::aws_like);
  auto ow = make(single("a"), TracingMode::none, plan, 11, PlatformProfile::Name::openwhisk_like);
  ResponseEnvelope ra = aws->submit_request({}, false);
  ResponseEnvelope ro = ow->submit_request({}, false);
  CHECK(ra.code == EvidenceContent::success);
  CHECK(ra.body == EvidenceContent::error);
  CHECK(ro.code == EvidenceContent::error);
  CHECK(ro.body == EvidenceContent::error);
}

TEST_CASE("sync cold-start timeout: caller times out, callee completes") {
  FaultPlan plan =
      plan_faults({{Scenario::F3, FaultMechanism::cold_sync_timeout, "down", 1.0}}, 5);
  auto platform = make(pair_spec(EdgeMode::sync), TracingMode::none, plan);
  ResponseEnvelope env = platform->submit_request({}, false);
  CHECK(env.body == EvidenceContent::error_timeout);
  REQUIRE(platform->ledger().size() == 2);
  const auto& up = platform->ledger()[0];
  const auto& down = platform->ledger()[1];
  CHECK(up.outcome == Outcome::timeout);
  CHECK(down.outcome == Outcome::success);
  CHECK(down.cold);
}

TEST_CASE("mode none produces no spans; platform mode one trace per request") {
  auto none = make(pair_spec(EdgeMode::sync), TracingMode::none);
  none->submit_request({}, true);
  CHECK(none->collector().span_count() == 0);
  CHECK(none->request_traces().empty());

  auto traced = make(pair_spec(EdgeMode::sync), TracingMode::platform_supported);
  traced->submit_request({}, true);
  traced->submit_request({}, true);
  CHECK(traced->collector().traces().size() == 2);
  CHECK(traced->request_traces().size() == 2);
  for (const auto& [trace_id, trace] : traced->collector().traces()) {
    CHECK(trace.is_tree());
  }
}

TEST_CASE("ground truth is recorded per request") {
  FaultPlan plan = plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "a", 1.0}}, 6);
  auto platform = make(single("a"), TracingMode::none, plan);
  platform->submit_request({}, false);
  REQUIRE(platform->ground_truth().size() == 1);
  REQUIRE(platform->ground_truth()[0].injected.has_value());
  CHECK(platform->ground_truth()[0].injected->mechanism == FaultMechanism::uncaught_exception);
  CHECK(platform->ground_truth()[0].injected->target_function == "a");
}

TEST_CASE("identical seeds give identical runs") {
  auto run = [](std::uint64_t seed) {
    FaultPlan plan =
        plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "up", 0.5}}, seed);
    auto platform = make(pair_spec(EdgeMode::sync), TracingMode::platform_supported, plan, seed);
    for (int i = 0; i < 10; ++i) platform->submit_request({}, true);
    std::string digest = export_zipkin_v2(platform->collector());
    for (const auto& rec : platform->ledger()) {
      digest += "|" + rec.invocation_id + ":" + rec.function + ":" + to_string(rec.outcome) +
                ":" + std::to_string(rec.start.millis) + "-" + std::to_string(rec.end.millis);
    }
    return digest;
  };
  CHECK(run(21) == run(21));
  CHECK(run(21) != run(22));
}

TEST_CASE("container kill loses the warm runtime") {
  FaultPlan plan = plan_faults({{std::nullopt, FaultMechanism::container_kill, "a", 1.0}}, 7);
  auto platform = make(single("a"), TracingMode::none, plan);
  platform->submit_request({}, false);
  platform->submit_request({}, false);
  const auto& ledger = platform->ledger();
  REQUIRE(ledger.size() == 2);
  CHECK(ledger[0].outcome == Outcome::error);
  CHECK(ledger[1].cold);  // killed runtime cannot be reused warm
}
