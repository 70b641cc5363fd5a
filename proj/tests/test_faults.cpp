#include <doctest.h>

#include <stdexcept>

#include "faasim/faults.hpp"

using namespace faasim;

TEST_CASE("plan validation rejects bad probabilities") {
  CHECK_THROWS_AS(
      plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "fn", 1.5}}, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "fn", -0.1}}, 1),
      std::invalid_argument);
}

TEST_CASE("plan validation enforces the scenario binding") {
  CHECK_THROWS_AS(
      plan_faults({{Scenario::F1, FaultMechanism::external_api_timeout, "fn", 1.0}}, 1),
      std::invalid_argument);
  // Standalone mechanisms carry no scenario.
  CHECK_NOTHROW(
      plan_faults({{std::nullopt, FaultMechanism::container_kill, "fn", 1.0}}, 1));
  CHECK_THROWS_AS(
      plan_faults({{Scenario::F2, FaultMechanism::container_kill, "fn", 1.0}}, 1),
      std::invalid_argument);
}

TEST_CASE("probability one always activates, zero never does") {
  FaultEngine always(plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "fn", 1.0}}, 9));
  FaultEngine never(plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "fn", 0.0}}, 9));
  for (int i = 0; i < 50; ++i) {
    always.begin_request("r" + std::to_string(i));
    never.begin_request("r" + std::to_string(i));
    CHECK(always.body_throws("fn", TriggerMode::entry));
    CHECK(!never.body_throws("fn", TriggerMode::entry));
  }
}

TEST_CASE("activation frequency tracks the configured probability") {
  FaultEngine engine(
      plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "fn", 0.5}}, 1234));
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    engine.begin_request("r" + std::to_string(i));
    if (engine.body_throws("fn", TriggerMode::entry)) ++hits;
  }
  // Two-sided binomial bound for n=1000, p=0.5 at far beyond 3 sigma.
  CHECK(hits >= 430);
  CHECK(hits <= 570);
}

TEST_CASE("draws are deterministic in the seed") {
  auto run = [](std::uint64_t seed) {
    FaultEngine e(plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "fn", 0.3}}, seed));
    std::string pattern;
    for (int i = 0; i < 64; ++i) {
      e.begin_request("r" + std::to_string(i));
      pattern += e.body_throws("fn", TriggerMode::entry) ? '1' : '0';
    }
    return pattern;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("ground truth records the first firing only") {
  FaultEngine e(plan_faults({{Scenario::F1, FaultMechanism::uncaught_exception, "fn", 1.0}}, 2));
  e.begin_request("req-0");
  REQUIRE(e.ground_truth().size() == 1);
  CHECK(!e.ground_truth()[0].injected.has_value());

  e.record_fired("fn", FaultMechanism::uncaught_exception, VirtualTime{10});
  e.record_fired("fn", FaultMechanism::uncaught_exception, VirtualTime{99});
  const auto& entry = e.ground_truth()[0];
  REQUIRE(entry.injected.has_value());
  CHECK(entry.injected->target_function == "fn");
  CHECK(entry.injected->injection_time == VirtualTime{10});
  CHECK(entry.injected->scenario == Scenario::F1);
}

TEST_CASE("clean requests leave an empty ground-truth entry") {
  FaultEngine e(plan_faults({}, 3));
  e.begin_request("req-0");
  e.begin_request("req-1");
  REQUIRE(e.ground_truth().size() == 2);
  CHECK(!e.ground_truth()[0].injected.has_value());
  CHECK(!e.ground_truth()[1].injected.has_value());
}

TEST_CASE("queries answer per-target") {
  FaultEngine e(plan_faults({{Scenario::F2, FaultMechanism::external_api_timeout, "api_fn", 1.0}}, 4));
  e.begin_request("req-0");
  CHECK(e.external_call_hangs("api_fn"));
  CHECK(!e.external_call_hangs("other_fn"));
  CHECK(!e.body_throws("api_fn", TriggerMode::entry));
}

TEST_CASE("cold sync timeout forces an inflated init") {
  FaultPlan plan =
      plan_faults({{Scenario::F3, FaultMechanism::cold_sync_timeout, "down", 1.0}}, 5);
  FaultEngine e(plan);
  e.begin_request("req-0");
  auto forced = e.forced_cold_init_ms("down");
  REQUIRE(forced.has_value());
  CHECK(*forced == plan.inflated_cold_ms);
  CHECK(!e.forced_cold_init_ms("up").has_value());
}
