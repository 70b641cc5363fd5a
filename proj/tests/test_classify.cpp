#include <doctest.h>

#include <json.hpp>

#include "faasim/classify.hpp"

using namespace faasim;

namespace {
constexpr auto kOW = PlatformProfile::Name::openwhisk_like;
constexpr auto kAWS = PlatformProfile::Name::aws_like;
}  // namespace

TEST_CASE("scenario compositions match the fault shapes") {
  CHECK(scenario_composition(Scenario::F1, false).functions.size() == 1);
  CHECK(scenario_composition(Scenario::F2, false)
            .functions.at("handler")
            .external_calls.size() == 1);
  auto f3 = scenario_composition(Scenario::F3, false);
  REQUIRE(f3.edges.size() == 1);
  CHECK(f3.edges[0].mode == EdgeMode::sync);
  auto f4 = scenario_composition(Scenario::F4, false);
  REQUIRE(f4.edges.size() == 1);
  CHECK(f4.edges[0].mode == EdgeMode::async);
  // Reduced coverage strips the async worker's instrumentation.
  CHECK(!scenario_composition(Scenario::F4, true).functions.at("downstream").instrumented);
}

TEST_CASE("scenario runs always fire their fault") {
  for (Scenario s : {Scenario::F1, Scenario::F2, Scenario::F3, Scenario::F4}) {
    ScenarioRun run = run_scenario(s, kOW, TracingMode::platform_supported, false);
    REQUIRE(run.truth.injected.has_value());
    CHECK(run.truth.injected->scenario == s);
  }
}

TEST_CASE("the catalog holds both coverage variants of every scenario") {
  auto catalog = ScenarioEvidenceCatalog::build(kOW, TracingMode::developer_driven);
  for (Channel c : {Channel::response, Channel::log, Channel::trace}) {
    CHECK(catalog.entries(c).size() == 8);  // 4 scenarios x 2 variants
  }
}

TEST_CASE("visibility requires a fault-indicating record and a real fault") {
  ScenarioRun f1 = run_scenario(Scenario::F1, kOW, TracingMode::none, false);
  CHECK(classify_visibility(f1.evidence, Channel::response, f1.truth));
  CHECK(!classify_visibility(run_scenario(Scenario::F4, kOW, TracingMode::none, false).evidence,
                             Channel::response,
                             run_scenario(Scenario::F4, kOW, TracingMode::none, false).truth));
  GroundTruthEntry clean{"req-x", std::nullopt};
  CHECK_THROWS_AS(classify_visibility(f1.evidence, Channel::response, clean), std::logic_error);
}

TEST_CASE("ambiguity is catalog-relative") {
  auto catalog = ScenarioEvidenceCatalog::build(kOW, TracingMode::none);
  ScenarioRun f1 = run_scenario(Scenario::F1, kOW, TracingMode::none, false);
  ScenarioRun f2 = run_scenario(Scenario::F2, kOW, TracingMode::none, false);
  ScenarioRun f3 = run_scenario(Scenario::F3, kOW, TracingMode::none, false);
  ScenarioRun f4 = run_scenario(Scenario::F4, kOW, TracingMode::none, false);

  // A plain error response only F1 produces: unambiguous.
  CHECK(classify_ambiguity(f1.evidence, Channel::response, catalog, Scenario::F1) ==
        TriState::yes);
  // F2 and F3 both yield a timeout response: ambiguous either way.
  CHECK(classify_ambiguity(f2.evidence, Channel::response, catalog, Scenario::F2) ==
        TriState::no);
  CHECK(classify_ambiguity(f3.evidence, Channel::response, catalog, Scenario::F3) ==
        TriState::no);
  // F4 leaves no response evidence at all.
  CHECK(classify_ambiguity(f4.evidence, Channel::response, catalog, Scenario::F4) ==
        TriState::not_applicable);
  // Same collision in the logs: a lone upstream timeout line.
  CHECK(classify_ambiguity(f2.evidence, Channel::log, catalog, Scenario::F2) == TriState::no);
  CHECK(classify_ambiguity(f3.evidence, Channel::log, catalog, Scenario::F3) == TriState::no);
}

TEST_CASE("consistency rules per channel") {
  // aws_like hides the error from the response code: inconsistent evidence.
  ScenarioRun aws_f1 = run_scenario(Scenario::F1, kAWS, TracingMode::none, false);
  CHECK(!classify_consistency(aws_f1.evidence, Channel::response, aws_f1.truth,
                              aws_f1.entry_function));
  ScenarioRun ow_f1 = run_scenario(Scenario::F1, kOW, TracingMode::none, false);
  CHECK(classify_consistency(ow_f1.evidence, Channel::response, ow_f1.truth,
                             ow_f1.entry_function));
  // F3 logs mix an upstream timeout with a downstream success line.
  ScenarioRun ow_f3 = run_scenario(Scenario::F3, kOW, TracingMode::none, false);
  CHECK(!classify_consistency(ow_f3.evidence, Channel::log, ow_f3.truth, ow_f3.entry_function));
  // Platform-supported traces pin F1 to the faulty function.
  ScenarioRun tr = run_scenario(Scenario::F1, kOW, TracingMode::platform_supported, false);
  CHECK(classify_consistency(tr.evidence, Channel::trace, tr.truth, tr.entry_function));
}

TEST_CASE("every matrix cell carries a well-formed verdict") {
  auto matrix = build_verdict_matrix();
  CHECK(matrix.size() == 28);
  for (const auto& cell : matrix) {
    CAPTURE(to_string(cell.scenario));
    CAPTURE(to_string(cell.channel));
    CHECK(cell.verdict.well_formed());
  }
}

TEST_CASE("partial flags appear only on trace cells") {
  auto matrix = build_verdict_matrix();
  for (const auto& cell : matrix) {
    if (cell.channel == Channel::trace) continue;
    CHECK(!cell.verdict.partial_visible);
    CHECK(!cell.verdict.partial_unambiguous);
    CHECK(!cell.verdict.partial_consistent);
  }
}

TEST_CASE("rendering an incomplete matrix fails with the missing cells") {
  CHECK_THROWS_WITH_AS(render_tables({}), doctest::Contains("missing cells"),
                       std::invalid_argument);
  try {
    render_tables({});
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    for (const char* s : {"F1", "F2", "F3", "F4"}) {
      CHECK(msg.find(s) != std::string::npos);
    }
  }
}

TEST_CASE("matrix json matches the published schema") {
  auto matrix = build_verdict_matrix();
  auto arr = nlohmann::json::parse(verdict_matrix_to_json(matrix));
  REQUIRE(arr.size() == matrix.size());
  for (const auto& cell : arr) {
    for (const char* key :
         {"scenario", "profile", "tracing_mode", "channel", "visible", "unambiguous",
          "consistent", "partial"}) {
      CHECK(cell.contains(key));
    }
  }
}

TEST_CASE("rendered tables are deterministic") {
  auto a = render_tables(build_verdict_matrix(99));
  auto b = render_tables(build_verdict_matrix(99));
  CHECK(a.markdown == b.markdown);
  CHECK(a.json == b.json);
}
