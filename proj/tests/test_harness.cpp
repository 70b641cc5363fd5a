#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "faasim/harness.hpp"

using namespace faasim;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.workload.requests = 2;
  cfg.workload.records = 10;
  cfg.seed = 77;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("bulk-import composition shape") {
  CompositionSpec spec = build_bulk_import();
  CHECK(spec.functions.size() == 5);
  CHECK(spec.entry == "import_csv");
  int sync = 0, async_fanout = 0;
  for (const auto& e : spec.edges) {
    if (e.mode == EdgeMode::sync) ++sync;
    if (e.mode == EdgeMode::async && e.per_record) ++async_fanout;
  }
  CHECK(sync == 2);
  CHECK(async_fanout == 2);
  // Image fetching is the longest-running function.
  for (const auto& [name, fn] : spec.functions) {
    if (name != "fetch_product_images") {
      CHECK(fn.base_exec_ms < spec.functions.at("fetch_product_images").base_exec_ms);
    }
  }
}

TEST_CASE("invocation counts scale with records and requests") {
  ExperimentConfig cfg;
  cfg.workload.requests = 1;
  cfg.workload.records = 150;
  auto art = run_experiment(TracingMode::none, cfg);
  CHECK(art.ledger.size() == 303);  // 3 sync-path + 2 x 150 async

  cfg.workload.requests = 3;
  CHECK(run_experiment(TracingMode::none, cfg).ledger.size() == 909);

  cfg.workload.requests = 1;
  cfg.workload.images_per_record = 2;
  // Extra images only add fetch invocations.
  CHECK(run_experiment(TracingMode::none, cfg).ledger.size() == 453);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_config();
  cfg.sampling = 1.5;
  CHECK_THROWS_AS(run_experiment(TracingMode::none, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.costs.platform_provider_units = 3;
  CHECK_THROWS_AS(run_experiment(TracingMode::none, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.workload.images_per_record = 0;
  CHECK_THROWS_AS(run_experiment(TracingMode::none, cfg), std::invalid_argument);
}

TEST_CASE("baseline compared against itself is all zeros") {
  auto base = run_experiment(TracingMode::none, small_config());
  VariantCostStats stats = account_costs(base, base);
  CHECK(stats.mean_delta_ms == 0.0);
  CHECK(stats.median_delta_ms == 0.0);
  CHECK(stats.max_delta_ms == 0);
  CHECK(stats.provider_units == 0);
  CHECK(stats.network_flushes == 0);
}

TEST_CASE("cost comparison rejects mismatched runs") {
  auto base = run_experiment(TracingMode::none, small_config());
  ExperimentConfig other = small_config();
  other.seed = 78;
  auto art = run_experiment(TracingMode::developer_driven, other);
  CHECK_THROWS_AS(account_costs(art, base), std::invalid_argument);
  other = small_config();
  other.workload.records = 11;
  auto art2 = run_experiment(TracingMode::developer_driven, other);
  CHECK_THROWS_AS(account_costs(art2, base), std::invalid_argument);
}

TEST_CASE("variant cost ordering under default parameters") {
  ExperimentConfig cfg = small_config();
  auto suite = run_suite(
      {TracingMode::none, TracingMode::developer_driven, TracingMode::platform_supported}, cfg);
  REQUIRE(suite.costs.variants.size() == 3);
  const auto& base = suite.costs.variants[0];
  const auto& dev = suite.costs.variants[1];
  const auto& plat = suite.costs.variants[2];
  CHECK(base.mean_delta_ms == 0.0);
  CHECK(dev.mean_delta_ms > 0.0);
  CHECK(dev.mean_delta_ms <= plat.mean_delta_ms);
  CHECK(base.provider_units == 0);
  CHECK(dev.provider_units == 0);
  CHECK(plat.provider_units >= 1);
  CHECK(plat.provider_units <= 2);
  CHECK(plat.provider_memory_overhead_mb >= 128);
  CHECK(plat.provider_memory_overhead_mb <= 256);
  CHECK(dev.network_flushes > 0);
}

TEST_CASE("sampling zero produces no traces") {
  ExperimentConfig cfg = small_config();
  cfg.sampling = 0.0;
  auto art = run_experiment(TracingMode::platform_supported, cfg);
  CHECK(art.span_count == 0);
  CHECK(art.zipkin_json == "[]");
}

TEST_CASE("report files are written and bytes are deterministic") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = small_config();
  std::vector<TracingMode> variants = {TracingMode::none, TracingMode::developer_driven};

  fs::path dir_a = fs::temp_directory_path() / "faasim-report-a";
  fs::path dir_b = fs::temp_directory_path() / "faasim-report-b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  auto files_a = write_report(run_suite(variants, cfg), dir_a.string());
  auto files_b = write_report(run_suite(variants, cfg), dir_b.string());
  REQUIRE(files_a.size() == files_b.size());
  CHECK(files_a.size() == 6);  // report.json/md + 2 x (traces, evidence)
  for (std::size_t i = 0; i < files_a.size(); ++i) {
    CAPTURE(files_a[i]);
    CHECK(slurp(files_a[i]) == slurp(files_b[i]));
  }
  auto report = nlohmann::json::parse(slurp((dir_a / "report.json").string()));
  CHECK(report["variants"].size() == 2);
  CHECK(report["costs"].size() == 2);
}

TEST_CASE("evidence is collected per request") {
  ExperimentConfig cfg = small_config();
  cfg.faults.push_back({Scenario::F1, FaultMechanism::uncaught_exception, "import_csv", 1.0});
  auto art = run_experiment(TracingMode::none, cfg);
  REQUIRE(art.evidence.size() == 2);
  for (const auto& set : art.evidence) {
    REQUIRE(set.response.size() == 2);
    CHECK(set.response[1].content == EvidenceContent::error);
  }
}
