#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "faasim/classify.hpp"
#include "faasim/harness.hpp"

namespace {

using namespace faasim;

struct CliOptions {
  std::string config_path;
  std::uint64_t seed = 1234;
  std::string variant = "all";
  std::string profile = "openwhisk_like";
  int requests = 100;
  int records = 150;
  double sampling = 1.0;
  std::string out_dir = "out";
  std::string format = "md";

  // Track which flags the user set, so they override config-file values.
  bool seed_set = false, variant_set = false, profile_set = false;
  bool requests_set = false, records_set = false, sampling_set = false;
};

PlatformProfile::Name parse_profile(const std::string& s) {
  if (s == "aws_like") return PlatformProfile::Name::aws_like;
  if (s == "openwhisk_like") return PlatformProfile::Name::openwhisk_like;
  throw CLI::ValidationError("--profile", "unknown profile '" + s + "'");
}

TracingMode parse_variant(const std::string& s) {
  if (s == "none") return TracingMode::none;
  if (s == "developer_driven") return TracingMode::developer_driven;
  if (s == "platform_supported") return TracingMode::platform_supported;
  if (s == "platform_supported_auto") return TracingMode::platform_supported_auto;
  throw CLI::ValidationError("--variant", "unknown variant '" + s + "'");
}

Scenario parse_scenario(const std::string& s) {
  if (s == "F1") return Scenario::F1;
  if (s == "F2") return Scenario::F2;
  if (s == "F3") return Scenario::F3;
  if (s == "F4") return Scenario::F4;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

ExperimentConfig load_experiment_config(const CliOptions& opt) {
  ExperimentConfig cfg;
  cfg.profile.name = parse_profile(opt.profile);
  cfg.seed = opt.seed;
  cfg.sampling = opt.sampling;
  cfg.workload.requests = opt.requests;
  cfg.workload.records = opt.records;

  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw std::runtime_error("cannot open config file " + opt.config_path);
    nlohmann::json j;
    in >> j;
    if (j.contains("seed") && !opt.seed_set) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("profile") && !opt.profile_set) {
      cfg.profile.name = parse_profile(j["profile"].get<std::string>());
    }
    if (j.contains("sampling") && !opt.sampling_set) cfg.sampling = j["sampling"].get<double>();
    if (j.contains("workload")) {
      const auto& w = j["workload"];
      if (w.contains("requests") && !opt.requests_set) cfg.workload.requests = w["requests"];
      if (w.contains("records") && !opt.records_set) cfg.workload.records = w["records"];
      if (w.contains("images_per_record")) {
        cfg.workload.images_per_record = w["images_per_record"];
      }
    }
    if (j.contains("costs")) {
      const auto& c = j["costs"];
      if (c.contains("report_overhead_ms")) cfg.costs.report_overhead_ms = c["report_overhead_ms"];
      if (c.contains("platform_hook_overhead_ms")) {
        cfg.costs.platform_hook_overhead_ms = c["platform_hook_overhead_ms"];
      }
      if (c.contains("platform_provider_units")) {
        cfg.costs.platform_provider_units = c["platform_provider_units"];
      }
      if (c.contains("tail_flush_ms")) cfg.costs.tail_flush_ms = c["tail_flush_ms"];
      if (c.contains("tail_flush_probability")) {
        cfg.costs.tail_flush_probability = c["tail_flush_probability"];
      }
    }
    if (j.contains("faults")) {
      for (const auto& f : j["faults"]) {
        PlannedFault pf;
        if (f.contains("scenario")) {
          pf.scenario = parse_scenario(f["scenario"].get<std::string>());
          pf.mechanism = mechanism_for(*pf.scenario);
        }
        pf.target_function = f.at("target").get<std::string>();
        if (f.contains("probability")) pf.probability = f["probability"].get<double>();
        cfg.faults.push_back(pf);
      }
    }
  }
  return cfg;
}

std::vector<TracingMode> expand_variants(const std::string& variant) {
  if (variant == "all") {
    return {TracingMode::none, TracingMode::developer_driven, TracingMode::platform_supported};
  }
  return {parse_variant(variant)};
}

int cmd_run(const CliOptions& opt) {
  ExperimentConfig cfg = load_experiment_config(opt);
  ExperimentSuite suite = run_suite(expand_variants(opt.variant), cfg);
  std::vector<std::string> files = write_report(suite, opt.out_dir);
  for (const auto& f : files) std::cout << f << "\n";
  return 0;
}

int cmd_tables(const CliOptions& opt) {
  TableReport report = render_tables(build_verdict_matrix(opt.seed));
  const std::string& body = opt.format == "json" ? report.json : report.markdown;
  if (opt.out_dir.empty() || opt.out_dir == "-") {
    std::cout << body << "\n";
  } else {
    std::filesystem::create_directories(opt.out_dir);
    const std::string name = opt.format == "json" ? "tables.json" : "tables.md";
    std::ofstream out(std::filesystem::path(opt.out_dir) / name, std::ios::binary);
    out << body << "\n";
    std::cout << (std::filesystem::path(opt.out_dir) / name).string() << "\n";
  }
  return 0;
}

int cmd_classify(const CliOptions& opt) {
  std::vector<VerdictCell> matrix = build_verdict_matrix(opt.seed);
  std::cout << verdict_matrix_to_json(matrix) << "\n";
  return 0;
}

int cmd_export_traces(const CliOptions& opt) {
  ExperimentConfig cfg = load_experiment_config(opt);
  for (TracingMode m : expand_variants(opt.variant)) {
    ExperimentArtifacts art = run_experiment(m, cfg);
    std::filesystem::create_directories(opt.out_dir);
    auto path = std::filesystem::path(opt.out_dir) / ("traces-" + art.variant + ".json");
    std::ofstream out(path, std::ios::binary);
    out << art.zipkin_json << "\n";
    std::cout << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic FaaS tracing and fault-observability simulator", "faasim"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "experiment config file (JSON)");
    cmd->add_option("--seed", opt.seed)->each([&](const std::string&) { opt.seed_set = true; });
    cmd->add_option("--variant", opt.variant,
                    "none|developer_driven|platform_supported|platform_supported_auto|all")
        ->each([&](const std::string&) { opt.variant_set = true; });
    cmd->add_option("--profile", opt.profile, "aws_like|openwhisk_like")
        ->each([&](const std::string&) { opt.profile_set = true; });
    cmd->add_option("--requests", opt.requests)
        ->each([&](const std::string&) { opt.requests_set = true; });
    cmd->add_option("--records", opt.records)
        ->each([&](const std::string&) { opt.records_set = true; });
    cmd->add_option("--sampling", opt.sampling, "trace sampling probability in [0,1]")
        ->check(CLI::Range(0.0, 1.0))
        ->each([&](const std::string&) { opt.sampling_set = true; });
    cmd->add_option("--out", opt.out_dir, "output directory ('-' for stdout where supported)");
    cmd->add_option("--format", opt.format, "json|md")
        ->check(CLI::IsMember({"json", "md"}));
  };

  CLI::App* run = app.add_subcommand("run", "run the bulk-import experiment variants");
  CLI::App* classify = app.add_subcommand("classify", "emit the full verdict matrix as JSON");
  CLI::App* tables = app.add_subcommand("tables", "render the observability tables");
  CLI::App* export_traces =
      app.add_subcommand("export-traces", "write Zipkin v2 trace exports per variant");
  for (CLI::App* cmd : {run, classify, tables, export_traces}) add_common(cmd);

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(opt);
    if (classify->parsed()) return cmd_classify(opt);
    if (tables->parsed()) return cmd_tables(opt);
    if (export_traces->parsed()) return cmd_export_traces(opt);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
