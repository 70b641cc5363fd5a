#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "faasim/classify.hpp"
#include "faasim/core.hpp"
#include "faasim/evidence.hpp"
#include "faasim/faults.hpp"
#include "faasim/platform.hpp"
#include "faasim/tracing.hpp"

namespace faasim {

struct BulkImportWorkload {
  int records = 150;
  int images_per_record = 1;
  int requests = 100;
};

/// Cost-model knobs. Virtual-time magnitudes are parameters, not
/// measurements; only orderings and zero baselines are contractual.
struct CostParams {
  std::uint64_t report_overhead_ms = 5;
  std::uint64_t platform_hook_overhead_ms = 8;
  /// Provider-side runtimes reserved by the tracing backend under
  /// platform-supported tracing; one unit is a 128 MB runtime on one CPU
  /// unit. Must stay within [1, 2].
  std::uint64_t platform_provider_units = 2;
  std::uint64_t tail_flush_ms = 0;
  double tail_flush_probability = 0.0;
};

struct ExperimentConfig {
  BulkImportWorkload workload;
  PlatformProfile profile;
  double sampling = 1.0;
  std::vector<PlannedFault> faults;
  CostParams costs;
  std::uint64_t seed = 1234;
};

/// The bulk-import composition: import_csv -> insert_products ->
/// update_catalogue on the synchronous path, plus per-record async fan-out
/// to fetch_product_images (per image) and render_listing.
CompositionSpec build_bulk_import();

struct ExperimentArtifacts {
  std::string variant;  // "none", "developer_driven", "platform_supported"
  TracingMode mode = TracingMode::none;
  ExperimentConfig config;
  std::vector<InvocationRecord> ledger;
  std::vector<ResponseEnvelope> responses;
  std::vector<GroundTruthEntry> ground_truth;
  /// One evidence set per request, in submission order.
  std::vector<EvidenceSet> evidence;
  /// Zipkin v2 JSON array of every collected span.
  std::string zipkin_json = "[]";
  std::size_t span_count = 0;
  std::size_t trace_count = 0;
  std::uint64_t platform_flush_charge_ms = 0;
  std::uint64_t dropped_batches = 0;
};

/// Runs the bulk-import workload under one tracing variant on a fresh
/// platform. Deterministic in (config, variant).
ExperimentArtifacts run_experiment(TracingMode variant, const ExperimentConfig& config);

struct VariantCostStats {
  std::string variant;
  /// Per-invocation fetch_product_images execution-time deltas against the
  /// untraced baseline, virtual ms.
  double mean_delta_ms = 0.0;
  double median_delta_ms = 0.0;
  std::uint64_t max_delta_ms = 0;
  std::size_t fetch_invocations = 0;
  /// Provider-side execution units held by the tracing backend.
  std::uint64_t provider_units = 0;
  std::uint64_t provider_memory_overhead_mb = 0;
  /// Client-side span flushes (network usage proxy), developer-driven only.
  std::uint64_t network_flushes = 0;
  std::uint64_t platform_flush_charge_ms = 0;
};

struct CostReport {
  std::vector<VariantCostStats> variants;
};

/// Compares one variant against the baseline run. Throws
/// std::invalid_argument when seeds or workloads differ.
VariantCostStats account_costs(const ExperimentArtifacts& artifacts,
                               const ExperimentArtifacts& baseline);

/// Runs all requested variants off one config and aggregates their costs
/// against the none-variant baseline (which is always included).
struct ExperimentSuite {
  std::vector<ExperimentArtifacts> artifacts;
  CostReport costs;
};

ExperimentSuite run_suite(const std::vector<TracingMode>& variants,
                          const ExperimentConfig& config);

/// Writes report.json, report.md, traces-<variant>.json and
/// evidence-<variant>.jsonl into out_dir. Deterministic bytes for
/// deterministic inputs. Returns the list of files written.
std::vector<std::string> write_report(const ExperimentSuite& suite, const std::string& out_dir);

}  // namespace faasim
