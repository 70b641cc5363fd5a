#pragma once

#include <map>
#include <string>
#include <vector>

#include "faasim/core.hpp"
#include "faasim/evidence.hpp"
#include "faasim/faults.hpp"
#include "faasim/platform.hpp"
#include "faasim/tracing.hpp"

namespace faasim {

/// One isolated golden run of a fault scenario under a (profile, mode)
/// configuration.
struct ScenarioRun {
  Scenario scenario = Scenario::F1;
  PlatformProfile::Name profile = PlatformProfile::Name::openwhisk_like;
  TracingMode mode = TracingMode::none;
  /// "standard" = full instrumentation; "reduced" = third-party calls not
  /// wrapped and async-triggered functions left uninstrumented.
  std::string variant = "standard";
  std::string entry_function;
  EvidenceSet evidence;
  GroundTruthEntry truth;
};

/// Minimal two-component composition for a scenario, matching the fault's
/// shape: F1/F2 single handler, F3 a synchronous pair, F4 an async pair.
CompositionSpec scenario_composition(Scenario s, bool reduced_coverage);

ScenarioRun run_scenario(Scenario s, PlatformProfile::Name profile, TracingMode mode,
                         bool reduced_coverage, std::uint64_t seed = 1234);

/// Signature catalog per (profile, mode), built from golden runs of every
/// scenario under both instrumentation-coverage variants. Ambiguity is
/// catalog-relative: evidence is ambiguous when some other catalogued fault
/// can produce the same signature.
class ScenarioEvidenceCatalog {
 public:
  struct Entry {
    Scenario scenario = Scenario::F1;
    std::string variant;
    EvidenceSignature signature;
  };

  static ScenarioEvidenceCatalog build(PlatformProfile::Name profile, TracingMode mode,
                                       std::uint64_t seed = 1234);

  const std::vector<Entry>& entries(Channel c) const;
  PlatformProfile::Name profile() const { return profile_; }
  TracingMode mode() const { return mode_; }

 private:
  PlatformProfile::Name profile_ = PlatformProfile::Name::openwhisk_like;
  TracingMode mode_ = TracingMode::none;
  std::map<Channel, std::vector<Entry>> entries_;
};

/// True iff the channel carries at least one fault-indicating record.
/// Throws std::logic_error when called for a clean run.
bool classify_visibility(const EvidenceSet& evidence, Channel channel,
                         const GroundTruthEntry& truth);

/// not_applicable when invisible; no (ambiguous) when >=2 catalogued
/// scenarios can produce the request's signature; yes otherwise.
TriState classify_ambiguity(const EvidenceSet& evidence, Channel channel,
                            const ScenarioEvidenceCatalog& catalog, Scenario own_scenario);

/// Channel-specific consistency: response code/body agreement and fault
/// reflection; log agreement across components; trace evidence located at
/// the true fault's step.
bool classify_consistency(const EvidenceSet& evidence, Channel channel,
                          const GroundTruthEntry& truth, const std::string& entry_function);

/// A fully classified table cell, with the raw evidence needed to render
/// the observability tables.
struct VerdictCell {
  Scenario scenario = Scenario::F1;
  PlatformProfile::Name profile = PlatformProfile::Name::openwhisk_like;
  TracingMode mode = TracingMode::none;
  Channel channel = Channel::response;
  ObservabilityVerdict verdict;
  EvidenceContent response_code = EvidenceContent::absent;
  EvidenceContent response_body = EvidenceContent::absent;
  EvidenceContent log_upstream = EvidenceContent::absent;
  EvidenceContent log_downstream = EvidenceContent::absent;
};

/// Runs the scenario (both coverage variants for the trace channel),
/// classifies it, and derives the partial flags for verdicts that hold only
/// under full instrumentation coverage.
VerdictCell evaluate_cell(Scenario s, PlatformProfile::Name profile, TracingMode mode,
                          Channel channel, std::uint64_t seed = 1234);

/// All cells of the three observability tables.
std::vector<VerdictCell> build_verdict_matrix(std::uint64_t seed = 1234);

struct TableReport {
  std::string markdown;
  std::string json;
};

/// Renders the response-evidence, log-evidence and tracing observability
/// tables. Throws std::invalid_argument listing the missing cells when the
/// matrix is incomplete.
TableReport render_tables(const std::vector<VerdictCell>& matrix);

std::string verdict_matrix_to_json(const std::vector<VerdictCell>& matrix);

}  // namespace faasim
