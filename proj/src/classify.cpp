#include "faasim/classify.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace faasim {

namespace {

const Scenario kAllScenarios[] = {Scenario::F1, Scenario::F2, Scenario::F3, Scenario::F4};

bool fault_indicating(EvidenceContent c) {
  return c == EvidenceContent::error || c == EvidenceContent::error_timeout;
}

}  // namespace

CompositionSpec scenario_composition(Scenario s, bool reduced_coverage) {
  CompositionSpec spec;
  switch (s) {
    case Scenario::F1: {
      FunctionSpec handler{.name = "handler", .base_exec_ms = 100};
      spec.functions[handler.name] = handler;
      spec.entry = "handler";
      break;
    }
    case Scenario::F2: {
      FunctionSpec handler{.name = "handler", .base_exec_ms = 100,
                           .external_calls = {"third_party_api"}};
      spec.functions[handler.name] = handler;
      spec.entry = "handler";
      break;
    }
    case Scenario::F3: {
      FunctionSpec up{.name = "upstream", .base_exec_ms = 100};
      FunctionSpec down{.name = "downstream", .base_exec_ms = 100};
      spec.functions[up.name] = up;
      spec.functions[down.name] = down;
      spec.edges.push_back({"upstream", "downstream", EdgeMode::sync});
      spec.entry = "upstream";
      break;
    }
    case Scenario::F4: {
      FunctionSpec up{.name = "upstream", .base_exec_ms = 100};
      FunctionSpec down{.name = "downstream", .base_exec_ms = 100};
      // Reduced coverage: the async-triggered function carries no
      // developer instrumentation.
      down.instrumented = !reduced_coverage;
      spec.functions[up.name] = up;
      spec.functions[down.name] = down;
      spec.edges.push_back({"upstream", "downstream", EdgeMode::async});
      spec.entry = "upstream";
      break;
    }
  }
  return spec;
}

ScenarioRun run_scenario(Scenario s, PlatformProfile::Name profile, TracingMode mode,
                         bool reduced_coverage, std::uint64_t seed) {
  CompositionSpec spec = scenario_composition(s, reduced_coverage);
  const std::string target =
      (s == Scenario::F3 || s == Scenario::F4) ? "downstream" : "handler";

  FaultPlan plan = plan_faults({{s, mechanism_for(s), target, 1.0}}, seed);

  TracingConfig tracing;
  tracing.mode = mode;
  tracing.sampling = {SamplerConfig::Kind::probability_based, 1.0};
  tracing.instrument_external_calls = !reduced_coverage;

  PlatformProfile prof;
  prof.name = profile;

  auto platform = deploy(std::move(spec), prof, tracing, plan, seed);
  platform->submit_request({}, true);

  ScenarioRun run;
  run.scenario = s;
  run.profile = profile;
  run.mode = mode;
  run.variant = reduced_coverage ? "reduced" : "standard";
  run.entry_function = platform->composition().entry;
  run.truth = platform->ground_truth().at(0);

  const std::string request_id = run.truth.request_id;
  run.evidence.request_id = request_id;
  run.evidence.response = collect_response(platform->responses().at(0));
  run.evidence.logs =
      collect_logs(platform->logs(), platform->ledger(), request_id, run.entry_function);
  auto trace_it = platform->request_traces().find(request_id);
  if (trace_it != platform->request_traces().end()) {
    run.evidence.traces = collect_trace_evidence(platform->collector(), trace_it->second,
                                                 request_id, run.entry_function);
  }
  return run;
}

ScenarioEvidenceCatalog ScenarioEvidenceCatalog::build(PlatformProfile::Name profile,
                                                       TracingMode mode, std::uint64_t seed) {
  ScenarioEvidenceCatalog catalog;
  catalog.profile_ = profile;
  catalog.mode_ = mode;
  for (Scenario s : kAllScenarios) {
    for (bool reduced : {false, true}) {
      ScenarioRun run = run_scenario(s, profile, mode, reduced, seed);
      for (Channel c : {Channel::response, Channel::log, Channel::trace}) {
        catalog.entries_[c].push_back(
            {s, run.variant, signature_of(run.evidence.channel(c), c)});
      }
    }
  }
  return catalog;
}

const std::vector<ScenarioEvidenceCatalog::Entry>& ScenarioEvidenceCatalog::entries(
    Channel c) const {
  static const std::vector<Entry> empty;
  auto it = entries_.find(c);
  return it == entries_.end() ? empty : it->second;
}

bool classify_visibility(const EvidenceSet& evidence, Channel channel,
                         const GroundTruthEntry& truth) {
  if (!truth.injected) {
    throw std::logic_error("classify_visibility called for a clean run");
  }
  for (const auto& r : evidence.channel(channel)) {
    if (fault_indicating(r.content)) return true;
  }
  return false;
}

TriState classify_ambiguity(const EvidenceSet& evidence, Channel channel,
                            const ScenarioEvidenceCatalog& catalog, Scenario own_scenario) {
  const auto& entries = catalog.entries(channel);
  if (entries.empty()) {
    throw std::invalid_argument("catalog has no entries for channel " + to_string(channel));
  }
  EvidenceSignature sig = signature_of(evidence.channel(channel), channel);
  if (sig.no_evidence) return TriState::not_applicable;

  // The signature's own fault always counts as one producer; any other
  // catalogued scenario able to produce it makes the evidence ambiguous.
  std::set<Scenario> producers{own_scenario};
  for (const auto& e : entries) {
    if (e.signature == sig) producers.insert(e.scenario);
  }
  return producers.size() >= 2 ? TriState::no : TriState::yes;
}

namespace {

bool response_consistent(const EvidenceSet& evidence, const GroundTruthEntry& truth) {
  EvidenceContent code = EvidenceContent::absent;
  EvidenceContent body = EvidenceContent::absent;
  for (const auto& r : evidence.response) {
    if (r.source == "response.code") code = r.content;
    if (r.source == "response.body") body = r.content;
  }
  const bool agree =
      (code == EvidenceContent::success) == (body == EvidenceContent::success);
  const bool reflected = !truth.injected || body != EvidenceContent::success;
  return agree && reflected;
}

bool log_consistent(const EvidenceSet& evidence, const GroundTruthEntry& truth) {
  bool any_error = false, any_success = false;
  for (const auto& r : evidence.logs) {
    if (fault_indicating(r.content)) any_error = true;
    if (r.content == EvidenceContent::success) any_success = true;
  }
  // Components must agree on the fault: a success report next to an error
  // report means part of the composition obscured the failure.
  const bool agreement = !(any_error && any_success);
  const bool reflected = !truth.injected || any_error;
  return agreement && reflected;
}

bool trace_consistent(const EvidenceSet& evidence, const GroundTruthEntry& truth,
                      const std::string& entry_function) {
  bool visible = false;
  for (const auto& r : evidence.traces) {
    if (fault_indicating(r.content)) visible = true;
  }
  // Invisible evidence is a visibility failure, not a misreport.
  if (!visible) return true;
  if (!truth.injected) return true;

  const Position target_pos = truth.injected->target_function == entry_function
                                  ? Position::upstream
                                  : Position::downstream;
  auto has_record = [&](std::initializer_list<const char*> sources, bool timeout_content) {
    for (const auto& r : evidence.traces) {
      if (r.position != target_pos) continue;
      if (timeout_content ? r.content != EvidenceContent::error_timeout
                          : r.content != EvidenceContent::error) {
        continue;
      }
      for (const char* s : sources) {
        if (r.source == s) return true;
      }
    }
    return false;
  };

  // Consistent evidence pinpoints the execution step where the fault
  // actually sits.
  switch (truth.injected->mechanism) {
    case FaultMechanism::uncaught_exception:
    case FaultMechanism::async_downstream_bug:
    case FaultMechanism::container_kill:
      return has_record({"function_internal", "invocation"}, false);
    case FaultMechanism::external_api_timeout:
      return has_record({"external_call", "invocation"}, true);
    case FaultMechanism::cold_sync_timeout:
      return has_record({"init"}, true);
    case FaultMechanism::invalid_dependency:
      return has_record({"init"}, false);
  }
  return false;
}

}  // namespace

bool classify_consistency(const EvidenceSet& evidence, Channel channel,
                          const GroundTruthEntry& truth, const std::string& entry_function) {
  switch (channel) {
    case Channel::response: return response_consistent(evidence, truth);
    case Channel::log: return log_consistent(evidence, truth);
    case Channel::trace: return trace_consistent(evidence, truth, entry_function);
  }
  return false;
}

namespace {

VerdictCell evaluate_cell_with_catalog(Scenario s, PlatformProfile::Name profile,
                                       TracingMode mode, Channel channel,
                                       const ScenarioEvidenceCatalog& catalog,
                                       std::uint64_t seed) {
  VerdictCell cell;
  cell.scenario = s;
  cell.profile = profile;
  cell.mode = mode;
  cell.channel = channel;

  ScenarioRun std_run = run_scenario(s, profile, mode, false, seed);
  ObservabilityVerdict& v = cell.verdict;
  v.visible = classify_visibility(std_run.evidence, channel, std_run.truth);
  v.unambiguous = v.visible
                      ? classify_ambiguity(std_run.evidence, channel, catalog, s)
                      : TriState::not_applicable;
  v.consistent =
      classify_consistency(std_run.evidence, channel, std_run.truth, std_run.entry_function);

  if (channel == Channel::trace && mode != TracingMode::none) {
    // Partial verdicts: true only as long as instrumentation coverage
    // holds. Re-run with third-party calls unwrapped and async functions
    // uninstrumented and compare.
    ScenarioRun red_run = run_scenario(s, profile, mode, true, seed);
    const bool v_red = classify_visibility(red_run.evidence, channel, red_run.truth);
    const bool c_red =
        classify_consistency(red_run.evidence, channel, red_run.truth, red_run.entry_function);
    v.partial_visible = v.visible && !v_red;
    v.partial_unambiguous = v.unambiguous == TriState::yes && !v_red;
    v.partial_consistent = v.consistent && v_red && !c_red;
  }

  for (const auto& r : std_run.evidence.response) {
    if (r.source == "response.code") cell.response_code = r.content;
    if (r.source == "response.body") cell.response_body = r.content;
  }
  for (const auto& r : std_run.evidence.logs) {
    if (r.position == Position::upstream) cell.log_upstream = r.content;
    if (r.position == Position::downstream) cell.log_downstream = r.content;
  }
  return cell;
}

}  // namespace

VerdictCell evaluate_cell(Scenario s, PlatformProfile::Name profile, TracingMode mode,
                          Channel channel, std::uint64_t seed) {
  ScenarioEvidenceCatalog catalog = ScenarioEvidenceCatalog::build(profile, mode, seed);
  return evaluate_cell_with_catalog(s, profile, mode, channel, catalog, seed);
}

std::vector<VerdictCell> build_verdict_matrix(std::uint64_t seed) {
  std::vector<VerdictCell> matrix;
  struct Config {
    PlatformProfile::Name profile;
    TracingMode mode;
    std::vector<Channel> channels;
  };
  const std::vector<Config> configs = {
      {PlatformProfile::Name::aws_like, TracingMode::none, {Channel::response, Channel::log}},
      {PlatformProfile::Name::openwhisk_like, TracingMode::none,
       {Channel::response, Channel::log}},
      {PlatformProfile::Name::openwhisk_like, TracingMode::developer_driven, {Channel::trace}},
      {PlatformProfile::Name::openwhisk_like, TracingMode::platform_supported, {Channel::trace}},
      {PlatformProfile::Name::aws_like, TracingMode::platform_supported_auto, {Channel::trace}},
  };
  for (const auto& cfg : configs) {
    ScenarioEvidenceCatalog catalog = ScenarioEvidenceCatalog::build(cfg.profile, cfg.mode, seed);
    for (Channel c : cfg.channels) {
      for (Scenario s : kAllScenarios) {
        matrix.push_back(evaluate_cell_with_catalog(s, cfg.profile, cfg.mode, c, catalog, seed));
      }
    }
  }
  return matrix;
}

namespace {

std::string content_cell(EvidenceContent c) {
  switch (c) {
    case EvidenceContent::success: return "success";
    case EvidenceContent::error: return "error";
    case EvidenceContent::error_timeout: return "error (TO)";
    case EvidenceContent::absent: return "n.a.";
  }
  return "?";
}

std::string bool_cell(bool value, bool partial, bool improved) {
  std::string s = value ? "true" : "false";
  if (partial) s = "(" + s + ")";
  if (improved) s = "_" + s + "_";
  return s;
}

std::string tri_cell(TriState value, bool partial, bool improved) {
  if (value == TriState::not_applicable) return "-";
  return bool_cell(value == TriState::yes, partial, improved);
}

const VerdictCell* find_cell(const std::vector<VerdictCell>& matrix, Scenario s,
                             PlatformProfile::Name profile, TracingMode mode, Channel channel) {
  for (const auto& c : matrix) {
    if (c.scenario == s && c.profile == profile && c.mode == mode && c.channel == channel) {
      return &c;
    }
  }
  return nullptr;
}

nlohmann::json cell_json(const VerdictCell& c) {
  nlohmann::json j;
  j["scenario"] = to_string(c.scenario);
  j["profile"] = to_string(c.profile);
  j["tracing_mode"] = to_string(c.mode);
  j["channel"] = to_string(c.channel);
  j["visible"] = c.verdict.visible;
  j["unambiguous"] = to_string(c.verdict.unambiguous);
  j["consistent"] = c.verdict.consistent;
  j["partial"] = c.verdict.partial_visible || c.verdict.partial_unambiguous ||
                 c.verdict.partial_consistent;
  nlohmann::json partials = nlohmann::json::array();
  if (c.verdict.partial_visible) partials.push_back("visible");
  if (c.verdict.partial_unambiguous) partials.push_back("unambiguous");
  if (c.verdict.partial_consistent) partials.push_back("consistent");
  j["partial_properties"] = partials;
  if (c.channel == Channel::response) {
    j["response_code"] = content_cell(c.response_code);
    j["response_body"] = content_cell(c.response_body);
  }
  if (c.channel == Channel::log) {
    j["upstream"] = content_cell(c.log_upstream);
    j["downstream"] = content_cell(c.log_downstream);
  }
  return j;
}

}  // namespace

std::string verdict_matrix_to_json(const std::vector<VerdictCell>& matrix) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : matrix) arr.push_back(cell_json(c));
  return arr.dump(2);
}

TableReport render_tables(const std::vector<VerdictCell>& matrix) {
  // Completeness check over all required cells first.
  std::vector<std::string> missing;
  auto require = [&](Scenario s, PlatformProfile::Name p, TracingMode m, Channel c) {
    if (!find_cell(matrix, s, p, m, c)) {
      missing.push_back(to_string(s) + "/" + to_string(p) + "/" + to_string(m) + "/" +
                        to_string(c));
    }
  };
  for (Scenario s : kAllScenarios) {
    for (auto p : {PlatformProfile::Name::aws_like, PlatformProfile::Name::openwhisk_like}) {
      require(s, p, TracingMode::none, Channel::response);
      require(s, p, TracingMode::none, Channel::log);
    }
    require(s, PlatformProfile::Name::openwhisk_like, TracingMode::developer_driven,
            Channel::trace);
    require(s, PlatformProfile::Name::openwhisk_like, TracingMode::platform_supported,
            Channel::trace);
    require(s, PlatformProfile::Name::aws_like, TracingMode::platform_supported_auto,
            Channel::trace);
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "verdict matrix incomplete; missing cells:";
    for (const auto& m : missing) os << " " << m;
    throw std::invalid_argument(os.str());
  }

  std::ostringstream md;
  nlohmann::json json;

  md << "## Response-observable evidence\n\n";
  md << "| Platform | Fault | resp-code | resp-body | consistent | unambiguous |\n";
  md << "|---|---|---|---|---|---|\n";
  json["response"] = nlohmann::json::array();
  for (auto p : {PlatformProfile::Name::aws_like, PlatformProfile::Name::openwhisk_like}) {
    for (Scenario s : kAllScenarios) {
      const VerdictCell* c = find_cell(matrix, s, p, TracingMode::none, Channel::response);
      md << "| " << to_string(p) << " | " << to_string(s) << " | "
         << content_cell(c->response_code) << " | " << content_cell(c->response_body) << " | "
         << bool_cell(c->verdict.consistent, false, false) << " | "
         << tri_cell(c->verdict.unambiguous, false, false) << " |\n";
      json["response"].push_back(cell_json(*c));
    }
  }

  // Log-table annotation: marked improved when the value changed versus the
  // response channel for the same (platform, fault).
  md << "\n## Log-observable evidence\n\n";
  md << "| Platform | Fault | upstream | downstream | consistent | unambiguous |\n";
  md << "|---|---|---|---|---|---|\n";
  json["log"] = nlohmann::json::array();
  for (auto p : {PlatformProfile::Name::aws_like, PlatformProfile::Name::openwhisk_like}) {
    for (Scenario s : kAllScenarios) {
      const VerdictCell* c = find_cell(matrix, s, p, TracingMode::none, Channel::log);
      const VerdictCell* resp = find_cell(matrix, s, p, TracingMode::none, Channel::response);
      const bool imp_cons = c->verdict.consistent && !resp->verdict.consistent;
      const bool imp_unamb = c->verdict.unambiguous == TriState::yes &&
                             resp->verdict.unambiguous != TriState::yes;
      md << "| " << to_string(p) << " | " << to_string(s) << " | "
         << content_cell(c->log_upstream) << " | " << content_cell(c->log_downstream) << " | "
         << bool_cell(c->verdict.consistent, false, imp_cons) << " | "
         << tri_cell(c->verdict.unambiguous, false, imp_unamb) << " |\n";
      nlohmann::json jc = cell_json(*c);
      nlohmann::json improved = nlohmann::json::array();
      if (imp_cons) improved.push_back("consistent");
      if (imp_unamb) improved.push_back("unambiguous");
      jc["improved"] = improved;
      json["log"].push_back(jc);
    }
  }

  md << "\n## Trace-observable evidence\n\n";
  md << "| Approach | Fault | visible | unambiguous | consistent |\n";
  md << "|---|---|---|---|---|\n";
  json["tracing"] = nlohmann::json::array();
  struct Approach {
    const char* label;
    PlatformProfile::Name profile;
    TracingMode mode;
  };
  const Approach approaches[] = {
      {"aws_like / platform_supported_auto", PlatformProfile::Name::aws_like,
       TracingMode::platform_supported_auto},
      {"openwhisk_like / developer_driven", PlatformProfile::Name::openwhisk_like,
       TracingMode::developer_driven},
      {"openwhisk_like / platform_supported", PlatformProfile::Name::openwhisk_like,
       TracingMode::platform_supported},
  };
  for (const auto& ap : approaches) {
    for (Scenario s : kAllScenarios) {
      const VerdictCell* c = find_cell(matrix, s, ap.profile, ap.mode, Channel::trace);
      const VerdictCell* log = find_cell(matrix, s, ap.profile, TracingMode::none, Channel::log);
      const bool imp_cons = c->verdict.consistent && !log->verdict.consistent;
      const bool imp_unamb = c->verdict.unambiguous == TriState::yes &&
                             log->verdict.unambiguous != TriState::yes;
      const bool log_visible = c->verdict.visible &&
                               (log->log_upstream == EvidenceContent::error ||
                                log->log_upstream == EvidenceContent::error_timeout ||
                                log->log_downstream == EvidenceContent::error ||
                                log->log_downstream == EvidenceContent::error_timeout);
      md << "| " << ap.label << " | " << to_string(s) << " | "
         << bool_cell(c->verdict.visible, c->verdict.partial_visible,
                      c->verdict.visible && !log_visible)
         << " | "
         << tri_cell(c->verdict.unambiguous, c->verdict.partial_unambiguous, imp_unamb) << " | "
         << bool_cell(c->verdict.consistent, c->verdict.partial_consistent, imp_cons) << " |\n";
      nlohmann::json jc = cell_json(*c);
      nlohmann::json improved = nlohmann::json::array();
      if (imp_unamb) improved.push_back("unambiguous");
      if (imp_cons) improved.push_back("consistent");
      jc["improved"] = improved;
      json["tracing"].push_back(jc);
    }
  }

  TableReport report;
  report.markdown = md.str();
  report.json = json.dump(2);
  return report;
}

}  // namespace faasim
