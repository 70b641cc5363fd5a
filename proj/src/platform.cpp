#include "faasim/platform.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace faasim {

std::string to_string(PlatformProfile::Name n) {
  return n == PlatformProfile::Name::aws_like ? "aws_like" : "openwhisk_like";
}

std::string to_string(StepKind s) {
  switch (s) {
    case StepKind::validation: return "validation";
    case StepKind::resource_allocation: return "resource_allocation";
    case StepKind::cold_start_init: return "cold_start_init";
    case StepKind::invocation: return "invocation";
  }
  return "?";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::error: return "error";
    case Outcome::timeout: return "timeout";
  }
  return "?";
}

namespace {

constexpr std::uint64_t kValidationMs = 1;
constexpr std::uint64_t kAllocationMs = 1;
constexpr std::uint64_t kGatewayRoutingMs = 1;
constexpr std::uint64_t kExternalCallMs = 20;
constexpr std::uint64_t kRequestGapMs = 10;

std::string pad_id(const char* prefix, std::uint64_t n) {
  std::ostringstream os;
  os << prefix;
  os.width(8);
  os.fill('0');
  os << n;
  return os.str();
}

}  // namespace

Platform::Platform(CompositionSpec spec, PlatformProfile profile, TracingConfig tracing,
                   FaultPlan fault_plan, std::uint64_t seed, RuntimePoolConfig pool)
    : spec_(std::move(spec)),
      profile_(profile),
      tracing_(std::move(tracing)),
      faults_(std::move(fault_plan)),
      pool_cfg_(pool),
      rng_(seed) {
  validate();
}

void Platform::validate() const {
  if (!spec_.functions.count(spec_.entry)) {
    throw ValidationError("unknown entry function '" + spec_.entry + "'");
  }
  for (const auto& [name, fn] : spec_.functions) {
    if (fn.memory_mb <= 0) throw ValidationError("memory_mb must be positive for '" + name + "'");
    if (fn.timeout_ms == 0) throw ValidationError("timeout_ms must be positive for '" + name + "'");
  }
  for (const auto& e : spec_.edges) {
    if (!spec_.functions.count(e.caller) || !spec_.functions.count(e.callee)) {
      throw ValidationError("edge " + e.caller + " -> " + e.callee +
                            " references an unregistered function");
    }
    if (e.per_record && e.mode != EdgeMode::async) {
      throw ValidationError("per-record fan-out requires an async edge (" + e.caller + " -> " +
                            e.callee + ")");
    }
  }
  // Cycle detection via DFS; on failure report one offending path.
  std::map<std::string, int> state;  // 0 unvisited, 1 in stack, 2 done
  std::vector<std::string> stack;
  auto dfs = [&](auto&& self, const std::string& fn) -> bool {
    state[fn] = 1;
    stack.push_back(fn);
    for (const auto& e : spec_.edges) {
      if (e.caller != fn) continue;
      if (state[e.callee] == 1) {
        stack.push_back(e.callee);
        return false;
      }
      if (state[e.callee] == 0 && !self(self, e.callee)) return false;
    }
    state[fn] = 2;
    stack.pop_back();
    return true;
  };
  for (const auto& [name, fn] : spec_.functions) {
    if (state[name] == 0 && !dfs(dfs, name)) {
      std::ostringstream os;
      os << "composition contains a cycle: ";
      for (std::size_t i = 0; i < stack.size(); ++i) {
        if (i) os << " -> ";
        os << stack[i];
      }
      throw ValidationError(os.str());
    }
  }
}

bool Platform::take_warm(const std::string& function, VirtualTime at) {
  auto& slots = warm_[function];
  for (auto it = slots.begin(); it != slots.end(); ++it) {
    // A runtime is usable from the moment it was returned until its TTL.
    if (it->first <= at && it->second >= at) {
      slots.erase(it);
      return true;
    }
  }
  return false;
}

void Platform::put_warm(const std::string& function, VirtualTime at) {
  warm_[function].emplace_back(at, at + pool_cfg_.warm_ttl_ms);
}

void Platform::log_info(const std::string& fn, VirtualTime t, const std::string& msg,
                        const std::string& request_id) {
  logs_.append(fn, {t, LogLine::Level::info, msg, request_id, false, false});
}

void Platform::log_error(const std::string& fn, VirtualTime t, const std::string& msg,
                         const std::string& request_id, bool platform, bool timeout) {
  logs_.append(fn, {t, LogLine::Level::error, msg, request_id, platform, timeout});
}

ResponseEnvelope Platform::submit_request(const RequestPayload& payload,
                                          bool client_sample_flag) {
  const std::string request_id = pad_id("req-", request_seq_++);
  events_this_request_ = 0;
  faults_.begin_request(request_id);

  bool sampled = tracing_.mode != TracingMode::none &&
                 sample_decision(tracing_.sampling, client_sample_flag, rng_);

  std::optional<TraceContext> gateway_ctx;
  const VirtualTime t_req = now_;
  if (sampled && is_platform_mode(tracing_.mode)) {
    gateway_ctx = new_root_context(rng_, true);
    request_traces_[request_id] = gateway_ctx->trace_id;
  }

  InvocationResult entry_result =
      execute_invocation(spec_.entry, TriggerMode::entry, t_req + kGatewayRoutingMs, gateway_ctx,
                         std::nullopt, payload, sampled, request_id);

  if (gateway_ctx) {
    Span gw = platform_hook(PlatformEvent::gateway_received, *gateway_ctx, std::nullopt, t_req,
                            entry_result.end, "");
    if (entry_result.outcome != Outcome::success) {
      gw.tags["error"] = "true";
      if (entry_result.outcome == Outcome::timeout) gw.tags["timeout"] = "true";
    }
    report_spans(collector_, {gw}, tracing_.collector_down);
    platform_flush_charge_ms_ += tracing_.report_overhead_ms;
  }

  ResponseEnvelope env;
  env.request_id = request_id;
  switch (entry_result.outcome) {
    case Outcome::success:
      env.code = EvidenceContent::success;
      env.body = EvidenceContent::success;
      env.message = "ok";
      break;
    case Outcome::error:
      env.code = profile_.always_success_code() ? EvidenceContent::success : EvidenceContent::error;
      env.body = EvidenceContent::error;
      env.message = "function execution failed";
      break;
    case Outcome::timeout:
      env.code = profile_.always_success_code() ? EvidenceContent::success : EvidenceContent::error;
      env.body = EvidenceContent::error_timeout;
      env.message = "function execution timed out";
      break;
  }

  // Drain async fan-out of this request in (time, sequence) order.
  VirtualTime quiesce = entry_result.end;
  while (!async_queue_.empty()) {
    auto best = async_queue_.begin();
    for (auto it = async_queue_.begin(); it != async_queue_.end(); ++it) {
      if (it->at < best->at || (it->at == best->at && it->seq < best->seq)) best = it;
    }
    PendingAsync job = *best;
    async_queue_.erase(best);
    InvocationResult r = execute_invocation(job.function, TriggerMode::async, job.at, job.ctx,
                                            job.parent_invocation, payload, sampled, request_id);
    quiesce = std::max(quiesce, r.end);
  }

  now_ = quiesce + kRequestGapMs;
  responses_.push_back(env);
  // Records are pushed on completion; re-establish (start, sequence) order
  // so sync callers precede their callees in the ledger.
  std::stable_sort(ledger_.begin(), ledger_.end(),
                   [](const InvocationRecord& a, const InvocationRecord& b) {
                     if (a.start != b.start) return a.start < b.start;
                     return a.invocation_id < b.invocation_id;
                   });
  return env;
}

Platform::InvocationResult Platform::execute_invocation(
    const std::string& function, TriggerMode trigger, VirtualTime at,
    std::optional<TraceContext> inbound_ctx, std::optional<std::string> parent_invocation,
    const RequestPayload& payload, bool sampled, const std::string& request_id) {
  if (++events_this_request_ > event_safety_limit) {
    throw std::runtime_error("event safety limit exceeded (" +
                             std::to_string(event_safety_limit) +
                             " invocations in one request); composition or fan-out is runaway");
  }
  const FunctionSpec& fn = spec_.functions.at(function);
  const bool platform_tracing = sampled && is_platform_mode(tracing_.mode);

  InvocationRecord rec;
  rec.invocation_id = pad_id("inv-", invocation_seq_++);
  rec.request_id = request_id;
  rec.function = function;
  rec.trigger_mode = trigger;
  rec.parent_invocation = parent_invocation;
  rec.start = at;

  VirtualTime t = at;
  rec.steps.push_back({StepKind::validation, t, t + kValidationMs});
  t = t + kValidationMs;
  rec.steps.push_back({StepKind::resource_allocation, t, t + kAllocationMs});
  t = t + kAllocationMs;

  std::vector<Span> platform_batch;
  std::optional<TraceContext> controller_ctx;
  const VirtualTime controller_start = at;
  if (platform_tracing) {
    controller_ctx = inbound_ctx ? child_context(*inbound_ctx, rng_)
                                 : new_root_context(rng_, true);
    if (!request_traces_.count(request_id)) {
      request_traces_[request_id] = controller_ctx->trace_id;
    }
    platform_batch.push_back(platform_hook(
        PlatformEvent::controller_scheduled, *controller_ctx,
        inbound_ctx ? std::optional<std::string>(inbound_ctx->span_id) : std::nullopt,
        controller_start, t, function));
  }

  auto flush_platform = [&] {
    if (!platform_batch.empty()) {
      report_spans(collector_, platform_batch, tracing_.collector_down);
      platform_flush_charge_ms_ += tracing_.report_overhead_ms;
    }
  };

  // Cold-start decision. A cold_sync_timeout fault forces a cold start with
  // an inflated init duration.
  std::uint64_t init_ms = pool_cfg_.cold_start_ms;
  bool cold;
  if (auto forced = faults_.forced_cold_init_ms(function)) {
    cold = true;
    init_ms = *forced;
    faults_.record_fired(function, FaultMechanism::cold_sync_timeout, t);
  } else {
    cold = !take_warm(function, t);
  }
  rec.cold = cold;

  if (cold) {
    const VirtualTime init_start = t;
    const VirtualTime init_end = t + init_ms;
    rec.steps.push_back({StepKind::cold_start_init, init_start, init_end});
    const bool init_failed = faults_.init_fails(function);
    if (platform_tracing) {
      Span init = platform_hook(PlatformEvent::invoker_init, child_context(*controller_ctx, rng_),
                                controller_ctx->span_id, init_start, init_end, function);
      if (init_failed) {
        init.tags["error"] = "true";
        init.tags["error.message"] = "runtime failed to import dependency";
        init.tags["fault.type"] = to_string(FaultMechanism::invalid_dependency);
      }
      platform_batch.push_back(init);
    }
    if (init_failed) {
      faults_.record_fired(function, FaultMechanism::invalid_dependency, init_end);
      log_error(function, init_end,
                "ModuleNotFoundError: runtime failed to import dependency (fault: invalid_dependency)",
                request_id, true, false);
      rec.outcome = Outcome::error;
      rec.end = init_end;
      flush_platform();
      ledger_.push_back(rec);
      return {init_end, Outcome::error};
    }
    t = init_end;
  }

  // ---- invocation step: function body ----
  const VirtualTime body_start = t;
  const std::uint64_t budget = fn.timeout_ms;
  std::uint64_t elapsed = 0;

  std::optional<TraceContext> inv_ctx;
  if (platform_tracing) {
    inv_ctx = child_context(*controller_ctx, rng_);
  }
  // Environment as seen by the function body; the platform injects the
  // propagated context here.
  std::map<std::string, std::string> env;
  if (inv_ctx) inject_context(env, *inv_ctx);

  const bool body_instrumented = sampled && fn.instrumented && tracing_.mode != TracingMode::none;
  std::optional<TraceContext> fn_ctx;
  if (body_instrumented) {
    if (is_platform_mode(tracing_.mode)) {
      auto injected = extract_context(env);
      fn_ctx = injected ? child_context(*injected, rng_) : new_root_context(rng_, true);
    } else {
      fn_ctx = inbound_ctx ? child_context(*inbound_ctx, rng_) : new_root_context(rng_, true);
      if (!request_traces_.count(request_id)) request_traces_[request_id] = fn_ctx->trace_id;
    }
  }
  std::vector<Span> body_batch;

  // Parent for external-call spans: the function span when present, else the
  // platform invocation span (auto-instrumented SDK in an uninstrumented body).
  const bool emit_external_spans =
      sampled && tracing_.externals_instrumented() &&
      (body_instrumented || tracing_.mode == TracingMode::platform_supported_auto) &&
      (fn_ctx || inv_ctx);

  auto close_function_span = [&](VirtualTime end, const char* error_tag,
                                 const std::string& error_message, bool timeout) {
    if (!fn_ctx) return;
    Span fi = instrument_call(
        SpanKind::function_internal, function, *fn_ctx,
        is_platform_mode(tracing_.mode) && inv_ctx
            ? std::optional<std::string>(inv_ctx->span_id)
            : (inbound_ctx && !is_platform_mode(tracing_.mode)
                   ? std::optional<std::string>(inbound_ctx->span_id)
                   : std::nullopt),
        body_start, end, function);
    if (error_tag) {
      fi.tags["error"] = "true";
      if (!error_message.empty()) fi.tags["error.message"] = error_message;
      if (timeout) fi.tags["timeout"] = "true";
    }
    body_batch.push_back(fi);
  };

  // Flushes the developer-driven batch; returns the virtual-time charge on
  // the function. Platform modes flush from the invoker at no function cost.
  auto flush_body = [&]() -> std::uint64_t {
    if (body_batch.empty()) return 0;
    report_spans(collector_, body_batch, tracing_.collector_down);
    ++rec.flushes;
    if (is_platform_mode(tracing_.mode)) {
      platform_flush_charge_ms_ += tracing_.report_overhead_ms;
      return 0;
    }
    std::uint64_t charge = tracing_.report_overhead_ms;
    if (tracing_.tail_flush_probability > 0.0 && rng_.bernoulli(tracing_.tail_flush_probability)) {
      charge += tracing_.tail_flush_ms;
    }
    return charge;
  };

  auto finish = [&](VirtualTime body_end, Outcome outcome, bool timed_out,
                    bool runtime_survives) -> InvocationResult {
    VirtualTime end = body_end;
    if (platform_tracing && inv_ctx) {
      end = end + tracing_.platform_hook_overhead_ms;
      Span inv = platform_hook(PlatformEvent::invoker_run, *inv_ctx, controller_ctx->span_id,
                               body_start, end, function);
      if (outcome != Outcome::success) {
        inv.tags["error"] = "true";
        if (timed_out) inv.tags["timeout"] = "true";
      }
      platform_batch.push_back(inv);
    }
    rec.steps.push_back({StepKind::invocation, body_start, end});
    rec.exec_ms = end - body_start;
    rec.outcome = outcome;
    rec.end = end;
    flush_platform();
    ledger_.push_back(rec);
    if (runtime_survives) put_warm(function, end);
    return {end, outcome};
  };

  log_info(function, body_start, "invocation started", request_id);

  // External third-party calls first; an external_api_timeout fault hangs the
  // first call until the budget is exhausted.
  for (const auto& call_name : fn.external_calls) {
    const VirtualTime call_start = body_start + elapsed;
    if (faults_.external_call_hangs(function)) {
      const VirtualTime to_at = body_start + budget;
      faults_.record_fired(function, FaultMechanism::external_api_timeout, to_at);
      if (emit_external_spans) {
        Span ec = instrument_call(SpanKind::external_call, call_name,
                                  child_context(fn_ctx ? *fn_ctx : *inv_ctx, rng_),
                                  fn_ctx ? fn_ctx->span_id : inv_ctx->span_id, call_start, to_at,
                                  function);
        ec.tags["error"] = "true";
        ec.tags["timeout"] = "true";
        ec.tags["error.message"] = "no response from " + call_name + " within budget";
        ec.tags["fault.type"] = to_string(FaultMechanism::external_api_timeout);
        body_batch.push_back(ec);
      }
      close_function_span(to_at, "error", "execution exceeded timeout budget", true);
      log_error(function, to_at,
                "Timeout: execution exceeded " + std::to_string(budget) + "ms budget",
                request_id, true, true);
      std::uint64_t charge = flush_body();
      return finish(to_at + charge, Outcome::timeout, true, false);
    }
    const VirtualTime call_end = call_start + kExternalCallMs;
    if (emit_external_spans) {
      body_batch.push_back(instrument_call(SpanKind::external_call, call_name,
                                           child_context(fn_ctx ? *fn_ctx : *inv_ctx, rng_),
                                           fn_ctx ? fn_ctx->span_id : inv_ctx->span_id, call_start,
                                           call_end, function));
    }
    elapsed += kExternalCallMs;
  }

  // Main compute; developer bugs and container kills strike mid-body.
  if (faults_.killed(function)) {
    const VirtualTime kill_at = body_start + elapsed + fn.base_exec_ms / 2;
    faults_.record_fired(function, FaultMechanism::container_kill, kill_at);
    // Abrupt termination: buffered developer spans are lost, no further
    // function-authored log lines.
    body_batch.clear();
    log_error(function, kill_at, "platform: container terminated unexpectedly", request_id, true,
              false);
    return finish(kill_at, Outcome::error, false, false);
  }
  if (faults_.body_throws(function, trigger)) {
    const VirtualTime err_at = body_start + elapsed + fn.base_exec_ms / 2;
    const FaultMechanism mech = trigger == TriggerMode::async &&
                                        !faults_.body_throws(function, TriggerMode::sync)
                                    ? FaultMechanism::async_downstream_bug
                                    : FaultMechanism::uncaught_exception;
    faults_.record_fired(function, mech, err_at);
    const std::string msg = "Traceback (most recent call last): FaultInjectedError: " +
                            to_string(mech) + " in " + function;
    log_error(function, err_at, msg, request_id, false, false);
    if (fn_ctx) {
      close_function_span(err_at, "error", msg, false);
      body_batch.back().tags["fault.type"] = to_string(mech);
    }
    std::uint64_t charge = flush_body();
    return finish(err_at + charge, Outcome::error, false, true);
  }
  elapsed += fn.base_exec_ms;

  // Synchronous composition calls; the callee's whole pipeline is charged
  // against this function's remaining budget. The callee always runs to its
  // own completion, even when the caller gives up.
  std::optional<TraceContext> child_propagation;
  if (fn_ctx) {
    child_propagation = fn_ctx;
  } else if (is_platform_mode(tracing_.mode) && inv_ctx) {
    child_propagation = inv_ctx;
  }
  for (const auto& e : spec_.edges) {
    if (e.caller != function || e.mode != EdgeMode::sync) continue;
    const VirtualTime call_at = body_start + elapsed;
    InvocationResult callee = execute_invocation(e.callee, TriggerMode::sync, call_at,
                                                 child_propagation, rec.invocation_id, payload,
                                                 sampled, request_id);
    elapsed = callee.end - body_start;
    if (elapsed > budget) {
      const VirtualTime to_at = body_start + budget;
      close_function_span(to_at, "error", "execution exceeded timeout budget", true);
      log_error(function, to_at,
                "Timeout: execution exceeded " + std::to_string(budget) + "ms budget",
                request_id, true, true);
      std::uint64_t charge = flush_body();
      return finish(to_at + charge, Outcome::timeout, true, false);
    }
    if (callee.outcome != Outcome::success) {
      const VirtualTime err_at = body_start + elapsed;
      const std::string msg = "sync call to " + e.callee + " failed (" +
                              to_string(callee.outcome) + ")";
      log_error(function, err_at, msg, request_id, false, false);
      close_function_span(err_at, "error", msg, false);
      std::uint64_t charge = flush_body();
      return finish(err_at + charge, Outcome::error, false, true);
    }
  }

  // Async fan-out fires once this function concludes; schedule below after
  // the final end time is known.
  std::vector<std::pair<std::string, int>> async_targets;
  for (const auto& e : spec_.edges) {
    if (e.caller != function || e.mode != EdgeMode::async) continue;
    int count = 1;
    if (e.per_record) {
      count = payload.records;
      if (e.per_image) count *= std::max(1, payload.images_per_record);
    }
    async_targets.emplace_back(e.callee, count);
  }

  log_info(function, body_start + elapsed, "invocation finished", request_id);
  close_function_span(body_start + elapsed, nullptr, "", false);
  elapsed += flush_body();

  InvocationResult result = finish(body_start + elapsed, Outcome::success, false, true);
  for (const auto& [callee, count] : async_targets) {
    for (int i = 0; i < count; ++i) {
      async_queue_.push_back({result.end, async_seq_++, callee, child_propagation, rec.invocation_id});
    }
  }
  return result;
}

std::vector<InvocationRecord> Platform::run_to_quiescence() {
  if (responses_.empty()) {
    throw std::logic_error("run_to_quiescence called before any submitted request");
  }
  std::vector<InvocationRecord> out = ledger_;
  std::stable_sort(out.begin(), out.end(), [](const InvocationRecord& a, const InvocationRecord& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.invocation_id < b.invocation_id;
  });
  return out;
}

std::unique_ptr<Platform> deploy(CompositionSpec spec, PlatformProfile profile,
                                 TracingConfig tracing, FaultPlan fault_plan, std::uint64_t seed,
                                 RuntimePoolConfig pool) {
  // Plan/edge compatibility: scenario mechanisms must sit on compatible
  // edges of this composition.
  for (const auto& f : fault_plan.specs) {
    if (f.mechanism == FaultMechanism::cold_sync_timeout) {
      bool on_sync = false;
      for (const auto& e : spec.edges) {
        if (e.callee == f.target_function && e.mode == EdgeMode::sync) on_sync = true;
      }
      if (!on_sync) {
        throw ValidationError("cold_sync_timeout target '" + f.target_function +
                              "' is not a synchronous callee");
      }
    }
    if (f.mechanism == FaultMechanism::async_downstream_bug) {
      bool on_async = false;
      for (const auto& e : spec.edges) {
        if (e.callee == f.target_function && e.mode == EdgeMode::async) on_async = true;
      }
      if (!on_async) {
        throw ValidationError("async_downstream_bug target '" + f.target_function +
                              "' is not an asynchronous callee");
      }
    }
  }
  return std::make_unique<Platform>(std::move(spec), profile, std::move(tracing),
                                    std::move(fault_plan), seed, pool);
}

}  // namespace faasim
