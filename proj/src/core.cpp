#include "faasim/core.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace faasim {

std::uint64_t Rng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::next_double() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::string Rng::hex(int digits) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(digits);
  std::uint64_t word = 0;
  int bits_left = 0;
  for (int i = 0; i < digits; ++i) {
    if (bits_left == 0) {
      word = next();
      bits_left = 64;
    }
    out.push_back(kHex[word & 0xf]);
    word >>= 4;
    bits_left -= 4;
  }
  return out;
}

std::string to_string(SpanKind kind) {
  switch (kind) {
    case SpanKind::gateway: return "gateway";
    case SpanKind::controller: return "controller";
    case SpanKind::invoker: return "invoker";
    case SpanKind::init: return "init";
    case SpanKind::invocation: return "invocation";
    case SpanKind::function_internal: return "function_internal";
    case SpanKind::external_call: return "external_call";
  }
  return "?";
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::F1: return "F1";
    case Scenario::F2: return "F2";
    case Scenario::F3: return "F3";
    case Scenario::F4: return "F4";
  }
  return "?";
}

std::string to_string(FaultMechanism m) {
  switch (m) {
    case FaultMechanism::uncaught_exception: return "uncaught_exception";
    case FaultMechanism::external_api_timeout: return "external_api_timeout";
    case FaultMechanism::cold_sync_timeout: return "cold_sync_timeout";
    case FaultMechanism::async_downstream_bug: return "async_downstream_bug";
    case FaultMechanism::invalid_dependency: return "invalid_dependency";
    case FaultMechanism::container_kill: return "container_kill";
  }
  return "?";
}

FaultMechanism mechanism_for(Scenario s) {
  switch (s) {
    case Scenario::F1: return FaultMechanism::uncaught_exception;
    case Scenario::F2: return FaultMechanism::external_api_timeout;
    case Scenario::F3: return FaultMechanism::cold_sync_timeout;
    case Scenario::F4: return FaultMechanism::async_downstream_bug;
  }
  return FaultMechanism::uncaught_exception;
}

std::string to_string(TriggerMode t) {
  switch (t) {
    case TriggerMode::sync: return "sync";
    case TriggerMode::async: return "async";
    case TriggerMode::entry: return "entry";
  }
  return "?";
}

std::string to_string(Channel c) {
  switch (c) {
    case Channel::response: return "response";
    case Channel::log: return "log";
    case Channel::trace: return "trace";
  }
  return "?";
}

std::string to_string(Position p) {
  switch (p) {
    case Position::upstream: return "upstream";
    case Position::downstream: return "downstream";
    case Position::platform: return "platform";
    case Position::client: return "client";
  }
  return "?";
}

std::string to_string(EvidenceContent c) {
  switch (c) {
    case EvidenceContent::success: return "success";
    case EvidenceContent::error: return "error";
    case EvidenceContent::error_timeout: return "error_timeout";
    case EvidenceContent::absent: return "absent";
  }
  return "?";
}

std::string to_string(TriState t) {
  switch (t) {
    case TriState::yes: return "true";
    case TriState::no: return "false";
    case TriState::not_applicable: return "-";
  }
  return "?";
}

bool Trace::is_tree() const {
  std::set<std::string> ids;
  for (const auto& s : spans) {
    if (s.context.trace_id != trace_id) return false;
    ids.insert(s.context.span_id);
  }
  if (ids.size() != spans.size()) return false;
  int roots = 0;
  for (const auto& s : spans) {
    if (!s.parent_span_id) {
      ++roots;
    } else if (!ids.count(*s.parent_span_id)) {
      return false;
    }
  }
  return roots == 1 || (spans.empty() && roots == 0);
}

TraceContext new_root_context(Rng& rng, bool sampled) {
  TraceContext ctx;
  ctx.trace_id = rng.hex(32);
  ctx.span_id = rng.hex(16);
  ctx.sampled = sampled;
  return ctx;
}

TraceContext child_context(const TraceContext& parent, Rng& rng) {
  TraceContext ctx;
  ctx.trace_id = parent.trace_id;
  ctx.span_id = rng.hex(16);
  ctx.sampled = parent.sampled;
  return ctx;
}

EvidenceSignature signature_of(const std::vector<EvidenceRecord>& records, Channel channel) {
  EvidenceSignature sig;
  sig.channel = channel;
  for (const auto& r : records) {
    if (r.channel != channel) continue;
    if (r.content != EvidenceContent::error && r.content != EvidenceContent::error_timeout) {
      continue;  // only fault-indicating records distinguish faults
    }
    // The role is position + source; messages and request ids are
    // run-specific and dropped. Log sources are application function names
    // and carry no cross-application meaning, so logs key on position only.
    const std::string role = channel == Channel::log
                                 ? to_string(r.position)
                                 : to_string(r.position) + ":" + r.source;
    sig.entries.emplace_back(role, r.content);
  }
  std::sort(sig.entries.begin(), sig.entries.end());
  if (sig.entries.empty()) sig.no_evidence = true;
  return sig;
}

std::string EvidenceSignature::to_key() const {
  if (no_evidence) return to_string(channel) + "|<no-evidence>";
  std::ostringstream os;
  os << to_string(channel);
  for (const auto& [role, content] : entries) os << "|" << role << "=" << to_string(content);
  return os.str();
}

}  // namespace faasim
