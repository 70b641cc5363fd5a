#pragma once

#include <map>
#include <string>
#include <vector>

#include "faasim/core.hpp"
#include "faasim/tracing.hpp"

namespace faasim {

struct ResponseEnvelope;
struct InvocationRecord;

struct LogLine {
  VirtualTime time;
  enum class Level { info, error } level = Level::info;
  std::string message;
  std::string request_id;
  bool platform_written = false;
  bool timeout_line = false;
};

/// Append-only per-function log lines, as a log service would retain them.
class LogStore {
 public:
  void append(const std::string& function, LogLine line);
  const std::vector<LogLine>& lines(const std::string& function) const;
  const std::map<std::string, std::vector<LogLine>>& all() const { return lines_; }
  void clear() { lines_.clear(); }

 private:
  std::map<std::string, std::vector<LogLine>> lines_;
  static const std::vector<LogLine> kEmpty;
};

struct EvidenceSet {
  std::string request_id;
  std::vector<EvidenceRecord> response;
  std::vector<EvidenceRecord> logs;
  std::vector<EvidenceRecord> traces;

  const std::vector<EvidenceRecord>& channel(Channel c) const {
    switch (c) {
      case Channel::response: return response;
      case Channel::log: return logs;
      case Channel::trace: return traces;
    }
    return response;
  }
};

/// Reduces a finished request's response envelope to its two evidence
/// records (code and body).
std::vector<EvidenceRecord> collect_response(const ResponseEnvelope& envelope);

/// One record per function in the request tree; the entry function is the
/// upstream position, everything else downstream.
std::vector<EvidenceRecord> collect_logs(const LogStore& store,
                                         const std::vector<InvocationRecord>& ledger,
                                         const std::string& request_id,
                                         const std::string& entry_function);

/// One record per error/timeout-tagged span, one record per cold-start init
/// span that outlasted a timed-out caller, and one structural record
/// describing span-tree coverage. Empty when the request was not sampled.
std::vector<EvidenceRecord> collect_trace_evidence(const Collector& collector,
                                                   const std::string& trace_id,
                                                   const std::string& request_id,
                                                   const std::string& entry_function);

std::string evidence_set_to_json(const EvidenceSet& set);

}  // namespace faasim
