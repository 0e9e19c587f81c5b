#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "scaffold/drl/ddqn.hpp"
#include "scaffold/sim/session.hpp"

namespace scaffold::experiment {

inline constexpr int kRecordVersion = 1;
inline constexpr const char* kSessionSchema = "scaffold-session-log";
inline constexpr const char* kTransitionSchema = "scaffold-transitions";

/// First line of every record file and the "meta" object of single
/// documents.
struct RecordHeader {
  std::string schema;
  int version = kRecordVersion;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string phase;

  nlohmann::json to_json() const;
};

/// One attempt per line after the header, sessions in order.
void write_session_logs(std::ostream& out, RecordHeader header, std::span<const sim::SessionLog> logs);

struct SessionFile {
  RecordHeader header;
  std::vector<sim::SessionLog> logs;
};

/// Throws Error{RecordFormat} on a wrong schema, an unknown version or a
/// malformed line (reported with its line number).
SessionFile read_session_logs(std::istream& in);

/// The header also carries the normalizer the states were built with.
void write_transitions(std::ostream& out, RecordHeader header, const drl::Normalizer& normalizer,
                       std::span<const drl::Transition> transitions);

struct TransitionFile {
  RecordHeader header;
  drl::Normalizer normalizer;
  std::vector<drl::Transition> transitions;
};

/// Throws Error{RecordFormat}.
TransitionFile read_transitions(std::istream& in);

}  // namespace scaffold::experiment
