// protocol.hpp
//
// Deterministic simulation of the distributed execution protocol: request
// broadcasts, token-passing round-robin allocation with per-turn multiplier
// updates, and message accounting. The simulation drives the same engine as
// solve_distributed, so results are identical for identical seeds.

#ifndef NBSHARE_PROTOCOL_HPP
#define NBSHARE_PROTOCOL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nbs/nbs_dist.hpp"

namespace nbs {

enum class EventKind {
  Broadcast,
  AllocationUpdate,
  MultiplierUpdate,
  Handoff,
  Converged,
};

constexpr int kEventKinds = 5;

const char* event_kind_name(EventKind kind);

struct ProtocolEvent {
  long round = 0;  // 0 for the initial broadcasts
  EventKind kind = EventKind::Broadcast;
  int sender = 0;
  int receiver = -1;  // -1 means ALL
  long payload_size = 0;  // count of real numbers carried
};

struct ProtocolTrace {
  std::vector<ProtocolEvent> events;
  long rounds_to_convergence = 0;  // rounds executed
  bool converged = false;

  std::string to_text() const;  // one event per line
};

struct MessageStats {
  std::array<long, kEventKinds> count_per_kind{};
  std::array<long, kEventKinds> payload_per_kind{};
  long total_events = 0;
  long total_payload = 0;
};

MessageStats message_stats(const ProtocolTrace& trace);

struct ProtocolResult {
  DistReport solution;
  ProtocolTrace trace;
};

// Emits N broadcasts, then per round one AllocationUpdate + MultiplierUpdate
// + Handoff per provider plus the token holder's shared-multiplier update,
// closing with a Converged event when the engine's stopping rule fires.
ProtocolResult run_protocol(const Instance& inst, const std::vector<double>& d0,
                            const DistConfig& config);

}  // namespace nbs

#endif  // NBSHARE_PROTOCOL_HPP
