#include "nbs/protocol.hpp"

#include <sstream>

namespace nbs {

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Broadcast: return "Broadcast";
    case EventKind::AllocationUpdate: return "AllocationUpdate";
    case EventKind::MultiplierUpdate: return "MultiplierUpdate";
    case EventKind::Handoff: return "Handoff";
    case EventKind::Converged: return "Converged";
  }
  return "?";
}

std::string ProtocolTrace::to_text() const {
  std::ostringstream out;
  out << "round,kind,sender,receiver,payload_size\n";
  for (const auto& e : events) {
    out << e.round << ',' << event_kind_name(e.kind) << ',' << e.sender << ',';
    if (e.receiver < 0)
      out << "ALL";
    else
      out << e.receiver;
    out << ',' << e.payload_size << '\n';
  }
  return out.str();
}

MessageStats message_stats(const ProtocolTrace& trace) {
  MessageStats stats;
  for (const auto& e : trace.events) {
    const int k = static_cast<int>(e.kind);
    stats.count_per_kind[k] += 1;
    stats.payload_per_kind[k] += e.payload_size;
    stats.total_events += 1;
    stats.total_payload += e.payload_size;
  }
  return stats;
}

ProtocolResult run_protocol(const Instance& inst, const std::vector<double>& d0,
                            const DistConfig& config) {
  const int N = inst.num_providers;
  const int M = inst.num_apps();
  const int K = inst.num_resources;

  // bargain from the same start solve_distributed would select, so the
  // simulated outcome matches the engine result exactly
  std::vector<Allocation> starts = candidate_starts(inst, d0);
  const size_t chosen = starts.size() > 1 ? select_start(inst, d0, config) : 0;
  DistributedEngine engine(inst, std::vector<double>(d0), config,
                           std::move(starts[chosen]));
  const std::vector<int>& schedule = engine.schedule();

  ProtocolResult result;
  ProtocolTrace& trace = result.trace;

  // every provider announces its native request block before bargaining
  for (int n = 0; n < N; ++n)
    trace.events.push_back({0, EventKind::Broadcast, n, -1,
                            static_cast<long>(inst.native_apps[n].size()) * K});

  bool converged = false;
  while (engine.round() < config.max_rounds) {
    const long round = engine.round() + 1;
    for (int i = 0; i < N; ++i) {
      const int n = schedule[i];
      engine.provider_turn(n);
      // its full allocation block, then its local multipliers
      trace.events.push_back(
          {round, EventKind::AllocationUpdate, n, -1, static_cast<long>(M) * K});
      const long local_mult =
          K + 1 + static_cast<long>(M) * K +
          static_cast<long>(M - inst.native_apps[n].size()) * K;
      trace.events.push_back({round, EventKind::MultiplierUpdate, n, -1, local_mult});
      // token moves to the next unserved provider (wraps to the next round)
      const int next = schedule[(i + 1) % N];
      trace.events.push_back(
          {round, EventKind::Handoff, n, next, static_cast<long>(M) * K});
    }
    // round's token holder publishes the shared request multipliers
    engine.end_round();
    trace.events.push_back({round, EventKind::MultiplierUpdate, schedule[N - 1],
                            -1, static_cast<long>(M) * K});
    if (engine.current_kkt() < config.kkt_tol) {
      trace.events.push_back({round, EventKind::Converged, schedule[N - 1], -1, 0});
      converged = true;
      break;
    }
    if (engine.stalled()) break;
  }

  trace.converged = converged;
  trace.rounds_to_convergence = engine.round();
  result.solution = engine.report(converged);
  return result;
}

}  // namespace nbs
