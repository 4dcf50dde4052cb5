#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "wctt/flow.hpp"
#include "wctt/units.hpp"

namespace wctt {

enum class ReleaseKind {
  synchronous,  // every flow releases at its offset (default 0), then strictly periodically
  phased,       // a random offset in [0, T_i) per flow, then strictly periodically
  jittered,     // each release delayed by a random amount in [0, J^R_i]
};

struct ReleasePolicy {
  ReleaseKind kind = ReleaseKind::synchronous;
  std::uint64_t seed = 0;
  // Explicit per-flow first-release offsets in cycles (indexed like the
  // flow-set). Used by the synchronous policy; empty means all zero.
  std::vector<Cycle> offsets;
};

struct HyperPeriods {
  std::uint64_t count = 2;
};
struct Cycles {
  Cycle count = 0;
};

struct SimConfig {
  std::uint32_t vc_depth = 4;  // flits per virtual channel
  // VCs per input port. nullopt: as many as needed. When set, running out
  // of VCs raises ModelViolation.
  std::optional<std::uint32_t> vcs_per_port;
  std::variant<HyperPeriods, Cycles> horizon = HyperPeriods{2};
  ReleasePolicy release;
  Cycle credit_delay = 1;
  // Re-verify buffer, link and conservation invariants every simulated
  // cycle; throws ModelViolation on failure. Slower.
  bool check_invariants = false;
};

struct PacketRecord {
  FlowId flow_id = 0;
  Picoseconds release{0};
  Picoseconds completion{0};
  Picoseconds latency{0};
};

struct FlowSummary {
  FlowId flow_id = 0;
  std::size_t completed = 0;
  std::size_t censored = 0;
  Picoseconds min{0};
  double avg_ps = 0.0;
  Picoseconds max{0};

  bool observed() const { return completed > 0; }
};

struct SimCounters {
  std::uint64_t flits_injected = 0;  // crossed the injection link
  std::uint64_t flits_ejected = 0;   // delivered to the destination core
  std::uint64_t flits_in_network = 0;
  std::uint64_t flits_not_injected = 0;  // still queued at a source NI at the horizon
  std::uint64_t packets_released = 0;
  std::uint64_t packets_completed = 0;
  std::uint64_t packets_censored = 0;
};

struct SimTrace {
  std::vector<PacketRecord> packets;  // completed packets in completion order
  std::vector<FlowSummary> flows;     // indexed like the flow-set
  Picoseconds horizon{0};
  SimCounters counters;
};

/// Hyper-period of the flow-set in cycles. Throws ConfigError when a period
/// is not a whole number of cycles.
Cycle hyper_period_cycles(const FlowSet& fs);

/// Cycle-accurate simulation of a wormhole-switched, priority-preemptive
/// mesh with per-packet virtual channels and credit-based flow control.
///
/// Timing: a header pays d_l per link and d_r in every router before it may
/// compete for the output link; body flits pay d_l per link only. Each cycle
/// every idle link grants the highest-priority packet that has a ready flit
/// and a downstream credit. A flit leaving a buffer returns its credit
/// `credit_delay` cycles later. Latency is release to tail arrival at the
/// destination core. Packets unfinished at the horizon are censored.
SimTrace simulate(const FlowSet& fs, const SimConfig& cfg);

}  // namespace wctt
