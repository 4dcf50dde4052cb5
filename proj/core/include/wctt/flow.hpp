#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wctt/platform.hpp"
#include "wctt/units.hpp"

namespace wctt {

using FlowId = std::uint32_t;

/// A periodic traffic flow. Larger `priority` preempts smaller.
struct Flow {
  FlowId id = 0;
  TileCoord src;
  TileCoord dst;
  std::uint64_t size = 1;  // payload bytes
  std::int64_t priority = 0;
  Picoseconds period{0};
  Picoseconds deadline{0};  // implicit: equal to period
  Picoseconds release_jitter{0};

  friend bool operator==(const Flow&, const Flow&) = default;
};

/// Builds a flow with an implicit deadline (D = T).
Flow make_flow(FlowId id, TileCoord src, TileCoord dst, std::uint64_t size, std::int64_t priority,
               Picoseconds period, Picoseconds release_jitter = Picoseconds::zero());

/// Validated collection of flows on one platform, with each flow's XY route.
/// Construction throws ConfigError on any invariant violation.
class FlowSet {
 public:
  FlowSet(PlatformConfig platform, std::vector<Flow> flows);

  const PlatformConfig& platform() const { return platform_; }
  std::span<const Flow> flows() const { return flows_; }
  const Flow& flow(std::size_t i) const { return flows_[i]; }
  const Path& path(std::size_t i) const { return paths_[i]; }
  std::size_t size() const { return flows_.size(); }
  bool empty() const { return flows_.empty(); }

  /// Index of the flow with the given id; throws ConfigError if absent.
  std::size_t index_of(FlowId id) const;

  /// Flow indices sorted by descending priority.
  std::vector<std::size_t> by_priority() const;

  /// True when the two flows' routes share at least one directed link.
  bool share_link(std::size_t a, std::size_t b) const;

  friend bool operator==(const FlowSet& a, const FlowSet& b) {
    return a.platform_ == b.platform_ && a.flows_ == b.flows_;
  }

 private:
  PlatformConfig platform_;
  std::vector<Flow> flows_;
  std::vector<Path> paths_;
  std::vector<std::vector<LinkId>> link_ids_;  // sorted, per flow
};

/// Zero-load traversal time: header through every link and router, then the
/// payload flits one link delay apart.
Picoseconds basic_latency(std::size_t path_links, std::uint64_t size, const PlatformConfig& cfg);
Picoseconds basic_latency(const Flow& f, const PlatformConfig& cfg);

/// Higher-priority flows sharing at least one link with flow `i`, as indices
/// into `fs`, in ascending index order.
std::vector<std::size_t> direct_interference_set(std::size_t i, const FlowSet& fs);

}  // namespace wctt
