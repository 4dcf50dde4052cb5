#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wctt/units.hpp"

namespace wctt {

/// 2D-mesh platform parameters. Delays are integer multiples of the clock.
struct PlatformConfig {
  std::uint32_t rows = 8;
  std::uint32_t cols = 8;
  std::uint32_t flit_size = 16;  // bytes
  Picoseconds link_delay{500};
  Picoseconds router_delay{1500};
  Picoseconds clock_period{500};

  /// 8x8 mesh, 16 B flits, 2 GHz, d_r = 3 cycles, d_l = 1 cycle.
  static PlatformConfig reference();

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;

  std::size_t tile_count() const { return static_cast<std::size_t>(rows) * cols; }
  Cycle link_cycles() const { return link_delay / clock_period; }
  Cycle router_cycles() const { return router_delay / clock_period; }

  friend bool operator==(const PlatformConfig&, const PlatformConfig&) = default;
};

/// x is the column, y is the row; y grows southwards.
struct TileCoord {
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  friend auto operator<=>(const TileCoord&, const TileCoord&) = default;
};

bool in_bounds(TileCoord t, const PlatformConfig& cfg);

enum class Direction : std::uint8_t { north, south, east, west, local };
enum class LinkKind : std::uint8_t { core_to_router, router_to_router, router_to_core };

/// One unidirectional link. Local links have from == to.
struct Link {
  LinkKind kind = LinkKind::router_to_router;
  TileCoord from;
  TileCoord to;
  Direction direction = Direction::local;

  friend auto operator<=>(const Link&, const Link&) = default;
};

/// Dense identifier of a link, in [0, link_id_count(cfg)). Six outgoing
/// channels per tile: four router outputs, injection and ejection.
using LinkId = std::uint32_t;
LinkId link_id(const Link& link, const PlatformConfig& cfg);
std::size_t link_id_count(const PlatformConfig& cfg);

/// Ordered list of links from the source core to the destination core.
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<Link> links) : links_(std::move(links)) {}

  std::span<const Link> links() const { return links_; }
  std::size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }
  const Link& operator[](std::size_t i) const { return links_[i]; }

  /// Number of routers on the path (routing decisions).
  std::size_t routers() const { return links_.empty() ? 0 : links_.size() - 1; }

  friend bool operator==(const Path&, const Path&) = default;

 private:
  std::vector<Link> links_;
};

/// Dimension-ordered XY route, including the injection and ejection links.
/// Throws ConfigError for out-of-bounds tiles or src == dst.
Path xy_route(TileCoord src, TileCoord dst, const PlatformConfig& cfg);

/// A higher-priority path split relative to a lower-priority one.
struct PathDecomposition {
  std::size_t pre_cd = 0;
  std::size_t cd = 0;
  std::size_t post_cd = 0;

  std::size_t total() const { return pre_cd + cd + post_cd; }

  friend bool operator==(const PathDecomposition&, const PathDecomposition&) = default;
};

/// Splits `higher` into the links before, on, and after the links it shares
/// with `lower`. Returns nullopt when nothing is shared. Throws
/// ModelViolation if the shared links are not one contiguous run.
std::optional<PathDecomposition> decompose(const Path& higher, const Path& lower);

std::string to_string(Direction d);
std::string to_string(TileCoord t);

}  // namespace wctt
