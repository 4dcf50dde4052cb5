#include "wctt/platform.hpp"

#include <algorithm>

#include "wctt/errors.hpp"

namespace wctt {

PlatformConfig PlatformConfig::reference() { return PlatformConfig{}; }

void PlatformConfig::validate() const {
  if (rows < 1 || cols < 1) throw ConfigError("mesh must have at least one row and one column");
  if (flit_size < 1) throw ConfigError("flit size must be at least 1 byte");
  if (clock_period.count() <= 0) throw ConfigError("clock period must be positive");
  if (link_delay.count() <= 0 || link_delay % clock_period != Picoseconds::zero())
    throw ConfigError("link delay must be a positive multiple of the clock period");
  if (router_delay.count() <= 0 || router_delay % clock_period != Picoseconds::zero())
    throw ConfigError("router delay must be a positive multiple of the clock period");
}

bool in_bounds(TileCoord t, const PlatformConfig& cfg) { return t.x < cfg.cols && t.y < cfg.rows; }

namespace {

constexpr LinkId kChannelsPerTile = 6;

LinkId channel(const Link& link) {
  switch (link.kind) {
    case LinkKind::core_to_router: return 4;
    case LinkKind::router_to_core: return 5;
    case LinkKind::router_to_router: break;
  }
  switch (link.direction) {
    case Direction::north: return 0;
    case Direction::south: return 1;
    case Direction::east: return 2;
    case Direction::west: return 3;
    case Direction::local: break;
  }
  throw ModelViolation("router-to-router link without a direction");
}

Link hop(TileCoord from, Direction d) {
  TileCoord to = from;
  switch (d) {
    case Direction::north: --to.y; break;
    case Direction::south: ++to.y; break;
    case Direction::east: ++to.x; break;
    case Direction::west: --to.x; break;
    case Direction::local: break;
  }
  return Link{LinkKind::router_to_router, from, to, d};
}

}  // namespace

LinkId link_id(const Link& link, const PlatformConfig& cfg) {
  return (link.from.y * cfg.cols + link.from.x) * kChannelsPerTile + channel(link);
}

std::size_t link_id_count(const PlatformConfig& cfg) { return cfg.tile_count() * kChannelsPerTile; }

Path xy_route(TileCoord src, TileCoord dst, const PlatformConfig& cfg) {
  if (!in_bounds(src, cfg) || !in_bounds(dst, cfg))
    throw ConfigError("route endpoint " + to_string(in_bounds(src, cfg) ? dst : src) +
                      " outside the " + std::to_string(cfg.cols) + "x" + std::to_string(cfg.rows) +
                      " mesh");
  if (src == dst) throw ConfigError("source and destination tile coincide at " + to_string(src));

  std::vector<Link> links;
  links.reserve(2 + (src.x > dst.x ? src.x - dst.x : dst.x - src.x) +
                (src.y > dst.y ? src.y - dst.y : dst.y - src.y));
  links.push_back(Link{LinkKind::core_to_router, src, src, Direction::local});

  TileCoord at = src;
  while (at.x != dst.x) {
    links.push_back(hop(at, at.x < dst.x ? Direction::east : Direction::west));
    at = links.back().to;
  }
  while (at.y != dst.y) {
    links.push_back(hop(at, at.y < dst.y ? Direction::south : Direction::north));
    at = links.back().to;
  }
  links.push_back(Link{LinkKind::router_to_core, dst, dst, Direction::local});
  return Path{std::move(links)};
}

std::optional<PathDecomposition> decompose(const Path& higher, const Path& lower) {
  const auto shared = [&](const Link& l) {
    return std::find(lower.links().begin(), lower.links().end(), l) != lower.links().end();
  };

  std::optional<std::size_t> first;
  std::size_t last = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < higher.size(); ++i) {
    if (!shared(higher[i])) continue;
    if (!first) first = i;
    last = i;
    ++count;
  }
  if (!first) return std::nullopt;
  if (last - *first + 1 != count)
    throw ModelViolation("shared links do not form a single contiguous contention domain");

  return PathDecomposition{*first, count, higher.size() - last - 1};
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::north: return "N";
    case Direction::south: return "S";
    case Direction::east: return "E";
    case Direction::west: return "W";
    case Direction::local: return "local";
  }
  return "?";
}

std::string to_string(TileCoord t) { return "(" + std::to_string(t.x) + "," + std::to_string(t.y) + ")"; }

}  // namespace wctt
