#include "wctt/flow.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "wctt/errors.hpp"

namespace wctt {

Flow make_flow(FlowId id, TileCoord src, TileCoord dst, std::uint64_t size, std::int64_t priority,
               Picoseconds period, Picoseconds release_jitter) {
  return Flow{id, src, dst, size, priority, period, period, release_jitter};
}

namespace {

void validate_flow(const Flow& f, const PlatformConfig& cfg) {
  const auto where = "flow " + std::to_string(f.id) + ": ";
  if (!in_bounds(f.src, cfg)) throw ConfigError(where + "source tile " + to_string(f.src) + " out of bounds");
  if (!in_bounds(f.dst, cfg))
    throw ConfigError(where + "destination tile " + to_string(f.dst) + " out of bounds");
  if (f.src == f.dst) throw ConfigError(where + "source equals destination");
  if (f.size < 1) throw ConfigError(where + "size must be at least 1 byte");
  if (f.period.count() <= 0) throw ConfigError(where + "period must be positive");
  if (f.deadline != f.period) throw ConfigError(where + "deadline must equal the period");
  if (f.release_jitter.count() < 0) throw ConfigError(where + "release jitter must be non-negative");
}

}  // namespace

FlowSet::FlowSet(PlatformConfig platform, std::vector<Flow> flows)
    : platform_(platform), flows_(std::move(flows)) {
  platform_.validate();

  std::set<std::int64_t> priorities;
  std::set<FlowId> ids;
  paths_.reserve(flows_.size());
  link_ids_.reserve(flows_.size());
  for (const auto& f : flows_) {
    validate_flow(f, platform_);
    if (!priorities.insert(f.priority).second)
      throw ConfigError("flow " + std::to_string(f.id) + ": duplicate priority " +
                        std::to_string(f.priority));
    if (!ids.insert(f.id).second) throw ConfigError("duplicate flow id " + std::to_string(f.id));

    paths_.push_back(xy_route(f.src, f.dst, platform_));
    std::vector<LinkId> ids_on_path;
    for (const auto& l : paths_.back().links()) ids_on_path.push_back(link_id(l, platform_));
    std::sort(ids_on_path.begin(), ids_on_path.end());
    link_ids_.push_back(std::move(ids_on_path));
  }
}

std::size_t FlowSet::index_of(FlowId id) const {
  for (std::size_t i = 0; i < flows_.size(); ++i)
    if (flows_[i].id == id) return i;
  throw ConfigError("unknown flow id " + std::to_string(id));
}

std::vector<std::size_t> FlowSet::by_priority() const {
  std::vector<std::size_t> order(flows_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return flows_[a].priority > flows_[b].priority; });
  return order;
}

bool FlowSet::share_link(std::size_t a, std::size_t b) const {
  const auto& la = link_ids_[a];
  const auto& lb = link_ids_[b];
  auto i = la.begin();
  auto j = lb.begin();
  while (i != la.end() && j != lb.end()) {
    if (*i == *j) return true;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return false;
}

Picoseconds basic_latency(std::size_t path_links, std::uint64_t size, const PlatformConfig& cfg) {
  const auto links = static_cast<std::int64_t>(path_links);
  const auto flits = static_cast<std::int64_t>(ceil_div<std::uint64_t>(size, cfg.flit_size));
  return links * cfg.link_delay + (links - 1) * cfg.router_delay + flits * cfg.link_delay;
}

Picoseconds basic_latency(const Flow& f, const PlatformConfig& cfg) {
  return basic_latency(xy_route(f.src, f.dst, cfg).size(), f.size, cfg);
}

std::vector<std::size_t> direct_interference_set(std::size_t i, const FlowSet& fs) {
  std::vector<std::size_t> out;
  const auto p = fs.flow(i).priority;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    if (j == i || fs.flow(j).priority <= p) continue;
    if (fs.share_link(i, j)) out.push_back(j);
  }
  return out;
}

}  // namespace wctt
