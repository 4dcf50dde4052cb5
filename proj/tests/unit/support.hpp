#pragma once

#include <random>
#include <vector>

#include "wctt/flow.hpp"
#include "wctt/platform.hpp"

namespace wctt::fixtures {

inline PlatformConfig mesh(std::uint32_t rows, std::uint32_t cols) {
  auto p = PlatformConfig::reference();
  p.rows = rows;
  p.cols = cols;
  return p;
}

// f1 (0,0)->(5,0) above f2 (2,0)->(3,0): pre 3, cd 1, post 3.
inline FlowSet observation1(std::uint64_t size = 48, Picoseconds period = ns(1000)) {
  return FlowSet(PlatformConfig::reference(), {make_flow(1, {0, 0}, {5, 0}, size, 2, period),
                                               make_flow(2, {2, 0}, {3, 0}, size, 1, period)});
}

// Unscaled random flow-set: periods are whatever the caller asks for.
inline FlowSet random_flowset(std::mt19937_64& rng, const PlatformConfig& p, std::size_t n,
                              std::uint64_t max_size, Picoseconds min_period, Picoseconds max_period) {
  std::uniform_int_distribution<std::uint32_t> col(0, p.cols - 1), row(0, p.rows - 1);
  std::uniform_int_distribution<std::uint64_t> size(1, max_size);
  std::uniform_int_distribution<std::int64_t> period(min_period.count(), max_period.count());
  std::vector<std::int64_t> prio(n);
  for (std::size_t i = 0; i < n; ++i) prio[i] = static_cast<std::int64_t>(i) + 1;
  std::shuffle(prio.begin(), prio.end(), rng);
  std::vector<Flow> flows;
  for (std::size_t i = 0; i < n; ++i) {
    TileCoord s, d;
    do {
      s = {col(rng), row(rng)};
      d = {col(rng), row(rng)};
    } while (s == d);
    flows.push_back(make_flow(static_cast<FlowId>(i + 1), s, d, size(rng), prio[i], Picoseconds{period(rng)}));
  }
  return FlowSet(p, std::move(flows));
}

}  // namespace wctt::fixtures
