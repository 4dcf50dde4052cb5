#pragma once

#include <chrono>
#include <cstdint>
#include <ratio>

namespace wctt {

// All analysis arithmetic is done in integer picoseconds.
using Picoseconds = std::chrono::duration<std::int64_t, std::pico>;

constexpr Picoseconds ps(std::int64_t v) { return Picoseconds{v}; }
constexpr Picoseconds ns(std::int64_t v) { return Picoseconds{v * 1000}; }
constexpr Picoseconds us(std::int64_t v) { return Picoseconds{v * 1000 * 1000}; }
constexpr Picoseconds ms(std::int64_t v) { return Picoseconds{v * 1000 * 1000 * 1000}; }

// Simulator clock ticks.
using Cycle = std::int64_t;

template <typename T>
constexpr T ceil_div(T num, T den) {
  // num >= 0, den > 0
  return num / den + (num % den != 0 ? 1 : 0);
}

constexpr std::int64_t ceil_div(Picoseconds num, Picoseconds den) {
  return ceil_div(num.count(), den.count());
}

constexpr double to_ns(Picoseconds v) { return static_cast<double>(v.count()) / 1000.0; }

}  // namespace wctt
