#pragma once

#include <cstdint>
#include <limits>

namespace ndpsim {

/// Simulated time in nanoseconds. All timing math is integer so that runs
/// are bit-reproducible across platforms.
using Ns = std::int64_t;

/// Energy in picojoules (1 mW * 1 ns == 1 pJ).
using Pj = std::int64_t;

/// Saturating "unsupported / never" sentinel. Kept well below INT64_MAX so
/// sums of a few sentinels cannot wrap.
inline constexpr Ns kNeverNs = std::numeric_limits<Ns>::max() / 8;

/// Adds two durations, saturating at kNeverNs instead of overflowing.
inline Ns sat_add(Ns a, Ns b) {
  if (a >= kNeverNs || b >= kNeverNs) return kNeverNs;
  Ns s = a + b;
  return s >= kNeverNs ? kNeverNs : s;
}

/// ceil(num / den) for non-negative num and positive den.
inline std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  return (num + den - 1) / den;
}

/// Nanoseconds needed to push `bytes` over a link of `bytes_per_sec`,
/// rounded up to a whole nanosecond.
inline Ns transfer_ns(std::int64_t bytes, std::int64_t bytes_per_sec) {
  if (bytes <= 0) return 0;
  // bytes * 1e9 fits int64 for any realistic page count (< 9e9 bytes).
  return ceil_div(bytes * 1'000'000'000LL, bytes_per_sec);
}

}  // namespace ndpsim
