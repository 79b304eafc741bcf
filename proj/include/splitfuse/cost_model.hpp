// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace splitfuse {

/// Simulated time. All virtual-clock arithmetic is done in integer
/// microseconds so that reports are bit-identical across platforms.
using SimTime = std::chrono::microseconds;

enum class CostModelKind {
  RampSaturate,  // latency = max(base, tokens / rate)
  Affine,        // latency = base + tokens / rate
};

inline std::string_view to_string(CostModelKind kind) {
  switch (kind) {
    case CostModelKind::RampSaturate:
      return "ramp_saturate";
    case CostModelKind::Affine:
      return "affine";
  }
  return "unknown";
}

/**
 * Forward-pass latency curve parameters.
 *
 * The latency of a pass depends on the number of tokens it carries and,
 * weakly, on how many sequences those tokens belong to. Small passes are
 * memory bound and cost `base_latency_ms`; large passes are compute bound
 * and run at `saturated_rate_tokens_per_s`.
 */
struct CostModelParams {
  double base_latency_ms = 40.0;
  double saturated_rate_tokens_per_s = 12800.0;
  double per_sequence_overhead_ms = 0.0;
  CostModelKind kind = CostModelKind::RampSaturate;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const {
    if (!(base_latency_ms > 0.0) || !std::isfinite(base_latency_ms)) {
      throw std::invalid_argument("cost_model.base_latency_ms must be > 0");
    }
    if (!(saturated_rate_tokens_per_s > 0.0) ||
        !std::isfinite(saturated_rate_tokens_per_s)) {
      throw std::invalid_argument(
          "cost_model.saturated_rate_tokens_per_s must be > 0");
    }
    if (!(per_sequence_overhead_ms >= 0.0) ||
        !std::isfinite(per_sequence_overhead_ms)) {
      throw std::invalid_argument(
          "cost_model.per_sequence_overhead_ms must be >= 0");
    }
  }
};

/// Latency in milliseconds of one forward pass over `tokens` tokens drawn from
/// `sequences` sequences. An empty pass costs nothing.
inline double forward_latency_ms(std::int64_t tokens, std::int64_t sequences,
                                 const CostModelParams& params) {
  if (tokens <= 0 && sequences <= 0) return 0.0;
  const double compute_ms =
      static_cast<double>(tokens) * 1000.0 / params.saturated_rate_tokens_per_s;
  const double overhead_ms =
      static_cast<double>(sequences) * params.per_sequence_overhead_ms;
  switch (params.kind) {
    case CostModelKind::RampSaturate:
      return std::max(params.base_latency_ms, compute_ms) + overhead_ms;
    case CostModelKind::Affine:
      return params.base_latency_ms + compute_ms + overhead_ms;
  }
  return 0.0;
}

/// Same as forward_latency_ms, rounded to the simulator's microsecond clock.
inline SimTime forward_latency(std::int64_t tokens, std::int64_t sequences,
                               const CostModelParams& params) {
  return SimTime{
      std::llround(forward_latency_ms(tokens, sequences, params) * 1000.0)};
}

/// Single-sequence throughput in tokens/s for a pass of `tokens` tokens.
/// Requires tokens >= 1.
inline double throughput_at(std::int64_t tokens,
                            const CostModelParams& params) {
  const double t = static_cast<double>(tokens);
  // min(t / base, rate) is the same quantity as t / max(base, t / rate) but
  // hits the saturated rate exactly instead of up to an ulp below it.
  if (params.kind == CostModelKind::RampSaturate &&
      params.per_sequence_overhead_ms == 0.0) {
    return std::min(t * 1000.0 / params.base_latency_ms,
                    params.saturated_rate_tokens_per_s);
  }
  return t * 1000.0 / forward_latency_ms(tokens, 1, params);
}

/**
 * Smallest token count whose throughput reaches `fraction` of the saturated
 * rate, found by monotone bisection. Throws std::domain_error when the curve
 * never gets there (an Affine model or a non-zero per-sequence overhead at
 * fraction = 1).
 */
inline std::int64_t saturation_tokens(const CostModelParams& params,
                                      double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("fraction must be in (0, 1]");
  }
  const double target = fraction * params.saturated_rate_tokens_per_s;
  auto reaches = [&](std::int64_t t) { return throughput_at(t, params) >= target; };

  constexpr std::int64_t kSearchLimit = std::int64_t{1} << 52;
  std::int64_t hi = 1;
  while (!reaches(hi)) {
    if (hi >= kSearchLimit) {
      throw std::domain_error("throughput never reaches the requested fraction");
    }
    hi *= 2;
  }
  std::int64_t lo = hi / 2;  // reaches(lo) is false unless lo == 0
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (reaches(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace splitfuse
