// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>

namespace splitfuse {

/// Request-length distribution. Lengths are Normal(mean, relative_stddev *
/// mean), rounded and clamped to >= 1.
struct WorkloadSpec {
  double prompt_mean = 2600.0;
  double generation_mean = 60.0;
  double relative_stddev = 0.3;
  std::uint64_t seed = 42;
  std::int64_t total_requests = 512;
};

struct RequestShape {
  std::int64_t prompt_tokens = 1;
  std::int64_t generation_tokens = 1;

  bool operator==(const RequestShape&) const = default;
};

namespace detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace detail

/**
 * Counter-based uniform stream: draw `index` of sub-stream `stream` is a pure
 * function of (seed, stream, index), so draws never depend on call order.
 */
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix64(detail::mix64(seed) + (stream + 1) * detail::kGolden)) {}

  constexpr std::uint64_t bits(std::uint64_t index) const {
    return detail::mix64(key_ + (index + 1) * detail::kGolden);
  }

  /// Uniform in the open interval (0, 1).
  constexpr double uniform(std::uint64_t index) const {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the inverse CDF.
  double normal(std::uint64_t index) const {
    static const boost::math::normal_distribution<double> standard(0.0, 1.0);
    return boost::math::quantile(standard, uniform(index));
  }

 private:
  std::uint64_t key_;
};

inline void validate(const WorkloadSpec& spec) {
  if (!(spec.prompt_mean >= 1.0)) {
    throw std::invalid_argument("workload.prompt_mean must be >= 1");
  }
  if (!(spec.generation_mean >= 1.0)) {
    throw std::invalid_argument("workload.generation_mean must be >= 1");
  }
  if (!(spec.relative_stddev >= 0.0 && spec.relative_stddev < 1.0)) {
    throw std::invalid_argument("workload.relative_stddev must be in [0, 1)");
  }
  if (spec.total_requests < 1) {
    throw std::invalid_argument("workload.total_requests must be >= 1");
  }
}

inline std::int64_t sample_length(double mean, double relative_stddev,
                                  const CounterRng& rng, std::uint64_t index) {
  if (relative_stddev == 0.0) return std::max<std::int64_t>(1, std::llround(mean));
  const double value = mean + relative_stddev * mean * rng.normal(index);
  return std::max<std::int64_t>(1, std::llround(value));
}

/// Prompt lengths come from sub-stream 0 and generation lengths from
/// sub-stream 1 of the seeded generator.
inline std::vector<RequestShape> generate_workload(const WorkloadSpec& spec) {
  validate(spec);
  const CounterRng prompts(spec.seed, 0);
  const CounterRng generations(spec.seed, 1);
  std::vector<RequestShape> out;
  out.reserve(static_cast<std::size_t>(spec.total_requests));
  for (std::int64_t i = 0; i < spec.total_requests; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    out.push_back({sample_length(spec.prompt_mean, spec.relative_stddev, prompts, idx),
                   sample_length(spec.generation_mean, spec.relative_stddev,
                                 generations, idx)});
  }
  return out;
}

}  // namespace splitfuse
