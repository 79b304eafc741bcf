// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "splitfuse/cost_model.hpp"
#include "splitfuse/scheduler.hpp"
#include "splitfuse/workload.hpp"

namespace splitfuse {

/// Invalid or inconsistent scenario. `path()` is the dotted config key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& constraint)
      : std::runtime_error(path + ": " + constraint), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct KvConfig {
  std::int64_t total_blocks = 4096;
  std::int64_t block_size_tokens = 64;
};

/// Service-level targets used to decide whether a request succeeded.
struct SlaConfig {
  // First token must arrive within prompt_tokens / prompt_rate seconds.
  double prompt_rate_tokens_per_s = 512.0;
  // Smoothed generation rate must stay at or above this floor.
  double generation_rate_floor_tokens_per_s = 4.0;
  double ema_alpha = 0.1;
  // Leading generated tokens exempt from the floor check.
  std::int64_t grace_tokens = 1;
};

struct Scenario {
  std::string name = "default";
  WorkloadSpec workload;
  std::int64_t clients = 16;
  CostModelParams cost_model;
  SchedulerConfig scheduler;
  KvConfig kv;
  SlaConfig sla;
};

/// Throws ConfigError naming the first violated constraint.
inline void validate_scenario(const Scenario& s) {
  const WorkloadSpec& w = s.workload;
  if (!(w.prompt_mean >= 1.0)) throw ConfigError("workload.prompt_mean", "must be >= 1");
  if (!(w.generation_mean >= 1.0)) {
    throw ConfigError("workload.generation_mean", "must be >= 1");
  }
  if (!(w.relative_stddev >= 0.0 && w.relative_stddev < 1.0)) {
    throw ConfigError("workload.relative_stddev", "must be in [0, 1)");
  }
  if (w.total_requests < 1) throw ConfigError("workload.total_requests", "must be >= 1");
  if (s.clients < 1) throw ConfigError("clients", "clients >= 1");

  const CostModelParams& c = s.cost_model;
  if (!(c.base_latency_ms > 0.0)) throw ConfigError("cost_model.base_latency_ms", "must be > 0");
  if (!(c.saturated_rate_tokens_per_s > 0.0)) {
    throw ConfigError("cost_model.saturated_rate_tokens_per_s", "must be > 0");
  }
  if (!(c.per_sequence_overhead_ms >= 0.0)) {
    throw ConfigError("cost_model.per_sequence_overhead_ms", "must be >= 0");
  }

  if (s.scheduler.token_budget < 1) throw ConfigError("scheduler.token_budget", "must be >= 1");
  if (s.scheduler.max_sequences < 1) {
    throw ConfigError("scheduler.max_sequences", "must be >= 1");
  }

  if (s.kv.total_blocks < 1) throw ConfigError("kv_cache.total_blocks", "must be >= 1");
  if (s.kv.block_size_tokens < 1) {
    throw ConfigError("kv_cache.block_size_tokens", "must be >= 1");
  }

  const SlaConfig& sla = s.sla;
  if (!(sla.prompt_rate_tokens_per_s > 0.0)) {
    throw ConfigError("sla.prompt_rate_tokens_per_s", "must be > 0");
  }
  if (!(sla.generation_rate_floor_tokens_per_s > 0.0)) {
    throw ConfigError("sla.generation_rate_floor_tokens_per_s", "must be > 0");
  }
  if (!(sla.ema_alpha > 0.0 && sla.ema_alpha <= 1.0)) {
    throw ConfigError("sla.ema_alpha", "must be in (0, 1]");
  }
  if (sla.grace_tokens < 0) throw ConfigError("sla.grace_tokens", "must be >= 0");

  // A request that cannot fit in an empty pool would never finish.
  std::int64_t largest = 0;
  for (const RequestShape& r : generate_workload(w)) {
    largest = std::max(largest, r.prompt_tokens + r.generation_tokens);
  }
  const std::int64_t capacity = s.kv.total_blocks * s.kv.block_size_tokens;
  if (capacity < largest) {
    throw ConfigError("kv_cache.total_blocks",
                      "pool holds " + std::to_string(capacity) +
                          " tokens but the largest request needs " +
                          std::to_string(largest) + " (deadlock bound)");
  }
}

}  // namespace splitfuse
