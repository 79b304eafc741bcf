// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "splitfuse/metrics.hpp"
#include "splitfuse/scenario.hpp"
#include "splitfuse/sim_engine.hpp"
#include "splitfuse/workload.hpp"

namespace splitfuse {

enum class LbPolicy { RoundRobin, LeastOutstanding };

inline std::string_view to_string(LbPolicy policy) {
  return policy == LbPolicy::RoundRobin ? "round_robin" : "least_outstanding";
}

inline std::optional<LbPolicy> parse_lb_policy(std::string_view name) {
  if (name == "round_robin") return LbPolicy::RoundRobin;
  if (name == "least_outstanding") return LbPolicy::LeastOutstanding;
  return std::nullopt;
}

/// Picks the replica for request `request_index`. LeastOutstanding breaks
/// ties towards the lowest replica id.
inline std::int64_t dispatch(std::int64_t request_index,
                             std::span<const std::int64_t> outstanding,
                             LbPolicy policy, std::int64_t replicas) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  if (policy == LbPolicy::RoundRobin) return request_index % replicas;
  if (static_cast<std::int64_t>(outstanding.size()) != replicas) {
    throw std::invalid_argument("outstanding must have one entry per replica");
  }
  return std::min_element(outstanding.begin(), outstanding.end()) - outstanding.begin();
}

struct ReplicaResult {
  std::int64_t requests = 0;
  SimReport report;
  ReportSummary summary;
};

struct ScaledReport {
  std::int64_t replicas = 1;
  LbPolicy policy = LbPolicy::RoundRobin;
  std::vector<ReplicaResult> per_replica;
  std::int64_t total_requests = 0;
  SimTime end_time{0};  // slowest replica
  double aggregate_rps = 0.0;
  double single_replica_rps = 0.0;
  double scaling_efficiency = 0.0;
};

/**
 * Scale-out run: replicas * total_requests requests are generated from the
 * scenario seed and dispatched up front. Each replica serves its share with
 * its own `scenario.clients` closed-loop clients and its own KV pool. The
 * experiment ends when the slowest replica finishes.
 *
 * For LeastOutstanding the load of a replica is the number of tokens
 * (prompt + generation) already assigned to it.
 */
inline ScaledReport run_scaled(const Scenario& scenario, std::int64_t replicas,
                               LbPolicy policy) {
  if (replicas < 1) throw ConfigError("replicas", "must be >= 1");
  validate_scenario(scenario);

  Scenario full = scenario;
  full.workload.total_requests = scenario.workload.total_requests * replicas;
  validate_scenario(full);
  const std::vector<RequestShape> workload = generate_workload(full.workload);

  std::vector<std::vector<RequestShape>> shares(static_cast<std::size_t>(replicas));
  std::vector<std::int64_t> outstanding(static_cast<std::size_t>(replicas), 0);
  for (std::size_t i = 0; i < workload.size(); ++i) {
    const auto r = static_cast<std::size_t>(
        dispatch(static_cast<std::int64_t>(i), outstanding, policy, replicas));
    shares[r].push_back(workload[i]);
    outstanding[r] += workload[i].prompt_tokens + workload[i].generation_tokens;
  }

  ScaledReport out;
  out.replicas = replicas;
  out.policy = policy;
  out.total_requests = static_cast<std::int64_t>(workload.size());
  for (std::int64_t r = 0; r < replicas; ++r) {
    const auto& share = shares[static_cast<std::size_t>(r)];
    Scenario sub = scenario;
    sub.name = scenario.name + "/replica" + std::to_string(r);
    sub.workload.total_requests = static_cast<std::int64_t>(share.size());
    ReplicaResult result;
    result.requests = static_cast<std::int64_t>(share.size());
    result.report = simulate_requests(sub, share);
    result.summary = summarize(result.report);
    out.end_time = std::max(out.end_time, result.report.end_time);
    out.per_replica.push_back(std::move(result));
  }

  const SimReport single = run_simulation(scenario);
  const double single_s = to_seconds(single.end_time);
  const double end_s = to_seconds(out.end_time);
  const auto per_replica_n = static_cast<double>(scenario.workload.total_requests);
  out.single_replica_rps = per_replica_n / single_s;
  out.aggregate_rps = static_cast<double>(out.total_requests) / end_s;
  // Written as a product of two ratios so equal loads give exactly 1.0.
  out.scaling_efficiency =
      (static_cast<double>(out.total_requests) /
       (per_replica_n * static_cast<double>(replicas))) *
      (single_s / end_s);
  return out;
}

}  // namespace splitfuse
