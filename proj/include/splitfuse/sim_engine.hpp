// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitfuse/cost_model.hpp"
#include "splitfuse/kv_cache.hpp"
#include "splitfuse/scenario.hpp"
#include "splitfuse/scheduler.hpp"
#include "splitfuse/workload.hpp"

namespace splitfuse {

inline constexpr const char* kEngineVersion = "splitfuse-sim/0.1.0";

struct RequestRecord {
  std::uint64_t id = 0;
  std::int64_t client = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t gen_tokens = 0;
  SimTime arrival{0};
  SimTime first_token{0};
  std::vector<SimTime> token_times;
  SimTime done{0};
};

struct PassRecord {
  std::int64_t index = 0;
  SimTime start{0};
  SimTime end{0};
  std::int64_t total_tokens = 0;
  std::int64_t total_sequences = 0;
  std::vector<BatchEntry> entries;
};

struct SimReport {
  Scenario scenario;
  std::string engine_version = kEngineVersion;
  SimTime end_time{0};
  std::vector<PassRecord> passes;
  std::vector<RequestRecord> requests;  // indexed by request id
};

/// Runs the closed-loop simulation on an explicit request list. Request i
/// belongs to client i mod clients; every client submits its first request
/// at t = 0 and each following one the moment the previous one finishes.
inline SimReport simulate_requests(const Scenario& scenario,
                                   const std::vector<RequestShape>& workload) {
  SimReport report;
  report.scenario = scenario;
  report.requests.resize(workload.size());

  const auto clients = static_cast<std::size_t>(scenario.clients);
  std::vector<std::size_t> next_for_client(clients);
  for (std::size_t c = 0; c < clients; ++c) next_for_client[c] = c;

  BlockPool pool(scenario.kv.total_blocks, scenario.kv.block_size_tokens);
  std::vector<SequenceState> active;
  SimTime now{0};

  auto submit = [&](std::size_t client) {
    const std::size_t idx = next_for_client[client];
    if (idx >= workload.size()) return;
    next_for_client[client] += clients;
    RequestRecord& rec = report.requests[idx];
    rec.id = idx;
    rec.client = static_cast<std::int64_t>(client);
    rec.prompt_tokens = workload[idx].prompt_tokens;
    rec.gen_tokens = workload[idx].generation_tokens;
    rec.arrival = now;
    active.emplace_back(Request{SequenceId{idx}, rec.prompt_tokens, rec.gen_tokens, now});
  };

  for (std::size_t c = 0; c < clients; ++c) submit(c);

  while (!active.empty()) {
    ForwardBatch batch = schedule(active, pool, scenario.scheduler);
    if (batch.empty()) {
      throw std::runtime_error("no schedulable work with " +
                               std::to_string(active.size()) +
                               " unfinished requests: KV cache exhausted");
    }
    const SimTime start = now;
    now += forward_latency(batch.total_tokens(), batch.total_sequences(),
                           scenario.cost_model);
    apply_batch_completion(active, pool, batch, now);

    PassRecord pass;
    pass.index = static_cast<std::int64_t>(report.passes.size());
    pass.start = start;
    pass.end = now;
    pass.total_tokens = batch.total_tokens();
    pass.total_sequences = batch.total_sequences();
    pass.entries = std::move(batch.entries);
    report.passes.push_back(std::move(pass));

    std::vector<std::size_t> finished_clients;
    std::erase_if(active, [&](SequenceState& s) {
      if (s.phase != Phase::Finished) return false;
      RequestRecord& rec = report.requests[to_underlying(s.id())];
      rec.first_token = *s.first_token_time;
      rec.token_times = std::move(s.token_times);
      rec.done = rec.token_times.back();
      finished_clients.push_back(static_cast<std::size_t>(rec.client));
      return true;
    });
    for (std::size_t client : finished_clients) submit(client);
  }
  report.end_time = now;
  return report;
}

/// Validates the scenario, generates its workload and simulates it.
inline SimReport run_simulation(const Scenario& scenario) {
  validate_scenario(scenario);
  return simulate_requests(scenario, generate_workload(scenario.workload));
}

}  // namespace splitfuse
