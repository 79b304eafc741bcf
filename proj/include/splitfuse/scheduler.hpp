// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "splitfuse/cost_model.hpp"
#include "splitfuse/kv_cache.hpp"

namespace splitfuse {

struct Request {
  SequenceId id{};
  std::int64_t prompt_tokens = 1;
  std::int64_t target_generation_tokens = 1;
  SimTime arrival_time{0};
};

enum class Phase { Waiting, Prefilling, Generating, Finished };

struct SequenceState {
  Request request;
  Phase phase = Phase::Waiting;
  std::int64_t prompt_consumed = 0;
  std::int64_t generated = 0;
  std::optional<SimTime> first_token_time;
  std::vector<SimTime> token_times;

  explicit SequenceState(Request r) : request(r) {}

  SequenceId id() const { return request.id; }
  std::int64_t remaining_prompt() const {
    return request.prompt_tokens - prompt_consumed;
  }
};

struct BatchEntry {
  SequenceId sequence_id{};
  std::int64_t prompt_chunk_tokens = 0;
  std::int64_t generation_tokens = 0;  // 0 or 1
};

/// Token composition of one forward pass.
struct ForwardBatch {
  std::vector<BatchEntry> entries;

  std::int64_t total_tokens() const {
    std::int64_t sum = 0;
    for (const auto& e : entries) sum += e.prompt_chunk_tokens + e.generation_tokens;
    return sum;
  }
  std::int64_t total_sequences() const {
    return static_cast<std::int64_t>(entries.size());
  }
  std::int64_t generation_tokens() const {
    std::int64_t sum = 0;
    for (const auto& e : entries) sum += e.generation_tokens;
    return sum;
  }
  bool empty() const { return entries.empty(); }
};

enum class SchedulerPolicy {
  SplitFuse,         // chunked prompts fused with decode to a fixed budget
  PreemptivePrompt,  // whole prompts preempt decode (vLLM / TGI style)
  OrcaStyle,         // whole prompts join decode up to a sequence bound
};

inline std::string_view to_string(SchedulerPolicy policy) {
  switch (policy) {
    case SchedulerPolicy::SplitFuse:
      return "splitfuse";
    case SchedulerPolicy::PreemptivePrompt:
      return "preemptive_prompt";
    case SchedulerPolicy::OrcaStyle:
      return "orca";
  }
  return "unknown";
}

inline std::optional<SchedulerPolicy> parse_policy(std::string_view name) {
  if (name == "splitfuse") return SchedulerPolicy::SplitFuse;
  if (name == "preemptive_prompt" || name == "preemptive") {
    return SchedulerPolicy::PreemptivePrompt;
  }
  if (name == "orca") return SchedulerPolicy::OrcaStyle;
  return std::nullopt;
}

struct SchedulerConfig {
  SchedulerPolicy policy = SchedulerPolicy::SplitFuse;
  // Per-pass token budget for SplitFuse; admission cap for PreemptivePrompt.
  std::int64_t token_budget = 512;
  // Sequence bound for OrcaStyle.
  std::int64_t max_sequences = 64;
};

/// Budget derived from the cost model's saturation point, rounded up to a
/// multiple of 64 tokens.
inline std::int64_t default_token_budget(const CostModelParams& params) {
  const std::int64_t saturation = saturation_tokens(params, 1.0);
  return (saturation + 63) / 64 * 64;
}

/// Splits `total_tokens` into `passes` chunks that differ by at most one,
/// larger chunks first.
inline std::vector<std::int64_t> equal_partition(std::int64_t total_tokens,
                                                 std::int64_t passes) {
  if (total_tokens < 0 || passes < 1) {
    throw std::invalid_argument("equal_partition requires P >= 0 and F >= 1");
  }
  const std::int64_t base = total_tokens / passes;
  const std::int64_t extra = total_tokens % passes;
  std::vector<std::int64_t> chunks(static_cast<std::size_t>(passes), base);
  for (std::int64_t i = 0; i < extra; ++i) ++chunks[static_cast<std::size_t>(i)];
  return chunks;
}

namespace detail {

/// Indices of `states` in first-come-first-served order (arrival, then id).
inline std::vector<std::size_t> fcfs_order(std::span<const SequenceState> states) {
  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Request& ra = states[a].request;
    const Request& rb = states[b].request;
    if (ra.arrival_time != rb.arrival_time) return ra.arrival_time < rb.arrival_time;
    return ra.id < rb.id;
  });
  return order;
}

/// Tracks blocks tentatively claimed by entries already placed in a batch.
class KvReservation {
 public:
  explicit KvReservation(const BlockPool& pool)
      : pool_(pool), free_(pool.free_blocks()) {}

  bool try_reserve(SequenceId id, std::int64_t tokens) {
    const std::int64_t needed = pool_.blocks_to_grow(id, tokens);
    if (needed > free_) return false;
    free_ -= needed;
    return true;
  }

 private:
  const BlockPool& pool_;
  std::int64_t free_;
};

}  // namespace detail

/**
 * Dynamic SplitFuse batch composition.
 *
 * Every generating sequence gets one decode token first. The rest of the
 * budget is filled with prompt tokens from partially prefilled sequences and
 * then from new ones, FCFS. A prompt that does not fit is cut to exactly the
 * remaining budget; a prompt that completes in this pass also emits its first
 * token when one more budget slot is left. The +1 is counted inside the
 * budget, so total_tokens <= token_budget always holds.
 *
 * A sequence whose KV growth cannot be covered is skipped for this pass.
 */
inline ForwardBatch schedule_splitfuse(std::span<const SequenceState> states,
                                       const BlockPool& pool,
                                       const SchedulerConfig& cfg) {
  ForwardBatch batch;
  const auto order = detail::fcfs_order(states);
  detail::KvReservation kv(pool);
  std::int64_t budget_left = cfg.token_budget;

  for (std::size_t i : order) {
    const SequenceState& s = states[i];
    if (s.phase != Phase::Generating) continue;
    if (budget_left == 0) break;
    if (!kv.try_reserve(s.id(), 1)) continue;
    batch.entries.push_back({s.id(), 0, 1});
    --budget_left;
  }

  for (Phase phase : {Phase::Prefilling, Phase::Waiting}) {
    for (std::size_t i : order) {
      if (budget_left == 0) return batch;
      const SequenceState& s = states[i];
      if (s.phase != phase) continue;
      const std::int64_t remaining = s.remaining_prompt();
      const std::int64_t chunk = std::min(remaining, budget_left);
      const std::int64_t gen = (chunk == remaining && budget_left > chunk) ? 1 : 0;
      if (!kv.try_reserve(s.id(), chunk + gen)) continue;
      batch.entries.push_back({s.id(), chunk, gen});
      budget_left -= chunk + gen;
    }
  }
  return batch;
}

/**
 * Prompt-preempts-decode composition. When any new prompt can be admitted the
 * pass carries only whole prompts, FCFS, as many as fit under the token
 * budget (the first one is admitted regardless of its length). Otherwise the
 * pass is pure decode. Prompts are never split, and decode stalls for the
 * whole prompt pass.
 */
inline ForwardBatch schedule_preemptive(std::span<const SequenceState> states,
                                        const BlockPool& pool,
                                        const SchedulerConfig& cfg) {
  ForwardBatch batch;
  const auto order = detail::fcfs_order(states);
  detail::KvReservation kv(pool);
  std::int64_t total = 0;

  for (std::size_t i : order) {
    const SequenceState& s = states[i];
    if (s.phase != Phase::Waiting && s.phase != Phase::Prefilling) continue;
    const std::int64_t prompt = s.remaining_prompt();
    if (!batch.empty() && total + prompt > cfg.token_budget) break;
    if (!kv.try_reserve(s.id(), prompt)) continue;
    batch.entries.push_back({s.id(), prompt, 0});
    total += prompt;
  }
  if (!batch.empty()) return batch;

  for (std::size_t i : order) {
    const SequenceState& s = states[i];
    if (s.phase != Phase::Generating) continue;
    if (!kv.try_reserve(s.id(), 1)) continue;
    batch.entries.push_back({s.id(), 0, 1});
  }
  return batch;
}

/// Orca-style composition: decode for every running sequence plus whole
/// prompts admitted FCFS while the running-sequence count stays under
/// max_sequences. No token budget applies.
inline ForwardBatch schedule_orca(std::span<const SequenceState> states,
                                  const BlockPool& pool,
                                  const SchedulerConfig& cfg) {
  ForwardBatch batch;
  const auto order = detail::fcfs_order(states);
  detail::KvReservation kv(pool);
  std::int64_t running = 0;

  for (std::size_t i : order) {
    const SequenceState& s = states[i];
    if (s.phase != Phase::Generating) continue;
    ++running;
    if (!kv.try_reserve(s.id(), 1)) continue;
    batch.entries.push_back({s.id(), 0, 1});
  }
  for (std::size_t i : order) {
    if (running >= cfg.max_sequences) break;
    const SequenceState& s = states[i];
    if (s.phase != Phase::Waiting && s.phase != Phase::Prefilling) continue;
    const std::int64_t prompt = s.remaining_prompt();
    if (!kv.try_reserve(s.id(), prompt)) continue;
    batch.entries.push_back({s.id(), prompt, 0});
    ++running;
  }
  return batch;
}

inline ForwardBatch schedule(std::span<const SequenceState> states,
                             const BlockPool& pool, const SchedulerConfig& cfg) {
  switch (cfg.policy) {
    case SchedulerPolicy::SplitFuse:
      return schedule_splitfuse(states, pool, cfg);
    case SchedulerPolicy::PreemptivePrompt:
      return schedule_preemptive(states, pool, cfg);
    case SchedulerPolicy::OrcaStyle:
      return schedule_orca(states, pool, cfg);
  }
  throw std::logic_error("unknown scheduler policy");
}

enum class LifecycleEventKind { FirstToken, TokenGenerated, RequestFinished };

struct LifecycleEvent {
  LifecycleEventKind kind;
  SequenceId sequence_id;
  SimTime time;
};

/**
 * Commits a completed pass: grows KV tables by exactly the scheduled tokens,
 * advances counters and phases, stamps generated tokens with `pass_end`, and
 * frees the blocks of finished sequences. Finished states stay in `states`
 * with phase Finished; removing them is the caller's business.
 *
 * Throws std::logic_error if the batch is inconsistent with the state.
 */
inline std::vector<LifecycleEvent> apply_batch_completion(
    std::span<SequenceState> states, BlockPool& pool, const ForwardBatch& batch,
    SimTime pass_end) {
  std::vector<LifecycleEvent> events;
  for (const BatchEntry& entry : batch.entries) {
    auto it = std::find_if(states.begin(), states.end(), [&](const SequenceState& s) {
      return s.id() == entry.sequence_id;
    });
    if (it == states.end()) throw std::logic_error("batch entry for unknown sequence");
    SequenceState& s = *it;
    if (s.phase == Phase::Finished) throw std::logic_error("batch entry for finished sequence");
    if (entry.prompt_chunk_tokens > s.remaining_prompt()) {
      throw std::logic_error("prompt chunk exceeds remaining prompt");
    }
    if (entry.generation_tokens != 0 && entry.generation_tokens != 1) {
      throw std::logic_error("at most one generation token per pass");
    }

    const std::int64_t tokens = entry.prompt_chunk_tokens + entry.generation_tokens;
    const bool grown = pool.contains(s.id())
                           ? pool.extend(s.id(), tokens).has_value()
                           : pool.allocate(s.id(), tokens).has_value();
    if (!grown) throw std::logic_error("KV growth was not covered by the scheduler");

    s.prompt_consumed += entry.prompt_chunk_tokens;
    if (s.remaining_prompt() > 0) {
      if (entry.generation_tokens != 0) {
        throw std::logic_error("generation token before the prompt completed");
      }
      s.phase = Phase::Prefilling;
      continue;
    }
    s.phase = Phase::Generating;
    if (entry.generation_tokens == 0) continue;

    ++s.generated;
    s.token_times.push_back(pass_end);
    if (s.generated == 1) {
      s.first_token_time = pass_end;
      events.push_back({LifecycleEventKind::FirstToken, s.id(), pass_end});
    }
    events.push_back({LifecycleEventKind::TokenGenerated, s.id(), pass_end});
    if (s.generated == s.request.target_generation_tokens) {
      s.phase = Phase::Finished;
      pool.free(s.id());
      events.push_back({LifecycleEventKind::RequestFinished, s.id(), pass_end});
    }
  }
  return events;
}

}  // namespace splitfuse
