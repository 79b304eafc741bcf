// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

// JSON documents emitted by the bench tool. Key order is fixed so that equal
// reports serialize to identical bytes.

#pragma once

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "splitfuse/metrics.hpp"
#include "splitfuse/replica_lb.hpp"
#include "splitfuse/scenario.hpp"
#include "splitfuse/sim_engine.hpp"
#include "splitfuse/sweep.hpp"

namespace splitfuse {

using Json = nlohmann::ordered_json;

inline Json to_json(const Scenario& s) {
  return Json{
      {"name", s.name},
      {"clients", s.clients},
      {"workload",
       {{"prompt_mean", s.workload.prompt_mean},
        {"generation_mean", s.workload.generation_mean},
        {"relative_stddev", s.workload.relative_stddev},
        {"seed", s.workload.seed},
        {"total_requests", s.workload.total_requests}}},
      {"cost_model",
       {{"kind", to_string(s.cost_model.kind)},
        {"base_latency_ms", s.cost_model.base_latency_ms},
        {"saturated_rate_tokens_per_s", s.cost_model.saturated_rate_tokens_per_s},
        {"per_sequence_overhead_ms", s.cost_model.per_sequence_overhead_ms}}},
      {"kv_cache",
       {{"total_blocks", s.kv.total_blocks}, {"block_size_tokens", s.kv.block_size_tokens}}},
      {"scheduler",
       {{"policy", to_string(s.scheduler.policy)},
        {"token_budget", s.scheduler.token_budget},
        {"max_sequences", s.scheduler.max_sequences}}},
      {"sla",
       {{"prompt_rate_tokens_per_s", s.sla.prompt_rate_tokens_per_s},
        {"generation_rate_floor_tokens_per_s", s.sla.generation_rate_floor_tokens_per_s},
        {"ema_alpha", s.sla.ema_alpha},
        {"grace_tokens", s.sla.grace_tokens}}},
  };
}

inline Json to_json(const ReportSummary& s) {
  return Json{
      {"rps", s.rps},
      {"mean_latency_s", s.mean_latency_s},
      {"effective_rps_at_2tps", s.effective_rps[0]},
      {"effective_rps_at_4tps", s.effective_rps[1]},
      {"effective_rps_at_6tps", s.effective_rps[2]},
      {"p50_gap_ms", s.p50_gap_ms},
      {"p90_gap_ms", s.p90_gap_ms},
      {"p95_gap_ms", s.p95_gap_ms},
      {"max_pass_tokens", s.max_pass_tokens},
  };
}

inline Json to_json(const SimReport& r) {
  Json summary = to_json(summarize(r));
  summary["end_time_us"] = r.end_time.count();
  summary["total_requests"] = r.requests.size();
  summary["total_passes"] = r.passes.size();

  Json passes = Json::array();
  for (const PassRecord& p : r.passes) {
    Json entries = Json::array();
    for (const BatchEntry& e : p.entries) {
      entries.push_back({{"seq", to_underlying(e.sequence_id)},
                         {"prompt", e.prompt_chunk_tokens},
                         {"gen", e.generation_tokens}});
    }
    passes.push_back({{"pass", p.index},
                      {"start_us", p.start.count()},
                      {"end_us", p.end.count()},
                      {"policy", to_string(r.scenario.scheduler.policy)},
                      {"total_tokens", p.total_tokens},
                      {"total_sequences", p.total_sequences},
                      {"entries", std::move(entries)}});
  }

  Json requests = Json::array();
  for (const RequestRecord& q : r.requests) {
    Json times = Json::array();
    for (SimTime t : q.token_times) times.push_back(t.count());
    requests.push_back({{"id", q.id},
                        {"client", q.client},
                        {"arrival_us", q.arrival.count()},
                        {"first_token_us", q.first_token.count()},
                        {"token_times_us", std::move(times)},
                        {"done_us", q.done.count()},
                        {"prompt_tokens", q.prompt_tokens},
                        {"gen_tokens", q.gen_tokens}});
  }

  return Json{{"engine_version", r.engine_version},
              {"scenario", to_json(r.scenario)},
              {"summary", std::move(summary)},
              {"passes", std::move(passes)},
              {"requests", std::move(requests)}};
}

inline Json to_json(const ScaledReport& s) {
  Json replicas = Json::array();
  for (std::size_t i = 0; i < s.per_replica.size(); ++i) {
    const ReplicaResult& r = s.per_replica[i];
    Json summary = to_json(r.summary);
    summary["end_time_us"] = r.report.end_time.count();
    replicas.push_back({{"replica", i}, {"requests", r.requests}, {"summary", std::move(summary)}});
  }
  return Json{{"engine_version", kEngineVersion},
              {"replicas", s.replicas},
              {"lb_policy", to_string(s.policy)},
              {"per_replica", std::move(replicas)},
              {"aggregate",
               {{"total_requests", s.total_requests},
                {"end_time_us", s.end_time.count()},
                {"rps", s.aggregate_rps},
                {"single_replica_rps", s.single_replica_rps},
                {"scaling_efficiency", s.scaling_efficiency}}}};
}

namespace detail {

// JSON has no infinity; an unbounded ratio is written as null.
inline Json ratio_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const Comparison& c) {
  Json rows = Json::array();
  for (const ComparisonRow& r : c.rows) {
    rows.push_back({{"clients", r.clients},
                    {"p95_gap_ratio", detail::ratio_json(r.p95_gap_ratio)},
                    {"mean_latency_ratio", detail::ratio_json(r.mean_latency_ratio)},
                    {"rps_ratio", detail::ratio_json(r.rps_ratio)},
                    {"effective_rps_ratio_at_2tps", detail::ratio_json(r.effective_rps_ratio[0])},
                    {"effective_rps_ratio_at_4tps", detail::ratio_json(r.effective_rps_ratio[1])},
                    {"effective_rps_ratio_at_6tps", detail::ratio_json(r.effective_rps_ratio[2])}});
  }
  Json headline = {
      {"p95_gap_ratio_at_16_clients",
       c.p95_gap_ratio_at_16_clients ? detail::ratio_json(*c.p95_gap_ratio_at_16_clients)
                                     : Json(nullptr)},
      {"max_effective_rps_ratio_at_2tps", detail::ratio_json(c.max_effective_rps_ratio[0])},
      {"max_effective_rps_ratio_at_4tps", detail::ratio_json(c.max_effective_rps_ratio[1])},
      {"max_effective_rps_ratio_at_6tps", detail::ratio_json(c.max_effective_rps_ratio[2])}};
  return Json{{"baseline", to_string(c.baseline)},
              {"candidate", to_string(c.candidate)},
              {"headline", std::move(headline)},
              {"rows", std::move(rows)}};
}

/// Serialized report; byte-identical for identical inputs.
inline std::string serialize(const SimReport& r) { return to_json(r).dump(); }

}  // namespace splitfuse
