// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "splitfuse/scenario.hpp"
#include "splitfuse/sim_engine.hpp"

namespace splitfuse {

inline double to_seconds(SimTime t) {
  return std::chrono::duration<double>(t).count();
}

/// Generation-rate floors reported in every summary, tokens/s.
inline constexpr std::array<double, 3> kSlaTiers = {2.0, 4.0, 6.0};

inline double prompt_sla_deadline(std::int64_t prompt_tokens, const SlaConfig& cfg) {
  return static_cast<double>(prompt_tokens) / cfg.prompt_rate_tokens_per_s;
}

/**
 * Smoothed generation rate after each token from the second one on.
 *
 * With gaps g_k = t_k - t_{k-1}, the smoothed gap starts at the first gap and
 * follows ema <- alpha * g + (1 - alpha) * ema; each entry is returned as
 * 1 / ema tokens/s. Fewer than two tokens give an empty series.
 */
inline std::vector<double> ema_generation_rates(std::span<const double> token_times_s,
                                                double alpha) {
  std::vector<double> rates;
  if (token_times_s.size() < 2) return rates;
  rates.reserve(token_times_s.size() - 1);
  double ema = 0.0;
  for (std::size_t k = 1; k < token_times_s.size(); ++k) {
    const double gap = token_times_s[k] - token_times_s[k - 1];
    if (gap < 0.0) throw std::logic_error("token timestamps are not monotone");
    ema = k == 1 ? gap : alpha * gap + (1.0 - alpha) * ema;
    rates.push_back(ema > 0.0 ? 1.0 / ema : std::numeric_limits<double>::infinity());
  }
  return rates;
}

inline std::vector<double> token_times_seconds(const RequestRecord& r) {
  std::vector<double> out;
  out.reserve(r.token_times.size());
  for (SimTime t : r.token_times) out.push_back(to_seconds(t));
  return out;
}

struct RequestOutcome {
  double first_token_latency_s = 0.0;
  double prompt_deadline_s = 0.0;
  std::vector<double> ema_rates;
  bool met_prompt_sla = false;
  bool met_generation_sla = false;

  bool successful() const { return met_prompt_sla && met_generation_sla; }
};

inline RequestOutcome evaluate_request(const RequestRecord& r, const SlaConfig& cfg) {
  RequestOutcome out;
  out.first_token_latency_s = to_seconds(r.first_token - r.arrival);
  out.prompt_deadline_s = prompt_sla_deadline(r.prompt_tokens, cfg);
  out.met_prompt_sla = out.first_token_latency_s <= out.prompt_deadline_s;
  out.ema_rates = ema_generation_rates(token_times_seconds(r), cfg.ema_alpha);
  out.met_generation_sla = true;
  // Entry i is the rate observed at token i + 2.
  for (std::size_t i = 0; i < out.ema_rates.size(); ++i) {
    if (static_cast<std::int64_t>(i) + 2 <= cfg.grace_tokens) continue;
    if (out.ema_rates[i] < cfg.generation_rate_floor_tokens_per_s) {
      out.met_generation_sla = false;
      break;
    }
  }
  return out;
}

/// Successful requests per simulated second.
inline double effective_throughput(const SimReport& report, const SlaConfig& cfg) {
  const double seconds = to_seconds(report.end_time);
  if (seconds <= 0.0) return 0.0;
  std::int64_t ok = 0;
  for (const RequestRecord& r : report.requests) {
    if (evaluate_request(r, cfg).successful()) ++ok;
  }
  return static_cast<double>(ok) / seconds;
}

inline double effective_throughput_at(const SimReport& report, double floor_tokens_per_s) {
  SlaConfig cfg = report.scenario.sla;
  cfg.generation_rate_floor_tokens_per_s = floor_tokens_per_s;
  return effective_throughput(report, cfg);
}

/// Nearest-rank percentile: the ceil(p * n)-th smallest value.
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty list");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("percentile p must be in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  // Tolerance keeps e.g. 0.95 * 100 from rounding up to rank 96.
  auto rank = static_cast<std::int64_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::int64_t>(rank, 1, static_cast<std::int64_t>(values.size()));
  return values[static_cast<std::size_t>(rank - 1)];
}

struct ThroughputLatencyPoint {
  double rps = 0.0;
  double mean_latency_s = 0.0;
};

inline ThroughputLatencyPoint throughput_latency_point(const SimReport& report) {
  ThroughputLatencyPoint point;
  if (report.requests.empty()) return point;
  const double seconds = to_seconds(report.end_time);
  point.rps = seconds > 0.0 ? static_cast<double>(report.requests.size()) / seconds : 0.0;
  double sum = 0.0;
  for (const RequestRecord& r : report.requests) sum += to_seconds(r.done - r.arrival);
  point.mean_latency_s = sum / static_cast<double>(report.requests.size());
  return point;
}

/// Inter-token gaps in seconds, pooled over all requests in id order.
inline std::vector<double> token_gap_distribution(const SimReport& report) {
  std::vector<double> gaps;
  for (const RequestRecord& r : report.requests) {
    for (std::size_t k = 1; k < r.token_times.size(); ++k) {
      gaps.push_back(to_seconds(r.token_times[k] - r.token_times[k - 1]));
    }
  }
  return gaps;
}

struct ReportSummary {
  double rps = 0.0;
  double mean_latency_s = 0.0;
  std::array<double, kSlaTiers.size()> effective_rps{};  // per kSlaTiers entry
  double p50_gap_ms = 0.0;
  double p90_gap_ms = 0.0;
  double p95_gap_ms = 0.0;
  std::int64_t max_pass_tokens = 0;
};

inline ReportSummary summarize(const SimReport& report) {
  ReportSummary s;
  const ThroughputLatencyPoint point = throughput_latency_point(report);
  s.rps = point.rps;
  s.mean_latency_s = point.mean_latency_s;
  for (std::size_t i = 0; i < kSlaTiers.size(); ++i) {
    s.effective_rps[i] = effective_throughput_at(report, kSlaTiers[i]);
  }
  const std::vector<double> gaps = token_gap_distribution(report);
  if (!gaps.empty()) {
    s.p50_gap_ms = percentile(gaps, 0.50) * 1000.0;
    s.p90_gap_ms = percentile(gaps, 0.90) * 1000.0;
    s.p95_gap_ms = percentile(gaps, 0.95) * 1000.0;
  }
  for (const PassRecord& p : report.passes) {
    s.max_pass_tokens = std::max(s.max_pass_tokens, p.total_tokens);
  }
  return s;
}

}  // namespace splitfuse
