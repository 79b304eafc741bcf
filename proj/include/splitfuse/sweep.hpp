// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "splitfuse/config.hpp"
#include "splitfuse/metrics.hpp"
#include "splitfuse/scenario.hpp"
#include "splitfuse/scheduler.hpp"
#include "splitfuse/sim_engine.hpp"

namespace splitfuse {

/// One point on a throughput/latency curve.
struct CurvePoint {
  std::string scenario;
  SchedulerPolicy policy = SchedulerPolicy::SplitFuse;
  std::int64_t clients = 1;
  ReportSummary summary;

  bool operator==(const CurvePoint& o) const {
    return scenario == o.scenario && policy == o.policy && clients == o.clients &&
           summary.rps == o.summary.rps &&
           summary.mean_latency_s == o.summary.mean_latency_s &&
           summary.effective_rps == o.summary.effective_rps &&
           summary.p50_gap_ms == o.summary.p50_gap_ms &&
           summary.p90_gap_ms == o.summary.p90_gap_ms &&
           summary.p95_gap_ms == o.summary.p95_gap_ms &&
           summary.max_pass_tokens == o.summary.max_pass_tokens;
  }
};

struct SweepCell {
  CurvePoint point;
  Scenario scenario;
};

inline Scenario sweep_scenario(const SweepSpec& spec, SchedulerPolicy policy,
                               std::int64_t clients) {
  Scenario s = spec.base;
  s.scheduler.policy = policy;
  s.clients = clients;
  return s;
}

/// One simulation per (policy, client count), ordered by policy name then
/// client count.
inline std::vector<SweepCell> run_sweep(const SweepSpec& spec) {
  if (spec.policies.empty()) throw ConfigError("sweep.policies", "must not be empty");
  if (spec.client_counts.empty()) throw ConfigError("sweep.client_counts", "must not be empty");

  std::vector<std::pair<SchedulerPolicy, std::int64_t>> cells;
  for (SchedulerPolicy p : spec.policies) {
    for (std::int64_t c : spec.client_counts) cells.emplace_back(p, c);
  }
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(to_string(a.first), a.second) <
           std::make_tuple(to_string(b.first), b.second);
  });
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

  std::vector<SweepCell> out;
  out.reserve(cells.size());
  for (const auto& [policy, clients] : cells) {
    Scenario s = sweep_scenario(spec, policy, clients);
    const SimReport report = run_simulation(s);
    out.push_back({CurvePoint{s.name, policy, clients, summarize(report)}, std::move(s)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::array<std::string_view, 12> kCurveCsvColumns = {
    "scenario",    "policy",     "clients",    "rps",
    "mean_latency_s", "effective_rps_at_2tps", "effective_rps_at_4tps",
    "effective_rps_at_6tps", "p50_gap_ms", "p90_gap_ms", "p95_gap_ms",
    "max_pass_tokens"};

/// Shortest decimal form that parses back to the same double; independent
/// of the global locale.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf.data(), ptr);
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> split_csv_row(std::string_view row) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const char c = row[i];
    if (quoted) {
      if (c == '"' && i + 1 < row.size() && row[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

template <typename T>
T csv_number(const std::string& s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("curve CSV line " + std::to_string(line) +
                             ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline std::string write_curve_csv(const std::vector<CurvePoint>& points) {
  std::string out;
  for (std::size_t i = 0; i < kCurveCsvColumns.size(); ++i) {
    if (i) out += ',';
    out += kCurveCsvColumns[i];
  }
  out += '\n';
  for (const CurvePoint& p : points) {
    const ReportSummary& s = p.summary;
    out += detail::csv_field(p.scenario) + ',' + std::string(to_string(p.policy)) + ',' +
           std::to_string(p.clients) + ',' + format_double(s.rps) + ',' +
           format_double(s.mean_latency_s);
    for (double e : s.effective_rps) out += ',' + format_double(e);
    out += ',' + format_double(s.p50_gap_ms) + ',' + format_double(s.p90_gap_ms) + ',' +
           format_double(s.p95_gap_ms) + ',' + std::to_string(s.max_pass_tokens) + '\n';
  }
  return out;
}

inline std::vector<CurvePoint> parse_curve_csv(std::string_view text) {
  std::vector<CurvePoint> points;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view row = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.empty()) continue;
    const auto f = detail::split_csv_row(row);
    if (f.size() != kCurveCsvColumns.size()) {
      throw std::runtime_error("curve CSV line " + std::to_string(line) + ": expected " +
                               std::to_string(kCurveCsvColumns.size()) + " columns");
    }
    if (line == 1) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] != kCurveCsvColumns[i]) {
          throw std::runtime_error("curve CSV: unexpected header column '" + f[i] + "'");
        }
      }
      continue;
    }
    CurvePoint p;
    p.scenario = f[0];
    const auto policy = parse_policy(f[1]);
    if (!policy) throw std::runtime_error("curve CSV line " + std::to_string(line) + ": bad policy");
    p.policy = *policy;
    p.clients = detail::csv_number<std::int64_t>(f[2], line);
    p.summary.rps = detail::csv_number<double>(f[3], line);
    p.summary.mean_latency_s = detail::csv_number<double>(f[4], line);
    for (std::size_t i = 0; i < kSlaTiers.size(); ++i) {
      p.summary.effective_rps[i] = detail::csv_number<double>(f[5 + i], line);
    }
    p.summary.p50_gap_ms = detail::csv_number<double>(f[8], line);
    p.summary.p90_gap_ms = detail::csv_number<double>(f[9], line);
    p.summary.p95_gap_ms = detail::csv_number<double>(f[10], line);
    p.summary.max_pass_tokens = detail::csv_number<std::int64_t>(f[11], line);
    points.push_back(std::move(p));
  }
  return points;
}

// ---------------------------------------------------------------------------
// Policy comparison

/// a / b, with 0 / 0 treated as 1 and x / 0 as +inf.
inline double safe_ratio(double a, double b) {
  if (a == b) return 1.0;
  if (b == 0.0) return std::numeric_limits<double>::infinity();
  return a / b;
}

struct ComparisonRow {
  std::int64_t clients = 0;
  double p95_gap_ratio = 1.0;                      // baseline / candidate
  double mean_latency_ratio = 1.0;                 // baseline / candidate
  double rps_ratio = 1.0;                          // candidate / baseline
  std::array<double, kSlaTiers.size()> effective_rps_ratio{};  // candidate / baseline
};

struct Comparison {
  SchedulerPolicy baseline = SchedulerPolicy::PreemptivePrompt;
  SchedulerPolicy candidate = SchedulerPolicy::SplitFuse;
  std::vector<ComparisonRow> rows;
  // Ratio of the best effective throughput over all client counts.
  std::array<double, kSlaTiers.size()> max_effective_rps_ratio{};
  std::optional<double> p95_gap_ratio_at_16_clients;
};

inline constexpr std::int64_t kHeadlineClients = 16;

/// Ratios of `candidate` against `baseline` at every client count. Both
/// policies must cover exactly the same client counts.
inline Comparison compare_report(const std::vector<CurvePoint>& points,
                                 SchedulerPolicy baseline = SchedulerPolicy::PreemptivePrompt,
                                 SchedulerPolicy candidate = SchedulerPolicy::SplitFuse) {
  if (baseline == candidate) throw std::invalid_argument("compare needs two distinct policies");
  std::map<std::int64_t, const CurvePoint*> base_pts, cand_pts;
  for (const CurvePoint& p : points) {
    if (p.policy != baseline && p.policy != candidate) continue;
    auto& target = p.policy == baseline ? base_pts : cand_pts;
    if (!target.emplace(p.clients, &p).second) {
      throw std::invalid_argument("duplicate point for policy " + std::string(to_string(p.policy)) +
                                  " at " + std::to_string(p.clients) + " clients");
    }
  }
  if (base_pts.empty() || cand_pts.empty()) {
    throw std::invalid_argument("points must cover both compared policies");
  }
  std::set<std::int64_t> base_keys, cand_keys;
  for (const auto& [c, _] : base_pts) base_keys.insert(c);
  for (const auto& [c, _] : cand_pts) cand_keys.insert(c);
  if (base_keys != cand_keys) {
    throw std::invalid_argument("policies were swept over different client counts");
  }

  Comparison cmp;
  cmp.baseline = baseline;
  cmp.candidate = candidate;
  std::array<double, kSlaTiers.size()> base_max{}, cand_max{};
  for (const auto& [clients, b] : base_pts) {
    const CurvePoint* c = cand_pts.at(clients);
    ComparisonRow row;
    row.clients = clients;
    row.p95_gap_ratio = safe_ratio(b->summary.p95_gap_ms, c->summary.p95_gap_ms);
    row.mean_latency_ratio = safe_ratio(b->summary.mean_latency_s, c->summary.mean_latency_s);
    row.rps_ratio = safe_ratio(c->summary.rps, b->summary.rps);
    for (std::size_t i = 0; i < kSlaTiers.size(); ++i) {
      row.effective_rps_ratio[i] =
          safe_ratio(c->summary.effective_rps[i], b->summary.effective_rps[i]);
      base_max[i] = std::max(base_max[i], b->summary.effective_rps[i]);
      cand_max[i] = std::max(cand_max[i], c->summary.effective_rps[i]);
    }
    if (clients == kHeadlineClients) cmp.p95_gap_ratio_at_16_clients = row.p95_gap_ratio;
    cmp.rows.push_back(row);
  }
  for (std::size_t i = 0; i < kSlaTiers.size(); ++i) {
    cmp.max_effective_rps_ratio[i] = safe_ratio(cand_max[i], base_max[i]);
  }
  return cmp;
}

}  // namespace splitfuse
