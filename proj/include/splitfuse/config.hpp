// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Scenario config files.
//
// One `dotted.key = value` assignment per line; '#' starts a comment. List
// values are comma separated. Every key is optional:
//
//   name                                  default
//   clients                               16
//   workload.prompt_mean                  2600
//   workload.generation_mean              60
//   workload.relative_stddev              0.3
//   workload.seed                         42
//   workload.total_requests               512
//   cost_model.kind                       ramp_saturate | affine
//   cost_model.base_latency_ms            40
//   cost_model.saturated_rate_tokens_per_s 12800
//   cost_model.per_sequence_overhead_ms   0
//   kv_cache.total_blocks                 4096
//   kv_cache.block_size_tokens            64
//   scheduler.policy                      splitfuse | preemptive_prompt | orca
//   scheduler.token_budget                saturation point rounded up to 64
//   scheduler.max_sequences               64
//   sla.prompt_rate_tokens_per_s          512
//   sla.generation_rate_floor_tokens_per_s 4
//   sla.ema_alpha                         0.1
//   sla.grace_tokens                      1
//   sweep.client_counts                   1,2,4,8,16,32
//   sweep.policies                        splitfuse,preemptive_prompt

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "splitfuse/scenario.hpp"
#include "splitfuse/scheduler.hpp"

namespace splitfuse {

class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(const std::string& source, int line, int column,
                   const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct SweepSpec {
  Scenario base;
  std::vector<std::int64_t> client_counts = {1, 2, 4, 8, 16, 32};
  std::vector<SchedulerPolicy> policies = {SchedulerPolicy::SplitFuse,
                                           SchedulerPolicy::PreemptivePrompt};
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Thrown by value converters; the parser attaches the position.
struct BadValue {
  std::string message;
};

template <typename T>
T parse_number(std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw BadValue{"expected a number, got '" + std::string(text) + "'"};
  }
  return value;
}

inline std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = text.find(',');
    items.push_back(trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  for (auto item : items) {
    if (item.empty()) throw BadValue{"empty list element"};
  }
  return items;
}

inline SchedulerPolicy parse_policy_value(std::string_view text) {
  if (auto p = parse_policy(text)) return *p;
  throw BadValue{"unknown scheduler policy '" + std::string(text) + "'"};
}

}  // namespace detail

/// Parses config text. `source` names the input in error messages. Applies
/// defaults for absent keys and validates the resulting scenario.
inline SweepSpec parse_config(std::string_view text, const std::string& source = "<config>") {
  SweepSpec spec;
  Scenario& s = spec.base;
  bool budget_given = false;

  using Setter = std::function<void(std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"name", [&](auto v) { s.name = std::string(v); }},
      {"clients", [&](auto v) { s.clients = detail::parse_number<std::int64_t>(v); }},
      {"workload.prompt_mean",
       [&](auto v) { s.workload.prompt_mean = detail::parse_number<double>(v); }},
      {"workload.generation_mean",
       [&](auto v) { s.workload.generation_mean = detail::parse_number<double>(v); }},
      {"workload.relative_stddev",
       [&](auto v) { s.workload.relative_stddev = detail::parse_number<double>(v); }},
      {"workload.seed",
       [&](auto v) { s.workload.seed = detail::parse_number<std::uint64_t>(v); }},
      {"workload.total_requests",
       [&](auto v) { s.workload.total_requests = detail::parse_number<std::int64_t>(v); }},
      {"cost_model.kind",
       [&](auto v) {
         if (v == "ramp_saturate") {
           s.cost_model.kind = CostModelKind::RampSaturate;
         } else if (v == "affine") {
           s.cost_model.kind = CostModelKind::Affine;
         } else {
           throw detail::BadValue{"unknown cost model kind '" + std::string(v) + "'"};
         }
       }},
      {"cost_model.base_latency_ms",
       [&](auto v) { s.cost_model.base_latency_ms = detail::parse_number<double>(v); }},
      {"cost_model.saturated_rate_tokens_per_s",
       [&](auto v) {
         s.cost_model.saturated_rate_tokens_per_s = detail::parse_number<double>(v);
       }},
      {"cost_model.per_sequence_overhead_ms",
       [&](auto v) {
         s.cost_model.per_sequence_overhead_ms = detail::parse_number<double>(v);
       }},
      {"kv_cache.total_blocks",
       [&](auto v) { s.kv.total_blocks = detail::parse_number<std::int64_t>(v); }},
      {"kv_cache.block_size_tokens",
       [&](auto v) { s.kv.block_size_tokens = detail::parse_number<std::int64_t>(v); }},
      {"scheduler.policy", [&](auto v) { s.scheduler.policy = detail::parse_policy_value(v); }},
      {"scheduler.token_budget",
       [&](auto v) {
         s.scheduler.token_budget = detail::parse_number<std::int64_t>(v);
         budget_given = true;
       }},
      {"scheduler.max_sequences",
       [&](auto v) { s.scheduler.max_sequences = detail::parse_number<std::int64_t>(v); }},
      {"sla.prompt_rate_tokens_per_s",
       [&](auto v) { s.sla.prompt_rate_tokens_per_s = detail::parse_number<double>(v); }},
      {"sla.generation_rate_floor_tokens_per_s",
       [&](auto v) {
         s.sla.generation_rate_floor_tokens_per_s = detail::parse_number<double>(v);
       }},
      {"sla.ema_alpha", [&](auto v) { s.sla.ema_alpha = detail::parse_number<double>(v); }},
      {"sla.grace_tokens",
       [&](auto v) { s.sla.grace_tokens = detail::parse_number<std::int64_t>(v); }},
      {"sweep.client_counts",
       [&](auto v) {
         spec.client_counts.clear();
         for (auto item : detail::split_list(v)) {
           spec.client_counts.push_back(detail::parse_number<std::int64_t>(item));
         }
       }},
      {"sweep.policies",
       [&](auto v) {
         spec.policies.clear();
         for (auto item : detail::split_list(v)) {
           spec.policies.push_back(detail::parse_policy_value(item));
         }
       }},
  };

  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (detail::trim(line).empty()) continue;

    const auto col_of = [&](std::string_view part) {
      return static_cast<int>(part.data() - line.data()) + 1;
    };
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigParseError(source, line_no, col_of(detail::trim(line)),
                             "expected 'key = value'");
    }
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigParseError(source, line_no, static_cast<int>(eq) + 1, "missing key");
    }
    if (value.empty()) {
      throw ConfigParseError(source, line_no, static_cast<int>(eq) + 2,
                             "missing value for '" + std::string(key) + "'");
    }
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigParseError(source, line_no, col_of(key),
                             "unknown key '" + std::string(key) + "'");
    }
    if (!seen.emplace(key).second) {
      throw ConfigParseError(source, line_no, col_of(key),
                             "duplicate key '" + std::string(key) + "'");
    }
    try {
      it->second(value);
    } catch (const detail::BadValue& bad) {
      throw ConfigParseError(source, line_no, col_of(value), bad.message);
    }
  }

  if (!budget_given) {
    try {
      s.cost_model.validate();
      s.scheduler.token_budget = default_token_budget(s.cost_model);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("cost_model", e.what());
    } catch (const std::domain_error&) {
      throw ConfigError("scheduler.token_budget",
                        "must be set explicitly: the cost model never reaches its "
                        "saturated rate");
    }
  }
  if (spec.client_counts.empty()) throw ConfigError("sweep.client_counts", "must not be empty");
  for (std::int64_t c : spec.client_counts) {
    if (c < 1) throw ConfigError("sweep.client_counts", "clients >= 1");
  }
  validate_scenario(s);
  return spec;
}

inline SweepSpec load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace splitfuse
