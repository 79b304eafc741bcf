// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "splitfuse/config.hpp"
#include "splitfuse/cost_model.hpp"
#include "splitfuse/kv_cache.hpp"
#include "splitfuse/metrics.hpp"
#include "splitfuse/replica_lb.hpp"
#include "splitfuse/report_io.hpp"
#include "splitfuse/scheduler.hpp"
#include "splitfuse/sim_engine.hpp"
#include "splitfuse/sweep.hpp"
#include "splitfuse/workload.hpp"

using namespace splitfuse;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  void note(const std::string& text) {
    if (out_.pass) out_.detail = text;
  }
  Outcome done() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Scenario long_prompt_scenario(SchedulerPolicy policy) {
  Scenario s = parse_config("", "<defaults>").base;
  s.name = "long_prompt";
  s.workload.prompt_mean = 2600;
  s.workload.generation_mean = 60;
  s.workload.relative_stddev = 0.3;
  s.workload.total_requests = 512;
  s.clients = 16;
  s.scheduler.policy = policy;
  return s;
}

// Reports shared by criteria 5, 6 and 8; computed once.
const SimReport& long_prompt_report(SchedulerPolicy policy) {
  static std::map<SchedulerPolicy, SimReport> cache;
  auto it = cache.find(policy);
  if (it == cache.end()) it = cache.emplace(policy, run_simulation(long_prompt_scenario(policy))).first;
  return it->second;
}

CostModelParams random_params(std::mt19937_64& rng, CostModelKind kind) {
  std::uniform_real_distribution<double> base(1.0, 100.0);
  std::uniform_real_distribution<double> rate(500.0, 50000.0);
  std::uniform_real_distribution<double> ovh(0.0, 2.0);
  CostModelParams p;
  p.base_latency_ms = base(rng);
  p.saturated_rate_tokens_per_s = rate(rng);
  p.per_sequence_overhead_ms = ovh(rng);
  p.kind = kind;
  return p;
}

Outcome c1_determinism() {
  Check c;
  for (SchedulerPolicy policy :
       {SchedulerPolicy::SplitFuse, SchedulerPolicy::PreemptivePrompt, SchedulerPolicy::OrcaStyle}) {
    const Scenario s = long_prompt_scenario(policy);
    c.expect(serialize(run_simulation(s)) == serialize(run_simulation(s)),
             std::string(to_string(policy)) + " reports differ");
  }
  return c.done();
}

Outcome c2_concavity() {
  Check c;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> pick_x(2, 4096);
  std::int64_t checks = 0;
  for (CostModelKind kind : {CostModelKind::RampSaturate, CostModelKind::Affine}) {
    for (int trial = 0; trial < 20; ++trial) {
      const CostModelParams p = random_params(rng, kind);
      std::vector<std::int64_t> xs = {2, 4096};
      for (int i = 0; i < 62; ++i) xs.push_back(pick_x(rng));
      for (std::int64_t x : xs) {
        const double fx2 = 2 * throughput_at(x, p);
        for (std::int64_t h = 1; h < x; ++h) {
          const double rhs = throughput_at(x + h, p) + throughput_at(x - h, p);
          ++checks;
          if (fx2 < rhs - 1e-9 * rhs) {
            c.expect(false, std::string(to_string(kind)) + " x=" + std::to_string(x) +
                                " h=" + std::to_string(h));
            return c.done();
          }
        }
      }
    }
  }
  c.note(std::to_string(checks) + " inequalities");
  return c.done();
}

void for_each_composition(std::int64_t total, std::int64_t parts, std::vector<std::int64_t>& cur,
                          const std::function<void(const std::vector<std::int64_t>&)>& fn) {
  if (parts == 1) {
    cur.push_back(total);
    fn(cur);
    cur.pop_back();
    return;
  }
  for (std::int64_t first = 1; first <= total - (parts - 1); ++first) {
    cur.push_back(first);
    for_each_composition(total - first, parts - 1, cur, fn);
    cur.pop_back();
  }
}

Outcome c3_partition() {
  Check c;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> base(1.0, 50.0);
  std::uniform_real_distribution<double> rate(100.0, 5000.0);
  std::int64_t compositions = 0;
  for (int trial = 0; trial < 10; ++trial) {
    CostModelParams p;
    p.base_latency_ms = base(rng);
    p.saturated_rate_tokens_per_s = rate(rng);
    auto total_latency = [&](const std::vector<std::int64_t>& chunks) {
      double sum = 0;
      for (auto t : chunks) sum += forward_latency_ms(t, t > 0 ? 1 : 0, p);
      return sum;
    };
    for (std::int64_t f = 1; f <= 4; ++f) {
      for (std::int64_t total = f; total <= 30; ++total) {
        const double equal = total_latency(equal_partition(total, f));
        std::vector<std::int64_t> cur;
        for_each_composition(total, f, cur, [&](const auto& chunks) {
          ++compositions;
          c.expect(equal <= total_latency(chunks) + 1e-9,
                   "P=" + std::to_string(total) + " F=" + std::to_string(f));
        });
      }
    }
  }
  c.note(std::to_string(compositions) + " compositions");
  return c.done();
}

Outcome c4_kv_allocator() {
  Check c;
  constexpr std::int64_t kBlocks = 128;
  constexpr std::int64_t kBlockSize = 16;
  BlockPool pool(kBlocks, kBlockSize);
  std::map<std::uint64_t, std::int64_t> tokens;  // oracle: id -> tokens stored
  auto need = [](std::int64_t t) { return (t + kBlockSize - 1) / kBlockSize; };
  std::int64_t oracle_used = 0;
  std::mt19937_64 rng(4);
  std::uint64_t next_id = 0;
  for (int op = 0; op < 10000; ++op) {
    const auto kind = rng() % 3;
    if (kind == 0 || tokens.empty()) {
      const auto t = static_cast<std::int64_t>(rng() % 300);
      const bool fits = need(t) <= kBlocks - oracle_used;
      const auto table = pool.allocate(SequenceId{next_id}, t);
      c.expect(table.has_value() == fits, "allocate op " + std::to_string(op));
      if (table) {
        c.expect(static_cast<std::int64_t>(table->blocks.size()) == need(t), "block-count law");
        tokens[next_id] = t;
        oracle_used += need(t);
      }
      ++next_id;
    } else {
      auto it = tokens.begin();
      std::advance(it, static_cast<long>(rng() % tokens.size()));
      if (kind == 1) {
        const auto add = static_cast<std::int64_t>(rng() % 64);
        const std::int64_t grow = need(it->second + add) - need(it->second);
        const bool fits = grow <= kBlocks - oracle_used;
        const auto got = pool.extend(SequenceId{it->first}, add);
        c.expect(got.has_value() == fits, "extend op " + std::to_string(op));
        if (got) {
          c.expect(*got == grow, "extend block count");
          it->second += add;
          oracle_used += grow;
        }
      } else {
        c.expect(pool.free(SequenceId{it->first}) == need(it->second), "free count");
        oracle_used -= need(it->second);
        tokens.erase(it);
      }
    }
    c.expect(pool.used_blocks() + pool.free_blocks() == kBlocks, "conservation");
    c.expect(pool.used_blocks() == oracle_used, "used blocks vs oracle");
    c.expect(pool.check_invariants(), "pool invariants");
    for (const auto& [id, t] : tokens) {
      if (static_cast<std::int64_t>(pool.table(SequenceId{id}).blocks.size()) != need(t)) {
        c.expect(false, "block-count law for sequence " + std::to_string(id));
        break;
      }
    }
  }
  return c.done();
}

Outcome c5_budget_law() {
  Check c;
  const Scenario sf = long_prompt_scenario(SchedulerPolicy::SplitFuse);
  const SimReport& split = long_prompt_report(SchedulerPolicy::SplitFuse);
  std::int64_t max_split = 0;
  for (const PassRecord& p : split.passes) {
    max_split = std::max(max_split, p.total_tokens);
    c.expect(p.total_tokens <= sf.scheduler.token_budget,
             "pass " + std::to_string(p.index) + " has " + std::to_string(p.total_tokens));
  }
  std::int64_t max_prompt = 0;
  for (const auto& r : generate_workload(sf.workload)) max_prompt = std::max(max_prompt, r.prompt_tokens);
  const std::int64_t max_pre = summarize(long_prompt_report(SchedulerPolicy::PreemptivePrompt)).max_pass_tokens;
  c.expect(max_pre >= max_prompt, "preemptive max pass " + std::to_string(max_pre) +
                                      " < max prompt " + std::to_string(max_prompt));
  c.note("budget=" + std::to_string(sf.scheduler.token_budget) + " splitfuse_max_pass=" +
         std::to_string(max_split) + " preemptive_max_pass=" + std::to_string(max_pre) +
         " max_prompt=" + std::to_string(max_prompt));
  return c.done();
}

Outcome c6_tail_latency() {
  Check c;
  const double sf = summarize(long_prompt_report(SchedulerPolicy::SplitFuse)).p95_gap_ms;
  const double pre = summarize(long_prompt_report(SchedulerPolicy::PreemptivePrompt)).p95_gap_ms;
  const double ratio = pre / sf;
  c.expect(sf < pre, "splitfuse p95 " + fmt(sf) + " ms not below " + fmt(pre) + " ms");
  c.expect(ratio >= 1.5, "ratio " + fmt(ratio) + " < 1.5");
  c.note("p95_gap_ms splitfuse=" + fmt(sf) + " preemptive=" + fmt(pre) + " ratio=" + fmt(ratio));
  return c.done();
}

Outcome c7_effective_throughput() {
  Check c;
  SweepSpec spec = parse_config("", "<defaults>");
  spec.base = long_prompt_scenario(SchedulerPolicy::SplitFuse);
  spec.client_counts = {1, 2, 4, 8, 16, 32};
  spec.policies = {SchedulerPolicy::SplitFuse, SchedulerPolicy::PreemptivePrompt};
  std::array<double, kSlaTiers.size()> best_sf{}, best_pre{};
  for (const SweepCell& cell : run_sweep(spec)) {
    auto& best = cell.point.policy == SchedulerPolicy::SplitFuse ? best_sf : best_pre;
    for (std::size_t i = 0; i < kSlaTiers.size(); ++i) {
      best[i] = std::max(best[i], cell.point.summary.effective_rps[i]);
    }
  }
  std::string detail;
  for (std::size_t i = 0; i < kSlaTiers.size(); ++i) {
    const std::string tier = fmt(kSlaTiers[i]) + "tps";
    c.expect(best_sf[i] >= best_pre[i], "tier " + tier + " splitfuse below preemptive");
    detail += (i ? " " : "") + tier + "=" + fmt(best_sf[i]) + "/" + fmt(best_pre[i]);
  }
  c.expect(best_sf.back() > best_pre.back(), "not strictly greater at the strictest tier");
  c.note("max effective rps splitfuse/preemptive " + detail);
  return c.done();
}

Outcome c8_sla_monotonicity() {
  Check c;
  for (SchedulerPolicy policy :
       {SchedulerPolicy::SplitFuse, SchedulerPolicy::PreemptivePrompt, SchedulerPolicy::OrcaStyle}) {
    const SimReport& r = long_prompt_report(policy);
    const double e2 = effective_throughput_at(r, 2.0);
    const double e4 = effective_throughput_at(r, 4.0);
    const double e6 = effective_throughput_at(r, 6.0);
    c.expect(e6 <= e4 && e4 <= e2, std::string(to_string(policy)) + ": " + fmt(e2) + ", " +
                                       fmt(e4) + ", " + fmt(e6));
  }
  return c.done();
}

Outcome c9_replica_scaling() {
  Check c;
  Scenario flat = long_prompt_scenario(SchedulerPolicy::SplitFuse);
  flat.workload.relative_stddev = 0.0;
  const ScaledReport even = run_scaled(flat, 16, LbPolicy::RoundRobin);
  c.expect(even.scaling_efficiency == 1.0,
           "zero-variance efficiency " + fmt(even.scaling_efficiency));

  const Scenario varied = long_prompt_scenario(SchedulerPolicy::SplitFuse);
  const ScaledReport lo = run_scaled(varied, 16, LbPolicy::LeastOutstanding);
  const ScaledReport rr = run_scaled(varied, 16, LbPolicy::RoundRobin);
  c.expect(lo.scaling_efficiency >= 0.95,
           "30% variance efficiency " + fmt(lo.scaling_efficiency) + " < 0.95");
  c.note("zero_variance=" + fmt(even.scaling_efficiency) +
         " varied least_outstanding=" + fmt(lo.scaling_efficiency) +
         " varied round_robin=" + fmt(rr.scaling_efficiency) +
         " aggregate_rps=" + fmt(lo.aggregate_rps));
  return c.done();
}

Outcome c10_golden_traces() {
  Check c;
  auto single = [](SchedulerPolicy policy) {
    Scenario s;
    s.workload = WorkloadSpec{100, 2, 0.0, 1, 1};
    s.clients = 1;
    s.cost_model.base_latency_ms = 20.0;
    s.cost_model.saturated_rate_tokens_per_s = 10000.0;
    s.scheduler = SchedulerConfig{policy, 512, 64};
    return run_simulation(s);
  };
  const SimReport sf = single(SchedulerPolicy::SplitFuse);
  c.expect(sf.passes.size() == 2 && sf.passes[0].total_tokens == 101 &&
               sf.passes[0].end == SimTime{20000} && sf.passes[1].end == SimTime{40000},
           "splitfuse pass structure");
  c.expect(sf.requests.at(0).done == SimTime{40000}, "splitfuse finish");
  const SimReport pre = single(SchedulerPolicy::PreemptivePrompt);
  c.expect(pre.passes.size() == 3 && pre.passes[0].total_tokens == 100 &&
               pre.requests.at(0).first_token == SimTime{40000},
           "preemptive pass structure");
  c.expect(pre.requests.at(0).done == SimTime{60000}, "preemptive finish");
  c.note("splitfuse done=" + fmt(to_seconds(sf.requests.at(0).done) * 1000) +
         " ms preemptive done=" + fmt(to_seconds(pre.requests.at(0).done) * 1000) + " ms");
  return c.done();
}

Outcome c11_metric_units() {
  Check c;
  c.expect(prompt_sla_deadline(1024, SlaConfig{}) == 2.0, "prompt_sla_deadline(1024) != 2.0");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gap(0.001, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> times = {0.0};
    for (int i = 0; i < 50; ++i) times.push_back(times.back() + gap(rng));
    const auto rates = ema_generation_rates(times, 1.0);
    for (std::size_t k = 1; k < times.size(); ++k) {
      c.expect(rates[k - 1] == 1.0 / (times[k] - times[k - 1]), "alpha=1 rate differs from 1/gap");
    }
  }
  return c.done();
}

struct Criterion {
  int number;
  const char* name;
  double time_limit_s;  // 0 = no limit
  Outcome (*run)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "determinism", 10.0, c1_determinism},
      {2, "throughput concavity", 0.0, c2_concavity},
      {3, "equal-partition optimality", 5.0, c3_partition},
      {4, "KV allocator properties", 5.0, c4_kv_allocator},
      {5, "budget law", 0.0, c5_budget_law},
      {6, "tail-latency trend", 60.0, c6_tail_latency},
      {7, "effective-throughput trend", 300.0, c7_effective_throughput},
      {8, "SLA monotonicity", 0.0, c8_sla_monotonicity},
      {9, "replica scaling", 120.0, c9_replica_scaling},
      {10, "golden traces", 0.0, c10_golden_traces},
      {11, "metric units", 0.0, c11_metric_units},
  };

  int failures = 0;
  for (const Criterion& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = cr.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.time_limit_s > 0 && secs >= cr.time_limit_s) {
      out.pass = false;
      out.detail = "took " + fmt(secs) + " s, limit " + fmt(cr.time_limit_s) + " s";
    }
    if (!out.pass) ++failures;
    std::printf("%s criterion %2d %-28s %8.3f s%s%s\n", out.pass ? "PASS" : "FAIL", cr.number,
                cr.name, secs, out.detail.empty() ? "" : "  ", out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
