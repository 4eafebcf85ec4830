// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion. Exits nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragsim/config_io.hpp"
#include "ragsim/cost_model.hpp"
#include "ragsim/memory_planner.hpp"
#include "ragsim/prefetch_timeline.hpp"
#include "ragsim/rng.hpp"
#include "ragsim/scheduler.hpp"
#include "ragsim/simulator.hpp"
#include "ragsim/workload.hpp"

namespace fs = std::filesystem;
using namespace ragsim;

namespace {

int g_failures = 0;

void report(int number, const char* name, bool ok, double seconds, const std::string& detail) {
    std::printf("[%s] criterion %2d: %-34s (%6.2fs) %s\n", ok ? "PASS" : "FAIL", number, name,
                seconds, detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// limit_seconds <= 0 means no runtime bound for this criterion.
void criterion(int number, const char* name, double limit_seconds,
               const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    auto start = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_seconds > 0.0 && seconds >= limit_seconds) {
        ok = false;
        detail += fmt(" [over %.0fs budget]", limit_seconds);
    }
    report(number, name, ok, seconds, detail);
}

CostModelFit fit_of(double a, double c) { return CostModelFit{a, c, 0.0, 2, false}; }

// ---------------------------------------------------------------------------
// 1. Eq 4-5 oracle equivalence

double replay_equal_split(int n, int k, const CostModelFit& fit) {
    int batch = n / k;
    double t = 0.0, sum = 0.0;
    for (int j = 0; j < k; ++j) {
        t += predict(fit, batch);
        sum += batch * t;
    }
    return sum / n;
}

bool check_equal_split_oracle(std::string& detail) {
    double worst = 0.0;
    int cases = 0;
    for (int n : {4, 8, 12, 16})
        for (int k = 1; k <= n; ++k) {
            if (n % k != 0) continue;
            for (auto [a, c] : std::vector<std::pair<double, double>>{
                     {1.0, 0.5}, {1.0, 1.0}, {2.0, 0.585}}) {
                CostModelFit fit = fit_of(a, c);
                std::vector<double> arrivals(n, 0.0);
                double formula = avg_latency_equal_split(arrivals, k, fit);
                double oracle = replay_equal_split(n, k, fit);
                worst = std::max(worst, std::fabs(formula - oracle));
                ++cases;
            }
        }
    detail = fmt("%d cases, worst |formula-replay| = %.3g", cases, worst);
    return worst <= 1e-9;
}

// ---------------------------------------------------------------------------
// 2. Eq 7 boundary and argmin agreement

bool check_threshold(std::string& detail) {
    const double boundary = std::log2(1.5);
    bool flips = max_batch_optimal(boundary - 1e-6, 2) && !max_batch_optimal(boundary + 1e-6, 2) &&
                 max_batch_optimal(boundary, 2);

    Rng rng(20240585);
    int agree = 0, total = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        double a = 0.1 + 4.9 * rng.next_uniform();
        double c = 1.5 * rng.next_uniform();
        if (std::fabs(c - boundary) < 1e-9) continue;
        int n = 2 * (1 + static_cast<int>(rng.next_u64() % 64));
        std::vector<Request> backlog(n);
        for (int i = 0; i < n; ++i) backlog[i] = {static_cast<std::uint64_t>(i), 0.0, 5};
        std::vector<int> candidates{n / 2, n};
        BatchDecision d = choose_generation_batch(backlog, candidates, fit_of(a, c), n);
        bool picked_max = d.chosen_batch == n;
        agree += picked_max == max_batch_optimal(c, 2);
        ++total;
    }
    detail = fmt("boundary flip at log2(3/2): %s; argmin agreement %d/%d", flips ? "yes" : "no",
                 agree, total);
    return flips && agree == total;
}

// ---------------------------------------------------------------------------
// 3. power-law fit round trip

bool check_fit_roundtrip(std::string& detail) {
    Rng rng(3);
    double worst_a = 0.0, worst_c = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        double a = std::exp(std::log(0.05) + rng.next_uniform() * std::log(20.0 / 0.05));
        double c = 2.0 * rng.next_uniform();
        std::vector<BatchTimeSample> samples;
        for (double b : {1.0, 2.0, 4.0, 8.0, 16.0}) samples.push_back({b, a * std::pow(b, c)});
        CostModelFit fit = fit_power_law(samples);
        worst_a = std::max(worst_a, std::fabs(fit.a - a) / a);
        worst_c = std::max(worst_c, std::fabs(fit.c - c) / std::max(1.0, c));
    }
    detail = fmt("50 pairs, worst rel err a=%.3g c=%.3g", worst_a, worst_c);
    return worst_a <= 1e-6 && worst_c <= 1e-6;
}

// ---------------------------------------------------------------------------
// 4. prefetch dominance

bool check_prefetch_dominance(std::string& detail) {
    Rng rng(4);
    int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        int layers = 4 + static_cast<int>(rng.next_u64() % 61);
        std::vector<double> compute(layers), transfer(layers);
        for (int i = 0; i < layers; ++i) {
            compute[i] = (0.5 + 19.5 * rng.next_uniform()) * rng.next_jitter(0.4);
            transfer[i] = rng.next_u64() % 4 == 0 ? 0.0 : 25.0 * rng.next_uniform();
        }
        int capacity = 1 + static_cast<int>(rng.next_u64() % 8);
        double cq = simulate_layer_timeline(compute, transfer, capacity,
                                            PrefetchMode::ContinuousQueue)
                        .total;
        double nlo = simulate_layer_timeline(compute, transfer, capacity,
                                             PrefetchMode::NextLayerOnly)
                         .total;
        if (cq > nlo + 1e-9) {
            detail = fmt("dominance violated at trial %d: %.6f > %.6f", trial, cq, nlo);
            return false;
        }
    }
    // constructed strict-improvement case
    std::vector<double> compute{30, 10, 10, 10};
    std::vector<double> transfer{0, 20, 20, 20};
    double cq =
        simulate_layer_timeline(compute, transfer, 3, PrefetchMode::ContinuousQueue).total;
    double nlo =
        simulate_layer_timeline(compute, transfer, 3, PrefetchMode::NextLayerOnly).total;
    bool strict = std::fabs(cq - 70.0) < 1e-9 && std::fabs(nlo - 80.0) < 1e-9 && cq < nlo;
    detail = fmt("%d randomized timelines dominated; constructed case %.0f < %.0f", trials, cq,
                 nlo);
    return strict;
}

// ---------------------------------------------------------------------------
// shared scenario runs for criteria 5-8

struct ScenarioRun {
    Scenario scenario;
    PolicyTable policy;
    std::vector<Request> workload;
    SimOutcome pipelined;
    SimOutcome serial;
    SimOutcome fixed_max;
};

ScenarioRun run_default_scenario(const std::string& config_dir) {
    ScenarioRun r;
    r.scenario = load_scenario(config_dir + "/default_8b.json");
    ProfilerOptions options;
    options.w_step = r.scenario.profiler.w_step;
    options.prefetch_mode = r.scenario.prefetch_mode;
    options.cost = r.scenario.cost;
    r.policy = active_profile(r.scenario.hardware, r.scenario.model, r.scenario.database,
                              r.scenario.profiler.probe_batches,
                              r.scenario.profiler.partition_candidates, options);
    r.workload = generate_poisson(r.scenario.schedule, derive_seed(7, 1), r.scenario.top_k);

    SimConfig piped = make_sim_config(r.scenario, SimMode::Pipelined, 7);
    piped.policy = r.policy;
    r.pipelined = run(r.workload, piped);

    SimConfig serial = make_sim_config(r.scenario, SimMode::Serial, 7);
    r.serial = run(r.workload, serial);

    SimConfig fixed = piped;
    fixed.generation_policy = GenerationBatchPolicy::FixedMax;
    r.fixed_max = run(r.workload, fixed);
    return r;
}

bool check_memory_invariant(const ScenarioRun& r, std::string& detail) {
    const HardwareProfile& hw = r.scenario.hardware;
    auto within = [&](const SimOutcome& out) {
        return out.peak.gpu <= static_cast<double>(hw.gpu_mem) &&
               out.peak.cpu <= static_cast<double>(hw.cpu_mem) &&
               out.peak.disk <= static_cast<double>(hw.disk_capacity);
    };
    // the engine additionally asserts the bounds at every event and throws
    bool ok = within(r.pipelined) && within(r.serial) && within(r.fixed_max);
    detail = fmt("peaks: gpu %.1f/%.0f GiB, cpu %.1f/%.0f GiB over %zu+%zu events",
                 r.pipelined.peak.gpu / (double)GiB, hw.gpu_mem / (double)GiB,
                 r.pipelined.peak.cpu / (double)GiB, hw.cpu_mem / (double)GiB,
                 r.pipelined.event_log.size(), r.serial.event_log.size());
    return ok;
}

bool check_pipelined_speedup(const ScenarioRun& r, std::string& detail) {
    double ratio = r.pipelined.aggregates.average / r.serial.aggregates.average;
    detail = fmt("avg %.2fs vs %.2fs serial, ratio %.3f (gate 0.8)",
                 r.pipelined.aggregates.average, r.serial.aggregates.average, ratio);
    return ratio <= 0.8;
}

bool check_backlog_aware(const ScenarioRun& r, std::string& detail) {
    // average latency of requests arriving in the overload interval
    double start = 0.0;
    for (std::size_t i = 0; i + 1 < r.scenario.schedule.intervals.size(); ++i)
        start += r.scenario.schedule.intervals[i].duration;
    double end = r.scenario.schedule.total_duration();
    auto interval_avg = [&](const SimOutcome& out) {
        double sum = 0.0;
        int n = 0;
        for (const auto& t : out.traces)
            if (t.arrival >= start && t.arrival < end) {
                sum += t.latency();
                ++n;
            }
        return n > 0 ? sum / n : 0.0;
    };
    double adaptive = interval_avg(r.pipelined);
    double fixed = interval_avg(r.fixed_max);
    detail = fmt("overload-interval avg: backlog-aware %.2fs vs fixed-max %.2fs", adaptive, fixed);
    return adaptive < fixed;
}

bool check_batch_growth(const std::string& config_dir, std::string& detail) {
    Scenario s = load_scenario(config_dir + "/ref_70b.json");
    ProfilerOptions options;
    options.w_step = s.profiler.w_step;
    options.prefetch_mode = s.prefetch_mode;
    options.cost = s.cost;
    PolicyTable policy = active_profile(s.hardware, s.model, s.database,
                                        s.profiler.probe_batches,
                                        s.profiler.partition_candidates, options);
    std::vector<Request> workload = generate_poisson(s.schedule, derive_seed(70, 1), s.top_k);
    SimConfig cfg = make_sim_config(s, SimMode::Pipelined, 70);
    cfg.policy = policy;
    SimOutcome out = run(workload, cfg);

    std::vector<int> per_interval(s.schedule.intervals.size(), 0);
    for (const auto& e : out.event_log) {
        if (e.kind != "generation_batch_start") continue;
        nlohmann::json data = nlohmann::json::parse(e.data);
        int idx = s.schedule.interval_index(e.time);
        per_interval[idx] = std::max(per_interval[idx], data.at("batch_size").get<int>());
    }
    std::string seq;
    bool nondecreasing = true;
    int prev = 0;
    for (std::size_t i = 0; i < per_interval.size(); ++i) {
        if (per_interval[i] == 0) continue; // no batch started in this interval
        nondecreasing &= per_interval[i] >= prev;
        prev = per_interval[i];
        seq += (seq.empty() ? "" : ",") + std::to_string(per_interval[i]);
    }
    detail = "per-interval max batch: " + seq;
    return nondecreasing && prev > 0;
}

// ---------------------------------------------------------------------------
// 9. poisson generator statistics

bool check_poisson(std::string& detail) {
    IntervalSchedule schedule = default_schedule();
    if (std::fabs(schedule.expected_requests() - 800.0) > 1e-9) {
        detail = "default schedule expectation is not 800";
        return false;
    }
    const int seeds = 200;
    std::vector<double> counts(schedule.intervals.size(), 0.0);
    for (int seed = 0; seed < seeds; ++seed) {
        auto reqs = generate_poisson(schedule, derive_seed(seed, 1), 5);
        for (const auto& r : reqs) counts[schedule.interval_index(r.arrival_time)] += 1.0;
    }
    double worst_sigma = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        double expected = schedule.intervals[i].duration * schedule.intervals[i].rate;
        double mean = counts[i] / seeds;
        worst_sigma = std::max(worst_sigma,
                               std::fabs(mean - expected) / std::sqrt(expected));
    }
    detail = fmt("%d seeds, worst per-interval deviation %.2f sigma (gate 3)", seeds, worst_sigma);
    return worst_sigma <= 3.0;
}

// ---------------------------------------------------------------------------
// 10. CLI determinism

#ifdef RAGSIM_CLI_PATH

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_cli(const std::string& args) {
    std::string cmd = std::string(RAGSIM_CLI_PATH) + " " + args;
    return std::system(cmd.c_str()) == 0;
}

bool check_cli_determinism(std::string& detail) {
    fs::path dir = fs::temp_directory_path() / "ragsim_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string d = dir.string();
    std::string cfg = std::string(RAGSIM_CONFIG_DIR) + "/default_8b.json";
    std::string placement = std::string(RAGSIM_CONFIG_DIR) + "/placement_8b.json";

    struct Pair {
        std::string name;
        fs::path a, b;
    };
    std::vector<Pair> pairs;

    auto twice = [&](const std::string& name, const std::string& args_template,
                     const std::string& out_a, const std::string& out_b) {
        std::string a_cmd = args_template, b_cmd = args_template;
        a_cmd.replace(a_cmd.find("{}"), 2, out_a);
        b_cmd.replace(b_cmd.find("{}"), 2, out_b);
        if (!run_cli(a_cmd) || !run_cli(b_cmd)) return false;
        pairs.push_back({name, out_a, out_b});
        return true;
    };

    bool ok = true;
    ok &= twice("gen-workload",
                "gen-workload --intervals 1200:4/min,1200:8/min,1200:12/min,1200:16/min "
                "--seed 7 --out {} > /dev/null",
                d + "/w1.csv", d + "/w2.csv");
    ok &= twice("plan", "plan --scenario " + cfg + " --config " + placement + " > {}",
                d + "/plan1.json", d + "/plan2.json");
    ok &= twice("profile", "profile --scenario " + cfg + " --out {} > /dev/null",
                d + "/pol1.json", d + "/pol2.json");
    if (!ok) {
        detail = "a CLI invocation failed";
        return false;
    }
    ok &= run_cli("simulate --scenario " + cfg + " --workload " + d + "/w1.csv --mode both "
                  "--policy " + d + "/pol1.json --out " + d + "/r1 --seed 7 --jobs 2 > /dev/null");
    ok &= run_cli("simulate --scenario " + cfg + " --workload " + d + "/w1.csv --mode both "
                  "--policy " + d + "/pol1.json --out " + d + "/r2 --seed 7 --jobs 2 > /dev/null");
    for (const char* mode : {"pipelined", "serial"})
        for (const char* file : {"traces.csv", "events.jsonl", "summary.json"})
            pairs.push_back({std::string("simulate/") + mode + "/" + file,
                             fs::path(d) / "r1" / mode / file, fs::path(d) / "r2" / mode / file});
    ok &= twice("compare",
                "compare --a " + d + "/r1/pipelined/summary.json --b " + d +
                    "/r1/serial/summary.json --out {} > /dev/null",
                d + "/c1.json", d + "/c2.json");
    ok &= twice("timeline",
                "timeline --scenario " + cfg + " --config " + placement +
                    " --phase decode --mode continuous --seed 3 --out {} > /dev/null",
                d + "/t1.csv", d + "/t2.csv");
    if (!ok) {
        detail = "a CLI invocation failed";
        return false;
    }

    for (const auto& p : pairs) {
        std::string a = slurp(p.a), b = slurp(p.b);
        if (a.empty() || a != b) {
            detail = "outputs differ for " + p.name;
            return false;
        }
    }
    detail = fmt("%zu output pairs byte-identical across 6 subcommands", pairs.size());
    return true;
}

#endif

}  // namespace

int main() {
    std::string config_dir = RAGSIM_CONFIG_DIR;

    criterion(1, "Eq 4-5 oracle equivalence", 1.0, check_equal_split_oracle);
    criterion(2, "Eq 7 batch-size threshold", 5.0, check_threshold);
    criterion(3, "power-law fit round trip", 1.0, check_fit_roundtrip);
    criterion(4, "prefetch dominance", 5.0, check_prefetch_dominance);

    try {
        // the desk-scale budget: profiling plus all three replays within 60 s
        auto start = std::chrono::steady_clock::now();
        ScenarioRun runs = run_default_scenario(config_dir);
        double setup =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        criterion(5, "memory bounds at every event", 0.0,
                  [&](std::string& d) { return check_memory_invariant(runs, d); });
        criterion(6, "pipelined vs serial latency", 0.0, [&](std::string& d) {
            bool ok = check_pipelined_speedup(runs, d);
            d += fmt("; run %.2fs wall", setup);
            return ok && setup < 60.0;
        });
        criterion(7, "backlog-aware vs fixed batch", 0.0,
                  [&](std::string& d) { return check_backlog_aware(runs, d); });
    } catch (const std::exception& e) {
        report(5, "memory bounds at every event", false, 0.0, e.what());
        report(6, "pipelined vs serial latency", false, 0.0, e.what());
        report(7, "backlog-aware vs fixed batch", false, 0.0, e.what());
    }

    criterion(8, "batch growth under rising load", 0.0,
              [&](std::string& d) { return check_batch_growth(config_dir, d); });
    criterion(9, "poisson generator statistics", 0.0, check_poisson);
#ifdef RAGSIM_CLI_PATH
    criterion(10, "CLI determinism", 0.0, check_cli_determinism);
#else
    report(10, "CLI determinism", false, 0.0, "CLI binary not built");
#endif

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
