// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
//
// ragsim: generates workloads, profiles placement policies, replays them
// through the pipelined or serial engine, and reports the results.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ragsim/config_io.hpp"
#include "ragsim/errors.hpp"
#include "ragsim/memory_planner.hpp"
#include "ragsim/scheduler.hpp"
#include "ragsim/simulator.hpp"
#include "ragsim/workload.hpp"

namespace fs = std::filesystem;
using namespace ragsim;

namespace {

// exit codes: 0 ok, 2 invalid arguments, 3 infeasible scenario, 4 runtime error
struct UsageError : Error {
    using Error::Error;
};

void ensure_writable(const std::string& path, bool force) {
    if (!force && fs::exists(path))
        throw UsageError(path + " exists; pass --force to overwrite");
    fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

double parse_number(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        double value = std::stod(text, &used);
        if (used != text.size()) throw UsageError("");
        return value;
    } catch (const std::exception&) {
        throw UsageError(std::string("bad ") + what + ": '" + text + "'");
    }
}

double parse_rate_spec(const std::string& text) {
    std::size_t slash = text.find('/');
    double value = parse_number(text.substr(0, slash), "rate");
    if (slash == std::string::npos) return value; // already per second
    std::string unit = text.substr(slash + 1);
    if (unit == "s" || unit == "sec") return value;
    if (unit == "min" || unit == "m") return value / 60.0;
    if (unit == "h" || unit == "hour") return value / 3600.0;
    throw UsageError("unknown rate unit '" + unit + "' (use /s, /min, /h)");
}

IntervalSchedule parse_intervals(const std::string& text) {
    IntervalSchedule schedule;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma - pos);
        pos = comma == std::string::npos ? text.size() : comma + 1;
        std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw UsageError("interval must be DURATION:RATE, got '" + item + "'");
        double duration = parse_number(item.substr(0, colon), "duration");
        double rate = parse_rate_spec(item.substr(colon + 1));
        schedule.intervals.push_back({duration, rate});
    }
    if (schedule.intervals.empty()) throw UsageError("no intervals given");
    return schedule;
}

// --- gen-workload -----------------------------------------------------------

int cmd_gen_workload(const std::string& intervals_spec, const std::string& scenario_path,
                     std::uint64_t seed, int top_k, double time_scale, const std::string& out,
                     bool force) {
    IntervalSchedule schedule;
    if (!intervals_spec.empty()) {
        schedule = parse_intervals(intervals_spec);
    } else if (!scenario_path.empty()) {
        schedule = load_scenario(scenario_path).schedule;
    } else {
        throw UsageError("pass --intervals or --scenario");
    }
    if (time_scale != 1.0) schedule = scaled(schedule, time_scale);

    Violations bad = validate(schedule);
    if (!bad.empty()) throw UsageError("schedule: " + describe(bad));

    ensure_writable(out, force);
    std::vector<Request> requests = generate_poisson(schedule, derive_seed(seed, 1), top_k);
    save_trace(requests, out);
    std::printf("wrote %zu requests to %s (expected %.1f)\n", requests.size(), out.c_str(),
                schedule.expected_requests());
    return 0;
}

// --- plan -------------------------------------------------------------------

int cmd_plan(const std::string& scenario_path, const std::string& config_path,
             const std::string& to_path) {
    Scenario s = load_scenario(scenario_path);
    PlacementConfig cfg = placement_from_file(config_path);
    Violations bad = validate(cfg, s.database);
    if (!bad.empty()) throw UsageError("placement: " + describe(bad));

    FeasibilityReport report = check_feasible(cfg, s.hardware, s.model, s.database);
    if (to_path.empty()) {
        std::printf("%s\n", to_json(report).c_str());
        return 0;
    }
    PlacementConfig to = placement_from_file(to_path);
    Violations bad_to = validate(to, s.database);
    if (!bad_to.empty()) throw UsageError("placement: " + describe(bad_to));
    nlohmann::json j{
        {"from", nlohmann::json::parse(to_json(report))},
        {"to", nlohmann::json::parse(to_json(check_feasible(to, s.hardware, s.model, s.database)))},
        {"transfer",
         nlohmann::json::parse(to_json(plan_transfer(cfg, to, s.hardware, s.model, s.database)))}};
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
}

// --- profile ----------------------------------------------------------------

std::string binding_constraint(const Scenario& s) {
    int b_min = s.profiler.probe_batches.front();
    if (s.model.workspace_bytes(b_min) > static_cast<double>(s.hardware.gpu_mem))
        return "GPU constraint binding at workspace";
    int p_min = s.profiler.partition_candidates.front();
    if (p_min * static_cast<double>(s.database.partition_bytes) >
        static_cast<double>(s.hardware.cpu_mem))
        return "CPU constraint binding at partitions";
    double minimal = static_cast<double>(s.model.weight_total) +
                     s.database.total_bytes();
    if (minimal > static_cast<double>(s.hardware.cpu_mem) +
                      static_cast<double>(s.hardware.disk_capacity))
        return "disk constraint binding at total footprint";
    return "no feasible placement in the search space";
}

int cmd_profile(const std::string& scenario_path, const std::string& out, bool force) {
    Scenario s = load_scenario(scenario_path);
    if (s.profiler.probe_batches.empty())
        throw UsageError("scenario has no profiler.probe_batches");
    ensure_writable(out, force);

    ProfilerOptions options;
    options.w_step = s.profiler.w_step;
    options.prefetch_mode = s.prefetch_mode;
    options.cost = s.cost;

    PolicyTable table;
    try {
        table = active_profile(s.hardware, s.model, s.database, s.profiler.probe_batches,
                               s.profiler.partition_candidates, options);
    } catch (const InfeasibleError&) {
        throw InfeasibleError(binding_constraint(s));
    }

    for (const auto& entry : table.entries) {
        std::printf("backlog [%d, %s] -> batch %d\n", entry.backlog_min,
                    entry.backlog_max == kNoBacklogLimit
                        ? "inf"
                        : std::to_string(entry.backlog_max).c_str(),
                    entry.config.gen_batch_size);
        for (std::size_t i = 0; i < entry.search_path.size(); ++i) {
            const ProfileStep& step = entry.search_path[i];
            std::printf(
                "  step %zu: P=%d w=(%.2f,%.2f,%.2f) c=(%.2f,%.2f,%.2f) "
                "t_ret=%.6f t_gen=%.6f objective=%.6f\n",
                i, step.config.resident_partitions, step.config.w_gpu, step.config.w_cpu,
                step.config.w_disk, step.config.c_gpu, step.config.c_cpu, step.config.c_disk,
                step.t_retrieval, step.t_generation, step.objective);
        }
    }
    save_policy(table, out);
    std::printf("wrote policy table (%zu entries) to %s\n", table.entries.size(), out.c_str());
    return 0;
}

// --- simulate ----------------------------------------------------------------

struct ModeRun {
    SimMode mode;
    fs::path dir;
    std::string report;
};

void run_one_mode(const Scenario& scenario, const PolicyTable* policy,
                  GenerationBatchPolicy gen_policy, std::uint64_t seed,
                  const std::vector<Request>& workload, ModeRun& slot, bool force) {
    SimConfig cfg = make_sim_config(scenario, slot.mode, seed);
    if (slot.mode == SimMode::Pipelined) {
        cfg.policy = *policy;
        cfg.generation_policy = gen_policy;
    }
    SimOutcome outcome = run(workload, cfg);

    fs::create_directories(slot.dir);
    for (const char* name : {"traces.csv", "events.jsonl", "summary.json"}) {
        fs::path p = slot.dir / name;
        if (!force && fs::exists(p))
            throw UsageError(p.string() + " exists; pass --force to overwrite");
    }
    write_traces_csv(outcome, (slot.dir / "traces.csv").string());
    write_events_jsonl(outcome, (slot.dir / "events.jsonl").string());
    write_summary_json(outcome, (slot.dir / "summary.json").string());
    slot.report = metrics_report(outcome);
}

int cmd_simulate(const std::string& scenario_path, const std::string& workload_path,
                 const std::string& mode_name, const std::string& policy_path,
                 const std::string& out_dir, std::uint64_t seed,
                 const std::string& gen_policy_name, int jobs, bool force) {
    Scenario scenario = load_scenario(scenario_path);
    std::vector<Request> workload = load_trace(workload_path);

    std::vector<SimMode> modes;
    if (mode_name == "pipelined") modes = {SimMode::Pipelined};
    else if (mode_name == "serial") modes = {SimMode::Serial};
    else if (mode_name == "both") modes = {SimMode::Pipelined, SimMode::Serial};
    else throw UsageError("mode must be pipelined, serial, or both");

    GenerationBatchPolicy gen_policy;
    if (gen_policy_name == "backlog-aware") gen_policy = GenerationBatchPolicy::BacklogAware;
    else if (gen_policy_name == "fixed-max") gen_policy = GenerationBatchPolicy::FixedMax;
    else throw UsageError("generation policy must be backlog-aware or fixed-max");

    PolicyTable policy;
    bool needs_policy = false;
    for (SimMode m : modes) needs_policy |= m == SimMode::Pipelined;
    if (needs_policy) {
        if (policy_path.empty()) throw UsageError("pipelined mode requires --policy");
        policy = load_policy(policy_path);
    }

    std::vector<ModeRun> runs;
    for (SimMode m : modes) runs.push_back({m, fs::path(out_dir) / to_string(m), {}});

    auto work = [&](ModeRun& slot) {
        run_one_mode(scenario, &policy, gen_policy, seed, workload, slot, force);
    };
    if (jobs > 1 && runs.size() > 1) {
        std::vector<std::thread> threads;
        std::exception_ptr failure;
        std::mutex mutex;
        for (auto& slot : runs)
            threads.emplace_back([&work, &slot, &failure, &mutex] {
                try {
                    work(slot);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        for (auto& t : threads) t.join();
        if (failure) std::rethrow_exception(failure);
    } else {
        for (auto& slot : runs) work(slot);
    }

    for (const auto& slot : runs) {
        std::printf("== %s -> %s\n%s", to_string(slot.mode), slot.dir.string().c_str(),
                    slot.report.c_str());
    }
    return 0;
}

// --- compare ------------------------------------------------------------------

int cmd_compare(const std::string& a, const std::string& b, const std::string& out, bool force) {
    ComparisonReport report = compare_summaries(a, b);
    std::printf("%s", format(report).c_str());
    if (!out.empty()) {
        ensure_writable(out, force);
        std::ofstream file(out);
        file << to_json(report) << '\n';
    }
    return 0;
}

// --- timeline -------------------------------------------------------------------

int cmd_timeline(const std::string& scenario_path, const std::string& config_path,
                 const std::string& phase_name, const std::string& mode_name, std::uint64_t seed,
                 const std::string& out, bool force) {
    Scenario s = load_scenario(scenario_path);
    PlacementConfig cfg = placement_from_file(config_path);
    Violations bad = validate(cfg, s.database);
    if (!bad.empty()) throw UsageError("placement: " + describe(bad));
    if (!check_feasible(cfg, s.hardware, s.model, s.database).feasible)
        throw InfeasibleError("placement infeasible");

    Phase phase;
    if (phase_name == "prefill") phase = Phase::Prefill;
    else if (phase_name == "decode") phase = Phase::Decode;
    else throw UsageError("phase must be prefill or decode");

    PrefetchMode mode;
    if (mode_name == "continuous") mode = PrefetchMode::ContinuousQueue;
    else if (mode_name == "next-layer") mode = PrefetchMode::NextLayerOnly;
    else throw UsageError("mode must be continuous or next-layer");

    ensure_writable(out, force);
    Rng jitter(derive_seed(seed, 2));
    Rng* jitter_ptr = s.hardware.jitter_sigma > 0.0 ? &jitter : nullptr;
    LayerLoads loads = layer_loads(cfg, s.hardware, s.model, phase, s.cost, jitter_ptr);
    int capacity =
        queue_capacity(cfg, s.hardware, s.model, phase, s.cost.decode_workspace_fraction);
    LayerTimeline timeline = simulate_layer_timeline(loads.compute, loads.transfer, capacity, mode);

    std::ofstream file(out);
    if (!file) throw Error("cannot open for writing: " + out);
    file << timeline_csv(timeline);
    std::printf("layers=%zu capacity=%s total=%.9f stall=%.9f -> %s\n", timeline.layers.size(),
                capacity == kUnboundedQueueCapacity ? "unbounded" : std::to_string(capacity).c_str(),
                timeline.total, timeline.total_stall, out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAG serving placement planner and discrete-event latency simulator"};
    app.require_subcommand(1);

    // gen-workload
    auto* gen = app.add_subcommand("gen-workload", "Generate a Poisson arrival workload");
    std::string gen_intervals, gen_scenario, gen_out = "workload.csv";
    std::uint64_t gen_seed = 0;
    int gen_top_k = 5;
    double gen_time_scale = 1.0;
    bool gen_force = false;
    gen->add_option("--intervals", gen_intervals,
                    "comma list DURATION:RATE, e.g. 1200:4/min,1200:8/min");
    gen->add_option("--scenario", gen_scenario, "scenario file providing the schedule");
    gen->add_option("--seed", gen_seed, "master seed");
    gen->add_option("--top-k", gen_top_k, "retrieved chunks per request");
    gen->add_option("--time-scale", gen_time_scale,
                    "divide durations and multiply rates by this factor");
    gen->add_option("--out", gen_out, "output workload csv");
    gen->add_flag("--force", gen_force, "overwrite existing output");

    // plan
    auto* plan = app.add_subcommand("plan", "Check placement feasibility (and transfer cost)");
    std::string plan_scenario, plan_config, plan_to;
    plan->add_option("--scenario", plan_scenario, "scenario file")->required();
    plan->add_option("--config", plan_config, "placement config file")->required();
    plan->add_option("--to", plan_to, "second placement: also plan the transfer");

    // profile
    auto* prof = app.add_subcommand("profile", "Run the offline active profiler");
    std::string prof_scenario, prof_out = "policy.json";
    bool prof_force = false;
    prof->add_option("--scenario", prof_scenario, "scenario file")->required();
    prof->add_option("--out", prof_out, "output policy table");
    prof->add_flag("--force", prof_force, "overwrite existing output");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Replay a workload through the simulator");
    std::string sim_scenario, sim_workload, sim_mode = "pipelined", sim_policy, sim_out = "out";
    std::string sim_gen_policy = "backlog-aware";
    std::uint64_t sim_seed = 0;
    int sim_jobs = 1;
    bool sim_force = false;
    sim->add_option("--scenario", sim_scenario, "scenario file")->required();
    sim->add_option("--workload", sim_workload, "workload csv")->required();
    sim->add_option("--mode", sim_mode, "pipelined | serial | both");
    sim->add_option("--policy", sim_policy, "policy table (pipelined)");
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--generation-policy", sim_gen_policy, "backlog-aware | fixed-max");
    sim->add_option("--jobs", sim_jobs, "parallel mode runs");
    sim->add_flag("--force", sim_force, "overwrite existing outputs");

    // compare
    auto* cmp = app.add_subcommand("compare", "Compare two simulation summaries");
    std::string cmp_a, cmp_b, cmp_out;
    bool cmp_force = false;
    cmp->add_option("--a", cmp_a, "first summary.json")->required();
    cmp->add_option("--b", cmp_b, "second summary.json")->required();
    cmp->add_option("--out", cmp_out, "also write the comparison as json");
    cmp->add_flag("--force", cmp_force, "overwrite existing output");

    // timeline
    auto* tl = app.add_subcommand("timeline", "Dump a per-layer prefetch timeline as csv");
    std::string tl_scenario, tl_config, tl_phase = "decode", tl_mode = "continuous";
    std::string tl_out = "timeline.csv";
    std::uint64_t tl_seed = 0;
    bool tl_force = false;
    tl->add_option("--scenario", tl_scenario, "scenario file")->required();
    tl->add_option("--config", tl_config, "placement config file")->required();
    tl->add_option("--phase", tl_phase, "prefill | decode");
    tl->add_option("--mode", tl_mode, "continuous | next-layer");
    tl->add_option("--seed", tl_seed, "jitter seed");
    tl->add_option("--out", tl_out, "output csv");
    tl->add_flag("--force", tl_force, "overwrite existing output");

    try {
        app.parse(argc, argv);
        if (gen->parsed())
            return cmd_gen_workload(gen_intervals, gen_scenario, gen_seed, gen_top_k,
                                    gen_time_scale, gen_out, gen_force);
        if (plan->parsed()) return cmd_plan(plan_scenario, plan_config, plan_to);
        if (prof->parsed()) return cmd_profile(prof_scenario, prof_out, prof_force);
        if (sim->parsed())
            return cmd_simulate(sim_scenario, sim_workload, sim_mode, sim_policy, sim_out,
                                sim_seed, sim_gen_policy, sim_jobs, sim_force);
        if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out, cmp_force);
        if (tl->parsed())
            return cmd_timeline(tl_scenario, tl_config, tl_phase, tl_mode, tl_seed, tl_out,
                                tl_force);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
