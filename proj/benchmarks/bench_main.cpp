// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "ragsim/cost_model.hpp"
#include "ragsim/memory_planner.hpp"
#include "ragsim/prefetch_timeline.hpp"
#include "ragsim/rng.hpp"
#include "ragsim/scheduler.hpp"
#include "ragsim/simulator.hpp"
#include "ragsim/units.hpp"
#include "ragsim/workload.hpp"

using namespace ragsim;

namespace {

ModelProfile bench_model(int layers) {
    ModelProfile m;
    m.num_layers = layers;
    m.weight_total = 16 * GiB;
    m.kv_bytes_per_request = 128 * MiB;
    m.workspace_bytes_per_request = 64 * MiB;
    m.compute_prefill_per_layer = 0.004;
    m.compute_decode_per_layer = 0.0007;
    m.output_tokens = 64;
    return m;
}

DatabaseProfile bench_db() {
    DatabaseProfile db;
    db.num_partitions = 32;
    db.partition_bytes = 8 * GiB;
    db.search_seconds_per_partition = 0.5;
    db.load_seconds_per_partition = 5.5;
    return db;
}

PlacementConfig bench_placement(int batch) {
    PlacementConfig cfg;
    cfg.w_gpu = 0.75;
    cfg.w_cpu = 0.25;
    cfg.c_gpu = 0.5;
    cfg.c_cpu = 0.5;
    cfg.resident_partitions = 8;
    cfg.gen_batch_size = batch;
    return cfg;
}

void BM_LayerTimeline(benchmark::State& state) {
    int layers = static_cast<int>(state.range(0));
    PrefetchMode mode =
        state.range(1) ? PrefetchMode::ContinuousQueue : PrefetchMode::NextLayerOnly;
    Rng rng(1);
    std::vector<double> compute(layers), transfer(layers);
    for (int i = 0; i < layers; ++i) {
        compute[i] = rng.next_uniform() * 0.01;
        transfer[i] = rng.next_uniform() * 0.01;
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_layer_timeline(compute, transfer, 4, mode).total);
}
BENCHMARK(BM_LayerTimeline)->Args({32, 1})->Args({32, 0})->Args({80, 1})->Args({80, 0});

void BM_GenerationTime(benchmark::State& state) {
    HardwareProfile hw = pf_high();
    hw.jitter_sigma = 0.05;
    ModelProfile model = bench_model(static_cast<int>(state.range(0)));
    PlacementConfig cfg = bench_placement(32);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            generation_time(cfg, hw, model, PrefetchMode::ContinuousQueue, seed++));
}
BENCHMARK(BM_GenerationTime)->Arg(32)->Arg(80);

void BM_FitPowerLaw(benchmark::State& state) {
    Rng rng(2);
    std::vector<BatchTimeSample> samples;
    for (int i = 0; i < state.range(0); ++i) {
        double b = 1.0 + static_cast<double>(i);
        samples.push_back({b, 2.0 * std::pow(b, 0.585) * rng.next_jitter(0.05)});
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_power_law(samples).a);
}
BENCHMARK(BM_FitPowerLaw)->Arg(8)->Arg(64);

void BM_CheckFeasible(benchmark::State& state) {
    HardwareProfile hw = pf_high();
    ModelProfile model = bench_model(32);
    DatabaseProfile db = bench_db();
    PlacementConfig cfg = bench_placement(32);
    for (auto _ : state)
        benchmark::DoNotOptimize(check_feasible(cfg, hw, model, db).feasible);
}
BENCHMARK(BM_CheckFeasible);

void BM_EnumerateFeasible(benchmark::State& state) {
    HardwareProfile hw = pf_high();
    ModelProfile model = bench_model(32);
    DatabaseProfile db = bench_db();
    PlacementGrid grid = default_grid(db, 64);
    for (auto _ : state)
        benchmark::DoNotOptimize(enumerate_feasible(hw, model, db, grid).size());
}
BENCHMARK(BM_EnumerateFeasible)->Unit(benchmark::kMillisecond);

void BM_ChooseGenerationBatch(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    std::vector<Request> backlog(n);
    for (int i = 0; i < n; ++i) backlog[i] = {static_cast<std::uint64_t>(i), 0.0, 5};
    std::vector<int> candidates{8, 16, 32, 64};
    CostModelFit fit{2.0, 0.4, 0.0, 5, false};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            choose_generation_batch(backlog, candidates, fit, 64).chosen_batch);
}
BENCHMARK(BM_ChooseGenerationBatch)->Arg(16)->Arg(256);

void BM_GeneratePoisson(benchmark::State& state) {
    IntervalSchedule schedule = default_schedule();
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(generate_poisson(schedule, seed++, 5).size());
}
BENCHMARK(BM_GeneratePoisson)->Unit(benchmark::kMicrosecond);

void BM_FullSimulation(benchmark::State& state) {
    SimConfig cfg;
    cfg.mode = state.range(0) ? SimMode::Pipelined : SimMode::Serial;
    cfg.hardware = pf_high();
    cfg.hardware.jitter_sigma = 0.05;
    cfg.model = bench_model(32);
    cfg.database = bench_db();
    cfg.schedule = default_schedule();
    cfg.seed = 7;

    PolicyEntry entry;
    entry.config = bench_placement(64);
    entry.fit = CostModelFit{2.0, 0.4, 0.0, 5, false};
    entry.max_feasible_batch = 64;
    cfg.policy.candidates = {8, 16, 32, 64};
    cfg.policy.entries = {entry};
    cfg.serial_placement = bench_placement(64);

    std::vector<Request> workload = generate_poisson(cfg.schedule, 7, 5);
    for (auto _ : state) benchmark::DoNotOptimize(run(workload, cfg).makespan);
}
BENCHMARK(BM_FullSimulation)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
