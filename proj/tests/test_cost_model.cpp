// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ragsim/cost_model.hpp"
#include "ragsim/errors.hpp"
#include "ragsim/units.hpp"

using namespace ragsim;

namespace {

DatabaseProfile db32() {
    DatabaseProfile db;
    db.num_partitions = 32;
    db.partition_bytes = 8 * GiB;
    db.search_seconds_per_partition = 0.5;
    db.load_seconds_per_partition = 8.0;
    return db;
}

ModelProfile small_model() {
    ModelProfile m;
    m.num_layers = 4;
    m.weight_total = 4 * GiB;
    m.kv_bytes_per_request = 0;
    m.workspace_bytes_per_request = 0;
    m.compute_prefill_per_layer = 1e-3;
    m.compute_decode_per_layer = 5e-4;
    m.output_tokens = 3;
    return m;
}

PlacementConfig resident_cfg(int batch) {
    PlacementConfig cfg;
    cfg.w_gpu = 1.0;
    cfg.c_gpu = 1.0;
    cfg.gen_batch_size = batch;
    return cfg;
}

}  // namespace

TEST_CASE("retrieval time scans every partition") {
    DatabaseProfile db = db32();
    CHECK(retrieval_time(32, db) == doctest::Approx(16.0));
    CHECK(retrieval_time(0, db) == doctest::Approx(272.0));

    DatabaseProfile one;
    one.num_partitions = 1;
    one.partition_bytes = GiB;
    one.search_seconds_per_partition = 0.0;
    one.load_seconds_per_partition = 8.0;
    CHECK(retrieval_time(1, one) == doctest::Approx(0.0));
}

TEST_CASE("retrieval time is affine in resident partitions") {
    DatabaseProfile db = db32();
    for (int p = 0; p < db.num_partitions; ++p)
        CHECK(retrieval_time(p, db) - retrieval_time(p + 1, db) ==
              doctest::Approx(db.load_seconds_per_partition));
    CHECK_THROWS_AS(retrieval_time(33, db), Error);
}

TEST_CASE("power-law fit on an exact line") {
    std::vector<BatchTimeSample> samples{{2, 2}, {4, 4}, {8, 8}};
    CostModelFit fit = fit_power_law(samples);
    CHECK(fit.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.residual == doctest::Approx(0.0));
    CHECK(fit.sample_count == 3);
    CHECK(!fit.exponent_clamped);
}

TEST_CASE("power-law fit on a constant") {
    std::vector<BatchTimeSample> samples{{1, 3}, {4, 3}, {16, 3}};
    CostModelFit fit = fit_power_law(samples);
    CHECK(fit.a == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.c == doctest::Approx(0.0));
}

TEST_CASE("power-law fit recovers generated coefficients") {
    const double a = 2.0, c = 0.585;
    std::vector<BatchTimeSample> samples;
    for (double b : {1.0, 2.0, 4.0, 8.0, 16.0}) samples.push_back({b, a * std::pow(b, c)});
    CostModelFit fit = fit_power_law(samples);
    CHECK(fit.a == doctest::Approx(a).epsilon(1e-6));
    CHECK(fit.c == doctest::Approx(c).epsilon(1e-6));
}

TEST_CASE("decreasing samples clamp the exponent") {
    std::vector<BatchTimeSample> samples{{1, 8}, {2, 4}, {4, 2}};
    CostModelFit fit = fit_power_law(samples);
    CHECK(fit.c == 0.0);
    CHECK(fit.exponent_clamped);
    CHECK(fit.a == doctest::Approx(4.0)); // geometric mean of 8,4,2
    CHECK(fit.residual > 0.0);
}

TEST_CASE("underdetermined fits are rejected") {
    std::vector<BatchTimeSample> one_point{{4, 2}};
    CHECK_THROWS_WITH_AS(fit_power_law(one_point), "underdetermined fit", Error);
    std::vector<BatchTimeSample> one_batch{{4, 2}, {4, 2.5}};
    CHECK_THROWS_WITH_AS(fit_power_law(one_batch), "underdetermined fit", Error);
    std::vector<BatchTimeSample> negative{{1, 1}, {2, -1}};
    CHECK_THROWS_AS(fit_power_law(negative), Error);
}

TEST_CASE("prediction evaluates the power law") {
    CostModelFit unit{1.0, 1.0, 0.0, 2, false};
    CHECK(predict(unit, 64) == doctest::Approx(64.0));
    CostModelFit sub{1.0, 0.585, 0.0, 2, false};
    CHECK(predict(sub, 64) == doctest::Approx(std::pow(64.0, 0.585)));
    CHECK(predict(sub, 64) == doctest::Approx(11.39).epsilon(1e-3));
    CostModelFit flat{3.0, 0.0, 0.0, 2, false};
    CHECK(predict(flat, 1) == doctest::Approx(3.0));
    CHECK(predict(flat, 1000) == doctest::Approx(3.0));
}

TEST_CASE("fully resident generation equals the compute sum") {
    ModelProfile m = small_model();
    HardwareProfile hw = pf_high();
    hw.jitter_sigma = 0.0;
    int batch = 2;
    GenerationBreakdown bd =
        generation_breakdown(resident_cfg(batch), hw, m, PrefetchMode::ContinuousQueue, 1);
    double prefill = m.num_layers * m.compute_prefill_per_layer * batch;
    double decode_step = m.num_layers * m.compute_decode_per_layer * batch;
    CHECK(bd.prefill_time == doctest::Approx(prefill).epsilon(1e-12));
    CHECK(bd.decode_step_time == doctest::Approx(decode_step).epsilon(1e-12));
    CHECK(bd.total == doctest::Approx(prefill + m.output_tokens * decode_step).epsilon(1e-12));
}

TEST_CASE("output tokens scale the decode contribution linearly") {
    ModelProfile m = small_model();
    HardwareProfile hw = pf_high();
    hw.jitter_sigma = 0.0;
    GenerationBreakdown one =
        generation_breakdown(resident_cfg(4), hw, m, PrefetchMode::ContinuousQueue, 1);
    m.output_tokens *= 2;
    GenerationBreakdown two =
        generation_breakdown(resident_cfg(4), hw, m, PrefetchMode::ContinuousQueue, 1);
    CHECK(two.total - two.prefill_time ==
          doctest::Approx(2.0 * (one.total - one.prefill_time)).epsilon(1e-12));
}

TEST_CASE("offloading more weight never speeds generation up") {
    ModelProfile m = small_model();
    m.weight_total = 16 * GiB;
    m.num_layers = 8;
    HardwareProfile hw = pf_high();
    hw.jitter_sigma = 0.0;
    double prev = -1.0;
    for (double w_gpu : {1.0, 0.75, 0.5, 0.25, 0.0}) {
        PlacementConfig cfg;
        cfg.w_gpu = w_gpu;
        cfg.w_cpu = 1.0 - w_gpu;
        cfg.c_gpu = 1.0;
        cfg.gen_batch_size = 4;
        double t = generation_time(cfg, hw, m, PrefetchMode::ContinuousQueue, 1);
        if (prev >= 0.0) CHECK(t >= prev - 1e-12);
        prev = t;
    }
}

TEST_CASE("generation is deterministic per seed") {
    ModelProfile m = small_model();
    HardwareProfile hw = pf_high();
    hw.jitter_sigma = 0.3;
    double a1 = generation_time(resident_cfg(4), hw, m, PrefetchMode::ContinuousQueue, 42);
    double a2 = generation_time(resident_cfg(4), hw, m, PrefetchMode::ContinuousQueue, 42);
    double b = generation_time(resident_cfg(4), hw, m, PrefetchMode::ContinuousQueue, 43);
    CHECK(a1 == a2);
    CHECK(a1 != b);
}

TEST_CASE("infeasible placements are refused") {
    ModelProfile m = small_model();
    m.weight_total = 100 * GiB;
    HardwareProfile hw = pf_high();
    CHECK_THROWS_WITH_AS(
        generation_time(resident_cfg(1), hw, m, PrefetchMode::ContinuousQueue, 1),
        "placement infeasible", InfeasibleError);
}

TEST_CASE("kv transfer traffic applies to decode steps only") {
    ModelProfile m = small_model();
    m.weight_total = 4 * GiB;
    m.kv_bytes_per_request = 256 * MiB;
    HardwareProfile hw = pf_high();
    hw.jitter_sigma = 0.0;
    PlacementConfig cfg;
    cfg.w_gpu = 1.0;
    cfg.c_gpu = 0.0;
    cfg.c_cpu = 1.0; // KV lives on the host
    cfg.gen_batch_size = 4;

    LayerLoads prefill = layer_loads(cfg, hw, m, Phase::Prefill);
    LayerLoads decode = layer_loads(cfg, hw, m, Phase::Decode);
    for (double t : prefill.transfer) CHECK(t == 0.0);
    double per_layer = m.kv_cache_bytes(4) / m.num_layers / hw.bw_gpu_cpu;
    for (double t : decode.transfer) CHECK(t == doctest::Approx(per_layer));
}

TEST_CASE("cost fit serializes to json") {
    CostModelFit fit{2.5, 0.6, 0.01, 5, false};
    std::string j = to_json(fit);
    CHECK(j.find("\"a\": 2.5") != std::string::npos);
    CHECK(j.find("\"sample_count\": 5") != std::string::npos);
}
