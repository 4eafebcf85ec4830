// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "ragsim/errors.hpp"

namespace ragsim {

double retrieval_time(int resident_partitions, const DatabaseProfile& db) {
    if (resident_partitions < 0 || resident_partitions > db.num_partitions)
        throw Error("retrieval_time: resident partitions out of range");
    int missing = db.num_partitions - resident_partitions;
    return resident_partitions * db.search_seconds_per_partition +
           missing * (db.load_seconds_per_partition + db.search_seconds_per_partition);
}

LayerLoads layer_loads(const PlacementConfig& cfg, const HardwareProfile& hw,
                       const ModelProfile& model, Phase phase,
                       const GenerationCostParams& params, Rng* jitter) {
    const int batch = cfg.gen_batch_size;
    const double layer_weight = model.per_layer_weight();

    double base_compute;
    if (phase == Phase::Prefill) {
        base_compute = model.compute_prefill_per_layer * batch;
    } else {
        base_compute =
            model.compute_decode_per_layer * std::pow(batch, params.decode_batch_exponent);
    }
    base_compute *= hw.gpu_layer_rate;

    // Weight traffic per layer; the disk share routes through both links.
    double weight_transfer = cfg.w_cpu * layer_weight / hw.bw_gpu_cpu +
                             cfg.w_disk * layer_weight * (1.0 / hw.bw_cpu_disk + 1.0 / hw.bw_gpu_cpu);

    // Offloaded share of the KV working set crosses per decode step.
    double kv_transfer = 0.0;
    if (phase == Phase::Decode) {
        double kv_per_layer = model.kv_cache_bytes(batch) / model.num_layers;
        kv_transfer = params.kv_transfer_coeff *
                      (cfg.c_cpu * kv_per_layer / hw.bw_gpu_cpu +
                       cfg.c_disk * kv_per_layer * (1.0 / hw.bw_cpu_disk + 1.0 / hw.bw_gpu_cpu));
    }

    LayerLoads loads;
    loads.compute.reserve(model.num_layers);
    loads.transfer.assign(model.num_layers, weight_transfer + kv_transfer);
    for (int i = 0; i < model.num_layers; ++i) {
        double factor = jitter ? jitter->next_jitter(hw.jitter_sigma) : 1.0;
        loads.compute.push_back(base_compute * factor);
    }
    return loads;
}

GenerationBreakdown generation_breakdown(const PlacementConfig& cfg, const HardwareProfile& hw,
                                         const ModelProfile& model, PrefetchMode mode,
                                         std::uint64_t seed, const GenerationCostParams& params) {
    const double gpu_used = cfg.w_gpu * static_cast<double>(model.weight_total) +
                            cfg.c_gpu * model.kv_cache_bytes(cfg.gen_batch_size) +
                            model.workspace_bytes(cfg.gen_batch_size);
    if (gpu_used > static_cast<double>(hw.gpu_mem) * (1.0 + 1e-9))
        throw InfeasibleError("placement infeasible");

    GenerationBreakdown out;
    out.prefill_queue_capacity =
        queue_capacity(cfg, hw, model, Phase::Prefill, params.decode_workspace_fraction);
    out.decode_queue_capacity =
        queue_capacity(cfg, hw, model, Phase::Decode, params.decode_workspace_fraction);

    Rng rng(seed);
    LayerLoads prefill = layer_loads(cfg, hw, model, Phase::Prefill, params, &rng);
    out.prefill_time =
        simulate_layer_timeline(prefill.compute, prefill.transfer, out.prefill_queue_capacity, mode)
            .total;

    LayerLoads decode = layer_loads(cfg, hw, model, Phase::Decode, params, &rng);
    out.decode_step_time =
        simulate_layer_timeline(decode.compute, decode.transfer, out.decode_queue_capacity, mode)
            .total;

    out.total = out.prefill_time + model.output_tokens * out.decode_step_time;
    return out;
}

double generation_time(const PlacementConfig& cfg, const HardwareProfile& hw,
                       const ModelProfile& model, PrefetchMode mode, std::uint64_t seed,
                       const GenerationCostParams& params) {
    return generation_breakdown(cfg, hw, model, mode, seed, params).total;
}

CostModelFit fit_power_law(std::span<const BatchTimeSample> samples) {
    std::set<double> distinct;
    for (const auto& s : samples) {
        if (s.batch_size <= 0.0 || s.seconds <= 0.0)
            throw Error("fit_power_law: samples must be positive");
        distinct.insert(s.batch_size);
    }
    if (samples.size() < 2 || distinct.size() < 2) throw Error("underdetermined fit");

    const double n = static_cast<double>(samples.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : samples) {
        double x = std::log(s.batch_size);
        double y = std::log(s.seconds);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    CostModelFit fit;
    fit.sample_count = static_cast<int>(samples.size());
    if (slope < 0.0) {
        fit.c = 0.0;
        fit.exponent_clamped = true;
        fit.a = std::exp(sy / n); // best constant in log space
    } else {
        fit.c = slope;
        fit.a = std::exp((sy - slope * sx) / n);
    }

    double sq = 0.0;
    for (const auto& s : samples) {
        double err = std::log(s.seconds) - (std::log(fit.a) + fit.c * std::log(s.batch_size));
        sq += err * err;
    }
    fit.residual = std::sqrt(sq / n);
    return fit;
}

double predict(const CostModelFit& fit, double batch_size) {
    return fit.a * std::pow(batch_size, fit.c);
}

std::string to_json(const CostModelFit& fit) {
    nlohmann::json j{{"a", fit.a},
                     {"c", fit.c},
                     {"residual", fit.residual},
                     {"sample_count", fit.sample_count},
                     {"exponent_clamped", fit.exponent_clamped}};
    return j.dump(2);
}

}  // namespace ragsim
