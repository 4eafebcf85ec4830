// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/memory_planner.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace ragsim {

FeasibilityReport check_feasible(const PlacementConfig& cfg, const HardwareProfile& hw,
                                 const ModelProfile& model, const DatabaseProfile& db) {
    const double weights = static_cast<double>(model.weight_total);
    const double cache = model.kv_cache_bytes(cfg.gen_batch_size);
    const double workspace = model.workspace_bytes(cfg.gen_batch_size);
    const double partition = static_cast<double>(db.partition_bytes);

    FeasibilityReport r;
    r.gpu_used = cfg.w_gpu * weights + cfg.c_gpu * cache + workspace;
    r.cpu_used = cfg.w_cpu * weights + cfg.c_cpu * cache + cfg.resident_partitions * partition;
    r.disk_used = cfg.w_disk * weights + cfg.c_disk * cache +
                  (db.num_partitions - cfg.resident_partitions) * partition;
    r.gpu_slack = static_cast<double>(hw.gpu_mem) - r.gpu_used;
    r.cpu_slack = static_cast<double>(hw.cpu_mem) - r.cpu_used;
    r.disk_slack = static_cast<double>(hw.disk_capacity) - r.disk_used;
    // 1e-9 relative grace absorbs fraction-grid rounding, matching the
    // tolerance the fraction-sum invariant uses.
    auto within = [](double slack, Bytes cap) {
        return slack >= -1e-9 * static_cast<double>(cap);
    };
    r.feasible = within(r.gpu_slack, hw.gpu_mem) && within(r.cpu_slack, hw.cpu_mem) &&
                 within(r.disk_slack, hw.disk_capacity);
    return r;
}

PlacementGrid default_grid(const DatabaseProfile& db, int max_batch) {
    PlacementGrid grid;
    for (int i = 0; i <= 20; ++i) grid.w_gpu_steps.push_back(i / 20.0);
    grid.c_gpu_steps = grid.w_gpu_steps;
    for (int p = 0; p <= db.num_partitions; ++p) grid.partition_values.push_back(p);
    for (int b = 1; b <= max_batch; b *= 2) grid.batch_values.push_back(b);
    return grid;
}

PlacementConfig complete_placement(double w_gpu, double c_gpu, int partitions, int batch,
                                   const HardwareProfile& hw, const ModelProfile& model,
                                   const DatabaseProfile& db) {
    const double weights = static_cast<double>(model.weight_total);
    const double cache = model.kv_cache_bytes(batch);

    PlacementConfig cfg;
    cfg.w_gpu = w_gpu;
    cfg.c_gpu = c_gpu;
    cfg.resident_partitions = partitions;
    cfg.gen_batch_size = batch;

    double cpu_budget = static_cast<double>(hw.cpu_mem) -
                        partitions * static_cast<double>(db.partition_bytes);

    double w_rest = 1.0 - w_gpu;
    cfg.w_cpu = std::clamp(cpu_budget / weights, 0.0, w_rest);
    cfg.w_disk = w_rest - cfg.w_cpu;
    cpu_budget -= cfg.w_cpu * weights;

    double c_rest = 1.0 - c_gpu;
    cfg.c_cpu = cache > 0.0 ? std::clamp(cpu_budget / cache, 0.0, c_rest) : c_rest;
    cfg.c_disk = c_rest - cfg.c_cpu;
    return cfg;
}

std::vector<PlacementConfig> enumerate_feasible(const HardwareProfile& hw,
                                                const ModelProfile& model,
                                                const DatabaseProfile& db,
                                                const PlacementGrid& grid) {
    auto ordered = [](auto values) {
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        return values;
    };
    // output is lexicographic in (B, P, w_gpu, c_gpu) regardless of grid order
    std::vector<PlacementConfig> out;
    for (int b : ordered(grid.batch_values))
        for (int p : ordered(grid.partition_values))
            for (double wg : ordered(grid.w_gpu_steps))
                for (double cg : ordered(grid.c_gpu_steps)) {
                    PlacementConfig cfg = complete_placement(wg, cg, p, b, hw, model, db);
                    if (check_feasible(cfg, hw, model, db).feasible) out.push_back(cfg);
                }
    return out;
}

int max_feasible_batch(const PlacementConfig& base, const HardwareProfile& hw,
                       const ModelProfile& model, const DatabaseProfile& db) {
    PlacementConfig probe = base;
    probe.gen_batch_size = 1;
    if (!check_feasible(probe, hw, model, db).feasible) return 0;

    int good = 1;
    while (good < (1 << 20)) {
        probe.gen_batch_size = good * 2;
        if (!check_feasible(probe, hw, model, db).feasible) break;
        good *= 2;
    }
    int bad = good * 2;
    while (bad - good > 1) {
        int mid = good + (bad - good) / 2;
        probe.gen_batch_size = mid;
        if (check_feasible(probe, hw, model, db).feasible)
            good = mid;
        else
            bad = mid;
    }
    return good;
}

TransferPlan plan_transfer(const PlacementConfig& from, const PlacementConfig& to,
                           const HardwareProfile& hw, const ModelProfile& model,
                           const DatabaseProfile& db, const WeightOffloadHistory& history) {
    const double weights = static_cast<double>(model.weight_total);

    TransferPlan plan;
    // Anything entering or leaving the GPU crosses the GPU-host link.
    plan.bytes_gpu_cpu = std::fabs(to.w_gpu - from.w_gpu) * weights;

    // Host-disk link: loads back from disk are always paid; writes to disk
    // are paid only past the high-water mark of previously offloaded bytes.
    double disk_delta = to.w_disk - from.w_disk;
    if (disk_delta > 0.0) {
        double already = std::max(from.w_disk, history.max_disk_fraction);
        plan.first_time_disk_offload = std::max(0.0, to.w_disk - already) * weights;
        plan.bytes_cpu_disk += plan.first_time_disk_offload;
    } else {
        plan.bytes_cpu_disk += -disk_delta * weights;
    }

    // Partition residency: each load or release moves M_p across the link.
    plan.bytes_cpu_disk += std::abs(to.resident_partitions - from.resident_partitions) *
                           static_cast<double>(db.partition_bytes);

    plan.duration =
        plan.bytes_gpu_cpu / hw.bw_gpu_cpu + plan.bytes_cpu_disk / hw.bw_cpu_disk;
    return plan;
}

std::string to_json(const FeasibilityReport& r) {
    nlohmann::json j{{"feasible", r.feasible},
                     {"gpu_used", r.gpu_used},
                     {"cpu_used", r.cpu_used},
                     {"disk_used", r.disk_used},
                     {"gpu_slack", r.gpu_slack},
                     {"cpu_slack", r.cpu_slack},
                     {"disk_slack", r.disk_slack}};
    return j.dump(2);
}

std::string to_json(const TransferPlan& p) {
    nlohmann::json j{{"bytes_gpu_cpu", p.bytes_gpu_cpu},
                     {"bytes_cpu_disk", p.bytes_cpu_disk},
                     {"first_time_disk_offload", p.first_time_disk_offload},
                     {"duration", p.duration}};
    return j.dump(2);
}

}  // namespace ragsim
