// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/prefetch_timeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ragsim/errors.hpp"

namespace ragsim {

const char* to_string(PrefetchMode mode) {
    return mode == PrefetchMode::ContinuousQueue ? "continuous" : "next-layer";
}

const char* to_string(Phase phase) {
    return phase == Phase::Prefill ? "prefill" : "decode";
}

LayerTimeline simulate_layer_timeline(std::span<const double> compute,
                                      std::span<const double> transfer, int queue_capacity,
                                      PrefetchMode mode) {
    if (compute.size() != transfer.size())
        throw Error("simulate_layer_timeline: compute and transfer lengths differ");
    if (queue_capacity < 1) throw Error("simulate_layer_timeline: queue capacity must be >= 1");

    const std::size_t n = compute.size();
    LayerTimeline tl;
    tl.layers.resize(n);

    // compute_end of already-scheduled offloaded layers, ascending; the gate
    // for transfer j is when enough of them have been consumed.
    std::vector<double> pending_compute_ends;
    double channel_free = 0.0;
    double prev_compute_end = 0.0;
    double prev_compute_start = 0.0;

    for (std::size_t j = 0; j < n; ++j) {
        auto& row = tl.layers[j];
        if (transfer[j] > 0.0) {
            double start = channel_free;
            if (mode == PrefetchMode::NextLayerOnly && j > 0)
                start = std::max(start, prev_compute_start);
            if (queue_capacity != kUnboundedQueueCapacity) {
                // Fetched-but-uncomputed layers at the start instant: those
                // with compute_end strictly after it.
                auto held_at = [&](double t) {
                    return pending_compute_ends.end() -
                           std::upper_bound(pending_compute_ends.begin(),
                                            pending_compute_ends.end(), t);
                };
                long held = held_at(start);
                if (held >= queue_capacity) {
                    // Wait until enough earlier layers finish computing.
                    std::size_t idx = pending_compute_ends.size() - queue_capacity;
                    start = std::max(start, pending_compute_ends[idx]);
                }
            }
            row.transfer_start = start;
            row.transfer_end = start + transfer[j];
            channel_free = row.transfer_end;
        } else {
            row.transfer_start = 0.0;
            row.transfer_end = 0.0;
        }

        row.compute_start = std::max(prev_compute_end, row.transfer_end);
        row.compute_end = row.compute_start + compute[j];
        tl.total_stall += std::max(0.0, row.transfer_end - prev_compute_end);
        prev_compute_end = row.compute_end;
        prev_compute_start = row.compute_start;
        if (transfer[j] > 0.0) pending_compute_ends.push_back(row.compute_end);
    }
    tl.total = prev_compute_end;
    return tl;
}

int queue_capacity(const PlacementConfig& cfg, const HardwareProfile& hw,
                   const ModelProfile& model, Phase phase, double decode_workspace_fraction) {
    const double weights = static_cast<double>(model.weight_total);
    const double per_layer_offloaded = (1.0 - cfg.w_gpu) * model.per_layer_weight();
    if (per_layer_offloaded <= 0.0) return kUnboundedQueueCapacity;

    double workspace = model.workspace_bytes(cfg.gen_batch_size);
    if (phase == Phase::Decode) workspace *= decode_workspace_fraction;
    double free_gpu = static_cast<double>(hw.gpu_mem) - cfg.w_gpu * weights -
                      cfg.c_gpu * model.kv_cache_bytes(cfg.gen_batch_size) - workspace;
    return std::max(1, static_cast<int>(std::floor(free_gpu / per_layer_offloaded)));
}

std::string timeline_csv(const LayerTimeline& tl) {
    std::string out = "layer,transfer_start,transfer_end,compute_start,compute_end\n";
    char buf[192];
    for (std::size_t i = 0; i < tl.layers.size(); ++i) {
        const auto& row = tl.layers[i];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, row.transfer_start,
                      row.transfer_end, row.compute_start, row.compute_end);
        out += buf;
    }
    return out;
}

}  // namespace ragsim
