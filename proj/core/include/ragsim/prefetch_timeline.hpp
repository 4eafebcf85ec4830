// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ragsim/domain.hpp"

namespace ragsim {

// NextLayerOnly: depth-1 prefetch; layer i+1's fetch may begin once layer i
// starts computing. ContinuousQueue: fetches are enqueued as fast as the
// transfer channel and the prefetch queue capacity allow.
enum class PrefetchMode { NextLayerOnly, ContinuousQueue };

enum class Phase { Prefill, Decode };

const char* to_string(PrefetchMode mode);
const char* to_string(Phase phase);

// One inference step at layer granularity. A single transfer channel feeds a
// single compute channel; layers compute strictly in order.
struct LayerTimeline {
    struct Layer {
        double transfer_start = 0.0;
        double transfer_end = 0.0;
        double compute_start = 0.0;
        double compute_end = 0.0;
    };
    std::vector<Layer> layers;
    double total = 0.0;        // last compute_end
    double total_stall = 0.0;  // sum of max(0, transfer_end - previous compute_end)
};

inline constexpr int kUnboundedQueueCapacity = std::numeric_limits<int>::max();

// Layers with transfer == 0 are GPU-resident and bypass the transfer channel.
// At most queue_capacity fetched-but-uncomputed offloaded layers may exist
// when a new transfer begins (applies to both modes).
LayerTimeline simulate_layer_timeline(std::span<const double> compute,
                                      std::span<const double> transfer, int queue_capacity,
                                      PrefetchMode mode);

// floor(free_gpu / per-layer offloaded bytes), at least 1. Decode frees most
// of the prefill workspace, so it prefetches deeper. Returns
// kUnboundedQueueCapacity when the weights are fully GPU-resident.
int queue_capacity(const PlacementConfig& cfg, const HardwareProfile& hw,
                   const ModelProfile& model, Phase phase,
                   double decode_workspace_fraction = 0.25);

// One row per layer: layer,transfer_start,transfer_end,compute_start,compute_end
std::string timeline_csv(const LayerTimeline& timeline);

}  // namespace ragsim
