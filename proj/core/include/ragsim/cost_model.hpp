// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ragsim/domain.hpp"
#include "ragsim/prefetch_timeline.hpp"
#include "ragsim/rng.hpp"

namespace ragsim {

// Fitted T(B) = a * B^c for one pipeline stage under one placement.
struct CostModelFit {
    double a = 1.0;        // seconds, > 0
    double c = 0.0;        // dimensionless exponent, >= 0
    double residual = 0.0; // RMSE of log T around the fit
    int sample_count = 0;
    bool exponent_clamped = false;

    bool operator==(const CostModelFit&) const = default;
};

// Every retrieval batch searches all partitions; the non-resident ones are
// loaded from disk first and released after. Independent of batch size.
double retrieval_time(int resident_partitions, const DatabaseProfile& db);

// Knobs the formulas of the generation model leave configurable.
struct GenerationCostParams {
    double decode_batch_exponent = 1.0;      // decode compute ~ B^exponent
    double decode_workspace_fraction = 0.25; // H(B) share still held during decode
    double kv_transfer_coeff = 1.0; // offloaded KV working-set traffic per decode step

    bool operator==(const GenerationCostParams&) const = default;
};

struct LayerLoads {
    std::vector<double> compute;  // seconds per layer
    std::vector<double> transfer; // seconds per layer
};

// Per-layer compute and transfer times for one step of the given phase.
// jitter, when non-null, draws one mean-preserving multiplier per layer.
LayerLoads layer_loads(const PlacementConfig& cfg, const HardwareProfile& hw,
                       const ModelProfile& model, Phase phase,
                       const GenerationCostParams& params = {}, Rng* jitter = nullptr);

struct GenerationBreakdown {
    double prefill_time = 0.0;
    double decode_step_time = 0.0;
    double total = 0.0; // prefill + output_tokens * decode_step
    int prefill_queue_capacity = 0;
    int decode_queue_capacity = 0;
};

// Simulates one prefill step and one decode step through the layer timeline
// and composes the batch total. Deterministic given the seed. Throws
// InfeasibleError("placement infeasible") if the GPU bound of the placement
// is violated (the CPU/disk bounds need the database and are the planner's
// job).
GenerationBreakdown generation_breakdown(const PlacementConfig& cfg, const HardwareProfile& hw,
                                         const ModelProfile& model, PrefetchMode mode,
                                         std::uint64_t seed,
                                         const GenerationCostParams& params = {});

double generation_time(const PlacementConfig& cfg, const HardwareProfile& hw,
                       const ModelProfile& model, PrefetchMode mode, std::uint64_t seed,
                       const GenerationCostParams& params = {});

struct BatchTimeSample {
    double batch_size = 0.0;
    double seconds = 0.0;
};

// Least squares on log T = log a + c log B, with c clamped to [0, inf).
// Throws Error("underdetermined fit") with fewer than two distinct batch
// sizes.
CostModelFit fit_power_law(std::span<const BatchTimeSample> samples);

double predict(const CostModelFit& fit, double batch_size);

std::string to_json(const CostModelFit& fit);

}  // namespace ragsim
