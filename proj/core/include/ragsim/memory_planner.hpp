// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ragsim/domain.hpp"

namespace ragsim {

// Byte usage per device for one placement, with signed slack against the
// capacity bounds. Bytes are continuous here; fragmentation is not modeled.
struct FeasibilityReport {
    bool feasible = false;
    double gpu_used = 0.0, cpu_used = 0.0, disk_used = 0.0;
    double gpu_slack = 0.0, cpu_slack = 0.0, disk_slack = 0.0;
};

// gpu:  w_gpu*W + c_gpu*C(B) + H(B)
// cpu:  w_cpu*W + c_cpu*C(B) + P*M_p
// disk: w_disk*W + c_disk*C(B) + (N_p - P)*M_p
FeasibilityReport check_feasible(const PlacementConfig& cfg, const HardwareProfile& hw,
                                 const ModelProfile& model, const DatabaseProfile& db);

struct PlacementGrid {
    std::vector<double> w_gpu_steps;
    std::vector<double> c_gpu_steps;
    std::vector<int> partition_values;
    std::vector<int> batch_values;
};

// 0.05-step fractions, every partition count, powers of two up to max_batch.
PlacementGrid default_grid(const DatabaseProfile& db, int max_batch = 64);

// Completion rule shared by enumeration and the profiler: given the GPU
// shares, the non-GPU remainder fills CPU up to capacity before spilling to
// disk (weights first, then cache).
PlacementConfig complete_placement(double w_gpu, double c_gpu, int partitions, int batch,
                                   const HardwareProfile& hw, const ModelProfile& model,
                                   const DatabaseProfile& db);

// Grid points passing check_feasible, ordered lexicographically by
// (B, P, w_gpu, c_gpu). Empty output signals an infeasible scenario.
std::vector<PlacementConfig> enumerate_feasible(const HardwareProfile& hw,
                                                const ModelProfile& model,
                                                const DatabaseProfile& db,
                                                const PlacementGrid& grid);

// Largest gen_batch_size keeping the placement feasible with fractions and
// partitions fixed; 0 when even B = 1 does not fit.
int max_feasible_batch(const PlacementConfig& base, const HardwareProfile& hw,
                       const ModelProfile& model, const DatabaseProfile& db);

// Weight tensors have a fixed disk-priority order, so a disk share f always
// holds the same f-tail of the weights. Offloaded tensors keep their file, so
// re-offloading below the high-water mark is free.
struct WeightOffloadHistory {
    double max_disk_fraction = 0.0;

    void record(const PlacementConfig& cfg) {
        if (cfg.w_disk > max_disk_fraction) max_disk_fraction = cfg.w_disk;
    }
};

struct TransferPlan {
    double bytes_gpu_cpu = 0.0;   // both directions summed
    double bytes_cpu_disk = 0.0;  // both directions summed
    double first_time_disk_offload = 0.0;  // newly written weight bytes
    double duration = 0.0;        // sequential-link model

    bool is_noop() const { return duration == 0.0; }
};

// Weight movement maps tier deltas onto the two links (GPU<->disk routes
// through both). KV cache moves nothing: it is cleared and reinitialized per
// batch. Partition residency changes move |dP|*M_p on the host-disk link.
TransferPlan plan_transfer(const PlacementConfig& from, const PlacementConfig& to,
                           const HardwareProfile& hw, const ModelProfile& model,
                           const DatabaseProfile& db,
                           const WeightOffloadHistory& history = {});

std::string to_json(const FeasibilityReport& report);
std::string to_json(const TransferPlan& plan);

}  // namespace ragsim
