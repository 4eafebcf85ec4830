// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ragsim/units.hpp"

namespace ragsim {

// Tolerance for fraction-partition checks (w_gpu + w_cpu + w_disk == 1).
inline constexpr double kFractionTolerance = 1e-9;

// Device capacities and link speeds of one serving platform. Profiles are
// always declared, never probed from real hardware.
struct HardwareProfile {
    Bytes gpu_mem = 0;
    Bytes cpu_mem = 0;
    Bytes disk_capacity = 0;
    double bw_gpu_cpu = 0.0;   // bytes/second on the GPU-host link
    double bw_cpu_disk = 0.0;  // bytes/second on the host-disk link
    double gpu_layer_rate = 1.0;  // scales the model's per-layer compute times
    double jitter_sigma = 0.0;    // log-space stddev of mean-preserving compute jitter

    bool operator==(const HardwareProfile&) const = default;
};

// 24 GiB GPU / 256 GiB host / PCIe4-class link.
HardwareProfile pf_high();
// 12 GiB GPU / 176 GiB host / PCIe3-class link.
HardwareProfile pf_low();

struct ModelProfile {
    int num_layers = 1;
    Bytes weight_total = 0;                // W_total
    Bytes kv_bytes_per_request = 0;        // C(B) = B * kv_bytes_per_request
    Bytes workspace_bytes_per_request = 0; // H(B) = B * workspace_bytes_per_request
    double compute_prefill_per_layer = 0.0; // seconds per layer per request
    double compute_decode_per_layer = 0.0;  // seconds per layer per request
    int output_tokens = 1;

    double per_layer_weight() const {
        return static_cast<double>(weight_total) / static_cast<double>(num_layers);
    }
    double kv_cache_bytes(int batch) const {
        return static_cast<double>(kv_bytes_per_request) * batch;
    }
    double workspace_bytes(int batch) const {
        return static_cast<double>(workspace_bytes_per_request) * batch;
    }

    bool operator==(const ModelProfile&) const = default;
};

struct DatabaseProfile {
    int num_partitions = 1;    // N_p
    Bytes partition_bytes = 0; // M_p
    double search_seconds_per_partition = 0.0; // per retrieval batch per partition
    double load_seconds_per_partition = 0.0;   // disk -> RAM load per partition

    double total_bytes() const {
        return static_cast<double>(partition_bytes) * num_partitions;
    }

    bool operator==(const DatabaseProfile&) const = default;
};

// partition_bytes / bw_cpu_disk, for profiles that leave the load time implicit.
double derived_partition_load_seconds(const DatabaseProfile& db, const HardwareProfile& hw);

// Per-tier placement shares for weights and KV cache, plus the two knobs the
// scheduler tunes at runtime: resident partition count and generation batch.
struct PlacementConfig {
    double w_gpu = 0.0, w_cpu = 0.0, w_disk = 0.0; // weight byte fractions
    double c_gpu = 0.0, c_cpu = 0.0, c_disk = 0.0; // KV cache byte fractions
    int resident_partitions = 0;  // P
    int gen_batch_size = 1;       // B

    bool operator==(const PlacementConfig&) const = default;
};

struct Request {
    std::uint64_t id = 0;
    double arrival_time = 0.0; // seconds
    int top_k = 1;

    bool operator==(const Request&) const = default;
};

// Per-request timestamps through the two pipeline stages. Waiting covers both
// queues: before retrieval and between retrieval and generation.
struct RequestTrace {
    std::uint64_t id = 0;
    double arrival = 0.0;
    double retrieval_start = 0.0;
    double retrieval_end = 0.0;
    double generation_start = 0.0;
    double generation_end = 0.0;

    double completion() const { return generation_end; }
    double waiting() const {
        return (retrieval_start - arrival) + (generation_start - retrieval_end);
    }
    double retrieval() const { return retrieval_end - retrieval_start; }
    double generation() const { return generation_end - generation_start; }
    double latency() const { return completion() - arrival; }

    bool operator==(const RequestTrace&) const = default;
};

// One violated invariant: which field, and what was observed. Violations are
// data, not failures; callers decide whether to throw.
struct Violation {
    std::string field;
    std::string message;
};
using Violations = std::vector<Violation>;

Violations validate(const HardwareProfile& hw);
Violations validate(const ModelProfile& model);
Violations validate(const DatabaseProfile& db);
Violations validate(const PlacementConfig& cfg);
// Additionally checks resident_partitions against the database partition count.
Violations validate(const PlacementConfig& cfg, const DatabaseProfile& db);
Violations validate(const Request& request);
Violations validate(const RequestTrace& trace);

std::string describe(const Violations& violations);

}  // namespace ragsim
