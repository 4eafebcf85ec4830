// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/domain.hpp"

#include <cmath>
#include <sstream>

namespace ragsim {

namespace {

void require(Violations& out, bool ok, const std::string& field, const std::string& message) {
    if (!ok) out.push_back({field, message});
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

HardwareProfile pf_high() {
    HardwareProfile hw;
    hw.gpu_mem = 24 * GiB;
    hw.cpu_mem = 256 * GiB;
    hw.disk_capacity = 8 * TiB;
    hw.bw_gpu_cpu = 64.0 * static_cast<double>(GiB);
    hw.bw_cpu_disk = 3.0 * static_cast<double>(GiB);
    hw.gpu_layer_rate = 1.0;
    hw.jitter_sigma = 0.0;
    return hw;
}

HardwareProfile pf_low() {
    HardwareProfile hw;
    hw.gpu_mem = 12 * GiB;
    hw.cpu_mem = 176 * GiB;
    hw.disk_capacity = 2 * TiB;
    hw.bw_gpu_cpu = 32.0 * static_cast<double>(GiB);
    hw.bw_cpu_disk = 1.5 * static_cast<double>(GiB);
    hw.gpu_layer_rate = 1.5;
    hw.jitter_sigma = 0.0;
    return hw;
}

double derived_partition_load_seconds(const DatabaseProfile& db, const HardwareProfile& hw) {
    return static_cast<double>(db.partition_bytes) / hw.bw_cpu_disk;
}

Violations validate(const HardwareProfile& hw) {
    Violations v;
    require(v, hw.gpu_mem > 0, "gpu_mem", "must be > 0, got " + std::to_string(hw.gpu_mem));
    require(v, hw.cpu_mem > 0, "cpu_mem", "must be > 0, got " + std::to_string(hw.cpu_mem));
    require(v, hw.disk_capacity > 0, "disk_capacity",
            "must be > 0, got " + std::to_string(hw.disk_capacity));
    require(v, hw.bw_gpu_cpu > 0, "bw_gpu_cpu", "must be > 0, got " + num(hw.bw_gpu_cpu));
    require(v, hw.bw_cpu_disk > 0, "bw_cpu_disk", "must be > 0, got " + num(hw.bw_cpu_disk));
    require(v, hw.gpu_layer_rate > 0, "gpu_layer_rate",
            "must be > 0, got " + num(hw.gpu_layer_rate));
    require(v, hw.jitter_sigma >= 0, "jitter_sigma",
            "must be >= 0, got " + num(hw.jitter_sigma));
    return v;
}

Violations validate(const ModelProfile& m) {
    Violations v;
    require(v, m.num_layers >= 1, "num_layers", "must be >= 1, got " + std::to_string(m.num_layers));
    require(v, m.weight_total > 0, "weight_total",
            "must be > 0, got " + std::to_string(m.weight_total));
    require(v, m.compute_prefill_per_layer >= 0, "compute_prefill_per_layer",
            "must be >= 0, got " + num(m.compute_prefill_per_layer));
    require(v, m.compute_decode_per_layer >= 0, "compute_decode_per_layer",
            "must be >= 0, got " + num(m.compute_decode_per_layer));
    require(v, m.output_tokens >= 1, "output_tokens",
            "must be >= 1, got " + std::to_string(m.output_tokens));
    return v;
}

Violations validate(const DatabaseProfile& db) {
    Violations v;
    require(v, db.num_partitions >= 1, "num_partitions",
            "must be >= 1, got " + std::to_string(db.num_partitions));
    require(v, db.partition_bytes > 0, "partition_bytes",
            "must be > 0, got " + std::to_string(db.partition_bytes));
    require(v, db.search_seconds_per_partition >= 0, "search_seconds_per_partition",
            "must be >= 0, got " + num(db.search_seconds_per_partition));
    require(v, db.load_seconds_per_partition >= 0, "load_seconds_per_partition",
            "must be >= 0, got " + num(db.load_seconds_per_partition));
    return v;
}

Violations validate(const PlacementConfig& cfg) {
    Violations v;
    auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
    require(v, in_unit(cfg.w_gpu), "w_gpu", "must be in [0,1], got " + num(cfg.w_gpu));
    require(v, in_unit(cfg.w_cpu), "w_cpu", "must be in [0,1], got " + num(cfg.w_cpu));
    require(v, in_unit(cfg.w_disk), "w_disk", "must be in [0,1], got " + num(cfg.w_disk));
    require(v, in_unit(cfg.c_gpu), "c_gpu", "must be in [0,1], got " + num(cfg.c_gpu));
    require(v, in_unit(cfg.c_cpu), "c_cpu", "must be in [0,1], got " + num(cfg.c_cpu));
    require(v, in_unit(cfg.c_disk), "c_disk", "must be in [0,1], got " + num(cfg.c_disk));
    double w_sum = cfg.w_gpu + cfg.w_cpu + cfg.w_disk;
    double c_sum = cfg.c_gpu + cfg.c_cpu + cfg.c_disk;
    require(v, std::fabs(w_sum - 1.0) <= kFractionTolerance, "w_gpu+w_cpu+w_disk",
            "weight fractions sum " + num(w_sum) + " != 1");
    require(v, std::fabs(c_sum - 1.0) <= kFractionTolerance, "c_gpu+c_cpu+c_disk",
            "cache fractions sum " + num(c_sum) + " != 1");
    require(v, cfg.resident_partitions >= 0, "resident_partitions",
            "must be >= 0, got " + std::to_string(cfg.resident_partitions));
    require(v, cfg.gen_batch_size >= 1, "gen_batch_size",
            "must be >= 1, got " + std::to_string(cfg.gen_batch_size));
    return v;
}

Violations validate(const PlacementConfig& cfg, const DatabaseProfile& db) {
    Violations v = validate(cfg);
    require(v, cfg.resident_partitions <= db.num_partitions, "resident_partitions",
            "must be <= num_partitions (" + std::to_string(db.num_partitions) + "), got " +
                std::to_string(cfg.resident_partitions));
    return v;
}

Violations validate(const Request& r) {
    Violations v;
    require(v, r.arrival_time >= 0, "arrival_time", "must be >= 0, got " + num(r.arrival_time));
    require(v, r.top_k >= 1, "top_k", "must be >= 1, got " + std::to_string(r.top_k));
    return v;
}

Violations validate(const RequestTrace& t) {
    Violations v;
    require(v, t.retrieval_start >= t.arrival, "retrieval_start",
            "must be >= arrival, got " + num(t.retrieval_start));
    require(v, t.retrieval_end >= t.retrieval_start, "retrieval_end",
            "must be >= retrieval_start, got " + num(t.retrieval_end));
    require(v, t.generation_start >= t.retrieval_end, "generation_start",
            "must be >= retrieval_end, got " + num(t.generation_start));
    require(v, t.generation_end >= t.generation_start, "generation_end",
            "must be >= generation_start, got " + num(t.generation_end));
    double accounting = t.waiting() + t.retrieval() + t.generation();
    require(v, std::fabs(accounting - t.latency()) <= kFractionTolerance, "breakdown",
            "waiting+retrieval+generation " + num(accounting) + " != latency " + num(t.latency()));
    return v;
}

std::string describe(const Violations& violations) {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i].field << ": " << violations[i].message;
    }
    return os.str();
}

}  // namespace ragsim
