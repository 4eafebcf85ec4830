// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ragsim/cost_model.hpp"
#include "ragsim/domain.hpp"
#include "ragsim/scheduler.hpp"
#include "ragsim/workload.hpp"

namespace ragsim {

// Pipelined: retrieval and generation workers run concurrently on disjoint
// batches. Serial: each batch finishes retrieval then generation before the
// next batch starts.
enum class SimMode { Pipelined, Serial };

// BacklogAware consults the policy table per batch; FixedMax always takes the
// largest candidate (ablation baseline).
enum class GenerationBatchPolicy { BacklogAware, FixedMax };

const char* to_string(SimMode mode);

// Serial baseline batch sizing: batch = multiplier * lambda(t) * window.
struct SerialBatchRule {
    double rate_multiplier = 4.0;
    double window_seconds = 60.0;

    bool operator==(const SerialBatchRule&) const = default;
};

struct SimConfig {
    SimMode mode = SimMode::Pipelined;
    HardwareProfile hardware;
    ModelProfile model;
    DatabaseProfile database;
    PolicyTable policy; // Pipelined mode; ignored by Serial
    GenerationBatchPolicy generation_policy = GenerationBatchPolicy::BacklogAware;
    PlacementConfig serial_placement; // Serial mode
    SerialBatchRule serial_rule;
    IntervalSchedule schedule; // lambda(t) source for the serial rule
    PrefetchMode prefetch_mode = PrefetchMode::ContinuousQueue;
    GenerationCostParams cost;
    int max_retrieval_batch = 64;
    std::uint64_t seed = 0;
};

// Static placement for the serial baseline: most GPU-resident feasible layout
// at the given batch size, then as many resident partitions as still fit.
PlacementConfig derive_serial_placement(const HardwareProfile& hw, const ModelProfile& model,
                                        const DatabaseProfile& db, int max_batch,
                                        double w_step = 0.05);

struct SimEvent {
    double time = 0.0;
    long seq = 0;
    std::string kind;
    std::string data; // JSON object text
};

struct Aggregates {
    double average = 0.0, p50 = 0.0, p90 = 0.0, p99 = 0.0, max = 0.0;
};

struct Breakdown {
    double waiting = 0.0, retrieval = 0.0, generation = 0.0;
};

struct PeakOccupancy {
    double gpu = 0.0, cpu = 0.0, disk = 0.0;
};

struct SimOutcome {
    std::vector<RequestTrace> traces; // one per request, in id order
    Aggregates aggregates;
    Breakdown breakdown; // averages
    std::vector<SimEvent> event_log;
    PeakOccupancy peak;
    double makespan = 0.0;
};

// Deterministic replay of the workload (sorted by arrival) through the chosen
// mode. Device occupancy is asserted against the capacity bounds at every
// event; a violating policy entry raises InfeasibleError naming the entry.
SimOutcome run(std::span<const Request> workload, const SimConfig& cfg);

Aggregates compute_aggregates(std::span<const RequestTrace> traces);
Breakdown compute_breakdown(std::span<const RequestTrace> traces);

// Nearest-rank percentile over latencies.
double percentile_nearest_rank(std::span<const double> sorted_values, double percent);

// Fixed-format table: aggregates plus the waiting/retrieval/generation
// breakdown. Byte-stable for a fixed outcome.
std::string metrics_report(const SimOutcome& outcome);

struct ComparisonReport {
    struct Row {
        std::string metric;
        double a = 0.0, b = 0.0;
        double ratio = 0.0; // a / b
        double delta = 0.0; // a - b
    };
    std::vector<Row> rows;
    std::string dominates_average; // "a", "b", or "tie"
};

// Requires identical workload identity (ids and arrivals). Throws Error
// otherwise.
ComparisonReport compare(const SimOutcome& a, const SimOutcome& b);
std::string to_json(const ComparisonReport& report);
std::string format(const ComparisonReport& report);

void write_traces_csv(const SimOutcome& outcome, const std::string& path);
void write_events_jsonl(const SimOutcome& outcome, const std::string& path);
void write_summary_json(const SimOutcome& outcome, const std::string& path);

// Rebuilds a comparison from two summary.json files (workload digests must
// match).
ComparisonReport compare_summaries(const std::string& path_a, const std::string& path_b);

}  // namespace ragsim
