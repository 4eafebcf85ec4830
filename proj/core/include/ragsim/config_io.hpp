// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ragsim/cost_model.hpp"
#include "ragsim/domain.hpp"
#include "ragsim/simulator.hpp"
#include "ragsim/workload.hpp"

namespace ragsim {

// Profiler knobs from the scenario file.
struct ProfilerSettings {
    std::vector<int> probe_batches;
    std::vector<int> partition_candidates;
    double w_step = 0.05;
};

// One experiment scenario: hardware/model/database profiles plus simulation,
// workload, and profiling settings. JSON on disk; byte quantities accept
// KiB/MiB/GiB/TiB suffixes (bandwidths may append "/s").
struct Scenario {
    HardwareProfile hardware;
    ModelProfile model;
    DatabaseProfile database;
    GenerationCostParams cost;
    PrefetchMode prefetch_mode = PrefetchMode::ContinuousQueue;
    int max_retrieval_batch = 64;
    SerialBatchRule serial_rule;
    std::optional<PlacementConfig> serial_placement; // derived when absent
    IntervalSchedule schedule;
    int top_k = 5;
    ProfilerSettings profiler;
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

PlacementConfig placement_from_file(const std::string& path);
void save_placement(const PlacementConfig& cfg, const std::string& path);
std::string placement_to_json_text(const PlacementConfig& cfg);

// Fills a SimConfig from the scenario (policy table supplied separately).
SimConfig make_sim_config(const Scenario& scenario, SimMode mode, std::uint64_t seed);

}  // namespace ragsim
