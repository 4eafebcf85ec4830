// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ragsim/cost_model.hpp"
#include "ragsim/domain.hpp"

namespace ragsim {

// Predicted average latency when splitting a backlog of n requests into
// `batches` equal batches of ceil(n/batches): (k+1)/2 * T(b) - mean(arrival).
// Arrival times are measured against the decision instant taken as origin.
// Throws for batches < 1 or batches > n.
double avg_latency_equal_split(std::span<const double> arrivals, int batches,
                               const CostModelFit& fit);

// Whether one maximal batch beats `split` equal batches: 2 * k^c <= k + 1.
bool max_batch_optimal(double exponent, int split);

struct BatchDecision {
    int chosen_batch = 0;
    double predicted_avg_latency = 0.0;
    std::vector<std::pair<int, double>> evaluated; // (candidate, predicted latency)
};

// Evaluates each candidate batch size b at k = ceil(n/b) and returns the
// argmin, breaking ties toward the larger batch. Candidates above the
// feasibility cap or above the smallest candidate covering the backlog are
// dropped. Throws InfeasibleError("no feasible batch") if nothing survives.
BatchDecision choose_generation_batch(std::span<const Request> backlog,
                                      std::span<const int> candidates, const CostModelFit& fit,
                                      int max_feasible);

// Greedy drain: min(backlog, max_retrieval_batch).
int choose_retrieval_batch(int backlog, int max_retrieval_batch);

inline constexpr int kNoBacklogLimit = std::numeric_limits<int>::max();

struct ProfileStep {
    PlacementConfig config;
    double t_retrieval = 0.0;
    double t_generation = 0.0;
    double objective = 0.0; // max of the two
};

struct PolicyEntry {
    int backlog_min = 1;
    int backlog_max = kNoBacklogLimit; // inclusive
    PlacementConfig config;
    CostModelFit fit;          // generation T(B) under this placement
    int max_feasible_batch = 1;
    std::vector<ProfileStep> search_path;
};

struct PolicyTable {
    std::vector<int> candidates; // probe batch sizes, ascending
    std::vector<PolicyEntry> entries;

    const PolicyEntry& entry_for(int backlog) const;
};

struct ProfilerOptions {
    double w_step = 0.05;
    PrefetchMode prefetch_mode = PrefetchMode::ContinuousQueue;
    GenerationCostParams cost;
    int fit_max_batch = 0; // 0: up to the largest probe batch
};

// Offline search balancing the two pipelines. For each probe batch size,
// hill-climbs from the most GPU-resident feasible placement: whichever
// pipeline lags gets memory shifted toward it (partitions for retrieval,
// weight tiers for generation), one step at a time, while max(t_ret, t_gen)
// improves. Deterministic; generation is evaluated jitter-free.
// Throws InfeasibleError("scenario infeasible") when no start exists.
PolicyTable active_profile(const HardwareProfile& hw, const ModelProfile& model,
                           const DatabaseProfile& db, std::span<const int> probe_batches,
                           std::span<const int> partition_candidates,
                           const ProfilerOptions& options = {});

std::string to_json(const PolicyTable& table);
PolicyTable policy_table_from_json(const std::string& text);
void save_policy(const PolicyTable& table, const std::string& path);
PolicyTable load_policy(const std::string& path);

}  // namespace ragsim
