// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ragsim/errors.hpp"
#include "ragsim/memory_planner.hpp"

namespace ragsim {

double avg_latency_equal_split(std::span<const double> arrivals, int batches,
                               const CostModelFit& fit) {
    const int n = static_cast<int>(arrivals.size());
    if (n < 1) throw Error("avg_latency_equal_split: empty backlog");
    if (batches < 1 || batches > n)
        throw Error("avg_latency_equal_split: batch count out of range");

    int batch_size = (n + batches - 1) / batches;
    double mean = 0.0;
    for (double t : arrivals) mean += t;
    mean /= n;
    return 0.5 * (batches + 1) * predict(fit, batch_size) - mean;
}

bool max_batch_optimal(double exponent, int split) {
    if (split < 2) throw Error("max_batch_optimal: split must be >= 2");
    return 2.0 * std::pow(static_cast<double>(split), exponent) <= split + 1.0 + 1e-12;
}

BatchDecision choose_generation_batch(std::span<const Request> backlog,
                                      std::span<const int> candidates, const CostModelFit& fit,
                                      int max_feasible) {
    const int n = static_cast<int>(backlog.size());
    if (n < 1) throw Error("choose_generation_batch: empty backlog");
    if (candidates.empty()) throw Error("choose_generation_batch: no candidates");

    std::vector<int> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    // Batches larger than the smallest candidate covering the backlog only
    // add padding, so they are dropped along with infeasible sizes.
    int cap = max_feasible;
    for (int b : sorted)
        if (b >= n) {
            cap = std::min(cap, b);
            break;
        }

    double mean = 0.0;
    for (const Request& r : backlog) mean += r.arrival_time;
    mean /= n;

    BatchDecision decision;
    bool found = false;
    double best = 0.0;
    for (int b : sorted) {
        if (b > cap) continue;
        int k = (n + b - 1) / b;
        double latency = 0.5 * (k + 1) * predict(fit, b) - mean;
        decision.evaluated.emplace_back(b, latency);
        if (!found || latency <= best) { // ties go to the larger batch
            best = latency;
            decision.chosen_batch = b;
            decision.predicted_avg_latency = latency;
            found = true;
        }
    }
    if (!found) throw InfeasibleError("no feasible batch");
    return decision;
}

int choose_retrieval_batch(int backlog, int max_retrieval_batch) {
    if (backlog < 1) throw Error("choose_retrieval_batch: empty backlog");
    return std::min(backlog, max_retrieval_batch);
}

const PolicyEntry& PolicyTable::entry_for(int backlog) const {
    if (entries.empty()) throw Error("PolicyTable: empty");
    for (const auto& e : entries)
        if (backlog <= e.backlog_max) return e;
    return entries.back();
}

namespace {

constexpr double kStepEps = 1e-6;

bool gpu_fits(const FeasibilityReport& report, const HardwareProfile& hw) {
    return report.gpu_slack >= -1e-9 * static_cast<double>(hw.gpu_mem);
}

void set_weight_fractions(PlacementConfig& cfg, double gpu, double cpu) {
    cfg.w_gpu = gpu;
    cfg.w_cpu = std::max(0.0, cpu); // 0.05-step arithmetic leaves +-1 ulp residue
    cfg.w_disk = std::max(0.0, 1.0 - gpu - cfg.w_cpu);
}

void set_cache_fractions(PlacementConfig& cfg, double gpu, double cpu) {
    cfg.c_gpu = gpu;
    cfg.c_cpu = std::max(0.0, cpu);
    cfg.c_disk = std::max(0.0, 1.0 - gpu - cfg.c_cpu);
}

struct ProfilerContext {
    const HardwareProfile& hw;
    HardwareProfile hw_quiet; // jitter disabled for deterministic evaluation
    const ModelProfile& model;
    const DatabaseProfile& db;
    const ProfilerOptions& options;

    bool feasible(const PlacementConfig& cfg) const {
        return check_feasible(cfg, hw, model, db).feasible;
    }

    ProfileStep evaluate(const PlacementConfig& cfg) const {
        ProfileStep step;
        step.config = cfg;
        step.t_retrieval = retrieval_time(cfg.resident_partitions, db);
        step.t_generation = generation_time(cfg, hw_quiet, model, options.prefetch_mode,
                                            /*seed=*/0, options.cost);
        step.objective = std::max(step.t_retrieval, step.t_generation);
        return step;
    }
};

// Most GPU-resident start: maximize w_gpu, then c_gpu, spill via the shared
// CPU-before-disk completion rule.
std::optional<PlacementConfig> start_config(const ProfilerContext& ctx, int batch,
                                            std::span<const int> partitions) {
    const double step = ctx.options.w_step;
    const double weights = static_cast<double>(ctx.model.weight_total);
    const double cache = ctx.model.kv_cache_bytes(batch);
    const double gpu = static_cast<double>(ctx.hw.gpu_mem);
    const double workspace = ctx.model.workspace_bytes(batch);

    for (int p : partitions) {
        double room = gpu - workspace;
        if (room < 0.0) continue;
        double w_gpu = std::min(1.0, room / weights);
        w_gpu = std::floor(w_gpu / step + kStepEps) * step;
        room -= w_gpu * weights;
        double c_gpu = cache > 0.0 ? std::min(1.0, room / cache) : 1.0;
        c_gpu = std::floor(c_gpu / step + kStepEps) * step;

        PlacementConfig cfg = complete_placement(w_gpu, c_gpu, p, batch, ctx.hw, ctx.model, ctx.db);
        if (ctx.feasible(cfg)) return cfg;
    }
    return std::nullopt;
}

// Retrieval lags: take one more partition; push weight (then cache) share off
// the CPU, toward GPU when the slack allows, else to disk.
std::optional<PlacementConfig> neighbor_more_partitions(const ProfilerContext& ctx,
                                                        const PlacementConfig& cfg,
                                                        std::span<const int> partitions) {
    auto it = std::upper_bound(partitions.begin(), partitions.end(), cfg.resident_partitions);
    if (it == partitions.end()) return std::nullopt;

    const double step = ctx.options.w_step;
    PlacementConfig out = cfg;
    out.resident_partitions = *it;
    while (!ctx.feasible(out)) {
        PlacementConfig promoted = out;
        if (out.w_cpu >= step - kStepEps) {
            set_weight_fractions(promoted, out.w_gpu + step, out.w_cpu - step);
            if (gpu_fits(check_feasible(promoted, ctx.hw, ctx.model, ctx.db), ctx.hw))
                out = promoted;
            else
                set_weight_fractions(out, out.w_gpu, out.w_cpu - step);
        } else if (out.c_cpu >= step - kStepEps) {
            set_cache_fractions(promoted, out.c_gpu + step, out.c_cpu - step);
            if (gpu_fits(check_feasible(promoted, ctx.hw, ctx.model, ctx.db), ctx.hw))
                out = promoted;
            else
                set_cache_fractions(out, out.c_gpu, out.c_cpu - step);
        } else {
            return std::nullopt;
        }
    }
    return out;
}

// Generation lags: promote weights up the hierarchy, releasing a partition
// when the CPU has no room; cache tiers follow once weights are exhausted.
std::optional<PlacementConfig> neighbor_faster_generation(const ProfilerContext& ctx,
                                                          const PlacementConfig& cfg,
                                                          std::span<const int> partitions) {
    const double step = ctx.options.w_step;

    // Weight share into GPU slack, from disk first.
    if (cfg.w_gpu <= 1.0 - step + kStepEps) {
        PlacementConfig out = cfg;
        bool has_source = true;
        if (cfg.w_disk >= step - kStepEps)
            set_weight_fractions(out, cfg.w_gpu + step, cfg.w_cpu);
        else if (cfg.w_cpu >= step - kStepEps)
            set_weight_fractions(out, cfg.w_gpu + step, cfg.w_cpu - step);
        else
            has_source = false;
        if (has_source && ctx.feasible(out)) return out;
    }
    // Weight share disk -> CPU, dropping a partition if that is what it takes.
    if (cfg.w_disk >= step - kStepEps) {
        PlacementConfig out = cfg;
        set_weight_fractions(out, cfg.w_gpu, cfg.w_cpu + step);
        if (ctx.feasible(out)) return out;
        auto it = std::lower_bound(partitions.begin(), partitions.end(), cfg.resident_partitions);
        if (it != partitions.begin()) {
            out.resident_partitions = *std::prev(it);
            if (ctx.feasible(out)) return out;
        }
    }
    // Cache share disk -> CPU.
    if (cfg.c_disk >= step - kStepEps) {
        PlacementConfig out = cfg;
        set_cache_fractions(out, cfg.c_gpu, cfg.c_cpu + step);
        if (ctx.feasible(out)) return out;
        auto it = std::lower_bound(partitions.begin(), partitions.end(), cfg.resident_partitions);
        if (it != partitions.begin()) {
            out.resident_partitions = *std::prev(it);
            if (ctx.feasible(out)) return out;
        }
    }
    return std::nullopt;
}

CostModelFit fit_entry(const ProfilerContext& ctx, const PlacementConfig& cfg, int fit_max) {
    std::vector<BatchTimeSample> samples;
    std::vector<int> batches;
    int hi = std::max(2, fit_max); // a fit needs two distinct batch sizes
    for (int b = 1; b <= hi; b *= 2) batches.push_back(b);
    if (std::find(batches.begin(), batches.end(), hi) == batches.end()) batches.push_back(hi);
    for (int b : batches) {
        PlacementConfig probe = cfg;
        probe.gen_batch_size = b;
        if (!ctx.feasible(probe)) break;
        double t = generation_time(probe, ctx.hw_quiet, ctx.model, ctx.options.prefetch_mode,
                                   /*seed=*/0, ctx.options.cost);
        samples.push_back({static_cast<double>(b), t});
    }
    if (samples.size() < 2) {
        // placement only fits one batch size; fall back to a constant model
        CostModelFit flat;
        flat.a = samples.empty() ? 1.0 : samples[0].seconds;
        flat.c = 0.0;
        flat.sample_count = static_cast<int>(samples.size());
        return flat;
    }
    return fit_power_law(samples);
}

}  // namespace

PolicyTable active_profile(const HardwareProfile& hw, const ModelProfile& model,
                           const DatabaseProfile& db, std::span<const int> probe_batches,
                           std::span<const int> partition_candidates,
                           const ProfilerOptions& options) {
    if (probe_batches.empty() || partition_candidates.empty())
        throw Error("active_profile: candidate lists must be nonempty");

    std::vector<int> probes(probe_batches.begin(), probe_batches.end());
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    std::vector<int> partitions(partition_candidates.begin(), partition_candidates.end());
    std::sort(partitions.begin(), partitions.end());
    partitions.erase(std::unique(partitions.begin(), partitions.end()), partitions.end());

    ProfilerContext ctx{hw, hw, model, db, options};
    ctx.hw_quiet.jitter_sigma = 0.0;

    PolicyTable table;
    table.candidates = probes;
    int fit_max = options.fit_max_batch > 0 ? options.fit_max_batch : probes.back();

    for (std::size_t i = 0; i < probes.size(); ++i) {
        int batch = probes[i];
        auto start = start_config(ctx, batch, partitions);
        if (!start) throw InfeasibleError("scenario infeasible");

        PolicyEntry entry;
        entry.backlog_min = i == 0 ? 1 : probes[i - 1] + 1;
        entry.backlog_max = i + 1 == probes.size() ? kNoBacklogLimit : probes[i];

        ProfileStep current = ctx.evaluate(*start);
        entry.search_path.push_back(current);
        for (int iter = 0; iter < 1000; ++iter) {
            std::optional<PlacementConfig> next;
            if (current.t_retrieval > current.t_generation)
                next = neighbor_more_partitions(ctx, current.config, partitions);
            else
                next = neighbor_faster_generation(ctx, current.config, partitions);
            if (!next) break;
            ProfileStep candidate = ctx.evaluate(*next);
            if (candidate.objective >= current.objective) break;
            current = candidate;
            entry.search_path.push_back(current);
        }

        entry.config = current.config;
        entry.max_feasible_batch = max_feasible_batch(current.config, hw, model, db);
        entry.fit = fit_entry(ctx, current.config, fit_max);
        table.entries.push_back(std::move(entry));
    }
    return table;
}

namespace {

nlohmann::json placement_to_json(const PlacementConfig& cfg) {
    return {{"w_gpu", cfg.w_gpu},
            {"w_cpu", cfg.w_cpu},
            {"w_disk", cfg.w_disk},
            {"c_gpu", cfg.c_gpu},
            {"c_cpu", cfg.c_cpu},
            {"c_disk", cfg.c_disk},
            {"resident_partitions", cfg.resident_partitions},
            {"gen_batch_size", cfg.gen_batch_size}};
}

PlacementConfig placement_from_json(const nlohmann::json& j) {
    PlacementConfig cfg;
    cfg.w_gpu = j.at("w_gpu").get<double>();
    cfg.w_cpu = j.at("w_cpu").get<double>();
    cfg.w_disk = j.at("w_disk").get<double>();
    cfg.c_gpu = j.at("c_gpu").get<double>();
    cfg.c_cpu = j.at("c_cpu").get<double>();
    cfg.c_disk = j.at("c_disk").get<double>();
    cfg.resident_partitions = j.at("resident_partitions").get<int>();
    cfg.gen_batch_size = j.at("gen_batch_size").get<int>();
    return cfg;
}

nlohmann::json fit_to_json_obj(const CostModelFit& fit) {
    return {{"a", fit.a},
            {"c", fit.c},
            {"residual", fit.residual},
            {"sample_count", fit.sample_count},
            {"exponent_clamped", fit.exponent_clamped}};
}

CostModelFit fit_from_json_obj(const nlohmann::json& j) {
    CostModelFit fit;
    fit.a = j.at("a").get<double>();
    fit.c = j.at("c").get<double>();
    fit.residual = j.at("residual").get<double>();
    fit.sample_count = j.at("sample_count").get<int>();
    fit.exponent_clamped = j.value("exponent_clamped", false);
    return fit;
}

}  // namespace

std::string to_json(const PolicyTable& table) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : table.entries) {
        nlohmann::json path = nlohmann::json::array();
        for (const auto& s : e.search_path)
            path.push_back({{"config", placement_to_json(s.config)},
                            {"t_retrieval", s.t_retrieval},
                            {"t_generation", s.t_generation},
                            {"objective", s.objective}});
        nlohmann::json je{{"backlog_min", e.backlog_min},
                          {"config", placement_to_json(e.config)},
                          {"fit", fit_to_json_obj(e.fit)},
                          {"max_feasible_batch", e.max_feasible_batch},
                          {"search_path", path}};
        if (e.backlog_max == kNoBacklogLimit)
            je["backlog_max"] = nullptr;
        else
            je["backlog_max"] = e.backlog_max;
        entries.push_back(je);
    }
    nlohmann::json j{{"candidates", table.candidates}, {"entries", entries}};
    return j.dump(2);
}

PolicyTable policy_table_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("policy table: ") + e.what());
    }
    PolicyTable table;
    try {
        table.candidates = j.at("candidates").get<std::vector<int>>();
        for (const auto& je : j.at("entries")) {
            PolicyEntry e;
            e.backlog_min = je.at("backlog_min").get<int>();
            e.backlog_max = je.at("backlog_max").is_null() ? kNoBacklogLimit
                                                           : je.at("backlog_max").get<int>();
            e.config = placement_from_json(je.at("config"));
            e.fit = fit_from_json_obj(je.at("fit"));
            e.max_feasible_batch = je.at("max_feasible_batch").get<int>();
            for (const auto& js : je.value("search_path", nlohmann::json::array())) {
                ProfileStep s;
                s.config = placement_from_json(js.at("config"));
                s.t_retrieval = js.at("t_retrieval").get<double>();
                s.t_generation = js.at("t_generation").get<double>();
                s.objective = js.at("objective").get<double>();
                e.search_path.push_back(s);
            }
            table.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("policy table: ") + e.what());
    }
    return table;
}

void save_policy(const PolicyTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << to_json(table) << '\n';
}

PolicyTable load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return policy_table_from_json(ss.str());
}

}  // namespace ragsim
