// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ragsim/errors.hpp"
#include "ragsim/memory_planner.hpp"
#include "ragsim/rng.hpp"

namespace ragsim {

const char* to_string(SimMode mode) {
    return mode == SimMode::Pipelined ? "pipelined" : "serial";
}

PlacementConfig derive_serial_placement(const HardwareProfile& hw, const ModelProfile& model,
                                        const DatabaseProfile& db, int max_batch, double w_step) {
    const double weights = static_cast<double>(model.weight_total);
    const double cache = model.kv_cache_bytes(max_batch);
    double room = static_cast<double>(hw.gpu_mem) - model.workspace_bytes(max_batch);
    if (room < 0.0) throw InfeasibleError("scenario infeasible");

    double w_gpu = std::floor(std::clamp(room / weights, 0.0, 1.0) / w_step + 1e-9) * w_step;
    room -= w_gpu * weights;
    double c_gpu = cache > 0.0 ? std::clamp(room / cache, 0.0, 1.0) : 1.0;
    c_gpu = std::floor(c_gpu / w_step + 1e-9) * w_step;

    // As many resident partitions as the CPU accommodates without pushing
    // weights or KV cache to disk; a static baseline keeps tensors in RAM.
    for (int p = db.num_partitions; p >= 0; --p) {
        PlacementConfig cfg = complete_placement(w_gpu, c_gpu, p, max_batch, hw, model, db);
        if (!check_feasible(cfg, hw, model, db).feasible) continue;
        if (cfg.w_disk <= 1e-9 && cfg.c_disk <= 1e-9) return cfg;
    }
    for (int p = db.num_partitions; p >= 0; --p) {
        PlacementConfig cfg = complete_placement(w_gpu, c_gpu, p, max_batch, hw, model, db);
        if (check_feasible(cfg, hw, model, db).feasible) return cfg;
    }
    throw InfeasibleError("scenario infeasible");
}

namespace {

struct PendingSwitch {
    int entry = -1;
    bool weights_applied = false;
};

// Conservative occupancy envelope: a transfer holds both the source and the
// destination copy until it completes.
class OccupancyTracker {
public:
    OccupancyTracker(const HardwareProfile& hw, const ModelProfile& model,
                     const DatabaseProfile& db)
        : hw_(hw), model_(model), db_(db) {}

    void set_weight_fractions(const PlacementConfig& cfg) { active_ = cfg; }
    void begin_weight_move(const PlacementConfig& to) {
        moving_to_ = to;
        weight_moving_ = true;
    }
    void end_weight_move() {
        active_ = moving_to_;
        weight_moving_ = false;
    }

    void set_partitions(int p) { partitions_ = p; }
    void begin_partition_move(int to) {
        partitions_to_ = to;
        partition_moving_ = true;
    }
    void end_partition_move() {
        partitions_ = partitions_to_;
        partition_moving_ = false;
    }

    void begin_generation(const PlacementConfig& run_cfg) {
        gen_cfg_ = run_cfg;
        gen_running_ = true;
    }
    void end_generation() { gen_running_ = false; }

    int partitions() const { return partitions_; }

    // Throws when any device exceeds its capacity; tracks the peak.
    void check(PeakOccupancy& peak) const {
        double w_gpu = active_.w_gpu, w_cpu = active_.w_cpu, w_disk = active_.w_disk;
        if (weight_moving_) {
            w_gpu = std::max(w_gpu, moving_to_.w_gpu);
            w_cpu = std::max(w_cpu, moving_to_.w_cpu);
            w_disk = std::max(w_disk, moving_to_.w_disk);
        }
        double cpu_parts = partitions_;
        double disk_parts = db_.num_partitions - partitions_;
        if (partition_moving_) {
            cpu_parts = std::max(cpu_parts, static_cast<double>(partitions_to_));
            disk_parts = std::max(disk_parts, static_cast<double>(db_.num_partitions - partitions_to_));
        }

        const double weights = static_cast<double>(model_.weight_total);
        const double part_bytes = static_cast<double>(db_.partition_bytes);
        double gpu = w_gpu * weights;
        double cpu = w_cpu * weights + cpu_parts * part_bytes;
        double disk = w_disk * weights + disk_parts * part_bytes;
        if (gen_running_) {
            double cache = model_.kv_cache_bytes(gen_cfg_.gen_batch_size);
            gpu += gen_cfg_.c_gpu * cache + model_.workspace_bytes(gen_cfg_.gen_batch_size);
            cpu += gen_cfg_.c_cpu * cache;
            disk += gen_cfg_.c_disk * cache;
        }

        peak.gpu = std::max(peak.gpu, gpu);
        peak.cpu = std::max(peak.cpu, cpu);
        peak.disk = std::max(peak.disk, disk);
        auto over = [](double used, Bytes cap) {
            return used > static_cast<double>(cap) * (1.0 + 1e-9);
        };
        if (over(gpu, hw_.gpu_mem) || over(cpu, hw_.cpu_mem) || over(disk, hw_.disk_capacity))
            throw Error("memory bound violated at runtime");
    }

private:
    const HardwareProfile& hw_;
    const ModelProfile& model_;
    const DatabaseProfile& db_;
    PlacementConfig active_{};
    PlacementConfig moving_to_{};
    bool weight_moving_ = false;
    int partitions_ = 0;
    int partitions_to_ = 0;
    bool partition_moving_ = false;
    PlacementConfig gen_cfg_{};
    bool gen_running_ = false;
};

class Engine {
public:
    Engine(std::span<const Request> workload, const SimConfig& cfg)
        : workload_(workload), cfg_(cfg), occ_(cfg.hardware, cfg.model, cfg.database) {}

    SimOutcome run() {
        validate_inputs();
        traces_.resize(workload_.size());
        for (std::size_t i = 0; i < workload_.size(); ++i) {
            traces_[i].id = workload_[i].id;
            traces_[i].arrival = workload_[i].arrival_time;
        }
        if (cfg_.mode == SimMode::Pipelined)
            run_pipelined();
        else
            run_serial();

        SimOutcome out;
        out.traces = std::move(traces_);
        out.aggregates = compute_aggregates(out.traces);
        out.breakdown = compute_breakdown(out.traces);
        out.event_log = std::move(events_);
        out.peak = peak_;
        out.makespan = makespan_;
        return out;
    }

private:
    // ---- shared plumbing -------------------------------------------------

    void validate_inputs() {
        Violations v = validate(cfg_.hardware);
        auto append = [&](Violations more) {
            v.insert(v.end(), more.begin(), more.end());
        };
        append(validate(cfg_.model));
        append(validate(cfg_.database));
        if (!v.empty()) throw Error("invalid simulation profiles: " + describe(v));
        for (std::size_t i = 1; i < workload_.size(); ++i)
            if (workload_[i].arrival_time < workload_[i - 1].arrival_time)
                throw Error("workload must be sorted by arrival time");
        if (cfg_.mode == SimMode::Pipelined) {
            if (cfg_.policy.entries.empty())
                throw Error("pipelined mode requires a nonempty policy table");
            for (std::size_t i = 0; i < cfg_.policy.entries.size(); ++i)
                if (!check_feasible(cfg_.policy.entries[i].config, cfg_.hardware, cfg_.model,
                                    cfg_.database)
                         .feasible)
                    throw InfeasibleError("infeasible policy entry " + std::to_string(i));
        }
    }

    void emit(double time, const char* kind, nlohmann::json data) {
        events_.push_back({time, seq_++, kind, data.dump()});
        occ_.check(peak_);
    }

    std::uint64_t batch_seed() { return derive_seed(cfg_.seed, 0x100000000ull | gen_batches_++); }

    static nlohmann::json span_payload(std::span<const int> members,
                                       std::span<const Request> workload) {
        nlohmann::json j;
        j["count"] = members.size();
        if (!members.empty()) {
            j["first_id"] = workload[members.front()].id;
            j["last_id"] = workload[members.back()].id;
        }
        return j;
    }

    // ---- pipelined mode --------------------------------------------------

    struct Occupation {
        bool busy = false;
        double until = 0.0;
        enum class Task { None, Reconfig, Batch } task = Task::None;
        std::vector<int> members; // request indices
    };

    int entry_index_for(int backlog) const {
        const auto& entries = cfg_.policy.entries;
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (backlog <= entries[i].backlog_max) return static_cast<int>(i);
        return static_cast<int>(entries.size()) - 1;
    }

    void run_pipelined() {
        active_ = cfg_.policy.entries.front().config;
        active_entry_ = 0;
        occ_.set_weight_fractions(active_);
        occ_.set_partitions(active_.resident_partitions);
        occ_.check(peak_);

        std::size_t arr_idx = 0;
        while (true) {
            double t = next_time(arr_idx);
            if (t == kNoEvent) break;
            now_ = t;

            while (arr_idx < workload_.size() && workload_[arr_idx].arrival_time <= now_) {
                retrieval_queue_.push_back(static_cast<int>(arr_idx));
                emit(now_, "arrival", {{"id", workload_[arr_idx].id}});
                ++arr_idx;
            }
            if (retrieval_.busy && retrieval_.until <= now_) complete_retrieval();
            if (generation_.busy && generation_.until <= now_) complete_generation();

            dispatch_retrieval();
            dispatch_generation();
        }
        makespan_ = last_completion_;
    }

    static constexpr double kNoEvent = -1.0;

    double next_time(std::size_t arr_idx) const {
        double t = kNoEvent;
        auto consider = [&](double v) {
            if (t == kNoEvent || v < t) t = v;
        };
        if (arr_idx < workload_.size()) consider(workload_[arr_idx].arrival_time);
        if (retrieval_.busy) consider(retrieval_.until);
        if (generation_.busy) consider(generation_.until);
        return t;
    }

    void complete_retrieval() {
        retrieval_.busy = false;
        if (retrieval_.task == Occupation::Task::Reconfig) {
            occ_.end_partition_move();
            emit(now_, "retrieval_reconfig_end",
                 {{"resident_partitions", occ_.partitions()}});
            active_.resident_partitions = occ_.partitions();
            finalize_switch_if_done();
            return;
        }
        for (int i : retrieval_.members) {
            traces_[i].retrieval_end = now_;
            context_queue_.push_back(i);
        }
        emit(now_, "retrieval_batch_end", span_payload(retrieval_.members, workload_));
        retrieval_.members.clear();
    }

    void complete_generation() {
        generation_.busy = false;
        if (generation_.task == Occupation::Task::Reconfig) {
            occ_.end_weight_move();
            active_ = pending_weight_target_;
            active_.resident_partitions = occ_.partitions();
            if (pending_) pending_->weights_applied = true;
            offload_history_.record(active_);
            emit(now_, "generation_reconfig_end", {{"entry", pending_ ? pending_->entry : -1}});
            finalize_switch_if_done();
            return;
        }
        occ_.end_generation();
        for (int i : generation_.members) {
            traces_[i].generation_end = now_;
            last_completion_ = std::max(last_completion_, now_);
        }
        emit(now_, "generation_batch_end", span_payload(generation_.members, workload_));
        generation_.members.clear();
    }

    void finalize_switch_if_done() {
        if (!pending_) return;
        const auto& target = cfg_.policy.entries[pending_->entry].config;
        if (pending_->weights_applied &&
            occ_.partitions() == target.resident_partitions) {
            active_entry_ = pending_->entry;
            pending_.reset();
            emit(now_, "policy_switch", {{"entry", active_entry_}});
        }
    }

    bool partition_change_allowed(int target_partitions) const {
        if (target_partitions <= occ_.partitions()) return true; // releases are free to go
        return pending_ && pending_->weights_applied; // loads wait for the weight shrink
    }

    void dispatch_retrieval() {
        if (retrieval_.busy) return;

        if (pending_) {
            int target = cfg_.policy.entries[pending_->entry].config.resident_partitions;
            if (target != occ_.partitions() && partition_change_allowed(target)) {
                double bytes = std::abs(target - occ_.partitions()) *
                               static_cast<double>(cfg_.database.partition_bytes);
                double duration = bytes / cfg_.hardware.bw_cpu_disk;
                occ_.begin_partition_move(target);
                emit(now_, "retrieval_reconfig_start",
                     {{"from", occ_.partitions()}, {"to", target}, {"duration", duration}});
                if (duration > 0.0) {
                    retrieval_.busy = true;
                    retrieval_.until = now_ + duration;
                    retrieval_.task = Occupation::Task::Reconfig;
                    return;
                }
                occ_.end_partition_move();
                active_.resident_partitions = occ_.partitions();
                emit(now_, "retrieval_reconfig_end",
                     {{"resident_partitions", occ_.partitions()}});
                finalize_switch_if_done();
            }
        }
        if (retrieval_queue_.empty()) return;

        int take = choose_retrieval_batch(static_cast<int>(retrieval_queue_.size()),
                                          cfg_.max_retrieval_batch);
        retrieval_.members.assign(retrieval_queue_.begin(), retrieval_queue_.begin() + take);
        retrieval_queue_.erase(retrieval_queue_.begin(), retrieval_queue_.begin() + take);
        double duration = retrieval_time(occ_.partitions(), cfg_.database);
        for (int i : retrieval_.members) traces_[i].retrieval_start = now_;
        retrieval_.busy = true;
        retrieval_.until = now_ + duration;
        retrieval_.task = Occupation::Task::Batch;
        nlohmann::json j = span_payload(retrieval_.members, workload_);
        j["resident_partitions"] = occ_.partitions();
        j["duration"] = duration;
        emit(now_, "retrieval_batch_start", j);
    }

    void dispatch_generation() {
        if (generation_.busy || context_queue_.empty()) return;

        const int backlog = static_cast<int>(context_queue_.size());
        // The fixed-max ablation pins both the batch and its placement.
        const int entry_idx = cfg_.generation_policy == GenerationBatchPolicy::FixedMax
                                  ? static_cast<int>(cfg_.policy.entries.size()) - 1
                                  : entry_index_for(backlog);
        if (entry_idx != active_entry_) {
            if (!pending_ || pending_->entry != entry_idx) pending_ = PendingSwitch{entry_idx};
        } else if (pending_) {
            pending_.reset(); // backlog moved back into the active range
        }

        if (pending_ && !pending_->weights_applied) {
            const auto& target = cfg_.policy.entries[pending_->entry].config;
            // Shrink-before-grow: the target tensor layout may be adopted
            // only once it fits alongside the partitions still resident;
            // until then this batch runs on the current placement.
            PlacementConfig probe = target;
            probe.resident_partitions = occ_.partitions();
            probe.gen_batch_size = cfg_.policy.candidates.front();
            if (check_feasible(probe, cfg_.hardware, cfg_.model, cfg_.database).feasible) {
                PlacementConfig to = target;
                to.resident_partitions = active_.resident_partitions;
                TransferPlan plan = plan_transfer(active_, to, cfg_.hardware, cfg_.model,
                                                  cfg_.database, offload_history_);
                pending_weight_target_ = to;
                if (plan.duration > 0.0) {
                    occ_.begin_weight_move(to);
                    generation_.busy = true;
                    generation_.until = now_ + plan.duration;
                    generation_.task = Occupation::Task::Reconfig;
                    emit(now_, "generation_reconfig_start",
                         {{"entry", pending_->entry},
                          {"bytes_gpu_cpu", plan.bytes_gpu_cpu},
                          {"bytes_cpu_disk", plan.bytes_cpu_disk},
                          {"duration", plan.duration}});
                    return;
                }
                active_ = to;
                pending_->weights_applied = true;
                offload_history_.record(active_);
                finalize_switch_if_done();
            }
        }

        start_generation_batch();
    }

    void start_generation_batch() {
        const int backlog = static_cast<int>(context_queue_.size());
        if (backlog == 0) return;
        const int entry_idx = pending_ ? pending_->entry : active_entry_;
        const PolicyEntry& entry = cfg_.policy.entries[entry_idx];

        // Loads may land mid-batch once the weight phase is done, so size the
        // batch against the higher partition count.
        int p_bound = occ_.partitions();
        if (pending_) {
            int target = cfg_.policy.entries[pending_->entry].config.resident_partitions;
            if (target > p_bound && pending_->weights_applied) p_bound = target;
        }
        PlacementConfig bound_cfg = active_;
        bound_cfg.resident_partitions = p_bound;
        int cap = max_feasible_batch(bound_cfg, cfg_.hardware, cfg_.model, cfg_.database);
        if (cap < 1)
            throw InfeasibleError("infeasible policy entry " +
                                  std::to_string(entry_idx));

        int chosen;
        if (cfg_.generation_policy == GenerationBatchPolicy::FixedMax) {
            chosen = 0;
            for (int c : cfg_.policy.candidates)
                if (c <= cap) chosen = std::max(chosen, c);
            if (chosen == 0)
                throw InfeasibleError("infeasible policy entry " +
                                      std::to_string(entry_idx));
        } else {
            std::vector<Request> snapshot;
            snapshot.reserve(backlog);
            for (int i : context_queue_) {
                Request r = workload_[i];
                r.arrival_time -= now_; // decision instant is the origin
                snapshot.push_back(r);
            }
            chosen = choose_generation_batch(snapshot, cfg_.policy.candidates, entry.fit, cap)
                         .chosen_batch;
        }

        PlacementConfig run_cfg = active_;
        run_cfg.gen_batch_size = chosen;
        PlacementConfig check_cfg = run_cfg;
        check_cfg.resident_partitions = p_bound;
        if (!check_feasible(check_cfg, cfg_.hardware, cfg_.model, cfg_.database).feasible)
            throw InfeasibleError("infeasible policy entry " +
                                  std::to_string(entry_idx));

        int take = std::min(backlog, chosen);
        generation_.members.assign(context_queue_.begin(), context_queue_.begin() + take);
        context_queue_.erase(context_queue_.begin(), context_queue_.begin() + take);
        double duration = generation_time(run_cfg, cfg_.hardware, cfg_.model, cfg_.prefetch_mode,
                                          batch_seed(), cfg_.cost);
        for (int i : generation_.members) traces_[i].generation_start = now_;
        generation_.busy = true;
        generation_.until = now_ + duration;
        generation_.task = Occupation::Task::Batch;
        occ_.begin_generation(run_cfg);
        nlohmann::json j = span_payload(generation_.members, workload_);
        j["batch_size"] = chosen;
        j["entry"] = entry_idx;
        j["duration"] = duration;
        emit(now_, "generation_batch_start", j);
    }

    // ---- serial mode -------------------------------------------------------

    void run_serial() {
        Violations bad = validate(cfg_.serial_placement, cfg_.database);
        if (!bad.empty()) throw Error("serial placement: " + describe(bad));
        serial_cap_ = max_feasible_batch(cfg_.serial_placement, cfg_.hardware, cfg_.model,
                                         cfg_.database);
        if (serial_cap_ < 1) throw InfeasibleError("scenario infeasible");

        active_ = cfg_.serial_placement;
        occ_.set_weight_fractions(active_);
        occ_.set_partitions(active_.resident_partitions);
        occ_.check(peak_);

        std::size_t arr_idx = 0;
        while (true) {
            double t = next_time(arr_idx);
            if (t == kNoEvent) break;
            now_ = t;
            while (arr_idx < workload_.size() && workload_[arr_idx].arrival_time <= now_) {
                retrieval_queue_.push_back(static_cast<int>(arr_idx));
                emit(now_, "arrival", {{"id", workload_[arr_idx].id}});
                ++arr_idx;
            }
            if (retrieval_.busy && retrieval_.until <= now_) serial_complete_phase();
            serial_dispatch(arr_idx < workload_.size());
        }
        makespan_ = last_completion_;
    }

    void serial_complete_phase() {
        retrieval_.busy = false;
        if (serial_in_generation_) {
            occ_.end_generation();
            for (int i : retrieval_.members) {
                traces_[i].generation_end = now_;
                last_completion_ = std::max(last_completion_, now_);
            }
            emit(now_, "generation_batch_end", span_payload(retrieval_.members, workload_));
            retrieval_.members.clear();
            serial_in_generation_ = false;
            return;
        }
        // retrieval phase done; chain the generation phase of the same batch
        for (int i : retrieval_.members) {
            traces_[i].retrieval_end = now_;
            traces_[i].generation_start = now_;
        }
        emit(now_, "retrieval_batch_end", span_payload(retrieval_.members, workload_));
        int b = static_cast<int>(retrieval_.members.size());
        PlacementConfig run_cfg = active_;
        run_cfg.gen_batch_size = b;
        double duration = generation_time(run_cfg, cfg_.hardware, cfg_.model, cfg_.prefetch_mode,
                                          batch_seed(), cfg_.cost);
        retrieval_.busy = true;
        retrieval_.until = now_ + duration;
        serial_in_generation_ = true;
        occ_.begin_generation(run_cfg);
        nlohmann::json j = span_payload(retrieval_.members, workload_);
        j["batch_size"] = b;
        j["duration"] = duration;
        emit(now_, "generation_batch_start", j);
    }

    void serial_dispatch(bool arrivals_remaining) {
        if (retrieval_.busy || retrieval_queue_.empty()) return;
        double rate = cfg_.schedule.rate_at(now_);
        int planned = static_cast<int>(std::llround(cfg_.serial_rule.rate_multiplier * rate *
                                                    cfg_.serial_rule.window_seconds));
        planned = std::clamp(planned, 1, serial_cap_);
        if (static_cast<int>(retrieval_queue_.size()) < planned && arrivals_remaining)
            return; // wait for the batch to fill
        int take = std::min<int>(planned, static_cast<int>(retrieval_queue_.size()));
        retrieval_.members.assign(retrieval_queue_.begin(), retrieval_queue_.begin() + take);
        retrieval_queue_.erase(retrieval_queue_.begin(), retrieval_queue_.begin() + take);
        double duration = retrieval_time(active_.resident_partitions, cfg_.database);
        for (int i : retrieval_.members) traces_[i].retrieval_start = now_;
        retrieval_.busy = true;
        retrieval_.until = now_ + duration;
        nlohmann::json j = span_payload(retrieval_.members, workload_);
        j["resident_partitions"] = active_.resident_partitions;
        j["duration"] = duration;
        emit(now_, "retrieval_batch_start", j);
    }

    // ---- state -------------------------------------------------------------

    std::span<const Request> workload_;
    const SimConfig& cfg_;
    OccupancyTracker occ_;

    std::vector<RequestTrace> traces_;
    std::vector<SimEvent> events_;
    long seq_ = 0;
    double now_ = 0.0;
    double last_completion_ = 0.0;
    double makespan_ = 0.0;
    PeakOccupancy peak_;
    std::uint64_t gen_batches_ = 0;

    std::deque<int> retrieval_queue_;
    std::deque<int> context_queue_;
    Occupation retrieval_;
    Occupation generation_;

    PlacementConfig active_{};
    int active_entry_ = -1;
    std::optional<PendingSwitch> pending_;
    PlacementConfig pending_weight_target_{};
    WeightOffloadHistory offload_history_;

    bool serial_in_generation_ = false;
    int serial_cap_ = 0;
};

}  // namespace

SimOutcome run(std::span<const Request> workload, const SimConfig& cfg) {
    Engine engine(workload, cfg);
    return engine.run();
}

double percentile_nearest_rank(std::span<const double> sorted_values, double percent) {
    if (sorted_values.empty()) return 0.0;
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(percent / 100.0 * static_cast<double>(sorted_values.size())));
    if (rank < 1) rank = 1;
    if (rank > sorted_values.size()) rank = sorted_values.size();
    return sorted_values[rank - 1];
}

Aggregates compute_aggregates(std::span<const RequestTrace> traces) {
    Aggregates agg;
    if (traces.empty()) return agg;
    std::vector<double> latencies;
    latencies.reserve(traces.size());
    double sum = 0.0;
    for (const auto& t : traces) {
        latencies.push_back(t.latency());
        sum += t.latency();
    }
    std::sort(latencies.begin(), latencies.end());
    agg.average = sum / static_cast<double>(latencies.size());
    agg.p50 = percentile_nearest_rank(latencies, 50.0);
    agg.p90 = percentile_nearest_rank(latencies, 90.0);
    agg.p99 = percentile_nearest_rank(latencies, 99.0);
    agg.max = latencies.back();
    return agg;
}

Breakdown compute_breakdown(std::span<const RequestTrace> traces) {
    Breakdown b;
    if (traces.empty()) return b;
    for (const auto& t : traces) {
        b.waiting += t.waiting();
        b.retrieval += t.retrieval();
        b.generation += t.generation();
    }
    double n = static_cast<double>(traces.size());
    b.waiting /= n;
    b.retrieval /= n;
    b.generation /= n;
    return b;
}

std::string metrics_report(const SimOutcome& outcome) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "requests            %zu\n", outcome.traces.size());
    out += buf;
    std::snprintf(buf, sizeof buf, "average latency     %.6f s\n", outcome.aggregates.average);
    out += buf;
    std::snprintf(buf, sizeof buf, "p50 latency         %.6f s\n", outcome.aggregates.p50);
    out += buf;
    std::snprintf(buf, sizeof buf, "p90 latency         %.6f s\n", outcome.aggregates.p90);
    out += buf;
    std::snprintf(buf, sizeof buf, "p99 latency         %.6f s\n", outcome.aggregates.p99);
    out += buf;
    std::snprintf(buf, sizeof buf, "max latency         %.6f s\n", outcome.aggregates.max);
    out += buf;
    std::snprintf(buf, sizeof buf, "avg waiting         %.6f s\n", outcome.breakdown.waiting);
    out += buf;
    std::snprintf(buf, sizeof buf, "avg retrieval       %.6f s\n", outcome.breakdown.retrieval);
    out += buf;
    std::snprintf(buf, sizeof buf, "avg generation      %.6f s\n", outcome.breakdown.generation);
    out += buf;
    std::snprintf(buf, sizeof buf, "makespan            %.6f s\n", outcome.makespan);
    out += buf;
    std::snprintf(buf, sizeof buf, "peak gpu / cpu / disk   %s / %s / %s\n",
                  format_bytes(outcome.peak.gpu).c_str(), format_bytes(outcome.peak.cpu).c_str(),
                  format_bytes(outcome.peak.disk).c_str());
    out += buf;
    return out;
}

namespace {

std::uint64_t workload_digest(std::span<const RequestTrace> traces) {
    // FNV-1a over (id, arrival) pairs
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    for (const auto& t : traces) {
        mix(t.id);
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof t.arrival);
        std::memcpy(&bits, &t.arrival, sizeof bits);
        mix(bits);
    }
    return h;
}

std::vector<ComparisonReport::Row> metric_rows(const Aggregates& aa, const Breakdown& ba,
                                               double ma, const Aggregates& ab,
                                               const Breakdown& bb, double mb) {
    auto ratio = [](double a, double b) {
        if (a == b) return 1.0;
        return b != 0.0 ? a / b : std::numeric_limits<double>::infinity();
    };
    std::vector<ComparisonReport::Row> rows;
    auto add = [&](const char* name, double a, double b) {
        rows.push_back({name, a, b, ratio(a, b), a - b});
    };
    add("average", aa.average, ab.average);
    add("p50", aa.p50, ab.p50);
    add("p90", aa.p90, ab.p90);
    add("p99", aa.p99, ab.p99);
    add("max", aa.max, ab.max);
    add("waiting", ba.waiting, bb.waiting);
    add("retrieval", ba.retrieval, bb.retrieval);
    add("generation", ba.generation, bb.generation);
    add("makespan", ma, mb);
    return rows;
}

std::string dominance(double avg_a, double avg_b) {
    if (avg_a < avg_b) return "a";
    if (avg_b < avg_a) return "b";
    return "tie";
}

}  // namespace

ComparisonReport compare(const SimOutcome& a, const SimOutcome& b) {
    if (a.traces.size() != b.traces.size()) throw Error("mismatched workloads");
    for (std::size_t i = 0; i < a.traces.size(); ++i)
        if (a.traces[i].id != b.traces[i].id || a.traces[i].arrival != b.traces[i].arrival)
            throw Error("mismatched workloads");

    ComparisonReport report;
    report.rows = metric_rows(a.aggregates, a.breakdown, a.makespan, b.aggregates, b.breakdown,
                              b.makespan);
    report.dominates_average = dominance(a.aggregates.average, b.aggregates.average);
    return report;
}

std::string to_json(const ComparisonReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"metric", r.metric},
                        {"a", r.a},
                        {"b", r.b},
                        {"ratio", r.ratio},
                        {"delta", r.delta}});
    nlohmann::json j{{"rows", rows}, {"dominates_average", report.dominates_average}};
    return j.dump(2);
}

std::string format(const ComparisonReport& report) {
    std::string out = "metric          a            b            ratio    delta\n";
    char buf[192];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%-12s %12.6f %12.6f %8.4f %12.6f\n", r.metric.c_str(),
                      r.a, r.b, r.ratio, r.delta);
        out += buf;
    }
    out += "lower average latency: " + report.dominates_average + "\n";
    return out;
}

void write_traces_csv(const SimOutcome& outcome, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "id,arrival,retrieval_start,retrieval_end,generation_start,generation_end,"
           "completion,waiting,retrieval,generation\n";
    char buf[512];
    for (const auto& t : outcome.traces) {
        std::snprintf(buf, sizeof buf,
                      "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<unsigned long long>(t.id), t.arrival, t.retrieval_start,
                      t.retrieval_end, t.generation_start, t.generation_end, t.completion(),
                      t.waiting(), t.retrieval(), t.generation());
        out << buf;
    }
}

void write_events_jsonl(const SimOutcome& outcome, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    for (const auto& e : outcome.event_log) {
        nlohmann::json j{{"time", e.time},
                         {"seq", e.seq},
                         {"kind", e.kind},
                         {"data", nlohmann::json::parse(e.data)}};
        out << j.dump() << '\n';
    }
}

void write_summary_json(const SimOutcome& outcome, const std::string& path) {
    nlohmann::json j{
        {"requests", outcome.traces.size()},
        {"workload_digest", workload_digest(outcome.traces)},
        {"aggregates",
         {{"average", outcome.aggregates.average},
          {"p50", outcome.aggregates.p50},
          {"p90", outcome.aggregates.p90},
          {"p99", outcome.aggregates.p99},
          {"max", outcome.aggregates.max}}},
        {"breakdown",
         {{"waiting", outcome.breakdown.waiting},
          {"retrieval", outcome.breakdown.retrieval},
          {"generation", outcome.breakdown.generation}}},
        {"makespan", outcome.makespan},
        {"peak_occupancy",
         {{"gpu", outcome.peak.gpu}, {"cpu", outcome.peak.cpu}, {"disk", outcome.peak.disk}}}};
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

ComparisonReport compare_summaries(const std::string& path_a, const std::string& path_b) {
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
        return j;
    };
    nlohmann::json a = load(path_a), b = load(path_b);
    try {
        if (a.at("requests") != b.at("requests") ||
            a.at("workload_digest") != b.at("workload_digest"))
            throw Error("mismatched workloads");

        auto agg = [](const nlohmann::json& j) {
            Aggregates x;
            x.average = j.at("aggregates").at("average").get<double>();
            x.p50 = j.at("aggregates").at("p50").get<double>();
            x.p90 = j.at("aggregates").at("p90").get<double>();
            x.p99 = j.at("aggregates").at("p99").get<double>();
            x.max = j.at("aggregates").at("max").get<double>();
            return x;
        };
        auto brk = [](const nlohmann::json& j) {
            Breakdown x;
            x.waiting = j.at("breakdown").at("waiting").get<double>();
            x.retrieval = j.at("breakdown").at("retrieval").get<double>();
            x.generation = j.at("breakdown").at("generation").get<double>();
            return x;
        };
        ComparisonReport report;
        Aggregates aa = agg(a), ab = agg(b);
        report.rows = metric_rows(aa, brk(a), a.at("makespan").get<double>(), ab, brk(b),
                                  b.at("makespan").get<double>());
        report.dominates_average = dominance(aa.average, ab.average);
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("summary: ") + e.what());
    }
}

}  // namespace ragsim
