// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ragsim/errors.hpp"

namespace ragsim {

namespace {

using nlohmann::json;

Bytes bytes_field(const json& j, const char* key) {
    const json& v = j.at(key);
    if (v.is_string()) return parse_bytes(v.get<std::string>());
    if (v.is_number_unsigned() || v.is_number_integer()) return v.get<Bytes>();
    if (v.is_number_float()) return static_cast<Bytes>(v.get<double>());
    throw ParseError(std::string(key) + ": expected bytes (number or suffixed string)");
}

double rate_field(const json& j, const char* key) {
    const json& v = j.at(key);
    if (v.is_string()) return parse_bytes_per_sec(v.get<std::string>());
    if (v.is_number()) return v.get<double>();
    throw ParseError(std::string(key) + ": expected bytes/second (number or suffixed string)");
}

HardwareProfile hardware_from(const json& j) {
    HardwareProfile hw;
    hw.gpu_mem = bytes_field(j, "gpu_mem");
    hw.cpu_mem = bytes_field(j, "cpu_mem");
    hw.disk_capacity = bytes_field(j, "disk_capacity");
    hw.bw_gpu_cpu = rate_field(j, "bw_gpu_cpu");
    hw.bw_cpu_disk = rate_field(j, "bw_cpu_disk");
    hw.gpu_layer_rate = j.value("gpu_layer_rate", 1.0);
    hw.jitter_sigma = j.value("jitter_sigma", 0.0);
    return hw;
}

ModelProfile model_from(const json& j) {
    ModelProfile m;
    m.num_layers = j.at("num_layers").get<int>();
    m.weight_total = bytes_field(j, "weight_total");
    m.kv_bytes_per_request = bytes_field(j, "kv_bytes_per_request");
    m.workspace_bytes_per_request = bytes_field(j, "workspace_bytes_per_request");
    m.compute_prefill_per_layer = j.at("compute_prefill_per_layer").get<double>();
    m.compute_decode_per_layer = j.at("compute_decode_per_layer").get<double>();
    m.output_tokens = j.at("output_tokens").get<int>();
    return m;
}

DatabaseProfile database_from(const json& j, const HardwareProfile& hw) {
    DatabaseProfile db;
    db.num_partitions = j.at("num_partitions").get<int>();
    db.partition_bytes = bytes_field(j, "partition_bytes");
    db.search_seconds_per_partition = j.at("search_seconds_per_partition").get<double>();
    if (j.contains("load_seconds_per_partition"))
        db.load_seconds_per_partition = j.at("load_seconds_per_partition").get<double>();
    else
        db.load_seconds_per_partition = derived_partition_load_seconds(db, hw);
    return db;
}

PlacementConfig placement_from(const json& j) {
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

PrefetchMode prefetch_mode_from(const std::string& name) {
    if (name == "continuous") return PrefetchMode::ContinuousQueue;
    if (name == "next-layer") return PrefetchMode::NextLayerOnly;
    throw ParseError("prefetch_mode must be 'continuous' or 'next-layer', got '" + name + "'");
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }

    try {
        Scenario s;
        s.hardware = hardware_from(j.at("hardware"));
        s.model = model_from(j.at("model"));
        s.database = database_from(j.at("database"), s.hardware);

        if (j.contains("cost")) {
            const json& c = j.at("cost");
            s.cost.decode_batch_exponent = c.value("decode_batch_exponent", 1.0);
            s.cost.decode_workspace_fraction = c.value("decode_workspace_fraction", 0.25);
            s.cost.kv_transfer_coeff = c.value("kv_transfer_coeff", 1.0);
        }
        if (j.contains("sim")) {
            const json& sim = j.at("sim");
            s.prefetch_mode = prefetch_mode_from(sim.value("prefetch_mode", "continuous"));
            s.max_retrieval_batch = sim.value("max_retrieval_batch", 64);
            s.serial_rule.rate_multiplier = sim.value("serial_rate_multiplier", 4.0);
            s.serial_rule.window_seconds = sim.value("serial_window_seconds", 60.0);
            if (sim.contains("serial_placement"))
                s.serial_placement = placement_from(sim.at("serial_placement"));
        }
        if (j.contains("workload")) {
            const json& w = j.at("workload");
            for (const json& iv : w.at("intervals"))
                s.schedule.intervals.push_back({iv.at("duration_seconds").get<double>(),
                                                iv.at("rate_per_second").get<double>()});
            s.top_k = w.value("top_k", 5);
        }
        if (j.contains("profiler")) {
            const json& p = j.at("profiler");
            s.profiler.probe_batches = p.at("probe_batches").get<std::vector<int>>();
            if (p.contains("partition_candidates"))
                s.profiler.partition_candidates =
                    p.at("partition_candidates").get<std::vector<int>>();
            s.profiler.w_step = p.value("w_step", 0.05);
        }
        if (s.profiler.partition_candidates.empty())
            for (int p = 0; p <= s.database.num_partitions; ++p)
                s.profiler.partition_candidates.push_back(p);

        Violations v = validate(s.hardware);
        auto append = [&](Violations more) { v.insert(v.end(), more.begin(), more.end()); };
        append(validate(s.model));
        append(validate(s.database));
        append(validate(s.schedule));
        if (s.serial_placement) append(validate(*s.serial_placement, s.database));
        if (!v.empty()) throw ParseError("scenario: " + describe(v));
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["hardware"] = {{"gpu_mem", s.hardware.gpu_mem},
                     {"cpu_mem", s.hardware.cpu_mem},
                     {"disk_capacity", s.hardware.disk_capacity},
                     {"bw_gpu_cpu", s.hardware.bw_gpu_cpu},
                     {"bw_cpu_disk", s.hardware.bw_cpu_disk},
                     {"gpu_layer_rate", s.hardware.gpu_layer_rate},
                     {"jitter_sigma", s.hardware.jitter_sigma}};
    j["model"] = {{"num_layers", s.model.num_layers},
                  {"weight_total", s.model.weight_total},
                  {"kv_bytes_per_request", s.model.kv_bytes_per_request},
                  {"workspace_bytes_per_request", s.model.workspace_bytes_per_request},
                  {"compute_prefill_per_layer", s.model.compute_prefill_per_layer},
                  {"compute_decode_per_layer", s.model.compute_decode_per_layer},
                  {"output_tokens", s.model.output_tokens}};
    j["database"] = {{"num_partitions", s.database.num_partitions},
                     {"partition_bytes", s.database.partition_bytes},
                     {"search_seconds_per_partition", s.database.search_seconds_per_partition},
                     {"load_seconds_per_partition", s.database.load_seconds_per_partition}};
    j["cost"] = {{"decode_batch_exponent", s.cost.decode_batch_exponent},
                 {"decode_workspace_fraction", s.cost.decode_workspace_fraction},
                 {"kv_transfer_coeff", s.cost.kv_transfer_coeff}};
    j["sim"] = {{"prefetch_mode", to_string(s.prefetch_mode)},
                {"max_retrieval_batch", s.max_retrieval_batch},
                {"serial_rate_multiplier", s.serial_rule.rate_multiplier},
                {"serial_window_seconds", s.serial_rule.window_seconds}};
    if (s.serial_placement)
        j["sim"]["serial_placement"] = json::parse(placement_to_json_text(*s.serial_placement));
    json intervals = json::array();
    for (const auto& iv : s.schedule.intervals)
        intervals.push_back({{"duration_seconds", iv.duration}, {"rate_per_second", iv.rate}});
    j["workload"] = {{"intervals", intervals}, {"top_k", s.top_k}};
    j["profiler"] = {{"probe_batches", s.profiler.probe_batches},
                     {"partition_candidates", s.profiler.partition_candidates},
                     {"w_step", s.profiler.w_step}};
    return j.dump(2);
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << scenario_to_json(s) << '\n';
}

PlacementConfig placement_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    json j;
    try {
        in >> j;
        return placement_from(j);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string placement_to_json_text(const PlacementConfig& cfg) {
    json j{{"w_gpu", cfg.w_gpu},
           {"w_cpu", cfg.w_cpu},
           {"w_disk", cfg.w_disk},
           {"c_gpu", cfg.c_gpu},
           {"c_cpu", cfg.c_cpu},
           {"c_disk", cfg.c_disk},
           {"resident_partitions", cfg.resident_partitions},
           {"gen_batch_size", cfg.gen_batch_size}};
    return j.dump(2);
}

void save_placement(const PlacementConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << placement_to_json_text(cfg) << '\n';
}

SimConfig make_sim_config(const Scenario& scenario, SimMode mode, std::uint64_t seed) {
    SimConfig cfg;
    cfg.mode = mode;
    cfg.hardware = scenario.hardware;
    cfg.model = scenario.model;
    cfg.database = scenario.database;
    cfg.cost = scenario.cost;
    cfg.prefetch_mode = scenario.prefetch_mode;
    cfg.max_retrieval_batch = scenario.max_retrieval_batch;
    cfg.serial_rule = scenario.serial_rule;
    cfg.schedule = scenario.schedule;
    cfg.seed = seed;
    if (mode == SimMode::Serial) {
        int max_batch = 1;
        double rate_max = 0.0;
        for (const auto& iv : scenario.schedule.intervals) rate_max = std::max(rate_max, iv.rate);
        max_batch = std::max<int>(
            1, static_cast<int>(std::llround(scenario.serial_rule.rate_multiplier * rate_max *
                                             scenario.serial_rule.window_seconds)));
        cfg.serial_placement = scenario.serial_placement
                                   ? *scenario.serial_placement
                                   : derive_serial_placement(scenario.hardware, scenario.model,
                                                             scenario.database, max_batch);
    }
    return cfg;
}

}  // namespace ragsim
