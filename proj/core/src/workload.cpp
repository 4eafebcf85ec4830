// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/workload.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "ragsim/errors.hpp"
#include "ragsim/rng.hpp"

namespace ragsim {

double IntervalSchedule::total_duration() const {
    double total = 0.0;
    for (const auto& iv : intervals) total += iv.duration;
    return total;
}

double IntervalSchedule::rate_at(double t) const {
    if (intervals.empty()) return 0.0;
    double start = 0.0;
    for (const auto& iv : intervals) {
        if (t < start + iv.duration) return iv.rate;
        start += iv.duration;
    }
    return intervals.back().rate;
}

double IntervalSchedule::expected_requests() const {
    double total = 0.0;
    for (const auto& iv : intervals) total += iv.duration * iv.rate;
    return total;
}

int IntervalSchedule::interval_index(double t) const {
    double start = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (t < start + intervals[i].duration) return static_cast<int>(i);
        start += intervals[i].duration;
    }
    return intervals.empty() ? 0 : static_cast<int>(intervals.size()) - 1;
}

Violations validate(const IntervalSchedule& schedule) {
    Violations v;
    for (std::size_t i = 0; i < schedule.intervals.size(); ++i) {
        const auto& iv = schedule.intervals[i];
        if (iv.duration <= 0.0)
            v.push_back({"intervals[" + std::to_string(i) + "].duration",
                         "must be > 0, got " + std::to_string(iv.duration)});
        if (iv.rate < 0.0)
            v.push_back({"intervals[" + std::to_string(i) + "].rate",
                         "must be >= 0, got " + std::to_string(iv.rate)});
    }
    return v;
}

IntervalSchedule default_schedule() {
    IntervalSchedule s;
    for (double per_minute : {4.0, 8.0, 12.0, 16.0})
        s.intervals.push_back({20.0 * 60.0, per_minute / 60.0});
    return s;
}

IntervalSchedule scaled(const IntervalSchedule& schedule, double time_scale) {
    IntervalSchedule out;
    for (const auto& iv : schedule.intervals)
        out.intervals.push_back({iv.duration / time_scale, iv.rate * time_scale});
    return out;
}

std::vector<Request> generate_poisson(const IntervalSchedule& schedule, std::uint64_t seed,
                                      int top_k) {
    Violations bad = validate(schedule);
    if (!bad.empty()) throw Error("generate_poisson: " + describe(bad));

    std::vector<Request> out;
    Rng rng(seed);
    double interval_start = 0.0;
    for (const auto& iv : schedule.intervals) {
        double interval_end = interval_start + iv.duration;
        if (iv.rate > 0.0) {
            double t = interval_start + rng.next_exponential(iv.rate);
            while (t < interval_end) {
                out.push_back({static_cast<std::uint64_t>(out.size()), t, top_k});
                t += rng.next_exponential(iv.rate);
            }
        }
        interval_start = interval_end;
    }
    return out;
}

void save_trace(std::span<const Request> requests, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "id,arrival_seconds,top_k\n";
    char buf[96];
    for (const Request& r : requests) {
        std::snprintf(buf, sizeof buf, "%llu,%.17g,%d\n",
                      static_cast<unsigned long long>(r.id), r.arrival_time, r.top_k);
        out << buf;
    }
}

std::vector<Request> load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);

    std::vector<Request> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "id,arrival_seconds,top_k")
                throw ParseError("bad workload header: '" + line + "'", line_no);
            continue;
        }
        if (line.empty()) continue;

        Request r;
        const char* p = line.data();
        const char* end = p + line.size();
        auto field = [&](auto& value) {
            auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc()) throw ParseError("bad workload row: '" + line + "'", line_no);
            p = next;
        };
        field(r.id);
        if (p == end || *p != ',') throw ParseError("bad workload row: '" + line + "'", line_no);
        ++p;
        field(r.arrival_time);
        if (p == end || *p != ',') throw ParseError("bad workload row: '" + line + "'", line_no);
        ++p;
        field(r.top_k);
        if (p != end) throw ParseError("bad workload row: '" + line + "'", line_no);

        Violations bad = validate(r);
        if (!bad.empty()) throw ParseError("invalid request: " + describe(bad), line_no);
        out.push_back(r);
    }
    return out;
}

}  // namespace ragsim
