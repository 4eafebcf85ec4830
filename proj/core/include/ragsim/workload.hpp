// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ragsim/domain.hpp"

namespace ragsim {

// Piecewise-constant arrival rate: each interval runs for `duration` seconds
// at `rate` requests/second.
struct IntervalSchedule {
    struct Interval {
        double duration = 0.0; // seconds, > 0
        double rate = 0.0;     // requests/second, >= 0
        bool operator==(const Interval&) const = default;
    };
    std::vector<Interval> intervals;

    double total_duration() const;
    // Rate at absolute time t; beyond the schedule the last rate applies.
    double rate_at(double t) const;
    double expected_requests() const;
    // Index of the interval containing t (clamped to the last one).
    int interval_index(double t) const;

    bool operator==(const IntervalSchedule&) const = default;
};

Violations validate(const IntervalSchedule& schedule);

// Four 20-minute intervals at 4, 8, 12, 16 requests/minute.
IntervalSchedule default_schedule();

// Divides durations and multiplies rates by time_scale, preserving expected
// per-interval counts and all dimensionless structure.
IntervalSchedule scaled(const IntervalSchedule& schedule, double time_scale);

// Poisson arrivals: i.i.d. exponential gaps within each interval. Ids are
// sequential from 0; output is sorted by arrival time.
std::vector<Request> generate_poisson(const IntervalSchedule& schedule, std::uint64_t seed,
                                      int top_k);

// workload.csv: id,arrival_seconds,top_k with full float precision.
void save_trace(std::span<const Request> requests, const std::string& path);
std::vector<Request> load_trace(const std::string& path);

}  // namespace ragsim
