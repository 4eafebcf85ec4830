// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ragsim/errors.hpp"
#include "ragsim/workload.hpp"

using namespace ragsim;

TEST_CASE("default schedule matches the reference workload") {
    IntervalSchedule s = default_schedule();
    REQUIRE(s.intervals.size() == 4);
    CHECK(s.total_duration() == doctest::Approx(4800.0));
    CHECK(s.expected_requests() == doctest::Approx(800.0));
    CHECK(s.rate_at(0.0) == doctest::Approx(4.0 / 60.0));
    CHECK(s.rate_at(1200.0) == doctest::Approx(8.0 / 60.0));
    CHECK(s.rate_at(4799.0) == doctest::Approx(16.0 / 60.0));
    CHECK(s.rate_at(1e9) == doctest::Approx(16.0 / 60.0)); // beyond the end
    CHECK(s.interval_index(0.0) == 0);
    CHECK(s.interval_index(1200.0) == 1);
    CHECK(s.interval_index(4799.0) == 3);
}

TEST_CASE("time scaling preserves expected counts") {
    IntervalSchedule s = scaled(default_schedule(), 60.0);
    CHECK(s.total_duration() == doctest::Approx(80.0));
    CHECK(s.expected_requests() == doctest::Approx(800.0));
}

TEST_CASE("arrivals stay inside their interval and stay sorted") {
    IntervalSchedule s;
    s.intervals = {{10.0, 2.0}, {5.0, 0.0}, {10.0, 5.0}};
    auto reqs = generate_poisson(s, 7, 5);
    REQUIRE(!reqs.empty());
    double prev = 0.0;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        CHECK(reqs[i].id == i);
        CHECK(reqs[i].arrival_time >= prev);
        CHECK(reqs[i].top_k == 5);
        // nothing may land in the zero-rate window
        bool in_dead_zone = reqs[i].arrival_time >= 10.0 && reqs[i].arrival_time < 15.0;
        CHECK(!in_dead_zone);
        prev = reqs[i].arrival_time;
    }
    CHECK(reqs.back().arrival_time < s.total_duration());
}

TEST_CASE("zero-rate schedule generates nothing") {
    IntervalSchedule s;
    s.intervals = {{60.0, 0.0}};
    CHECK(generate_poisson(s, 1, 5).empty());
}

TEST_CASE("generation is deterministic per seed") {
    IntervalSchedule s = scaled(default_schedule(), 60.0);
    auto a = generate_poisson(s, 42, 5);
    auto b = generate_poisson(s, 42, 5);
    auto c = generate_poisson(s, 43, 5);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("per-interval counts track the Poisson mean") {
    IntervalSchedule s = scaled(default_schedule(), 60.0);
    const int seeds = 40;
    std::vector<double> counts(s.intervals.size(), 0.0);
    for (int seed = 0; seed < seeds; ++seed) {
        auto reqs = generate_poisson(s, 1000 + seed, 5);
        for (const auto& r : reqs) counts[s.interval_index(r.arrival_time)] += 1.0;
    }
    for (std::size_t i = 0; i < s.intervals.size(); ++i) {
        double expected = s.intervals[i].duration * s.intervals[i].rate;
        double mean = counts[i] / seeds;
        CHECK(std::fabs(mean - expected) <= 3.0 * std::sqrt(expected));
    }
}

TEST_CASE("workload trace round-trips losslessly") {
    IntervalSchedule s = scaled(default_schedule(), 60.0);
    auto reqs = generate_poisson(s, 11, 5);
    const std::string path = "workload_roundtrip_test.csv";
    save_trace(reqs, path);
    auto loaded = load_trace(path);
    CHECK(loaded == reqs);
    std::remove(path.c_str());

    save_trace(std::vector<Request>{}, path);
    CHECK(load_trace(path).empty());
    std::remove(path.c_str());
}

TEST_CASE("negative arrivals are rejected with a line number") {
    const std::string path = "workload_negative_test.csv";
    {
        std::ofstream out(path);
        out << "id,arrival_seconds,top_k\n0,1.5,5\n1,-2.0,5\n";
    }
    try {
        load_trace(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("arrival_time") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("malformed rows are rejected") {
    const std::string path = "workload_malformed_test.csv";
    {
        std::ofstream out(path);
        out << "id,arrival_seconds,top_k\nnot,a,row\n";
    }
    CHECK_THROWS_AS(load_trace(path), ParseError);
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "wrong,header\n";
    }
    CHECK_THROWS_AS(load_trace(path), ParseError);
    std::remove(path.c_str());
}
