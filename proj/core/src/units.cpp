// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "ragsim/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "ragsim/errors.hpp"

namespace ragsim {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

double parse_scaled(std::string_view text) {
    std::string_view s = trim(text);
    if (s.size() >= 2 && s.substr(s.size() - 2) == "/s") s = trim(s.substr(0, s.size() - 2));
    if (s.empty()) throw ParseError("empty byte quantity");

    std::size_t num_end = 0;
    while (num_end < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[num_end])) || s[num_end] == '.' ||
            s[num_end] == '+' || s[num_end] == '-' || s[num_end] == 'e' || s[num_end] == 'E'))
        ++num_end;

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + num_end, value);
    if (ec != std::errc() || ptr != s.data() + num_end)
        throw ParseError("bad byte quantity: '" + std::string(text) + "'");

    std::string_view suffix = trim(s.substr(num_end));
    double scale = 1.0;
    if (suffix.empty() || iequals(suffix, "B")) scale = 1.0;
    else if (iequals(suffix, "KiB")) scale = static_cast<double>(KiB);
    else if (iequals(suffix, "MiB")) scale = static_cast<double>(MiB);
    else if (iequals(suffix, "GiB")) scale = static_cast<double>(GiB);
    else if (iequals(suffix, "TiB")) scale = static_cast<double>(TiB);
    else throw ParseError("unknown byte suffix: '" + std::string(suffix) + "'");
    return value * scale;
}

}  // namespace

Bytes parse_bytes(std::string_view text) {
    double v = parse_scaled(text);
    if (v < 0.0) throw ParseError("byte quantity must be nonnegative: '" + std::string(text) + "'");
    return static_cast<Bytes>(std::llround(v));
}

double parse_bytes_per_sec(std::string_view text) {
    return parse_scaled(text);
}

std::string format_bytes(double bytes) {
    char buf[64];
    if (bytes >= static_cast<double>(TiB))
        std::snprintf(buf, sizeof buf, "%.2f TiB", bytes / static_cast<double>(TiB));
    else if (bytes >= static_cast<double>(GiB))
        std::snprintf(buf, sizeof buf, "%.2f GiB", bytes / static_cast<double>(GiB));
    else if (bytes >= static_cast<double>(MiB))
        std::snprintf(buf, sizeof buf, "%.2f MiB", bytes / static_cast<double>(MiB));
    else if (bytes >= static_cast<double>(KiB))
        std::snprintf(buf, sizeof buf, "%.2f KiB", bytes / static_cast<double>(KiB));
    else
        std::snprintf(buf, sizeof buf, "%.0f B", bytes);
    return buf;
}

}  // namespace ragsim
