// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ragsim {

// Time is seconds as double; memory is bytes as unsigned 64-bit.
using Bytes = std::uint64_t;
using Seconds = double;

inline constexpr Bytes KiB = 1ull << 10;
inline constexpr Bytes MiB = 1ull << 20;
inline constexpr Bytes GiB = 1ull << 30;
inline constexpr Bytes TiB = 1ull << 40;

// Parses "16 GiB", "512MiB", "8 TiB", or a plain byte count. A trailing
// "/s" is accepted so bandwidth fields can reuse the same syntax.
// Throws ParseError on anything else.
Bytes parse_bytes(std::string_view text);
double parse_bytes_per_sec(std::string_view text);

// "17.50 GiB" style rendering for reports.
std::string format_bytes(double bytes);

}  // namespace ragsim
