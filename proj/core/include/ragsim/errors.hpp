// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ragsim {

// Base class for every failure raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A placement or scenario that cannot satisfy the device capacity bounds.
struct InfeasibleError : Error {
    using Error::Error;
};

// Malformed input file. line is 1-based; 0 means "not line-addressable".
struct ParseError : Error {
    ParseError(const std::string& msg, int line_no = 0)
        : Error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
    int line = 0;
};

}  // namespace ragsim
