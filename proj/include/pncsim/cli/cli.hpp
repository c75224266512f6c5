// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pncsim::cli {

inline constexpr int kExitMet = 0;
inline constexpr int kExitViolated = 1;
inline constexpr int kExitError = 2;

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`.
///   list
///   run [<name>] [--seed N] [--out PATH] [--keylog PATH] [--outcome PATH]
///       [--policy P] [--relay-latency MS] [--geo-threshold M] [--config PATH]
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pncsim::cli
