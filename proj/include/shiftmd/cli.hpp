// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shiftmd::cli {

/// Environment variable naming the default root for run output directories.
inline constexpr const char* kOutRootEnv = "SHIFTMD_OUT_ROOT";

/// Entry point of the `shiftmd` tool. args excludes the program name.
/// Returns the process exit status; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shiftmd::cli
