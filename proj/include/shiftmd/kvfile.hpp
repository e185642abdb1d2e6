// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>

namespace shiftmd {

/// `key = value` lines; '#' starts a comment, blank lines are ignored.
/// Later keys override earlier ones. Throws ParseError on a line without '='.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> read_key_value_file(const std::string& path);
std::string write_key_values(const std::map<std::string, std::string>& kv);

}  // namespace shiftmd
