// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "shiftmd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return shiftmd::cli::run_command(args, std::cout, std::cerr);
}
