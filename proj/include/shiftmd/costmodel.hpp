// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shiftmd/net.hpp"

namespace shiftmd::cost {

/// Transistor counts of the building blocks. The two activation figures are
/// synthesis results and serve as calibration anchors; the rest are textbook
/// static-CMOS estimates and are meant to be overridden.
struct UnitCosts {
  std::int64_t shifter_per_bit_option = 2;  // pass-gate leg per output bit per shift amount
  std::int64_t adder_per_bit = 28;          // mirror full adder
  std::int64_t multiplier_per_bit2 = 34;    // AND + full adder per partial-product bit
  std::int64_t selector_per_bit = 12;       // 2:1 mux
  std::int64_t register_per_bit = 24;       // static D flip-flop
  std::int64_t act_phi = 4098;
  std::int64_t act_tanh = 50418;

  void validate() const;
};

enum class SchemeKind { Sqnn, Fqnn };

struct Scheme {
  SchemeKind kind = SchemeKind::Sqnn;
  int K = 3;              // SQNN shifters per shift unit
  int bits = 13;          // datapath word width
  int shift_options = 16; // distinct shift amounts (exp_max - exp_min + 1)
  net::Activation activation = net::Activation::PhiHw;

  static Scheme sqnn(int K, int bits = 13, int shift_options = 16) { return Scheme{SchemeKind::Sqnn, K, bits, shift_options}; }
  static Scheme fqnn(int bits = 16) { return Scheme{SchemeKind::Fqnn, 0, bits, 0}; }
};

struct CostReport {
  std::int64_t total = 0;
  /// Everything except the activation units: what changes between schemes.
  std::int64_t matrix_units = 0;
  std::map<std::string, std::int64_t> breakdown;

  std::string render() const;
  std::string to_json() const;
};

CostReport estimate_cost(const std::vector<int>& arch, const Scheme& scheme, const UnitCosts& costs = {});

/// Matrix-unit cost of the shift scheme over that of the multiplier scheme.
double shift_to_multiply_ratio(const std::vector<int>& arch, int K, const UnitCosts& costs = {}, int sqnn_bits = 13, int fqnn_bits = 16,
                               int shift_options = 16);

/// act_phi / act_tanh.
double activation_ratio(const UnitCosts& costs = {});

/// Applies `key = value` overrides (field names as in UnitCosts).
UnitCosts load_unit_costs(const std::string& path, UnitCosts base = {});
UnitCosts apply_unit_cost_overrides(const std::map<std::string, std::string>& kv, UnitCosts base = {});

}  // namespace shiftmd::cost
