// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "shiftmd/fxp.hpp"

namespace shiftmd::quant {

/// Number of power-of-two terms and the exponent window a shifter can realize.
struct QuantConfig {
  int K = 3;
  int exp_min = -12;
  int exp_max = 3;

  bool valid() const noexcept { return K >= 1 && exp_min < exp_max; }
  friend bool operator==(const QuantConfig&, const QuantConfig&) = default;
};

/// A weight stored as shift parameters: sign * sum_k 2^exponents[k].
/// Absent terms are omitted; sign == 0 means no terms at all.
struct ShiftWeight {
  int sign = 0;
  std::vector<int> exponents;

  double value() const noexcept;

  friend bool operator==(const ShiftWeight&, const ShiftWeight&) = default;
};

int sign_of(double w) noexcept;

/// Nearest power of two in the 1.5-scaled sense: 2^ceil(log2(|w| / 1.5)).
/// Returns 0 for w == 0.
double base_quant(double w) noexcept;

/// Exponent of base_quant(w), computed exactly. Requires w != 0.
int base_exponent(double w) noexcept;

/// Residual recursion: peel off base_quant of the remaining magnitude up to
/// cfg.K times, clamping exponents into [exp_min, exp_max].
ShiftWeight quantize_weight(double w, const QuantConfig& cfg = {});

/// Shift-sum product of a weight and a datapath value. The input is promoted
/// to frac_bits = x.fmt.frac_bits - exp_min so every term is a left shift and
/// no bits are dropped.
fxp::WideAcc shift_mul(const ShiftWeight& w, fxp::FxValue x, const QuantConfig& cfg = {});

/// Fractional bits of the accumulator used by shift_mul for inputs in `fmt`.
inline int acc_frac_bits(const fxp::FxFormat& fmt, const QuantConfig& cfg) noexcept { return fmt.frac_bits - cfg.exp_min; }

}  // namespace shiftmd::quant
