// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace shiftmd::fxp {

/// Signed two's-complement fixed-point format: `total_bits` including the
/// sign bit, `frac_bits` of them below the binary point.
struct FxFormat {
  int total_bits = 13;
  int frac_bits = 10;

  constexpr bool valid() const noexcept {
    return total_bits >= 2 && total_bits <= 32 && frac_bits >= 0 && frac_bits < total_bits;
  }
  constexpr std::int64_t max_raw() const noexcept { return (std::int64_t{1} << (total_bits - 1)) - 1; }
  constexpr std::int64_t min_raw() const noexcept { return -(std::int64_t{1} << (total_bits - 1)); }
  constexpr std::int64_t one_raw() const noexcept { return std::int64_t{1} << frac_bits; }
  constexpr double lsb() const noexcept { return 1.0 / static_cast<double>(one_raw()); }

  friend constexpr bool operator==(const FxFormat&, const FxFormat&) = default;
};

/// Chip datapath: 1 sign, 2 integer, 10 fractional bits.
inline constexpr FxFormat kDatapath{13, 10};
/// Multiplier baseline: 1 sign, 5 integer, 10 fractional bits.
inline constexpr FxFormat kBaseline16{16, 10};

struct FxValue {
  std::int32_t raw = 0;
  FxFormat fmt = kDatapath;

  double to_double() const noexcept { return static_cast<double>(raw) * fmt.lsb(); }

  friend constexpr bool operator==(const FxValue&, const FxValue&) = default;
};

/// Accumulation register ahead of the activation unit. Wide enough that a
/// layer's worth of shift-sum or product terms never overflows.
struct WideAcc {
  std::int64_t raw = 0;
  int frac_bits = 0;

  double to_double() const noexcept { return static_cast<double>(raw) / static_cast<double>(std::int64_t{1} << frac_bits); }

  friend constexpr bool operator==(const WideAcc&, const WideAcc&) = default;
};

/// Clamp a raw integer into the representable range of `fmt`.
std::int32_t saturate(std::int64_t raw, FxFormat fmt) noexcept;

/// Round to nearest (ties away from zero), then saturate. Throws on NaN or an
/// invalid format.
FxValue encode_fx(double x, FxFormat fmt = kDatapath);

inline double decode_fx(FxValue v) noexcept { return v.to_double(); }

/// Saturating add. Throws if the formats differ.
FxValue fx_add(FxValue a, FxValue b);

/// Widened product, arithmetic right shift by frac_bits, saturate.
FxValue fx_mul(FxValue a, FxValue b);

/// n > 0 shifts left, n < 0 shifts right arithmetically (floor).
WideAcc fx_shift(WideAcc x, int n) noexcept;

/// Exact promotion of a narrow value into the accumulator domain with
/// `frac_bits` fractional bits (must be >= v.fmt.frac_bits).
WideAcc widen(FxValue v, int frac_bits);

/// Drop accumulator bits down to `fmt` (floor), then saturate.
FxValue narrow(WideAcc acc, FxFormat fmt);

}  // namespace shiftmd::fxp
