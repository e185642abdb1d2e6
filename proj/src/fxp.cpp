// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftmd/fxp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shiftmd/error.hpp"

namespace shiftmd::fxp {

namespace {

void require_valid(FxFormat fmt) {
  if (!fmt.valid()) {
    throw Error("invalid fixed-point format Q" + std::to_string(fmt.total_bits - fmt.frac_bits - 1) + "." +
                std::to_string(fmt.frac_bits) + " (" + std::to_string(fmt.total_bits) + " bits)");
  }
}

void require_same(FxFormat a, FxFormat b) {
  if (!(a == b)) throw Error("fixed-point format mismatch");
}

}  // namespace

std::int32_t saturate(std::int64_t raw, FxFormat fmt) noexcept {
  return static_cast<std::int32_t>(std::clamp(raw, fmt.min_raw(), fmt.max_raw()));
}

FxValue encode_fx(double x, FxFormat fmt) {
  require_valid(fmt);
  if (std::isnan(x)) throw Error("cannot encode NaN as fixed point");
  const double scaled = std::ldexp(x, fmt.frac_bits);
  // Anything beyond the 32-bit range saturates anyway; clamp before rounding
  // so llround never sees an unrepresentable value.
  const double bounded = std::clamp(scaled, -0x1.0p40, 0x1.0p40);
  return FxValue{saturate(std::llround(bounded), fmt), fmt};
}

FxValue fx_add(FxValue a, FxValue b) {
  require_same(a.fmt, b.fmt);
  return FxValue{saturate(std::int64_t{a.raw} + b.raw, a.fmt), a.fmt};
}

FxValue fx_mul(FxValue a, FxValue b) {
  require_same(a.fmt, b.fmt);
  const std::int64_t product = std::int64_t{a.raw} * b.raw;
  return FxValue{saturate(product >> a.fmt.frac_bits, a.fmt), a.fmt};
}

WideAcc fx_shift(WideAcc x, int n) noexcept {
  if (n > 0) return WideAcc{x.raw << n, x.frac_bits};
  if (n < 0) return WideAcc{x.raw >> -n, x.frac_bits};
  return x;
}

WideAcc widen(FxValue v, int frac_bits) {
  if (frac_bits < v.fmt.frac_bits) throw Error("widen: target precision below source precision");
  return WideAcc{std::int64_t{v.raw} << (frac_bits - v.fmt.frac_bits), frac_bits};
}

FxValue narrow(WideAcc acc, FxFormat fmt) {
  require_valid(fmt);
  const int drop = acc.frac_bits - fmt.frac_bits;
  const std::int64_t raw = drop >= 0 ? (acc.raw >> drop) : (acc.raw << -drop);
  return FxValue{saturate(raw, fmt), fmt};
}

}  // namespace shiftmd::fxp
