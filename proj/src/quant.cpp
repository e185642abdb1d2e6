// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftmd/quant.hpp"

#include <algorithm>
#include <cmath>

#include "shiftmd/error.hpp"

namespace shiftmd::quant {

double ShiftWeight::value() const noexcept {
  double sum = 0.0;
  for (int n : exponents) sum += std::ldexp(1.0, n);
  return sign * sum;
}

int sign_of(double w) noexcept {
  if (w > 0.0) return 1;
  if (w < 0.0) return -1;
  return 0;
}

int base_exponent(double w) noexcept {
  // ceil(log2(x)) from the binary exponent, exact where std::log2 may round
  // a value just above a power of two down onto it.
  int e = 0;
  const double m = std::frexp(std::fabs(w) / 1.5, &e);  // x = m * 2^e, m in [0.5, 1)
  return m == 0.5 ? e - 1 : e;
}

double base_quant(double w) noexcept {
  if (w == 0.0) return 0.0;
  return std::ldexp(1.0, base_exponent(w));
}

ShiftWeight quantize_weight(double w, const QuantConfig& cfg) {
  if (!cfg.valid()) throw Error("invalid quantizer config");
  if (!std::isfinite(w)) throw Error("cannot quantize a non-finite weight");

  const double eps = std::ldexp(1.0, cfg.exp_min - 1);
  ShiftWeight q;
  double residual = std::fabs(w);
  if (residual < eps) return q;

  q.sign = sign_of(w);
  for (int k = 0; k < cfg.K && residual >= eps; ++k) {
    const int n = std::clamp(base_exponent(residual), cfg.exp_min, cfg.exp_max);
    q.exponents.push_back(n);
    residual = std::max(residual - std::ldexp(1.0, n), 0.0);
  }
  return q;
}

fxp::WideAcc shift_mul(const ShiftWeight& w, fxp::FxValue x, const QuantConfig& cfg) {
  const int frac = acc_frac_bits(x.fmt, cfg);
  fxp::WideAcc acc{0, frac};
  if (w.sign == 0) return acc;
  const fxp::WideAcc base{x.raw, frac};  // x.raw * 2^-frac == x * 2^exp_min
  for (int n : w.exponents) acc.raw += fxp::fx_shift(base, n - cfg.exp_min).raw;
  if (w.sign < 0) acc.raw = -acc.raw;
  return acc;
}

}  // namespace shiftmd::quant
