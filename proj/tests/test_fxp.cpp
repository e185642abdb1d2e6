// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <limits>

#include "doctest.h"
#include "shiftmd/error.hpp"
#include "shiftmd/fxp.hpp"

using namespace shiftmd::fxp;

namespace {

FxValue q(std::int32_t raw, FxFormat fmt = kDatapath) { return FxValue{raw, fmt}; }

// Floor division by a power of two on plain integers.
std::int64_t floor_div_pow2(std::int64_t a, int n) {
  const std::int64_t d = std::int64_t{1} << n;
  std::int64_t r = a / d;
  if ((a % d) != 0 && a < 0) --r;
  return r;
}

std::int64_t clamp_raw(std::int64_t r, FxFormat fmt) { return std::min(std::max(r, fmt.min_raw()), fmt.max_raw()); }

}  // namespace

TEST_CASE("format limits") {
  CHECK(kDatapath.valid());
  CHECK(kDatapath.max_raw() == 4095);
  CHECK(kDatapath.min_raw() == -4096);
  CHECK(kBaseline16.max_raw() == 32767);
  CHECK_FALSE(FxFormat{1, 0}.valid());
  CHECK_FALSE(FxFormat{33, 10}.valid());
  CHECK_FALSE(FxFormat{13, 13}.valid());
  CHECK_THROWS_AS(encode_fx(0.0, FxFormat{40, 3}), shiftmd::Error);
}

TEST_CASE("encode examples") {
  CHECK(encode_fx(0.75).raw == 768);
  CHECK(encode_fx(5.0).raw == 4095);
  CHECK(encode_fx(5.0).to_double() == 3.9990234375);
  CHECK(encode_fx(0.333).raw == 341);
  CHECK(encode_fx(-5.0).raw == -4096);
  // ties away from zero
  CHECK(encode_fx(0.5 / 1024).raw == 1);
  CHECK(encode_fx(-0.5 / 1024).raw == -1);
  CHECK(encode_fx(1.5 / 1024).raw == 2);
  CHECK(encode_fx(-2.5 / 1024).raw == -3);
  CHECK(encode_fx(std::numeric_limits<double>::infinity()).raw == 4095);
  CHECK_THROWS_AS(encode_fx(std::nan("")), shiftmd::Error);
}

TEST_CASE("add examples") {
  CHECK(fx_add(q(768), q(768)).raw == 1536);
  CHECK(fx_add(q(4095), q(1)).raw == 4095);
  CHECK(fx_add(q(-4096), q(-1)).raw == -4096);
  CHECK_THROWS_AS(fx_add(q(1), q(1, kBaseline16)), shiftmd::Error);
}

TEST_CASE("mul examples") {
  CHECK(fx_mul(q(512), q(512)).raw == 256);
  CHECK(fx_mul(q(1536), q(1536)).raw == 2304);
  CHECK(fx_mul(q(-2048), q(2048)).raw == -4096);
  // truncation toward minus infinity: -1/1024 * 1/2 = -1/2048 -> -1 raw
  CHECK(fx_mul(q(-1), q(512)).raw == -1);
  CHECK(fx_mul(q(1), q(512)).raw == 0);
  CHECK(fx_mul(q(4095), q(4095)).raw == 4095);
  CHECK_THROWS_AS(fx_mul(q(1), q(1, kBaseline16)), shiftmd::Error);
}

TEST_CASE("shift examples") {
  CHECK(fx_shift(WideAcc{100, 10}, 2).raw == 400);
  CHECK(fx_shift(WideAcc{-7, 10}, -1).raw == -4);
  CHECK(fx_shift(WideAcc{123, 10}, 0).raw == 123);
  CHECK(fx_shift(WideAcc{123, 10}, 0).frac_bits == 10);
}

TEST_CASE("widen and narrow") {
  const WideAcc w = widen(q(-3), 22);
  CHECK(w.raw == -3LL * 4096);
  CHECK(w.frac_bits == 22);
  CHECK(narrow(w, kDatapath).raw == -3);
  CHECK(narrow(WideAcc{-1, 22}, kDatapath).raw == -1);  // floor
  CHECK(narrow(WideAcc{4095, 22}, kDatapath).raw == 0);
  CHECK(narrow(WideAcc{std::int64_t{1} << 40, 22}, kDatapath).raw == 4095);
  CHECK(narrow(WideAcc{5, 0}, kDatapath).raw == 4095);
}

TEST_CASE("exhaustive add and mul against integer oracle") {
  for (std::int32_t a = -4096; a <= 4095; ++a) {
    for (std::int32_t b = -4096; b <= 4095; b += 37) {
      REQUIRE(fx_add(q(a), q(b)).raw == clamp_raw(std::int64_t{a} + b, kDatapath));
      REQUIRE(fx_mul(q(a), q(b)).raw == clamp_raw(floor_div_pow2(std::int64_t{a} * b, 10), kDatapath));
    }
  }
}

TEST_CASE("round trip of representable values") {
  for (const FxFormat fmt : {kDatapath, kBaseline16}) {
    for (std::int64_t r = fmt.min_raw(); r <= fmt.max_raw(); ++r) {
      const FxValue v = q(static_cast<std::int32_t>(r), fmt);
      REQUIRE(encode_fx(decode_fx(v), fmt) == v);
    }
  }
}

TEST_CASE("encode is monotone") {
  std::int32_t prev = encode_fx(-6.0).raw;
  for (int i = 1; i <= 200000; ++i) {
    const double x = -6.0 + 12.0 * i / 200000.0;
    const std::int32_t r = encode_fx(x).raw;
    REQUIRE(r >= prev);
    prev = r;
  }
}

TEST_CASE("shift round trip loses only low bits") {
  for (std::int64_t r = -5000; r <= 5000; r += 7) {
    for (int n = 0; n < 12; ++n) {
      REQUIRE(fx_shift(fx_shift(WideAcc{r, 10}, n), -n).raw == r);
      const WideAcc down_up = fx_shift(fx_shift(WideAcc{r, 10}, -n), n);
      REQUIRE(down_up.raw == (r >> n) * (std::int64_t{1} << n));
      REQUIRE(r - down_up.raw >= 0);
      REQUIRE(r - down_up.raw < (std::int64_t{1} << n));
    }
  }
}

TEST_CASE("mul of exactly representable products is exact") {
  // products of multiples of 2^-5 fit in 10 fractional bits
  for (int a = -64; a <= 64; ++a) {
    for (int b = -64; b <= 64; ++b) {
      const double x = a / 32.0, y = b / 32.0;
      if (std::fabs(x * y) >= 4.0) continue;
      REQUIRE(fx_mul(encode_fx(x), encode_fx(y)).to_double() == x * y);
    }
  }
}
