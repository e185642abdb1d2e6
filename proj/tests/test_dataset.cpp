// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

#include "doctest.h"
#include "shiftmd/dataset.hpp"
#include "shiftmd/error.hpp"
#include "shiftmd/random.hpp"
#include "test_support.hpp"

using namespace shiftmd;
using namespace shiftmd::dataset;
using shiftmd::testing::slurp;
using shiftmd::testing::TempDir;

namespace {

using Geometry = std::array<Vec3, 3>;

Geometry random_geometry(Rng& rng) {
  Geometry g = water_geometry(rng.uniform(0.8, 1.15), rng.uniform(0.8, 1.15), rng.uniform(80.0, 140.0));
  const Mat3 rot = rng.rotation();
  const Vec3 shift{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
  for (Vec3& p : g) p = rot * p + shift;
  return g;
}

double energy(const Geometry& g, const SurrogateParams& p = {}) { return surrogate_water(std::span<const Vec3, 3>(g), p).energy; }

const char* kWaterFrame =
    "3\n"
    "Properties=species:S:1:pos:R:3:forces:R:3 energy=0.5 pbc=\"F F F\"\n"
    "O 0.0 0.0 0.0 0.1 0.2 0.3\n"
    "H 0.9 0.1 0.0 -0.1 0.0 0.0\n"
    "H -0.2 0.95 0.0 0.0 -0.2 -0.3\n";

}  // namespace

TEST_CASE("surrogate at equilibrium") {
  const Geometry g = water_geometry(0.969, 0.969, 104.88);
  const auto ef = surrogate_water(std::span<const Vec3, 3>(g));
  CHECK(std::fabs(ef.energy) < 1e-24);
  for (const Vec3& f : ef.forces) CHECK(norm(f) < 1e-12);
}

TEST_CASE("surrogate single-bond stretch") {
  const SurrogateParams p;
  Geometry g = water_geometry(0.969, 0.969, 104.88);
  const Vec3 axis = (1.0 / norm(g[1] - g[0])) * (g[1] - g[0]);
  g[1] = g[1] + 0.1 * axis;
  const auto ef = surrogate_water(std::span<const Vec3, 3>(g), p);
  const Vec3 want = (-2.0 * p.k_bond * 0.1) * axis;
  for (int c = 0; c < 3; ++c) CHECK(ef.forces[1][c] == doctest::Approx(want[c]).epsilon(1e-12));
  CHECK(dot(ef.forces[1], axis) == doctest::Approx(-9.6));
  CHECK(norm(ef.forces[2]) < 1e-12);
  CHECK(ef.energy == doctest::Approx(48.0 * 0.01));
}

TEST_CASE("surrogate forces match central differences") {
  Rng rng(31);
  const double h = 1e-5;
  for (int t = 0; t < 100; ++t) {
    const Geometry g = random_geometry(rng);
    const auto ef = surrogate_water(std::span<const Vec3, 3>(g));
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) {
        Geometry gp = g, gm = g;
        gp[a][c] += h;
        gm[a][c] -= h;
        const double fd = -(energy(gp) - energy(gm)) / (2 * h);
        REQUIRE(std::fabs(fd - ef.forces[a][c]) < 1e-6);
      }
    }
  }
}

TEST_CASE("surrogate symmetry properties") {
  Rng rng(32);
  for (int t = 0; t < 500; ++t) {
    const Geometry g = random_geometry(rng);
    const auto ef = surrogate_water(std::span<const Vec3, 3>(g));
    const Vec3 sum = ef.forces[0] + ef.forces[1] + ef.forces[2];
    REQUIRE(norm(sum) < 1e-12);

    const Mat3 rot = rng.rotation();
    Geometry r;
    for (int a = 0; a < 3; ++a) r[a] = rot * g[a];
    const auto er = surrogate_water(std::span<const Vec3, 3>(r));
    for (int a = 0; a < 3; ++a) REQUIRE(norm(er.forces[a] - rot * ef.forces[a]) < 1e-9);
    REQUIRE(std::fabs(er.energy - ef.energy) < 1e-9);

    Geometry s;
    const Vec3 d{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    for (int a = 0; a < 3; ++a) s[a] = g[a] + d;
    const auto es = surrogate_water(std::span<const Vec3, 3>(s));
    for (int a = 0; a < 3; ++a) REQUIRE(norm(es.forces[a] - ef.forces[a]) < 1e-9);
  }
}

TEST_CASE("surrogate rejects degenerate input") {
  Geometry g = water_geometry(0.969, 0.969, 104.88);
  g[1] = g[0];
  CHECK_THROWS_AS(surrogate_water(std::span<const Vec3, 3>(g)), Error);
  const Geometry lin{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{-1, 0, 0}};
  CHECK_THROWS_AS(surrogate_water(std::span<const Vec3, 3>(lin)), Error);
  SurrogateParams bad;
  bad.k_bond = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("extxyz happy path") {
  const auto frames = parse_extxyz(kWaterFrame);
  REQUIRE(frames.size() == 1);
  const Frame& f = frames[0];
  CHECK(f.size() == 3);
  CHECK(f.species == std::vector<std::string>{"O", "H", "H"});
  REQUIRE(f.forces.has_value());
  CHECK((*f.forces)[2][2] == -0.3);
  CHECK(f.positions[2][1] == 0.95);
  CHECK(f.info.at("energy") == "0.5");
  CHECK(f.info.at("pbc") == "F F F");
}

TEST_CASE("extxyz parse errors carry line numbers") {
  SUBCASE("truncated frame") {
    const std::string text = "3\nProperties=species:S:1:pos:R:3\nO 0 0 0\nH 1 0 0\n";
    try {
      parse_extxyz(text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("truncated frame") != std::string::npos);
      CHECK(std::string(e.what()).find("at line") != std::string::npos);
    }
  }
  SUBCASE("malformed count") {
    try {
      parse_extxyz("three\nProperties=species:S:1:pos:R:3\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(std::string(e.what()).find("malformed atom count") != std::string::npos);
    }
  }
  SUBCASE("unknown property column") {
    try {
      parse_extxyz("1\nProperties=species:S:1:pos:R:3:charge:R:1\nO 0 0 0 1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("unknown property column") != std::string::npos);
    }
  }
  SUBCASE("non-numeric field") {
    try {
      parse_extxyz("2\nProperties=species:S:1:pos:R:3\nO 0 0 0\nH 1 x 0\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
      CHECK(std::string(e.what()).find("non-numeric field") != std::string::npos);
    }
  }
}

TEST_CASE("extxyz round trip is lossless") {
  Rng rng(33);
  std::vector<Frame> frames;
  for (int i = 0; i < 20; ++i) {
    Frame f;
    f.species = {"O", "H", "H"};
    std::vector<Vec3> forces;
    for (int a = 0; a < 3; ++a) {
      f.positions.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5) * 1e-7});
      forces.push_back({rng.normal(), rng.normal() * 1e12, -rng.uniform()});
    }
    f.forces = forces;
    if (i % 2 == 0) f.velocities = std::vector<Vec3>(3, Vec3{1.0 / 3.0, 0.1, -2e-300});
    if (i % 3 == 0) f.cell = Mat3{Vec3{10, 0, 0}, Vec3{0, 10, 0}, Vec3{0, 0, 1.0 / 7.0}};
    f.info["note"] = "frame with spaces " + std::to_string(i);
    f.info["index"] = std::to_string(i);
    frames.push_back(f);
  }
  const std::string text = write_extxyz(frames);
  const auto back = parse_extxyz(text);
  CHECK(back == frames);
  CHECK(write_extxyz(back) == text);
}

TEST_CASE("dataset generation") {
  GenConfig cfg;
  cfg.n = 1000;
  cfg.seed = 7;
  const Dataset a = generate_dataset({}, cfg);
  const Dataset b = generate_dataset({}, cfg);
  CHECK(a.train.size() == 800);
  CHECK(a.test.size() == 200);
  CHECK(write_extxyz(a.train) == write_extxyz(b.train));
  CHECK(write_extxyz(a.test) == write_extxyz(b.test));
  cfg.seed = 8;
  CHECK(write_extxyz(generate_dataset({}, cfg).train) != write_extxyz(a.train));

  // every frame labeled by the oracle, internal coordinates within amplitude
  for (const auto* split : {&a.train, &a.test}) {
    for (const Frame& f : *split) {
      REQUIRE(f.forces.has_value());
      const std::span<const Vec3, 3> pos(f.positions.data(), 3);
      const auto ef = surrogate_water(pos);
      for (int i = 0; i < 3; ++i) REQUIRE(norm(ef.forces[i] - (*f.forces)[i]) == 0.0);
      const double r1 = norm(f.positions[1] - f.positions[0]), r2 = norm(f.positions[2] - f.positions[0]);
      REQUIRE(std::fabs(r1 - 0.969) <= 0.08 + 1e-9);
      REQUIRE(std::fabs(r2 - 0.969) <= 0.08 + 1e-9);
    }
  }
}

TEST_CASE("dataset split sizes and zero amplitude") {
  GenConfig cfg;
  cfg.n = 5;
  const Dataset d = generate_dataset({}, cfg);
  CHECK(d.train.size() == 4);
  CHECK(d.test.size() == 1);
  CHECK(train_count(1) == 1);
  CHECK(train_count(10) == 8);

  cfg.n = 20;
  cfg.bond_amplitude = 0.0;
  cfg.angle_amplitude_deg = 0.0;
  const Dataset z = generate_dataset({}, cfg);
  for (const Frame& f : z.train) {
    REQUIRE(std::fabs(norm(f.positions[1] - f.positions[0]) - 0.969) < 1e-12);
    for (const Vec3& force : *f.forces) REQUIRE(norm(force) < 1e-9);
  }
}

TEST_CASE("dataset save and load") {
  TempDir dir("dataset");
  GenConfig cfg;
  cfg.n = 50;
  const Dataset d = generate_dataset({}, cfg);
  save_dataset(d, {}, cfg, dir.path.string());
  CHECK(std::filesystem::exists(dir.path / "train.xyz"));
  CHECK(std::filesystem::exists(dir.path / "test.xyz"));
  CHECK(std::filesystem::exists(dir.path / "manifest.json"));
  const std::string manifest = slurp(dir.path / "manifest.json");
  CHECK(manifest.find("\"seed\"") != std::string::npos);
  const Dataset back = load_dataset(dir.path.string());
  CHECK(back.train == d.train);
  CHECK(back.test == d.test);
  CHECK(back.train_indices == d.train_indices);
  CHECK(back.test_indices == d.test_indices);
  CHECK_THROWS_AS(load_dataset((dir.path / "missing").string()), Error);
}
