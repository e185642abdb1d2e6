// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "shiftmd/analysis.hpp"
#include "shiftmd/error.hpp"
#include "shiftmd/random.hpp"
#include "test_support.hpp"

using namespace shiftmd;
using namespace shiftmd::analysis;

namespace {

// Velocity series of one atom oscillating along x at the given wavenumbers.
std::vector<std::vector<Vec3>> sinusoids(std::initializer_list<double> wavenumbers, std::size_t n, double dt) {
  std::vector<Vec3> v(n, Vec3{0, 0, 0});
  for (double nu : wavenumbers) {
    const double f = nu * kLightSpeed;  // 1/fs
    for (std::size_t t = 0; t < n; ++t) v[t][0] += std::sin(2 * std::numbers::pi * f * static_cast<double>(t) * dt);
  }
  return {v};
}

md::Trajectory static_trajectory(std::size_t n, double r1, double r2, double theta) {
  md::Trajectory t;
  t.species = {"O", "H", "H"};
  t.masses = {md::kMassO, md::kMassH, md::kMassH};
  const auto g = dataset::water_geometry(r1, r2, theta);
  for (std::size_t i = 0; i < n; ++i) {
    md::TrajFrame f;
    f.time = static_cast<double>(i);
    f.positions.assign(g.begin(), g.end());
    f.velocities.assign(3, Vec3{0, 0, 0});
    f.forces.assign(3, Vec3{0, 0, 0});
    t.frames.push_back(f);
  }
  return t;
}

}  // namespace

TEST_CASE("structural_stats") {
  SUBCASE("static equilibrium") {
    const StructuralStats s = structural_stats(static_trajectory(10, 0.969, 0.969, 104.88));
    CHECK(s.bond_mean == doctest::Approx(0.969).epsilon(1e-14));
    CHECK(s.angle_mean == doctest::Approx(104.88).epsilon(1e-14));
    CHECK(s.bond_std < 1e-14);
    CHECK(s.angle_std < 1e-12);
  }
  SUBCASE("two frames") {
    md::Trajectory t = static_trajectory(1, 0.95, 0.95, 100.0);
    t.frames.push_back(static_trajectory(1, 0.99, 0.99, 110.0).frames[0]);
    const StructuralStats s = structural_stats(t);
    CHECK(s.bond_mean == doctest::Approx(0.97));
    CHECK(s.bond_std == doctest::Approx(0.02));
    CHECK(s.angle_mean == doctest::Approx(105.0));
  }
  SUBCASE("invariant under rigid motions") {
    Rng rng(61);
    md::Trajectory t;
    t.masses = {md::kMassO, md::kMassH, md::kMassH};
    for (int i = 0; i < 50; ++i) {
      md::TrajFrame f;
      const auto g = dataset::water_geometry(rng.uniform(0.9, 1.0), rng.uniform(0.9, 1.0), rng.uniform(95, 115));
      f.positions.assign(g.begin(), g.end());
      t.frames.push_back(f);
    }
    md::Trajectory moved = t;
    for (auto& f : moved.frames) {
      const Mat3 rot = rng.rotation();
      const Vec3 d{rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9)};
      for (Vec3& p : f.positions) p = rot * p + d;
    }
    const StructuralStats a = structural_stats(t), b = structural_stats(moved);
    CHECK(a.bond_mean == doctest::Approx(b.bond_mean).epsilon(1e-12));
    CHECK(a.angle_mean == doctest::Approx(b.angle_mean).epsilon(1e-12));
    CHECK(a.bond_std == doctest::Approx(b.bond_std).epsilon(1e-8));
  }
  CHECK_THROWS_AS(structural_stats(md::Trajectory{}), Error);
}

TEST_CASE("vdos of a pure sinusoid") {
  const double masses[] = {1.0};
  for (double dt : {0.5, 1.0}) {
    const VdosSpectrum s = vdos_from_series(sinusoids({1000.0}, 4096, dt), masses, dt);
    REQUIRE(s.peaks.size() == 1);
    CHECK(std::fabs(s.peaks[0].frequency - 1000.0) <= s.bin_width);
    CHECK(s.bin_width == doctest::Approx(1.0 / (2 * 4095 * dt) / kLightSpeed));
    double top = 0.0;
    for (std::size_t k = 0; k < s.dos.size(); ++k) {
      REQUIRE(s.dos[k] >= 0.0);
      REQUIRE(s.dos[k] <= 1.0);
      if (k > 0) REQUIRE(s.frequencies[k] > s.frequencies[k - 1]);
      top = std::max(top, s.dos[k]);
    }
    CHECK(top == 1.0);
  }
}

TEST_CASE("vdos resolves two superposed modes") {
  const double masses[] = {1.0};
  const VdosSpectrum s = vdos_from_series(sinusoids({1600.0, 4000.0}, 8192, 0.5), masses, 0.5);
  const auto p = dominant_peaks(s, 2);
  REQUIRE(p.size() == 2);
  CHECK(std::fabs(p[0].frequency - 1600.0) <= s.bin_width);
  CHECK(std::fabs(p[1].frequency - 4000.0) <= s.bin_width);
  VdosOptions rect;
  rect.window = Window::Rectangular;
  rect.max_lag = 2048;
  const VdosSpectrum r = vdos_from_series(sinusoids({1600.0, 4000.0}, 8192, 0.5), masses, 0.5, rect);
  const auto pr = dominant_peaks(r, 2);
  REQUIRE(pr.size() == 2);
  CHECK(std::fabs(pr[1].frequency - 4000.0) <= r.bin_width);
}

TEST_CASE("vdos of a frozen system is flat zero") {
  const VdosSpectrum s = vdos(static_trajectory(2048, 0.969, 0.969, 104.88), 1.0);
  CHECK(s.peaks.empty());
  for (double d : s.dos) REQUIRE(d == 0.0);
}

TEST_CASE("vdos input checks") {
  CHECK_THROWS_AS(vdos(static_trajectory(1000, 0.969, 0.969, 104.88), 1.0), Error);
  md::Trajectory t = static_trajectory(2048, 0.969, 0.969, 104.88);
  t.frames[100].time += 0.5;
  CHECK_THROWS_AS(vdos(t, 1.0), Error);
  CHECK_THROWS_AS(vdos(static_trajectory(2048, 0.969, 0.969, 104.88), 2.0), Error);
}

TEST_CASE("find_peaks refines between bins") {
  // samples of a parabola whose vertex sits at x = 2.3
  std::vector<double> x, y;
  for (int i = 0; i < 6; ++i) {
    x.push_back(i);
    y.push_back(10.0 - (i - 2.3) * (i - 2.3));
  }
  const auto p = find_peaks(x, y, 0.1);
  REQUIRE(p.size() == 1);
  CHECK(p[0].frequency == doctest::Approx(2.3));
  CHECK(p[0].height == doctest::Approx(10.0));
  std::vector<double> small{0.0, 0.05, 0.0, 1.0, 0.0};
  CHECK(find_peaks(std::vector<double>{0, 1, 2, 3, 4}, small, 0.1).size() == 1);
}

TEST_CASE("error_report") {
  const auto t = error_report({{"bond", 0.969}, {"stretch", 4007.0}}, {{"qnn", {{"bond", 0.968}, {"stretch", 4040.0}}}});
  CHECK(t.errors[0].second.at("bond") == doctest::Approx(0.1032).epsilon(1e-3));
  const std::string text = t.render();
  CHECK(text.find("0.10%") != std::string::npos);
  CHECK(text.find("0.82%") != std::string::npos);
  CHECK(relative_error_percent(3.0, 3.0) == 0.0);
  // scale invariance
  for (double k : {1e-3, 7.0, 1e6}) CHECK(relative_error_percent(0.969 * k, 0.968 * k) == doctest::Approx(relative_error_percent(0.969, 0.968)));
  CHECK_THROWS_AS(error_report({{"bond", 0.0}}, {}), Error);
  CHECK_THROWS_AS(error_report({{"bond", 1.0}}, {{"qnn", {{"angle", 1.0}}}}), Error);
}

TEST_CASE("force_scatter") {
  const std::vector<double> ref{0.1, -0.2, 0.3, 1.5};
  const Scatter same = force_scatter(ref, ref);
  CHECK(same.rmse == 0.0);
  for (const auto& [p, r] : same.points) CHECK(p == r);
  std::vector<double> off = ref;
  for (double& v : off) v += 1e-3;
  CHECK(force_scatter(off, ref).rmse == doctest::Approx(1.0));
  CHECK_THROWS_AS(force_scatter(off, std::vector<double>{1.0}), Error);

  dataset::GenConfig g;
  g.n = 20;
  const auto data = dataset::generate_dataset({}, g);
  const Scatter s = force_scatter(net::make_model(net::water_architecture()), data.train, net::Engine::Surrogate);
  CHECK(s.points.size() == data.train.size() * 9);
  CHECK(s.rmse == 0.0);
}

TEST_CASE("write_columns") {
  testing::TempDir dir("columns");
  const auto path = (dir.path / "c.dat").string();
  write_columns(path, std::vector<double>{1, 2}, std::vector<double>{0.5, 0.25}, "x y");
  CHECK(testing::slurp(path) == "# x y\n1 0.5\n2 0.25\n");
  CHECK_THROWS_AS(write_columns(path, std::vector<double>{1}, std::vector<double>{}, ""), Error);
}
