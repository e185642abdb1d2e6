// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "shiftmd/dataset.hpp"
#include "shiftmd/error.hpp"
#include "shiftmd/random.hpp"

namespace shiftmd::dataset {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

void SurrogateParams::validate() const {
  if (!(r0 > 0 && theta0_deg > 0 && theta0_deg < 180 && k_bond > 0 && k_angle > 0)) {
    throw Error("surrogate parameters must be positive (and theta0 below 180 degrees)");
  }
}

EnergyForces surrogate_water(std::span<const Vec3, 3> pos, const SurrogateParams& p) {
  const Vec3 d1 = pos[1] - pos[0];
  const Vec3 d2 = pos[2] - pos[0];
  const double r1 = norm(d1);
  const double r2 = norm(d2);
  if (r1 < 1e-10 || r2 < 1e-10) throw Error("surrogate_water: hydrogen coincides with oxygen");
  const Vec3 u1 = (1.0 / r1) * d1;
  const Vec3 u2 = (1.0 / r2) * d2;
  const double c = std::clamp(dot(u1, u2), -1.0, 1.0);
  const double s = std::sqrt(1.0 - c * c);
  if (s < 1e-10) throw Error("surrogate_water: linear molecule, angle gradient undefined");
  const double theta = std::acos(c);
  const double dtheta = theta - p.theta0_deg * kDeg;

  EnergyForces out;
  out.energy = p.k_bond * ((r1 - p.r0) * (r1 - p.r0) + (r2 - p.r0) * (r2 - p.r0)) + p.k_angle * dtheta * dtheta;

  // dtheta/dH1 = -(u2 - c u1) / (r1 s), symmetric for H2.
  const Vec3 gtheta1 = (-1.0 / (r1 * s)) * (u2 - c * u1);
  const Vec3 gtheta2 = (-1.0 / (r2 * s)) * (u1 - c * u2);
  const double dE_dtheta = 2.0 * p.k_angle * dtheta;
  const Vec3 f1 = -(2.0 * p.k_bond * (r1 - p.r0)) * u1 - dE_dtheta * gtheta1;
  const Vec3 f2 = -(2.0 * p.k_bond * (r2 - p.r0)) * u2 - dE_dtheta * gtheta2;
  out.forces = {-(f1 + f2), f1, f2};
  return out;
}

std::array<Vec3, 3> water_geometry(double r1, double r2, double theta_deg) {
  const double t = theta_deg * kDeg;
  return {Vec3{0, 0, 0}, Vec3{r1, 0, 0}, Vec3{r2 * std::cos(t), r2 * std::sin(t), 0}};
}

std::size_t train_count(std::size_t n) noexcept { return (4 * n + 2) / 5; }

Dataset generate_dataset(const SurrogateParams& params, const GenConfig& cfg) {
  params.validate();
  if (cfg.n < 1) throw Error("dataset needs at least one frame");
  if (cfg.bond_amplitude < 0 || cfg.angle_amplitude_deg < 0) throw Error("perturbation amplitudes must be non-negative");

  Dataset data;
  const std::size_t n_train = train_count(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Rng rng(cfg.seed, i);
    const double r1 = params.r0 + rng.uniform(-cfg.bond_amplitude, cfg.bond_amplitude);
    const double r2 = params.r0 + rng.uniform(-cfg.bond_amplitude, cfg.bond_amplitude);
    const double theta = params.theta0_deg + rng.uniform(-cfg.angle_amplitude_deg, cfg.angle_amplitude_deg);
    const Mat3 rot = rng.rotation();
    const Vec3 shift{rng.uniform(-cfg.max_translation, cfg.max_translation), rng.uniform(-cfg.max_translation, cfg.max_translation),
                     rng.uniform(-cfg.max_translation, cfg.max_translation)};

    std::array<Vec3, 3> pos = water_geometry(r1, r2, theta);
    for (Vec3& p : pos) p = rot * p + shift;
    const EnergyForces ef = surrogate_water(pos, params);

    Frame f;
    f.species = {"O", "H", "H"};
    f.positions.assign(pos.begin(), pos.end());
    f.forces = std::vector<Vec3>(ef.forces.begin(), ef.forces.end());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", ef.energy);
    f.info["energy"] = buf;
    f.info["index"] = std::to_string(i);
    if (i < n_train) {
      data.train.push_back(std::move(f));
      data.train_indices.push_back(i);
    } else {
      data.test.push_back(std::move(f));
      data.test_indices.push_back(i);
    }
  }
  return data;
}

void save_dataset(const Dataset& data, const SurrogateParams& params, const GenConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  write_extxyz_file((root / "train.xyz").string(), data.train);
  write_extxyz_file((root / "test.xyz").string(), data.test);

  nlohmann::ordered_json m;
  m["generator"] = "surrogate_water";
  m["seed"] = cfg.seed;
  m["n"] = cfg.n;
  m["bond_amplitude"] = cfg.bond_amplitude;
  m["angle_amplitude_deg"] = cfg.angle_amplitude_deg;
  m["max_translation"] = cfg.max_translation;
  m["params"] = {{"r0", params.r0}, {"theta0_deg", params.theta0_deg}, {"k_bond", params.k_bond}, {"k_angle", params.k_angle}};
  m["train_indices"] = data.train_indices;
  m["test_indices"] = data.test_indices;
  std::ofstream out(root / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write manifest in " + dir);
  out << m.dump(1) << "\n";
}

Dataset load_dataset(const std::string& dir) {
  const std::filesystem::path root(dir);
  Dataset data;
  data.train = read_extxyz_file((root / "train.xyz").string());
  data.test = read_extxyz_file((root / "test.xyz").string());
  for (std::size_t i = 0; i < data.train.size(); ++i) data.train_indices.push_back(i);
  for (std::size_t i = 0; i < data.test.size(); ++i) data.test_indices.push_back(data.train.size() + i);
  return data;
}

}  // namespace shiftmd::dataset
