// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shiftmd/vec3.hpp"

namespace shiftmd::dataset {

/// One configuration. Optional per-atom arrays, when present, have one entry
/// per atom. `info` holds the remaining key=value pairs of the comment line.
struct Frame {
  std::vector<std::string> species;
  std::vector<Vec3> positions;              // A
  std::optional<std::vector<Vec3>> velocities;  // A/fs
  std::optional<std::vector<Vec3>> forces;  // eV/A
  std::optional<Mat3> cell;                 // A, rows are lattice vectors
  std::map<std::string, std::string> info;

  std::size_t size() const noexcept { return positions.size(); }
  /// Throws on non-finite positions or mismatched array lengths.
  void validate() const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::vector<Frame> parse_extxyz(std::string_view text);
std::string write_extxyz(std::span<const Frame> frames);
std::vector<Frame> read_extxyz_file(const std::string& path);
void write_extxyz_file(const std::string& path, std::span<const Frame> frames);

/// Harmonic bonds plus harmonic angle around the reference water geometry.
struct SurrogateParams {
  double r0 = 0.969;          // A
  double theta0_deg = 104.88;
  double k_bond = 48.0;       // eV/A^2
  double k_angle = 3.6;       // eV/rad^2

  void validate() const;
};

struct EnergyForces {
  double energy = 0.0;  // eV
  std::array<Vec3, 3> forces{};  // eV/A, order O, H, H
};

/// Analytic energy and forces; atoms ordered O, H, H. Throws on coincident
/// atoms or a linear molecule.
EnergyForces surrogate_water(std::span<const Vec3, 3> positions, const SurrogateParams& params = {});

/// Water geometry from internal coordinates, O at the origin, in the xy plane.
std::array<Vec3, 3> water_geometry(double r1, double r2, double theta_deg);

struct GenConfig {
  std::size_t n = 1000;
  double bond_amplitude = 0.08;        // A, uniform half-width on each O-H length
  double angle_amplitude_deg = 15.0;   // degrees, uniform half-width on H-O-H
  double max_translation = 5.0;        // A
  std::uint64_t seed = 7;
};

struct Dataset {
  std::vector<Frame> train;
  std::vector<Frame> test;
  std::vector<std::size_t> train_indices;  // positions in generation order
  std::vector<std::size_t> test_indices;
};

/// Number of frames that go to the training split (80 %, rounded).
std::size_t train_count(std::size_t n) noexcept;

/// n perturbed water frames at random rigid poses, labelled by the surrogate.
/// Frame i depends only on (seed, i).
Dataset generate_dataset(const SurrogateParams& params, const GenConfig& cfg);

/// Writes train.xyz, test.xyz and manifest.json into `dir`.
void save_dataset(const Dataset& data, const SurrogateParams& params, const GenConfig& cfg, const std::string& dir);
/// Reads train.xyz and test.xyz from `dir` (the manifest is optional).
Dataset load_dataset(const std::string& dir);

}  // namespace shiftmd::dataset
