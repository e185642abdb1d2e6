// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shiftmd/dataset.hpp"
#include "shiftmd/net.hpp"
#include "shiftmd/vec3.hpp"

namespace shiftmd::md {

// Simulation units: A, fs, amu, eV.
/// (eV/A)/amu expressed in A/fs^2.
inline constexpr double kAccel = 9.6485332e-3;
/// Boltzmann constant, eV/K.
inline constexpr double kBoltzmann = 8.617333262e-5;
inline constexpr double kMassO = 15.999;
inline constexpr double kMassH = 1.008;

struct SimState {
  std::vector<Vec3> positions;   // A
  std::vector<Vec3> velocities;  // A/fs
  std::vector<double> masses;    // amu
  double time = 0.0;             // fs

  std::size_t size() const noexcept { return positions.size(); }
};

struct SimConfig {
  double dt = 2.0;  // fs
  std::size_t steps = 1000;
  double temperature_init = 300.0;  // K
  std::uint64_t seed = 1;
  net::Engine engine = net::Engine::Sqnn;
  std::size_t record_every = 1;
  // Start without rigid rotation, internal motion rescaled to temperature_init.
  bool remove_rotation = true;
  // Cut-off machinery; a single molecule is always inside it.
  double r_cut = 6.0;
};

/// Scaled internal coordinates of one hydrogen and its local force frame.
struct FeatureVec {
  std::array<double, 3> values{};  // (r_target, r_other, theta), scaled
  Vec3 u{};                        // unit O -> target H
  Vec3 w{};                        // unit, in-plane, orthogonal to u, towards the other H
};

/// which_h is 1 or 2 (atom order O, H, H).
FeatureVec extract_features(std::span<const Vec3, 3> positions, int which_h, const net::FeatureScaling& scaling);

/// Unscaled internal coordinates (r1, r2, theta in degrees).
std::array<double, 3> internal_coordinates(std::span<const Vec3, 3> positions);

/// Force on the hydrogen described by `features`, in eV/A, Cartesian.
Vec3 predict_hydrogen_force(const net::MlpModel& model, net::Engine engine, const FeatureVec& features);

/// Forces on O, H, H. Hydrogens come from the network (one evaluation per
/// hydrogen with roles swapped); oxygen balances them. The surrogate engine
/// ignores `model`.
std::array<Vec3, 3> evaluate_forces(std::span<const Vec3, 3> positions, const net::MlpModel& model, net::Engine engine,
                                    const dataset::SurrogateParams& surrogate = {});

/// v += F/m dt, then r += v dt, then t += dt.
SimState integrate_step(const SimState& state, std::span<const Vec3> forces, double dt);

double kinetic_energy(const SimState& state);
Vec3 total_momentum(const SimState& state);
Vec3 angular_momentum(const SimState& state);  // about the centre of mass

/// Equilibrium water (O, H, H) at rest, centre of mass at the origin.
SimState equilibrium_water(const dataset::SurrogateParams& params = {});

/// Gaussian velocities at `temperature` with centre-of-mass motion removed.
void thermalize(SimState& state, double temperature, std::uint64_t seed);

/// Subtracts the rigid rotation about the centre of mass, then rescales the
/// velocities so the remaining 3N-6 internal degrees of freedom sit at
/// `temperature`. Needs a non-collinear molecule.
void remove_rotation(SimState& state, double temperature);

struct TrajFrame {
  double time = 0.0;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Vec3> forces;
  double kinetic = 0.0;    // eV
  double potential = 0.0;  // eV, surrogate energy (NaN if not evaluated)
};

struct Trajectory {
  std::vector<std::string> species;
  std::vector<double> masses;
  std::vector<TrajFrame> frames;
};

/// Runs cfg.steps steps; frame 0 is the initial state. Without `initial` the
/// run starts from equilibrium water thermalized at cfg.temperature_init
/// (rotation removed when cfg.remove_rotation).
Trajectory run_md(const SimConfig& cfg, const net::MlpModel& model, const std::optional<SimState>& initial = std::nullopt,
                  const dataset::SurrogateParams& surrogate = {});

// Trajectory files: extended XYZ with time/kinetic/potential in the comment
// line, or a little-endian float64 binary layout.
std::vector<dataset::Frame> to_frames(const Trajectory& traj);
Trajectory from_frames(std::span<const dataset::Frame> frames);
void write_trajectory_xyz(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_xyz(const std::string& path);
void write_trajectory_binary(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_binary(const std::string& path);

}  // namespace shiftmd::md
