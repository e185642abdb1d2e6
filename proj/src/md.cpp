// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftmd/md.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "shiftmd/error.hpp"
#include "shiftmd/random.hpp"

namespace shiftmd::md {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

std::array<double, 3> internal_coordinates(std::span<const Vec3, 3> p) {
  const Vec3 d1 = p[1] - p[0];
  const Vec3 d2 = p[2] - p[0];
  const double r1 = norm(d1);
  const double r2 = norm(d2);
  if (r1 < 1e-10 || r2 < 1e-10) throw Error("degenerate water geometry: coincident atoms");
  const double c = std::clamp(dot(d1, d2) / (r1 * r2), -1.0, 1.0);
  return {r1, r2, std::acos(c) * kRadToDeg};
}

FeatureVec extract_features(std::span<const Vec3, 3> p, int which_h, const net::FeatureScaling& s) {
  if (which_h != 1 && which_h != 2) throw Error("extract_features: hydrogen index must be 1 or 2");
  const int other = 3 - which_h;
  const Vec3 dt = p[which_h] - p[0];
  const Vec3 dother = p[other] - p[0];
  const double rt = norm(dt);
  const double ro = norm(dother);
  if (rt < 1e-10 || ro < 1e-10) throw Error("degenerate water geometry: coincident atoms");

  FeatureVec f;
  f.u = (1.0 / rt) * dt;
  const Vec3 perp = dother - dot(dother, f.u) * f.u;
  const double pn = norm(perp);
  if (pn < 1e-9 * ro) throw Error("degenerate water geometry: collinear O-H-H");
  f.w = (1.0 / pn) * perp;

  const double theta = std::acos(std::clamp(dot(f.u, dother) / ro, -1.0, 1.0)) * kRadToDeg;
  f.values = {(rt - s.r0) / s.bond_scale, (ro - s.r0) / s.bond_scale, (theta - s.theta0_deg) / s.angle_scale_deg};
  return f;
}

Vec3 predict_hydrogen_force(const net::MlpModel& model, net::Engine engine, const FeatureVec& features) {
  if (model.layer_sizes.empty() || model.layer_sizes.front() != 3 || model.layer_sizes.back() != 2) {
    throw Error("force model must have 3 inputs and 2 outputs");
  }
  const std::vector<double> out = net::forward(model, engine, features.values);
  return model.scaling.force_scale * (out[0] * features.u + out[1] * features.w);
}

std::array<Vec3, 3> evaluate_forces(std::span<const Vec3, 3> positions, const net::MlpModel& model, net::Engine engine,
                                    const dataset::SurrogateParams& surrogate) {
  if (engine == net::Engine::Surrogate) return dataset::surrogate_water(positions, surrogate).forces;
  const Vec3 f1 = predict_hydrogen_force(model, engine, extract_features(positions, 1, model.scaling));
  const Vec3 f2 = predict_hydrogen_force(model, engine, extract_features(positions, 2, model.scaling));
  return {-(f1 + f2), f1, f2};
}

SimState integrate_step(const SimState& state, std::span<const Vec3> forces, double dt) {
  if (!(dt > 0)) throw Error("time step must be positive");
  if (forces.size() != state.size()) throw Error("force array does not match the number of atoms");
  SimState next = state;
  for (std::size_t i = 0; i < state.size(); ++i) {
    next.velocities[i] += (kAccel * dt / state.masses[i]) * forces[i];
    next.positions[i] += dt * next.velocities[i];
  }
  next.time = state.time + dt;
  return next;
}

double kinetic_energy(const SimState& state) {
  double ke = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) ke += 0.5 * state.masses[i] * dot(state.velocities[i], state.velocities[i]);
  return ke / kAccel;
}

Vec3 total_momentum(const SimState& state) {
  Vec3 p{};
  for (std::size_t i = 0; i < state.size(); ++i) p += state.masses[i] * state.velocities[i];
  return p;
}

SimState equilibrium_water(const dataset::SurrogateParams& params) {
  SimState s;
  const auto geo = dataset::water_geometry(params.r0, params.r0, params.theta0_deg);
  s.masses = {kMassO, kMassH, kMassH};
  Vec3 com{};
  double mtot = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    com += s.masses[i] * geo[i];
    mtot += s.masses[i];
  }
  com = (1.0 / mtot) * com;
  for (const Vec3& p : geo) s.positions.push_back(p - com);
  s.velocities.assign(3, Vec3{});
  return s;
}

void thermalize(SimState& state, double temperature, std::uint64_t seed) {
  if (temperature < 0) throw Error("temperature must be non-negative");
  Rng rng(seed);
  Vec3 p{};
  double mtot = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double sigma = std::sqrt(kBoltzmann * temperature * kAccel / state.masses[i]);
    for (double& c : state.velocities[i]) c = sigma * rng.normal();
    p += state.masses[i] * state.velocities[i];
    mtot += state.masses[i];
  }
  const Vec3 vcom = (1.0 / mtot) * p;
  for (Vec3& v : state.velocities) v = v - vcom;
}

namespace {

Vec3 centre_of_mass(const SimState& s) {
  Vec3 c{};
  double mtot = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    c += s.masses[i] * s.positions[i];
    mtot += s.masses[i];
  }
  return (1.0 / mtot) * c;
}

}  // namespace

Vec3 angular_momentum(const SimState& state) {
  const Vec3 c = centre_of_mass(state);
  Vec3 l{};
  for (std::size_t i = 0; i < state.size(); ++i) l += state.masses[i] * cross(state.positions[i] - c, state.velocities[i]);
  return l;
}

void remove_rotation(SimState& state, double temperature) {
  const Vec3 c = centre_of_mass(state);
  Mat3 inertia{};
  for (std::size_t i = 0; i < state.size(); ++i) {
    const Vec3 r = state.positions[i] - c;
    const double r2 = dot(r, r);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) inertia[a][b] += state.masses[i] * ((a == b ? r2 : 0.0) - r[a] * r[b]);
  }
  // omega = I^-1 L via the adjugate
  const Vec3 c0 = cross(inertia[1], inertia[2]), c1 = cross(inertia[2], inertia[0]), c2 = cross(inertia[0], inertia[1]);
  const double det = dot(inertia[0], c0);
  if (!(std::fabs(det) > 1e-12)) throw Error("cannot remove rotation of a collinear molecule");
  const Vec3 l = angular_momentum(state);
  const Vec3 omega = (1.0 / det) * Vec3{dot(c0, l), dot(c1, l), dot(c2, l)};
  for (std::size_t i = 0; i < state.size(); ++i) state.velocities[i] = state.velocities[i] - cross(omega, state.positions[i] - c);

  const double ke = kinetic_energy(state);
  const double target = 0.5 * static_cast<double>(3 * state.size() - 6) * kBoltzmann * temperature;
  if (ke > 0.0) {
    const double s = std::sqrt(target / ke);
    for (Vec3& v : state.velocities) v = s * v;
  }
}

namespace {

TrajFrame snapshot(const SimState& s, const std::array<Vec3, 3>& forces, double potential) {
  return TrajFrame{s.time, s.positions, s.velocities, std::vector<Vec3>(forces.begin(), forces.end()), kinetic_energy(s), potential};
}

}  // namespace

Trajectory run_md(const SimConfig& cfg, const net::MlpModel& model, const std::optional<SimState>& initial,
                  const dataset::SurrogateParams& surrogate) {
  if (!(cfg.dt > 0)) throw Error("time step must be positive");
  if (cfg.record_every < 1) throw Error("record_every must be at least 1");
  SimState state;
  if (initial) {
    state = *initial;
  } else {
    state = equilibrium_water(surrogate);
    thermalize(state, cfg.temperature_init, cfg.seed);
    if (cfg.remove_rotation) remove_rotation(state, cfg.temperature_init);
  }
  if (state.size() != 3 || state.velocities.size() != 3 || state.masses.size() != 3) {
    throw Error("run_md drives a single water molecule (O, H, H)");
  }

  const bool surrogate_engine = cfg.engine == net::Engine::Surrogate;
  auto forces_at = [&](const SimState& s, std::size_t step) {
    try {
      return evaluate_forces(std::span<const Vec3, 3>(s.positions.data(), 3), model, cfg.engine, surrogate);
    } catch (const Error& e) {
      throw Error("force evaluation failed at step " + std::to_string(step) + ": " + e.what());
    }
  };
  auto potential_at = [&](const SimState& s) {
    if (!surrogate_engine) return std::numeric_limits<double>::quiet_NaN();
    return dataset::surrogate_water(std::span<const Vec3, 3>(s.positions.data(), 3), surrogate).energy;
  };

  Trajectory traj;
  traj.species = {"O", "H", "H"};
  traj.masses = state.masses;
  traj.frames.reserve(cfg.steps / cfg.record_every + 1);

  std::array<Vec3, 3> forces = forces_at(state, 0);
  traj.frames.push_back(snapshot(state, forces, potential_at(state)));
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    state = integrate_step(state, forces, cfg.dt);
    forces = forces_at(state, step);
    if (step % cfg.record_every == 0) traj.frames.push_back(snapshot(state, forces, potential_at(state)));
  }
  return traj;
}

}  // namespace shiftmd::md
