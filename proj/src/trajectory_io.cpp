// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "shiftmd/error.hpp"
#include "shiftmd/md.hpp"

namespace shiftmd::md {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double info_number(const dataset::Frame& f, const std::string& key, double fallback) {
  const auto it = f.info.find(key);
  if (it == f.info.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw Error("trajectory frame has non-numeric '" + key + "'");
  }
}

double mass_of(const std::string& species) {
  if (species == "O") return kMassO;
  if (species == "H") return kMassH;
  throw Error("no mass known for species '" + species + "'");
}

// Binary layout, all little-endian:
//   char[8] "SHMDTRJ1"; u64 n_atoms; u64 n_frames;
//   n_atoms x { char[4] species (NUL padded); f64 mass }
//   n_frames x { f64 time, kinetic, potential; f64[3n] pos; f64[3n] vel; f64[3n] forces }
constexpr char kMagic[8] = {'S', 'H', 'M', 'D', 'T', 'R', 'J', '1'};

template <typename T>
void put_le(std::ofstream& out, T v) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), 8);
}

template <typename T>
T get_le(std::ifstream& in) {
  std::uint64_t bits = 0;
  if (!in.read(reinterpret_cast<char*>(&bits), 8)) throw Error("binary trajectory is truncated");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

std::vector<dataset::Frame> to_frames(const Trajectory& traj) {
  std::vector<dataset::Frame> frames;
  frames.reserve(traj.frames.size());
  for (const TrajFrame& tf : traj.frames) {
    dataset::Frame f;
    f.species = traj.species;
    f.positions = tf.positions;
    f.velocities = tf.velocities;
    f.forces = tf.forces;
    f.info["time"] = fmt17(tf.time);
    f.info["kinetic"] = fmt17(tf.kinetic);
    if (!std::isnan(tf.potential)) {
      f.info["potential"] = fmt17(tf.potential);
      f.info["energy"] = fmt17(tf.potential + tf.kinetic);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

Trajectory from_frames(std::span<const dataset::Frame> frames) {
  Trajectory traj;
  if (frames.empty()) return traj;
  traj.species = frames.front().species;
  for (const auto& s : traj.species) traj.masses.push_back(mass_of(s));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const dataset::Frame& f = frames[i];
    if (f.species != traj.species) throw Error("trajectory frame " + std::to_string(i) + " changes species");
    TrajFrame tf;
    tf.time = info_number(f, "time", static_cast<double>(i));
    tf.positions = f.positions;
    tf.velocities = f.velocities ? *f.velocities : std::vector<Vec3>(f.size(), Vec3{});
    tf.forces = f.forces ? *f.forces : std::vector<Vec3>(f.size(), Vec3{});
    tf.kinetic = info_number(f, "kinetic", 0.0);
    tf.potential = info_number(f, "potential", std::numeric_limits<double>::quiet_NaN());
    traj.frames.push_back(std::move(tf));
  }
  return traj;
}

void write_trajectory_xyz(const std::string& path, const Trajectory& traj) { dataset::write_extxyz_file(path, to_frames(traj)); }

Trajectory read_trajectory_xyz(const std::string& path) { return from_frames(dataset::read_extxyz_file(path)); }

void write_trajectory_binary(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(kMagic, 8);
  put_le<std::uint64_t>(out, traj.species.size());
  put_le<std::uint64_t>(out, traj.frames.size());
  for (std::size_t a = 0; a < traj.species.size(); ++a) {
    char tag[4] = {};
    std::memcpy(tag, traj.species[a].data(), std::min<std::size_t>(traj.species[a].size(), 4));
    out.write(tag, 4);
    put_le<double>(out, traj.masses.at(a));
  }
  for (const TrajFrame& f : traj.frames) {
    put_le<double>(out, f.time);
    put_le<double>(out, f.kinetic);
    put_le<double>(out, f.potential);
    for (const auto* arr : {&f.positions, &f.velocities, &f.forces}) {
      if (arr->size() != traj.species.size()) throw Error("trajectory frame has the wrong atom count");
      for (const Vec3& v : *arr) {
        for (double c : v) put_le<double>(out, c);
      }
    }
  }
  if (!out) throw Error("failed writing " + path);
}

Trajectory read_trajectory_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error(path + " is not a binary trajectory");
  const auto n_atoms = get_le<std::uint64_t>(in);
  const auto n_frames = get_le<std::uint64_t>(in);
  if (n_atoms > (1u << 20)) throw Error(path + ": implausible atom count");
  Trajectory traj;
  for (std::uint64_t a = 0; a < n_atoms; ++a) {
    char tag[5] = {};
    if (!in.read(tag, 4)) throw Error("binary trajectory is truncated");
    traj.species.emplace_back(tag);
    traj.masses.push_back(get_le<double>(in));
  }
  for (std::uint64_t i = 0; i < n_frames; ++i) {
    TrajFrame f;
    f.time = get_le<double>(in);
    f.kinetic = get_le<double>(in);
    f.potential = get_le<double>(in);
    for (auto* arr : {&f.positions, &f.velocities, &f.forces}) {
      arr->resize(n_atoms);
      for (Vec3& v : *arr) {
        for (double& c : v) c = get_le<double>(in);
      }
    }
    traj.frames.push_back(std::move(f));
  }
  return traj;
}

}  // namespace shiftmd::md
