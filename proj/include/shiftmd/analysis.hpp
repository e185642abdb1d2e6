// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shiftmd/dataset.hpp"
#include "shiftmd/md.hpp"
#include "shiftmd/net.hpp"

namespace shiftmd::analysis {

/// Speed of light in cm/fs; wavenumber [1/cm] = frequency [1/fs] / kLightSpeed.
inline constexpr double kLightSpeed = 2.99792458e-5;

struct StructuralStats {
  double bond_mean = 0.0;   // A, both O-H bonds pooled
  double bond_std = 0.0;
  double angle_mean = 0.0;  // degrees
  double angle_std = 0.0;
};

StructuralStats structural_stats(const md::Trajectory& traj);

enum class Window { Hann, Rectangular };

struct VdosOptions {
  Window window = Window::Hann;
  /// Longest correlation lag kept, in frames; 0 keeps all N-1 lags.
  std::size_t max_lag = 0;
  /// Peaks below this fraction of the maximum are ignored.
  double peak_threshold = 0.1;
};

struct Peak {
  double frequency = 0.0;  // 1/cm
  double height = 0.0;
};

struct VdosSpectrum {
  std::vector<double> frequencies;  // 1/cm, ascending
  std::vector<double> dos;          // normalised to max 1 (all zero for a frozen system)
  std::vector<Peak> peaks;          // ascending in frequency
  double bin_width = 0.0;           // 1/cm
};

/// Vibrational density of states from the mass-weighted velocity
/// autocorrelation. `dt` is the spacing between stored frames in fs.
VdosSpectrum vdos(const md::Trajectory& traj, double dt, const VdosOptions& opts = {});

/// Same, from a single velocity series per atom: velocities[atom][frame].
VdosSpectrum vdos_from_series(const std::vector<std::vector<Vec3>>& velocities, std::span<const double> masses, double dt,
                              const VdosOptions& opts = {});

/// Local maxima above threshold * max, refined by a parabola through 3 bins.
std::vector<Peak> find_peaks(std::span<const double> freqs, std::span<const double> dos, double threshold);

/// The `count` highest peaks at or above `min_frequency`, returned in
/// ascending frequency order.
std::vector<Peak> dominant_peaks(const VdosSpectrum& s, std::size_t count, double min_frequency = 0.0);

/// |candidate - reference| / reference * 100.
double relative_error_percent(double reference, double candidate);

struct ErrorTable {
  std::vector<std::string> columns;
  std::map<std::string, double> reference;
  std::vector<std::pair<std::string, std::map<std::string, double>>> rows;  // name -> value per column
  std::vector<std::pair<std::string, std::map<std::string, double>>> errors;  // name -> percent per column

  std::string render() const;
};

/// Relative errors of every candidate against the reference, per key.
ErrorTable error_report(const std::vector<std::pair<std::string, double>>& reference,
                        const std::vector<std::pair<std::string, std::map<std::string, double>>>& candidates);

struct Scatter {
  std::vector<std::pair<double, double>> points;  // (predicted, reference), eV/A
  double rmse = 0.0;                              // meV/A
};

Scatter force_scatter(std::span<const double> predicted, std::span<const double> reference);

/// Predicted vs labelled force components of every atom of every frame.
Scatter force_scatter(const net::MlpModel& model, std::span<const dataset::Frame> frames, net::Engine engine,
                      const dataset::SurrogateParams& surrogate = {});

/// Two whitespace-separated columns, one row per point, %.10g.
void write_columns(const std::string& path, std::span<const double> x, std::span<const double> y, const std::string& header = "");

}  // namespace shiftmd::analysis
