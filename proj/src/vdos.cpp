// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

#include "shiftmd/analysis.hpp"
#include "shiftmd/error.hpp"

namespace shiftmd::analysis {

namespace {

constexpr std::size_t kMinFrames = 1024;

struct FftwDeleter {
  void operator()(double* p) const { fftw_free(p); }
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double[], FftwDeleter>;
using ComplexBuf = std::unique_ptr<fftw_complex[], FftwDeleter>;

struct Plan {
  fftw_plan p = nullptr;
  explicit Plan(fftw_plan plan) : p(plan) {
    if (!p) throw Error("FFTW failed to create a plan");
  }
  ~Plan() { fftw_destroy_plan(p); }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  void run() const { fftw_execute(p); }
};

RealBuf real_buf(std::size_t n) { return RealBuf(static_cast<double*>(fftw_malloc(sizeof(double) * n))); }
ComplexBuf complex_buf(std::size_t n) { return ComplexBuf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))); }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

VdosSpectrum vdos_from_series(const std::vector<std::vector<Vec3>>& velocities, std::span<const double> masses, double dt,
                              const VdosOptions& opts) {
  if (!(dt > 0)) throw Error("vdos: time step must be positive");
  if (velocities.empty() || velocities.size() != masses.size()) throw Error("vdos: need one velocity series and mass per atom");
  const std::size_t n = velocities.front().size();
  for (const auto& v : velocities) {
    if (v.size() != n) throw Error("vdos: velocity series differ in length");
  }
  if (n < kMinFrames) throw Error("vdos: need at least 1024 frames, got " + std::to_string(n));
  const std::size_t lag = (opts.max_lag == 0 || opts.max_lag >= n) ? n - 1 : opts.max_lag;

  // Biased autocorrelation of every component via a zero-padded FFT.
  const std::size_t m = next_pow2(2 * n);
  auto sig = real_buf(m);
  auto spec = complex_buf(m / 2 + 1);
  Plan fwd(fftw_plan_dft_r2c_1d(static_cast<int>(m), sig.get(), spec.get(), FFTW_ESTIMATE));
  Plan inv(fftw_plan_dft_c2r_1d(static_cast<int>(m), spec.get(), sig.get(), FFTW_ESTIMATE));

  std::vector<double> acf(lag + 1, 0.0);
  for (std::size_t a = 0; a < velocities.size(); ++a) {
    for (int c = 0; c < 3; ++c) {
      for (std::size_t t = 0; t < m; ++t) sig[t] = t < n ? velocities[a][t][c] : 0.0;
      fwd.run();
      for (std::size_t k = 0; k <= m / 2; ++k) {
        spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
        spec[k][1] = 0.0;
      }
      inv.run();
      for (std::size_t t = 0; t <= lag; ++t) acf[t] += masses[a] * sig[t] / static_cast<double>(m);
    }
  }
  for (double& c : acf) c /= static_cast<double>(velocities.size() * n);

  // Windowed cosine transform: S(f_k) = sum over -lag..lag of C(tau) w(tau) cos(2 pi f_k tau dt),
  // with f_k = k / (2 lag dt). DCT-I of length lag+1 computes exactly this.
  auto x = real_buf(lag + 1);
  auto y = real_buf(lag + 1);
  for (std::size_t t = 0; t <= lag; ++t) {
    double w = 1.0;
    if (opts.window == Window::Hann) w = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) / static_cast<double>(lag)));
    x[t] = acf[t] * w;
  }
  Plan dct(fftw_plan_r2r_1d(static_cast<int>(lag + 1), x.get(), y.get(), FFTW_REDFT00, FFTW_ESTIMATE));
  dct.run();

  VdosSpectrum s;
  const double df = 1.0 / (2.0 * static_cast<double>(lag) * dt);  // 1/fs
  s.bin_width = df / kLightSpeed;
  double top = 0.0;
  for (std::size_t k = 0; k <= lag; ++k) {
    s.frequencies.push_back(static_cast<double>(k) * s.bin_width);
    s.dos.push_back(std::max(0.0, y[k]));
    top = std::max(top, s.dos.back());
  }
  if (top > 0) {
    for (double& d : s.dos) d /= top;
  }
  s.peaks = find_peaks(s.frequencies, s.dos, opts.peak_threshold);
  return s;
}

VdosSpectrum vdos(const md::Trajectory& traj, double dt, const VdosOptions& opts) {
  if (traj.frames.size() < kMinFrames) throw Error("vdos: need at least 1024 frames, got " + std::to_string(traj.frames.size()));
  const double step = traj.frames[1].time - traj.frames[0].time;
  for (std::size_t i = 1; i < traj.frames.size(); ++i) {
    const double d = traj.frames[i].time - traj.frames[i - 1].time;
    if (std::fabs(d - step) > 1e-6 * std::max(1.0, std::fabs(step))) throw Error("vdos: non-uniform sampling at frame " + std::to_string(i));
  }
  if (step != 0.0 && std::fabs(step - dt) > 1e-6 * dt) throw Error("vdos: frame spacing does not match dt");

  const std::size_t natoms = traj.masses.size();
  std::vector<std::vector<Vec3>> series(natoms);
  for (auto& s : series) s.reserve(traj.frames.size());
  for (const auto& f : traj.frames) {
    if (f.velocities.size() != natoms) throw Error("vdos: frame has the wrong atom count");
    for (std::size_t a = 0; a < natoms; ++a) series[a].push_back(f.velocities[a]);
  }
  return vdos_from_series(series, traj.masses, dt, opts);
}

}  // namespace shiftmd::analysis
