// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftmd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include "shiftmd/error.hpp"

namespace shiftmd::analysis {

StructuralStats structural_stats(const md::Trajectory& traj) {
  if (traj.frames.empty()) throw Error("structural_stats: empty trajectory");
  std::vector<double> bonds, angles;
  for (const auto& f : traj.frames) {
    if (f.positions.size() != 3) throw Error("structural_stats expects water frames (O, H, H)");
    const auto ic = md::internal_coordinates(std::span<const Vec3, 3>(f.positions.data(), 3));
    bonds.push_back(ic[0]);
    bonds.push_back(ic[1]);
    angles.push_back(ic[2]);
  }
  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, std::sqrt(ss / static_cast<double>(v.size()))};
  };
  StructuralStats s;
  std::tie(s.bond_mean, s.bond_std) = mean_std(bonds);
  std::tie(s.angle_mean, s.angle_std) = mean_std(angles);
  return s;
}

std::vector<Peak> find_peaks(std::span<const double> freqs, std::span<const double> dos, double threshold) {
  std::vector<Peak> peaks;
  if (dos.size() < 3) return peaks;
  const double top = *std::max_element(dos.begin(), dos.end());
  if (!(top > 0)) return peaks;
  const double bin = freqs[1] - freqs[0];
  for (std::size_t k = 1; k + 1 < dos.size(); ++k) {
    const double y0 = dos[k - 1], y1 = dos[k], y2 = dos[k + 1];
    if (!(y1 > y0 && y1 >= y2) || y1 < threshold * top) continue;
    const double denom = y0 - 2 * y1 + y2;
    const double offset = denom != 0 ? 0.5 * (y0 - y2) / denom : 0.0;
    peaks.push_back(Peak{freqs[k] + offset * bin, y1 - 0.25 * (y0 - y2) * offset});
  }
  return peaks;
}

std::vector<Peak> dominant_peaks(const VdosSpectrum& s, std::size_t count, double min_frequency) {
  std::vector<Peak> p;
  for (const Peak& pk : s.peaks) {
    if (pk.frequency >= min_frequency) p.push_back(pk);
  }
  std::stable_sort(p.begin(), p.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
  if (p.size() > count) p.resize(count);
  std::sort(p.begin(), p.end(), [](const Peak& a, const Peak& b) { return a.frequency < b.frequency; });
  return p;
}

double relative_error_percent(double reference, double candidate) {
  if (reference == 0.0) throw Error("relative error against a zero reference");
  return std::fabs(candidate - reference) / std::fabs(reference) * 100.0;
}

ErrorTable error_report(const std::vector<std::pair<std::string, double>>& reference,
                        const std::vector<std::pair<std::string, std::map<std::string, double>>>& candidates) {
  ErrorTable t;
  for (const auto& [key, value] : reference) {
    if (value == 0.0) throw Error("reference value for '" + key + "' is zero");
    t.columns.push_back(key);
    t.reference[key] = value;
  }
  for (const auto& [name, values] : candidates) {
    std::map<std::string, double> err;
    for (const auto& key : t.columns) {
      const auto it = values.find(key);
      if (it == values.end()) throw Error("candidate '" + name + "' has no value for '" + key + "'");
      err[key] = relative_error_percent(t.reference[key], it->second);
    }
    t.rows.emplace_back(name, values);
    t.errors.emplace_back(name, std::move(err));
  }
  return t;
}

std::string ErrorTable::render() const {
  std::size_t name_w = 9;
  for (const auto& [n, _] : rows) name_w = std::max(name_w, n.size() + 7);
  std::vector<std::size_t> width;
  for (const auto& c : columns) width.push_back(std::max<std::size_t>(c.size(), 12));

  std::string out;
  char buf[64];
  auto cell = [&](const std::string& s, std::size_t w, bool left) {
    std::snprintf(buf, sizeof buf, left ? "%-*s" : "%*s", static_cast<int>(w), s.c_str());
    out += buf;
  };
  auto num = [&](double v, const char* fmt) {
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  cell("Method", name_w, true);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += "  ";
    cell(columns[c], width[c], false);
  }
  out += "\n";
  cell("Reference", name_w, true);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += "  ";
    cell(num(reference.at(columns[c]), "%.6g"), width[c], false);
  }
  out += "\n";
  for (const auto& [name, values] : rows) {
    cell(name, name_w, true);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += "  ";
      cell(num(values.at(columns[c]), "%.6g"), width[c], false);
    }
    out += "\n";
  }
  for (const auto& [name, errs] : errors) {
    cell("Error(" + name + ")", name_w, true);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += "  ";
      cell(num(errs.at(columns[c]), "%.2f%%"), width[c], false);
    }
    out += "\n";
  }
  return out;
}

Scatter force_scatter(std::span<const double> predicted, std::span<const double> reference) {
  if (predicted.size() != reference.size()) throw Error("force_scatter: predicted and reference lengths differ");
  if (predicted.empty()) throw Error("force_scatter: no data");
  Scatter s;
  double sse = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    s.points.emplace_back(predicted[i], reference[i]);
    const double e = predicted[i] - reference[i];
    sse += e * e;
  }
  s.rmse = std::sqrt(sse / static_cast<double>(predicted.size())) * 1000.0;
  return s;
}

Scatter force_scatter(const net::MlpModel& model, std::span<const dataset::Frame> frames, net::Engine engine,
                      const dataset::SurrogateParams& surrogate) {
  std::vector<double> pred, ref;
  for (const auto& f : frames) {
    if (!f.forces) throw Error("force_scatter: frame has no force labels");
    if (f.size() != 3) throw Error("force_scatter expects water frames (O, H, H)");
    const auto p = md::evaluate_forces(std::span<const Vec3, 3>(f.positions.data(), 3), model, engine, surrogate);
    for (std::size_t a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) {
        pred.push_back(p[a][c]);
        ref.push_back((*f.forces)[a][c]);
      }
    }
  }
  return force_scatter(pred, ref);
}

void write_columns(const std::string& path, std::span<const double> x, std::span<const double> y, const std::string& header) {
  if (x.size() != y.size()) throw Error("write_columns: column lengths differ");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  if (!header.empty()) out << "# " << header << "\n";
  char buf[64];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g %.10g\n", x[i], y[i]);
    out << buf;
  }
}

}  // namespace shiftmd::analysis
