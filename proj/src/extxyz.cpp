// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shiftmd/dataset.hpp"
#include "shiftmd/error.hpp"

namespace shiftmd::dataset {

void Frame::validate() const {
  if (species.size() != positions.size()) throw Error("frame species and positions differ in length");
  for (const Vec3& p : positions) {
    for (double c : p) {
      if (!std::isfinite(c)) throw Error("frame has non-finite positions");
    }
  }
  if (forces && forces->size() != positions.size()) throw Error("frame forces do not match positions");
  if (velocities && velocities->size() != positions.size()) throw Error("frame velocities do not match positions");
}

namespace {

enum class Column { Species, Pos, Vel, Forces };

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// key=value pairs; values may be double-quoted and contain spaces.
std::map<std::string, std::string> parse_comment(std::string_view line, std::size_t lineno) {
  std::map<std::string, std::string> kv;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t eq = i;
    while (eq < line.size() && line[eq] != '=' && line[eq] != ' ' && line[eq] != '\t') ++eq;
    std::string key(line.substr(i, eq - i));
    if (eq >= line.size() || line[eq] != '=') {
      kv[key] = "T";  // bare flag
      i = eq;
      continue;
    }
    std::size_t v = eq + 1;
    std::string value;
    if (v < line.size() && line[v] == '"') {
      const std::size_t close = line.find('"', v + 1);
      if (close == std::string_view::npos) throw ParseError("unterminated quoted value for '" + key + "'", lineno);
      value = std::string(line.substr(v + 1, close - v - 1));
      i = close + 1;
    } else {
      std::size_t end = v;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
      value = std::string(line.substr(v, end - v));
      i = end;
    }
    kv[key] = value;
  }
  return kv;
}

double parse_number(std::string_view s, std::size_t lineno) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("non-numeric field '" + std::string(s) + "'", lineno);
  }
  return v;
}

std::vector<Column> parse_properties(const std::string& spec, std::size_t lineno) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() % 3 != 0) throw ParseError("malformed Properties specification '" + spec + "'", lineno);
  std::vector<Column> cols;
  for (std::size_t p = 0; p < parts.size(); p += 3) {
    const std::string& name = parts[p];
    const std::string& type = parts[p + 1];
    const std::string& count = parts[p + 2];
    if (name == "species" && type == "S" && count == "1") {
      cols.push_back(Column::Species);
    } else if (name == "pos" && type == "R" && count == "3") {
      cols.push_back(Column::Pos);
    } else if ((name == "vel" || name == "velo") && type == "R" && count == "3") {
      cols.push_back(Column::Vel);
    } else if ((name == "forces" || name == "force") && type == "R" && count == "3") {
      cols.push_back(Column::Forces);
    } else {
      throw ParseError("unknown property column '" + name + ":" + type + ":" + count + "'", lineno);
    }
  }
  auto has = [&](Column c) { return std::find(cols.begin(), cols.end(), c) != cols.end(); };
  if (!has(Column::Species) || !has(Column::Pos)) throw ParseError("Properties must include species and pos", lineno);
  return cols;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<Frame> parse_extxyz(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start <= text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }

  std::vector<Frame> frames;
  std::size_t i = 0;
  while (i < lines.size()) {
    const auto count_tokens = split_ws(lines[i]);
    if (count_tokens.empty()) {
      ++i;  // blank separator / trailing newline
      continue;
    }
    const std::size_t count_line = i + 1;
    std::size_t natoms = 0;
    {
      const auto tok = count_tokens.front();
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), natoms);
      if (count_tokens.size() != 1 || ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("malformed atom count '" + std::string(lines[i]) + "'", count_line);
      }
    }
    if (i + 1 >= lines.size()) throw ParseError("truncated frame: missing comment line", count_line);

    Frame f;
    auto kv = parse_comment(lines[i + 1], i + 2);
    const auto props = kv.find("Properties");
    if (props == kv.end()) throw ParseError("comment line has no Properties=", i + 2);
    const auto cols = parse_properties(props->second, i + 2);
    kv.erase(props);
    if (const auto lat = kv.find("Lattice"); lat != kv.end()) {
      const auto toks = split_ws(lat->second);
      if (toks.size() != 9) throw ParseError("Lattice needs 9 numbers", i + 2);
      Mat3 cell{};
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cell[r][c] = parse_number(toks[r * 3 + c], i + 2);
      }
      f.cell = cell;
      kv.erase(lat);
    }
    f.info = std::move(kv);

    const bool has_vel = std::find(cols.begin(), cols.end(), Column::Vel) != cols.end();
    const bool has_forces = std::find(cols.begin(), cols.end(), Column::Forces) != cols.end();
    if (has_vel) f.velocities.emplace();
    if (has_forces) f.forces.emplace();
    const std::size_t expected = 1 + 3 * (cols.size() - 1);

    for (std::size_t a = 0; a < natoms; ++a) {
      const std::size_t li = i + 2 + a;
      if (li >= lines.size() || split_ws(lines[li]).empty()) {
        throw ParseError("truncated frame: expected " + std::to_string(natoms) + " atoms, found " + std::to_string(a), li + 1);
      }
      const auto toks = split_ws(lines[li]);
      if (toks.size() != expected) {
        throw ParseError("expected " + std::to_string(expected) + " fields, found " + std::to_string(toks.size()), li + 1);
      }
      std::size_t t = 0;
      for (Column c : cols) {
        if (c == Column::Species) {
          f.species.emplace_back(toks[t++]);
          continue;
        }
        Vec3 v{};
        for (double& x : v) x = parse_number(toks[t++], li + 1);
        if (c == Column::Pos) f.positions.push_back(v);
        if (c == Column::Vel) f.velocities->push_back(v);
        if (c == Column::Forces) f.forces->push_back(v);
      }
    }
    try {
      f.validate();
    } catch (const Error& e) {
      throw ParseError(e.what(), count_line);
    }
    frames.push_back(std::move(f));
    i += 2 + natoms;
  }
  return frames;
}

std::string write_extxyz(std::span<const Frame> frames) {
  std::string out;
  for (const Frame& f : frames) {
    f.validate();
    out += std::to_string(f.size()) + "\n";
    std::string props = "species:S:1:pos:R:3";
    if (f.velocities) props += ":vel:R:3";
    if (f.forces) props += ":forces:R:3";
    out += "Properties=" + props;
    if (f.cell) {
      out += " Lattice=\"";
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out += (r || c ? " " : "") + fmt_double((*f.cell)[r][c]);
      }
      out += "\"";
    }
    for (const auto& [k, v] : f.info) {
      const bool quote = v.find_first_of(" \t") != std::string::npos;
      out += " " + k + "=" + (quote ? "\"" + v + "\"" : v);
    }
    out += "\n";
    for (std::size_t a = 0; a < f.size(); ++a) {
      out += f.species[a];
      auto put = [&](const Vec3& v) {
        for (double x : v) out += " " + fmt_double(x);
      };
      put(f.positions[a]);
      if (f.velocities) put((*f.velocities)[a]);
      if (f.forces) put((*f.forces)[a]);
      out += "\n";
    }
  }
  return out;
}

std::vector<Frame> read_extxyz_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_extxyz(ss.str());
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_extxyz_file(const std::string& path, std::span<const Frame> frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << write_extxyz(frames);
  if (!out) throw Error("failed writing " + path);
}

}  // namespace shiftmd::dataset
