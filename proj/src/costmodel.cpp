// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftmd/costmodel.hpp"

#include <cstdio>

#include "json.hpp"
#include "shiftmd/error.hpp"
#include "shiftmd/kvfile.hpp"

namespace shiftmd::cost {

void UnitCosts::validate() const {
  for (std::int64_t v : {shifter_per_bit_option, adder_per_bit, multiplier_per_bit2, selector_per_bit, register_per_bit, act_phi, act_tanh}) {
    if (v <= 0) throw Error("unit costs must be positive");
  }
}

namespace {

int bits_for(int options) {
  int b = 0;
  while ((1 << b) < options) ++b;
  return b;
}

}  // namespace

CostReport estimate_cost(const std::vector<int>& arch, const Scheme& scheme, const UnitCosts& c) {
  c.validate();
  if (arch.size() < 2) throw Error("architecture needs at least two layers");
  for (int n : arch) {
    if (n < 1) throw Error("layer widths must be positive");
  }
  if (scheme.bits < 2) throw Error("word width must be at least 2 bits");
  if (scheme.kind == SchemeKind::Sqnn && (scheme.K < 1 || scheme.shift_options < 2)) throw Error("SQNN needs K >= 1 and >= 2 shift options");

  std::int64_t units = 0, neurons = 0;
  for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
    units += static_cast<std::int64_t>(arch[l]) * arch[l + 1];
    neurons += arch[l + 1];
  }
  const std::int64_t b = scheme.bits;
  const std::int64_t adder = c.adder_per_bit * b;

  CostReport r;
  if (scheme.kind == SchemeKind::Sqnn) {
    const std::int64_t shifter = c.shifter_per_bit_option * b * scheme.shift_options;
    r.breakdown["shifters"] = units * scheme.K * shifter;
    r.breakdown["unit_adders"] = units * adder;
    r.breakdown["sign_selectors"] = units * c.selector_per_bit * b;
    r.breakdown["weight_storage"] = units * c.register_per_bit * (1 + scheme.K * bits_for(scheme.shift_options));
  } else {
    r.breakdown["multipliers"] = units * c.multiplier_per_bit2 * b * b;
    r.breakdown["unit_adders"] = units * adder;
    r.breakdown["weight_storage"] = units * c.register_per_bit * b;
  }
  r.breakdown["bias_adders"] = neurons * adder;
  for (const auto& [_, v] : r.breakdown) r.matrix_units += v;
  r.breakdown["activation_units"] = neurons * (scheme.activation == net::Activation::PhiHw ? c.act_phi : c.act_tanh);
  r.total = r.matrix_units + r.breakdown["activation_units"];
  return r;
}

double shift_to_multiply_ratio(const std::vector<int>& arch, int K, const UnitCosts& costs, int sqnn_bits, int fqnn_bits, int shift_options) {
  const auto s = estimate_cost(arch, Scheme::sqnn(K, sqnn_bits, shift_options), costs);
  const auto m = estimate_cost(arch, Scheme::fqnn(fqnn_bits), costs);
  return static_cast<double>(s.matrix_units) / static_cast<double>(m.matrix_units);
}

double activation_ratio(const UnitCosts& costs) {
  costs.validate();
  return static_cast<double>(costs.act_phi) / static_cast<double>(costs.act_tanh);
}

std::string CostReport::render() const {
  std::string out;
  char buf[96];
  for (const auto& [k, v] : breakdown) {
    std::snprintf(buf, sizeof buf, "%-18s %12lld\n", k.c_str(), static_cast<long long>(v));
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-18s %12lld\n%-18s %12lld\n", "matrix_units", static_cast<long long>(matrix_units), "total",
                static_cast<long long>(total));
  return out + buf;
}

std::string CostReport::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  j["matrix_units"] = matrix_units;
  j["breakdown"] = breakdown;
  return j.dump(1);
}

UnitCosts apply_unit_cost_overrides(const std::map<std::string, std::string>& kv, UnitCosts c) {
  const std::map<std::string, std::int64_t*> fields = {
      {"shifter_per_bit_option", &c.shifter_per_bit_option},
      {"adder_per_bit", &c.adder_per_bit},
      {"multiplier_per_bit2", &c.multiplier_per_bit2},
      {"selector_per_bit", &c.selector_per_bit},
      {"register_per_bit", &c.register_per_bit},
      {"act_phi", &c.act_phi},
      {"act_tanh", &c.act_tanh},
  };
  for (const auto& [k, v] : kv) {
    const auto it = fields.find(k);
    if (it == fields.end()) throw Error("unknown unit cost '" + k + "'");
    try {
      std::size_t pos = 0;
      *it->second = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw Error("unit cost '" + k + "' must be an integer, got '" + v + "'");
    }
  }
  c.validate();
  return c;
}

UnitCosts load_unit_costs(const std::string& path, UnitCosts base) { return apply_unit_cost_overrides(read_key_value_file(path), base); }

}  // namespace shiftmd::cost
