// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shiftmd/error.hpp"
#include "shiftmd/net.hpp"

namespace shiftmd::net {

using Json = nlohmann::ordered_json;

std::string serialize_model(const MlpModel& model) {
  model.validate();
  Json j;
  j["format"] = kModelFormat;
  j["layer_sizes"] = model.layer_sizes;
  j["activation"] = to_string(model.activation);
  j["quant"] = {{"K", model.quant.K}, {"exp_min", model.quant.exp_min}, {"exp_max", model.quant.exp_max}};
  const FeatureScaling& s = model.scaling;
  j["feature_scaling"] = {{"r0", s.r0},
                          {"theta0_deg", s.theta0_deg},
                          {"bond_scale", s.bond_scale},
                          {"angle_scale_deg", s.angle_scale_deg},
                          {"force_scale", s.force_scale}};
  j["quantized"] = model.quantized();
  Json layers = Json::array();
  for (const Layer& layer : model.layers) {
    Json jl;
    jl["in"] = layer.in;
    jl["out"] = layer.out;
    jl["weights"] = layer.weights;
    jl["biases"] = layer.biases;
    if (model.quantized()) {
      Json shifts = Json::array();
      for (const auto& q : layer.quant_weights) shifts.push_back({{"s", q.sign}, {"n", q.exponents}});
      jl["shift_weights"] = std::move(shifts);
      Json raws = Json::array();
      for (const auto& b : layer.fx_biases) raws.push_back(b.raw);
      jl["bias_raw"] = std::move(raws);
    }
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  return j.dump(1) + "\n";
}

MlpModel deserialize_model(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw Error("unsupported model format '" + j.at("format").get<std::string>() + "'");
    }
    MlpModel m = make_model(j.at("layer_sizes").get<std::vector<int>>(), parse_activation(j.at("activation").get<std::string>()));
    const Json& q = j.at("quant");
    m.quant = quant::QuantConfig{q.at("K").get<int>(), q.at("exp_min").get<int>(), q.at("exp_max").get<int>()};
    const Json& s = j.at("feature_scaling");
    m.scaling = FeatureScaling{s.at("r0").get<double>(), s.at("theta0_deg").get<double>(), s.at("bond_scale").get<double>(),
                               s.at("angle_scale_deg").get<double>(), s.at("force_scale").get<double>()};
    const bool quantized = j.at("quantized").get<bool>();
    const Json& layers = j.at("layers");
    if (layers.size() != m.layers.size()) throw Error("model file layer count does not match layer_sizes");
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const Json& jl = layers[l];
      Layer& layer = m.layers[l];
      layer.weights = jl.at("weights").get<std::vector<double>>();
      layer.biases = jl.at("biases").get<std::vector<double>>();
      if (quantized) {
        for (const Json& sw : jl.at("shift_weights")) {
          layer.quant_weights.push_back(quant::ShiftWeight{sw.at("s").get<int>(), sw.at("n").get<std::vector<int>>()});
        }
        for (const Json& r : jl.at("bias_raw")) layer.fx_biases.push_back(fxp::FxValue{r.get<std::int32_t>(), fxp::kDatapath});
      }
    }
    m.validate();
    return m;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path);
  out << serialize_model(model);
  if (!out) throw Error("failed writing model file " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace shiftmd::net
