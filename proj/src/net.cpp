// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftmd/net.hpp"

#include <cmath>
#include <cstdlib>

#include "shiftmd/error.hpp"

namespace shiftmd::net {

std::string_view to_string(Activation a) noexcept { return a == Activation::PhiHw ? "phi" : "tanh"; }

std::string_view to_string(Engine e) noexcept {
  switch (e) {
    case Engine::Float: return "float";
    case Engine::Fqnn: return "fqnn";
    case Engine::Sqnn: return "sqnn";
    case Engine::Surrogate: return "surrogate";
  }
  return "?";
}

Activation parse_activation(std::string_view s) {
  if (s == "phi") return Activation::PhiHw;
  if (s == "tanh") return Activation::TanhRef;
  throw Error("unknown activation '" + std::string(s) + "' (expected phi or tanh)");
}

Engine parse_engine(std::string_view s) {
  if (s == "float" || s == "cnn") return Engine::Float;
  if (s == "fqnn") return Engine::Fqnn;
  if (s == "sqnn") return Engine::Sqnn;
  if (s == "surrogate") return Engine::Surrogate;
  throw Error("unknown engine '" + std::string(s) + "' (expected float, fqnn, sqnn or surrogate)");
}

bool MlpModel::quantized() const noexcept {
  if (layers.empty()) return false;
  for (const Layer& l : layers) {
    if (l.quant_weights.size() != l.weights.size() || l.fx_biases.size() != l.biases.size()) return false;
  }
  return true;
}

void MlpModel::validate() const {
  if (layer_sizes.size() < 2) throw Error("model needs at least an input and an output layer");
  if (layers.size() != layer_sizes.size() - 1) throw Error("model layer count does not match layer_sizes");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (layer.in != layer_sizes[l] || layer.out != layer_sizes[l + 1]) {
      throw Error("layer " + std::to_string(l + 1) + " shape does not match layer_sizes");
    }
    const auto n = static_cast<std::size_t>(layer.in) * layer.out;
    if (layer.weights.size() != n || layer.biases.size() != static_cast<std::size_t>(layer.out)) {
      throw Error("layer " + std::to_string(l + 1) + " parameter count does not match its shape");
    }
    if (!layer.quant_weights.empty() && layer.quant_weights.size() != n) {
      throw Error("layer " + std::to_string(l + 1) + " quantized weight count does not match its shape");
    }
    if (!layer.fx_biases.empty() && layer.fx_biases.size() != static_cast<std::size_t>(layer.out)) {
      throw Error("layer " + std::to_string(l + 1) + " fixed-point bias count does not match its shape");
    }
  }
}

MlpModel make_model(std::vector<int> layer_sizes, Activation act) {
  MlpModel m;
  for (int n : layer_sizes) {
    if (n < 1) throw Error("layer sizes must be positive");
  }
  m.layer_sizes = std::move(layer_sizes);
  m.activation = act;
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    Layer layer;
    layer.in = m.layer_sizes[l];
    layer.out = m.layer_sizes[l + 1];
    layer.weights.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
    layer.biases.assign(layer.out, 0.0);
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

void quantize_model(MlpModel& model, const quant::QuantConfig& cfg) {
  model.quant = cfg;
  for (Layer& layer : model.layers) {
    layer.quant_weights.clear();
    for (double w : layer.weights) layer.quant_weights.push_back(quant::quantize_weight(w, cfg));
    layer.fx_biases.clear();
    for (double b : layer.biases) layer.fx_biases.push_back(fxp::encode_fx(b, fxp::kDatapath));
  }
}

double phi_ref(double x) noexcept {
  if (x >= 2.0) return 1.0;
  if (x <= -2.0) return -1.0;
  return x - x * std::fabs(x) / 4.0;
}

double phi_ref_grad(double x) noexcept {
  if (x >= 2.0 || x <= -2.0) return 0.0;
  return 1.0 - std::fabs(x) / 2.0;
}

fxp::FxValue phi_fx(fxp::FxValue x) noexcept {
  const std::int64_t one = x.fmt.one_raw();
  const std::int64_t raw = x.raw;
  std::int64_t out;
  if (raw >= 2 * one) {
    out = one;
  } else if (raw <= -2 * one) {
    out = -one;
  } else {
    const std::int64_t square = raw * std::llabs(raw);  // 2*frac fractional bits
    out = raw - ((square >> x.fmt.frac_bits) >> 2);
  }
  return fxp::FxValue{fxp::saturate(out, x.fmt), x.fmt};
}

double activate(Activation a, double x) noexcept { return a == Activation::PhiHw ? phi_ref(x) : std::tanh(x); }

namespace {

template <typename T>
void check_input(const MlpModel& model, std::span<const T> input) {
  if (model.layer_sizes.empty() || input.size() != static_cast<std::size_t>(model.layer_sizes.front())) {
    throw Error("input length " + std::to_string(input.size()) + " does not match the model's input layer");
  }
}

void check_fx_input(std::span<const fxp::FxValue> input, fxp::FxFormat fmt) {
  for (const auto& v : input) {
    if (!(v.fmt == fmt)) throw Error("input is not in the engine's fixed-point format");
  }
}

}  // namespace

std::vector<double> forward_float(const MlpModel& model, std::span<const double> input) {
  check_input(model, input);
  std::vector<double> a(input.begin(), input.end());
  for (const Layer& layer : model.layers) {
    std::vector<double> next(layer.out);
    for (int j = 0; j < layer.out; ++j) {
      double z = layer.biases[j];
      for (int k = 0; k < layer.in; ++k) z += layer.w(j, k) * a[k];
      next[j] = activate(model.activation, z);
    }
    a = std::move(next);
  }
  return a;
}

std::vector<fxp::FxValue> forward_sqnn(const MlpModel& model, std::span<const fxp::FxValue> input) {
  check_input(model, input);
  if (!model.quantized()) throw Error("SQNN engine needs a quantized model");
  if (model.activation != Activation::PhiHw) throw Error("SQNN engine only implements the phi activation");
  check_fx_input(input, fxp::kDatapath);

  const int acc_frac = quant::acc_frac_bits(fxp::kDatapath, model.quant);
  std::vector<fxp::FxValue> x(input.begin(), input.end());
  for (const Layer& layer : model.layers) {
    std::vector<fxp::FxValue> next(layer.out);
    for (int j = 0; j < layer.out; ++j) {
      // MU: one SU per input, summed in the accumulator, then + bias.
      fxp::WideAcc acc = fxp::widen(layer.fx_biases[j], acc_frac);
      for (int k = 0; k < layer.in; ++k) {
        acc.raw += quant::shift_mul(layer.quant_weights[static_cast<std::size_t>(j) * layer.in + k], x[k], model.quant).raw;
      }
      // AU
      next[j] = phi_fx(fxp::narrow(acc, fxp::kDatapath));
    }
    x = std::move(next);
  }
  return x;
}

std::vector<fxp::FxValue> forward_fqnn(const MlpModel& model, std::span<const fxp::FxValue> input) {
  check_input(model, input);
  if (model.activation != Activation::PhiHw) throw Error("FQNN engine only implements the phi activation");
  check_fx_input(input, fxp::kBaseline16);

  const fxp::FxFormat fmt = fxp::kBaseline16;
  std::vector<fxp::FxValue> x(input.begin(), input.end());
  for (const Layer& layer : model.layers) {
    std::vector<fxp::FxValue> next(layer.out);
    for (int j = 0; j < layer.out; ++j) {
      fxp::WideAcc acc = fxp::widen(fxp::encode_fx(layer.biases[j], fmt), fmt.frac_bits);
      for (int k = 0; k < layer.in; ++k) {
        acc.raw += fxp::fx_mul(fxp::encode_fx(layer.w(j, k), fmt), x[k]).raw;
      }
      next[j] = phi_fx(fxp::narrow(acc, fmt));
    }
    x = std::move(next);
  }
  return x;
}

std::vector<double> forward(const MlpModel& model, Engine engine, std::span<const double> input) {
  auto run_fixed = [&](fxp::FxFormat fmt, auto&& fn) {
    std::vector<fxp::FxValue> in;
    in.reserve(input.size());
    for (double v : input) in.push_back(fxp::encode_fx(v, fmt));
    std::vector<double> out;
    for (const auto& v : fn(model, std::span<const fxp::FxValue>(in))) out.push_back(v.to_double());
    return out;
  };
  switch (engine) {
    case Engine::Float: return forward_float(model, input);
    case Engine::Sqnn: return run_fixed(fxp::kDatapath, forward_sqnn);
    case Engine::Fqnn: return run_fixed(fxp::kBaseline16, forward_fqnn);
    case Engine::Surrogate: break;
  }
  throw Error("the surrogate engine does not evaluate a network");
}

}  // namespace shiftmd::net
