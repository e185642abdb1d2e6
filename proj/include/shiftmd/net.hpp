// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shiftmd/fxp.hpp"
#include "shiftmd/quant.hpp"

namespace shiftmd::net {

enum class Activation { PhiHw, TanhRef };

/// Which arithmetic evaluates the network (Surrogate bypasses it entirely).
enum class Engine { Float, Fqnn, Sqnn, Surrogate };

std::string_view to_string(Activation a) noexcept;
std::string_view to_string(Engine e) noexcept;
Activation parse_activation(std::string_view s);
Engine parse_engine(std::string_view s);

/// Affine maps between physical quantities and network units.
///   inputs : ((r - r0) / bond_scale, (r' - r0) / bond_scale, (theta - theta0) / angle_scale)
///   outputs: force [eV/A] = output * force_scale
struct FeatureScaling {
  double r0 = 0.969;            // A
  double theta0_deg = 104.88;   // degrees
  double bond_scale = 0.3;      // A per unit
  double angle_scale_deg = 30;  // degrees per unit
  double force_scale = 1.0;     // eV/A per unit

  friend bool operator==(const FeatureScaling&, const FeatureScaling&) = default;
};

/// One fully connected layer; weights are row-major [out][in].
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> biases;
  std::vector<quant::ShiftWeight> quant_weights;  // empty until quantized
  std::vector<fxp::FxValue> fx_biases;            // datapath biases, empty until quantized

  double w(int j, int k) const { return weights[static_cast<std::size_t>(j) * in + k]; }
  double& w(int j, int k) { return weights[static_cast<std::size_t>(j) * in + k]; }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct MlpModel {
  std::vector<int> layer_sizes;
  std::vector<Layer> layers;
  Activation activation = Activation::PhiHw;
  FeatureScaling scaling;
  quant::QuantConfig quant;

  bool quantized() const noexcept;
  /// Throws if shapes disagree with layer_sizes.
  void validate() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Zero-initialised model with the given layer sizes.
MlpModel make_model(std::vector<int> layer_sizes, Activation act = Activation::PhiHw);

/// The water chip: 3 inputs, two hidden layers of 3, 2 outputs.
inline std::vector<int> water_architecture() { return {3, 3, 3, 2}; }

/// Populate quant_weights and fx_biases from the float parameters.
void quantize_model(MlpModel& model, const quant::QuantConfig& cfg);

double phi_ref(double x) noexcept;
/// Derivative of phi_ref; 0 outside (-2, 2).
double phi_ref_grad(double x) noexcept;

/// Activation unit: clamp at +-2, otherwise x - ((x*|x|) >> frac) >> 2.
fxp::FxValue phi_fx(fxp::FxValue x) noexcept;

double activate(Activation a, double x) noexcept;

std::vector<double> forward_float(const MlpModel& model, std::span<const double> input);

/// Shift-accumulate datapath (MU/SU/AU). Inputs must be in fxp::kDatapath.
std::vector<fxp::FxValue> forward_sqnn(const MlpModel& model, std::span<const fxp::FxValue> input);

/// 16-bit multiply-accumulate baseline. Inputs must be in fxp::kBaseline16.
std::vector<fxp::FxValue> forward_fqnn(const MlpModel& model, std::span<const fxp::FxValue> input);

/// Run any network engine on real-valued inputs: encode, evaluate, decode.
std::vector<double> forward(const MlpModel& model, Engine engine, std::span<const double> input);

// Model file (JSON, tagged with kModelFormat). Serialization is deterministic.
inline constexpr std::string_view kModelFormat = "shiftmd-model/1";
std::string serialize_model(const MlpModel& model);
MlpModel deserialize_model(std::string_view text);
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace shiftmd::net
