// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "shiftmd/dataset.hpp"
#include "shiftmd/net.hpp"
#include "shiftmd/quant.hpp"

namespace shiftmd::train {

/// Plain minibatch SGD on the mean squared force-component error; the
/// learning rate is multiplied by lr_decay after every epoch.
struct TrainConfig {
  std::size_t epochs = 10000;
  std::size_t batch_size = 4;
  double learning_rate = 0.1;
  double lr_decay = 0.9997;
  std::uint64_t seed = 1;
  double init_scale = 1.0;  // multiplies the Glorot-uniform bound
  /// Return the parameters of the epoch with the lowest training RMSE rather
  /// than those of the last epoch.
  bool keep_best = true;

  void validate() const;
};

/// One training example: scaled features of a hydrogen and its force in the
/// local (u, w) frame divided by force_scale.
/// Schedule used for quantization-aware fine-tuning from a trained model.
TrainConfig finetune_defaults();

/// Targets of fit_scaling: the largest training deviation of each internal
/// coordinate maps to +-kFeatureRange, the largest local force component to
/// +-kForceRange.
inline constexpr double kFeatureRange = 1.0;
inline constexpr double kForceRange = 0.5;

struct Sample {
  std::array<double, 3> x{};
  std::array<double, 2> y{};
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_rmse = 0.0;  // meV/A, hydrogen local components
  double test_rmse = 0.0;
};

struct TrainResult {
  net::MlpModel model;
  std::vector<EpochRecord> history;
};

/// Scaling fitted to the training frames (see kFeatureRange, kForceRange).
net::FeatureScaling fit_scaling(std::span<const dataset::Frame> frames, double r0 = 0.969, double theta0_deg = 104.88);

std::vector<Sample> make_samples(std::span<const dataset::Frame> frames, const net::FeatureScaling& scaling);

/// Per-layer parameter gradients, laid out like the model's layers.
struct Gradient {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

/// Mean over samples and output components of the squared error, and its
/// gradient by backpropagation (float arithmetic, model.activation).
double loss_and_gradient(const net::MlpModel& model, std::span<const Sample> samples, Gradient* grad);

/// Trains a float model from scratch. When `scaling` is empty it is fitted
/// to the training split.
TrainResult train_cnn(const dataset::Dataset& data, std::vector<int> arch, const TrainConfig& cfg,
                      const std::optional<net::FeatureScaling>& scaling = std::nullopt);

/// Weight map applied in the forward pass; its gradient is taken as identity.
using WeightTransform = std::function<double(double)>;

/// SGD from an existing model with a straight-through weight transform.
TrainResult finetune_with(const net::MlpModel& model, const dataset::Dataset& data, const TrainConfig& cfg, const WeightTransform& transform);

/// Quantization-aware fine-tuning of a pre-trained float model; the result
/// carries quant_weights and datapath biases.
TrainResult finetune_sqnn(const net::MlpModel& model, const dataset::Dataset& data, const TrainConfig& cfg, const quant::QuantConfig& qcfg);

/// RMSE over every force component of every atom, meV/A.
double eval_force_rmse(const net::MlpModel& model, std::span<const dataset::Frame> frames, net::Engine engine,
                       const dataset::SurrogateParams& surrogate = {});

}  // namespace shiftmd::train
