// Copyright 2026 The shiftmd Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftmd/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shiftmd/error.hpp"
#include "shiftmd/md.hpp"
#include "shiftmd/random.hpp"

namespace shiftmd::train {

TrainConfig finetune_defaults() {
  TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.learning_rate = 0.01;
  cfg.lr_decay = 0.998;
  return cfg;
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1) throw Error("epochs and batch_size must be positive");
  if (!(learning_rate > 0)) throw Error("learning_rate must be positive");
  if (!(lr_decay > 0)) throw Error("lr_decay must be positive");
}

net::FeatureScaling fit_scaling(std::span<const dataset::Frame> frames, double r0, double theta0_deg) {
  if (frames.empty()) throw Error("cannot fit feature scaling to an empty dataset");
  net::FeatureScaling s;
  s.r0 = r0;
  s.theta0_deg = theta0_deg;
  double max_dr = 0.0, max_dtheta = 0.0, max_f = 0.0;
  for (const auto& f : frames) {
    if (f.size() != 3) throw Error("training frames must be single water molecules (O, H, H)");
    if (!f.forces) throw Error("training frame has no force labels");
    const std::span<const Vec3, 3> pos(f.positions.data(), 3);
    const auto ic = md::internal_coordinates(pos);
    max_dr = std::max({max_dr, std::fabs(ic[0] - r0), std::fabs(ic[1] - r0)});
    max_dtheta = std::max(max_dtheta, std::fabs(ic[2] - theta0_deg));
    for (int h = 1; h <= 2; ++h) {
      const auto fv = md::extract_features(pos, h, s);
      const Vec3& force = (*f.forces)[h];
      max_f = std::max({max_f, std::fabs(dot(force, fv.u)), std::fabs(dot(force, fv.w))});
    }
  }
  s.bond_scale = std::max(max_dr, 1e-3) / kFeatureRange;
  s.angle_scale_deg = std::max(max_dtheta, 1e-2) / kFeatureRange;
  s.force_scale = std::max(max_f, 1e-3) / kForceRange;
  return s;
}

std::vector<Sample> make_samples(std::span<const dataset::Frame> frames, const net::FeatureScaling& scaling) {
  std::vector<Sample> out;
  out.reserve(frames.size() * 2);
  for (const auto& f : frames) {
    if (f.size() != 3) throw Error("training frames must be single water molecules (O, H, H)");
    if (!f.forces) throw Error("training frame has no force labels");
    const std::span<const Vec3, 3> pos(f.positions.data(), 3);
    for (int h = 1; h <= 2; ++h) {
      const auto fv = md::extract_features(pos, h, scaling);
      const Vec3& force = (*f.forces)[h];
      out.push_back(Sample{fv.values, {dot(force, fv.u) / scaling.force_scale, dot(force, fv.w) / scaling.force_scale}});
    }
  }
  return out;
}

namespace {

double activation_grad(net::Activation a, double z) {
  if (a == net::Activation::PhiHw) return net::phi_ref_grad(z);
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

Gradient zero_gradient(const net::MlpModel& m) {
  Gradient g;
  for (const auto& l : m.layers) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.biases.emplace_back(l.biases.size(), 0.0);
  }
  return g;
}

}  // namespace

double loss_and_gradient(const net::MlpModel& model, std::span<const Sample> samples, Gradient* grad) {
  if (samples.empty()) throw Error("loss over an empty sample set");
  if (model.layer_sizes.front() != 3 || model.layer_sizes.back() != 2) throw Error("force model must have 3 inputs and 2 outputs");
  if (grad) *grad = zero_gradient(model);
  const std::size_t L = model.layers.size();
  std::vector<std::vector<double>> act(L + 1), pre(L);
  std::vector<double> delta, next_delta;
  double sse = 0.0;

  for (const Sample& s : samples) {
    act[0].assign(s.x.begin(), s.x.end());
    for (std::size_t l = 0; l < L; ++l) {
      const auto& layer = model.layers[l];
      pre[l].resize(layer.out);
      act[l + 1].resize(layer.out);
      for (int j = 0; j < layer.out; ++j) {
        double z = layer.biases[j];
        for (int k = 0; k < layer.in; ++k) z += layer.w(j, k) * act[l][k];
        pre[l][j] = z;
        act[l + 1][j] = net::activate(model.activation, z);
      }
    }
    const auto& out = act[L];
    delta.assign(2, 0.0);
    for (int c = 0; c < 2; ++c) {
      const double e = out[c] - s.y[c];
      sse += e * e;
      delta[c] = e;
    }
    if (!grad) continue;
    for (std::size_t l = L; l-- > 0;) {
      const auto& layer = model.layers[l];
      for (int j = 0; j < layer.out; ++j) delta[j] *= activation_grad(model.activation, pre[l][j]);
      next_delta.assign(layer.in, 0.0);
      for (int j = 0; j < layer.out; ++j) {
        grad->biases[l][j] += delta[j];
        for (int k = 0; k < layer.in; ++k) {
          grad->weights[l][static_cast<std::size_t>(j) * layer.in + k] += delta[j] * act[l][k];
          next_delta[k] += layer.w(j, k) * delta[j];
        }
      }
      std::swap(delta, next_delta);
    }
  }

  const double n = static_cast<double>(samples.size()) * 2.0;
  if (grad) {
    // d/dp of sum(e^2)/n is 2 e de/dp / n
    for (auto& v : grad->weights) {
      for (double& g : v) g *= 2.0 / n;
    }
    for (auto& v : grad->biases) {
      for (double& g : v) g *= 2.0 / n;
    }
  }
  return sse / n;
}

namespace {

net::MlpModel transformed(const net::MlpModel& shadow, const WeightTransform& transform) {
  net::MlpModel m = shadow;
  for (auto& l : m.layers) {
    l.quant_weights.clear();
    l.fx_biases.clear();
    if (transform) {
      for (double& w : l.weights) w = transform(w);
    }
  }
  return m;
}

double rmse_mev(const net::MlpModel& m, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  return std::sqrt(loss_and_gradient(m, samples, nullptr)) * m.scaling.force_scale * 1000.0;
}

// Shared SGD loop. `transform` (may be empty) is applied to the shadow
// weights for the forward/backward pass; updates go to the shadow weights.
TrainResult sgd(net::MlpModel shadow, const dataset::Dataset& data, const TrainConfig& cfg, const WeightTransform& transform) {
  cfg.validate();
  if (data.train.empty()) throw Error("training split is empty");
  const auto train = make_samples(data.train, shadow.scaling);
  const auto test = make_samples(data.test, shadow.scaling);

  TrainResult result;
  Rng rng(cfg.seed, 0x5eed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Sample> batch;
  double lr = cfg.learning_rate;
  Gradient g;
  net::MlpModel best = shadow;
  double best_rmse = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const net::MlpModel fwd = transformed(shadow, transform);
      const double loss = loss_and_gradient(fwd, batch, &g);
      if (!std::isfinite(loss)) {
        throw Error("training diverged at epoch " + std::to_string(epoch) + " (non-finite loss); lower the learning rate");
      }
      for (std::size_t l = 0; l < shadow.layers.size(); ++l) {
        auto& layer = shadow.layers[l];
        for (std::size_t p = 0; p < layer.weights.size(); ++p) layer.weights[p] -= lr * g.weights[l][p];
        for (std::size_t p = 0; p < layer.biases.size(); ++p) layer.biases[p] -= lr * g.biases[l][p];
      }
    }
    lr *= cfg.lr_decay;
    const net::MlpModel fwd = transformed(shadow, transform);
    const EpochRecord rec{epoch, rmse_mev(fwd, train), rmse_mev(fwd, test)};
    if (!std::isfinite(rec.train_rmse)) {
      throw Error("training diverged at epoch " + std::to_string(epoch) + " (non-finite loss); lower the learning rate");
    }
    result.history.push_back(rec);
    if (rec.train_rmse < best_rmse) {
      best_rmse = rec.train_rmse;
      best = shadow;
    }
  }
  result.model = cfg.keep_best ? std::move(best) : std::move(shadow);
  return result;
}

}  // namespace

TrainResult train_cnn(const dataset::Dataset& data, std::vector<int> arch, const TrainConfig& cfg,
                      const std::optional<net::FeatureScaling>& scaling) {
  cfg.validate();
  if (data.train.empty()) throw Error("training split is empty");
  net::MlpModel model = net::make_model(std::move(arch), net::Activation::PhiHw);
  model.scaling = scaling ? *scaling : fit_scaling(data.train);

  Rng rng(cfg.seed);
  for (auto& layer : model.layers) {
    const double bound = cfg.init_scale * std::sqrt(6.0 / (layer.in + layer.out));
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
  }
  return sgd(std::move(model), data, cfg, nullptr);
}

TrainResult finetune_with(const net::MlpModel& model, const dataset::Dataset& data, const TrainConfig& cfg, const WeightTransform& transform) {
  model.validate();
  net::MlpModel shadow = model;
  for (auto& l : shadow.layers) {
    l.quant_weights.clear();
    l.fx_biases.clear();
  }
  return sgd(std::move(shadow), data, cfg, transform);
}

TrainResult finetune_sqnn(const net::MlpModel& model, const dataset::Dataset& data, const TrainConfig& cfg, const quant::QuantConfig& qcfg) {
  if (!qcfg.valid()) throw Error("invalid quantizer config");
  TrainResult r = finetune_with(model, data, cfg, [qcfg](double w) { return quant::quantize_weight(w, qcfg).value(); });
  net::quantize_model(r.model, qcfg);
  return r;
}

double eval_force_rmse(const net::MlpModel& model, std::span<const dataset::Frame> frames, net::Engine engine,
                       const dataset::SurrogateParams& surrogate) {
  if (frames.empty()) throw Error("cannot evaluate RMSE on an empty dataset");
  double sse = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    if (!f.forces) throw Error("evaluation frame has no force labels");
    if (f.size() != 3) throw Error("evaluation frames must be single water molecules (O, H, H)");
    const auto pred = md::evaluate_forces(std::span<const Vec3, 3>(f.positions.data(), 3), model, engine, surrogate);
    for (std::size_t a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) {
        const double e = pred[a][c] - (*f.forces)[a][c];
        sse += e * e;
        ++n;
      }
    }
  }
  return std::sqrt(sse / static_cast<double>(n)) * 1000.0;
}

}  // namespace shiftmd::train
