#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "semsnet/errors.hpp"

namespace semsnet {

struct TrainConfig {
  double learning_rate = 0.005;
  int epochs = 250;
  int iterations_per_epoch = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t rng_seed = 0;
  /// Global-norm clip threshold; <= 0 disables clipping.
  double gradient_clip_norm = 5.0;
  /// Start the output bias at the mean training target.
  bool init_bias_to_target_mean = true;

  void validate() const;
};

/// Parameter containers expose `tensors()` as a list of mutable flat views;
/// gradients use the same container type as the model they differentiate.
template <typename P>
concept ParamSet = requires(P& p) {
  { p.tensors() } -> std::same_as<std::vector<std::span<double>>>;
};

struct AdamState {
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;
  std::int64_t t = 0;

  template <ParamSet P>
  static AdamState for_params(P& params) {
    AdamState s;
    for (auto view : params.tensors()) {
      s.m.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(view.size())));
      s.v.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(view.size())));
    }
    return s;
  }
};

template <ParamSet P>
double global_norm(P& params) {
  double sq = 0.0;
  for (auto view : params.tensors()) {
    for (double g : view) sq += g * g;
  }
  return std::sqrt(sq);
}

/// Bias-corrected Adam on flat views. `grads` is scaled in place when
/// clipping triggers. Returns the pre-clip gradient norm.
double adam_update(std::span<const std::span<double>> params,
                   std::span<const std::span<double>> grads, AdamState& state,
                   const TrainConfig& cfg);

template <ParamSet P>
double adam_step(P& model, P& grads, AdamState& state, const TrainConfig& cfg) {
  auto p = model.tensors();
  auto g = grads.tensors();
  return adam_update(p, g, state, cfg);
}

}  // namespace semsnet
