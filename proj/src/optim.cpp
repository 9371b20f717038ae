#include "semsnet/optim.hpp"

#include <string>

namespace semsnet {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (iterations_per_epoch < 1) throw ConfigError("train.iterations_per_epoch must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("train.beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("train.beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("train.epsilon must be positive");
}

double adam_update(std::span<const std::span<double>> params,
                   std::span<const std::span<double>> grads, AdamState& state,
                   const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw ConfigError("adam_step: parameter/gradient/state tensor count mismatch");
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto n = params[k].size();
    if (grads[k].size() != n || static_cast<std::size_t>(state.m[k].size()) != n ||
        static_cast<std::size_t>(state.v[k].size()) != n) {
      throw ConfigError("adam_step: shape mismatch in tensor " + std::to_string(k));
    }
    for (double g : grads[k]) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (cfg.gradient_clip_norm > 0.0 && norm > cfg.gradient_clip_norm) {
    const double scale = cfg.gradient_clip_norm / norm;
    for (auto g : grads) {
      for (double& x : g) x *= scale;
    }
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k];
    auto g = grads[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      m[ii] = cfg.beta1 * m[ii] + (1.0 - cfg.beta1) * g[i];
      v[ii] = cfg.beta2 * v[ii] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[ii] / bc1;
      const double v_hat = v[ii] / bc2;
      p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
  return norm;
}

}  // namespace semsnet
