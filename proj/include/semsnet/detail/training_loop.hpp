#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "semsnet/errors.hpp"
#include "semsnet/lstm.hpp"
#include "semsnet/optim.hpp"
#include "semsnet/rng.hpp"

namespace semsnet::detail {

inline double mean_target(std::span<const LabeledWindow> windows) {
  double s = 0.0;
  for (const auto& w : windows) s += w.sems_label;
  return s / static_cast<double>(windows.size());
}

/// Shared epoch/iteration schedule for every model trained with TrainConfig.
///
/// grad_fn(const Model&, std::span<const LabeledWindow* const>, Rng&)
///   -> std::pair<double loss, Model grads>
/// eval_fn(const Model&, std::span<const LabeledWindow>) -> double mse
template <ParamSet Model, typename GradFn, typename EvalFn>
TrainingHistory run_training(Model& model, std::span<const LabeledWindow> train,
                             std::span<const LabeledWindow> val, const TrainConfig& cfg,
                             GradFn&& grad_fn, EvalFn&& eval_fn) {
  if (train.empty()) throw TrainingError("empty training set");
  cfg.validate();

  Rng shuffle_rng(derive_seed(cfg.rng_seed, "train.shuffle"));
  Rng dropout_rng(derive_seed(cfg.rng_seed, "train.dropout"));
  AdamState adam = AdamState::for_params(model);

  const std::size_t n = train.size();
  const std::size_t iters = static_cast<std::size_t>(cfg.iterations_per_epoch);
  const std::size_t batch_size = (n + iters - 1) / iters;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const LabeledWindow*> batch;

  TrainingHistory history;
  double best_val = std::numeric_limits<double>::infinity();
  Model best = model;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t it = 0; it < iters; ++it) {
      const std::size_t lo = it * batch_size;
      if (lo >= n) break;
      const std::size_t hi = std::min(n, lo + batch_size);
      batch.clear();
      for (std::size_t k = lo; k < hi; ++k) batch.push_back(&train[order[k]]);
      auto [loss, grads] = grad_fn(std::as_const(model), std::span<const LabeledWindow* const>(batch),
                                   dropout_rng);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch + 1));
      }
      adam_step(model, grads, adam, cfg);
      loss_sum += loss * static_cast<double>(hi - lo);
      seen += hi - lo;
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_mse = loss_sum / static_cast<double>(seen);
    rec.val_mse = val.empty() ? std::numeric_limits<double>::quiet_NaN() : eval_fn(std::as_const(model), val);
    history.epochs.push_back(rec);
    if (!val.empty() && rec.val_mse < best_val) {
      best_val = rec.val_mse;
      best = model;
      history.best_epoch = rec.epoch;
    }
  }
  if (val.empty()) {
    history.best_epoch = cfg.epochs;
  } else {
    model = std::move(best);
  }
  return history;
}

}  // namespace semsnet::detail
