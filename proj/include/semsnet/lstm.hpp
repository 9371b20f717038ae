#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "semsnet/optim.hpp"
#include "semsnet/rng.hpp"
#include "semsnet/session_data.hpp"

namespace semsnet {

enum class Mode { kTrain, kInfer };

/// Gate blocks are stacked in this order in W, U and b.
enum class Gate : int { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

struct LSTMLayerParams {
  Eigen::MatrixXd W;  // 4H x I
  Eigen::MatrixXd U;  // 4H x H
  Eigen::VectorXd b;  // 4H

  Eigen::Index hidden_size() const { return U.cols(); }
  Eigen::Index input_size() const { return W.cols(); }

  auto gate_W(Gate g) { return W.middleRows(static_cast<int>(g) * hidden_size(), hidden_size()); }
  auto gate_U(Gate g) { return U.middleRows(static_cast<int>(g) * hidden_size(), hidden_size()); }
  auto gate_b(Gate g) { return b.segment(static_cast<int>(g) * hidden_size(), hidden_size()); }

  static LSTMLayerParams zeros(Eigen::Index input_size, Eigen::Index hidden_size);

  /// Throws ConfigError unless all four gate blocks agree in shape and every
  /// entry is finite.
  void check() const;
};

struct LSTMArch {
  std::vector<int> hidden_sizes{70, 50};
  double dropout_rate = 0.2;

  void validate() const;
};

/// Stacked LSTM with inverted dropout after every layer and a one-unit
/// dense regression head on the final hidden state.
struct LSTMModel {
  std::vector<LSTMLayerParams> layers;
  double dropout_rate = 0.2;
  Eigen::VectorXd dense_w;
  double dense_b = 0.0;

  Eigen::Index input_size() const { return layers.empty() ? 0 : layers.front().input_size(); }
  LSTMArch arch() const;

  static LSTMModel zeros(const LSTMArch& arch,
                         Eigen::Index input_size = static_cast<Eigen::Index>(kNumChannels));

  /// Uniform(+-1/sqrt(fan_in)) weights per matrix, zero biases except the
  /// forget gate (+1), zero dense bias.
  static LSTMModel initialized(const LSTMArch& arch, Rng& rng,
                               Eigen::Index input_size = static_cast<Eigen::Index>(kNumChannels));

  LSTMModel zeros_like() const;

  std::vector<std::span<double>> tensors();
  void check() const;
};

struct CellState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

CellState lstm_cell_forward(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                            const Eigen::VectorXd& c_prev, const LSTMLayerParams& params);

/// Hidden and cell sequences of every layer for one window (rows = time).
struct ActivationTrace {
  std::vector<Eigen::MatrixXd> hidden;
  std::vector<Eigen::MatrixXd> cell;
  double prediction = 0.0;
};

/// Everything a batched forward pass records for backpropagation.
struct ForwardTape {
  struct Layer {
    std::vector<Eigen::MatrixXd> gates;   // T entries, 4H x B, post-activation
    std::vector<Eigen::MatrixXd> cell;    // T+1 entries, [0] is the zero state
    std::vector<Eigen::MatrixXd> hidden;  // T+1 entries, pre-dropout
    std::vector<Eigen::MatrixXd> mask;    // T entries for non-final layers in train mode
  };

  Mode mode = Mode::kInfer;
  Eigen::Index batch = 0;
  std::vector<Eigen::MatrixXd> inputs;  // T entries, I x B
  std::vector<Layer> layers;
  Eigen::MatrixXd head_mask;   // H_last x B, train mode only
  Eigen::MatrixXd head_input;  // H_last x B, after dropout
  Eigen::VectorXd predictions;
};

ForwardTape forward_batch(const LSTMModel& model, std::span<const LabeledWindow* const> batch,
                          Mode mode, Rng* rng);

struct LSTMForward {
  double prediction = 0.0;
  ActivationTrace trace;
};

/// Single-window forward. `rng` is required in train mode and ignored in
/// infer mode.
LSTMForward forward_sequence(const LabeledWindow& window, const LSTMModel& model, Mode mode,
                             Rng* rng = nullptr);

double mse_loss(std::span<const double> predictions, std::span<const double> targets);

/// Gradients of the batch-mean squared error, in a zero-initialized copy of
/// the model's shape. Requires a train-mode tape.
LSTMModel backward(const LSTMModel& model, const ForwardTape& tape,
                   std::span<const double> targets);

/// Inverted dropout on a matrix: each entry kept with probability 1 - rate
/// and scaled by 1 / (1 - rate). Returns the mask applied.
Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

std::vector<double> predict_batch(const LSTMModel& model, std::span<const LabeledWindow> windows);

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  /// NaN when no validation windows were supplied.
  double val_mse = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
};

struct LSTMTrainResult {
  LSTMModel model;
  TrainingHistory history;
};

/// Mini-batch Adam training. Each epoch runs `iterations_per_epoch` batches of
/// ceil(N / iterations) windows over a seeded shuffle. Returns the
/// parameters from the epoch with the lowest validation MSE (the final epoch
/// when `val` is empty).
LSTMTrainResult train_lstm(std::span<const LabeledWindow> train, std::span<const LabeledWindow> val,
                           const TrainConfig& cfg, const LSTMArch& arch);

}  // namespace semsnet
