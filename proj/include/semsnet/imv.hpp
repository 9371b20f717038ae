#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semsnet/lstm.hpp"
#include "semsnet/optim.hpp"
#include "semsnet/rng.hpp"
#include "semsnet/session_data.hpp"

namespace semsnet {

struct IMVArch {
  /// Hidden units per input variable.
  int segment_size = 8;

  void validate() const;
};

/// Everything owned by one input variable v.
///
/// h_t = LSTM(x_t^v, h_{t-1})                 (scalar input, d hidden units)
/// e_t = attn . h_t,  alpha = softmax_t(e)
/// g   = sum_t alpha_t h_t,  z = [g; h_n]
/// mu  = expert_w . z + expert_b
/// s   = mix_w . z + mix_b
struct IMVBlock {
  LSTMLayerParams cell;
  Eigen::VectorXd attn;      // d
  Eigen::VectorXd expert_w;  // 2d
  double expert_b = 0.0;
  Eigen::VectorXd mix_w;     // 2d
  double mix_b = 0.0;
};

/// Variable-wise LSTM with temporal attention per variable and a softmax
/// mixture over per-variable experts: prediction = sum_v p_v mu_v with
/// p = softmax_v(s_v). Block v reads only input channel v.
struct IMVModel {
  std::vector<IMVBlock> blocks;

  Eigen::Index num_variables() const { return static_cast<Eigen::Index>(blocks.size()); }
  Eigen::Index segment_size() const { return blocks.empty() ? 0 : blocks.front().cell.hidden_size(); }

  static IMVModel zeros(const IMVArch& arch,
                        Eigen::Index num_variables = static_cast<Eigen::Index>(kNumChannels));
  static IMVModel initialized(const IMVArch& arch, Rng& rng,
                              Eigen::Index num_variables = static_cast<Eigen::Index>(kNumChannels));
  IMVModel zeros_like() const;

  std::vector<std::span<double>> tensors();
  void check() const;
};

/// Batched forward record; column b of every matrix belongs to window b.
struct IMVTape {
  struct Block {
    std::vector<Eigen::MatrixXd> gates;   // T entries, 4d x B
    std::vector<Eigen::MatrixXd> cell;    // T+1 entries
    std::vector<Eigen::MatrixXd> hidden;  // T+1 entries
    Eigen::MatrixXd alpha;                // T x B
    Eigen::MatrixXd z;                    // 2d x B
    Eigen::RowVectorXd mu;
    Eigen::RowVectorXd score;
  };

  Eigen::Index batch = 0;
  Eigen::Index steps = 0;
  Eigen::MatrixXd inputs;  // inputs(t * V + v, b) = x_t^v of window b
  std::vector<Block> blocks;
  Eigen::MatrixXd mixture;  // V x B
  Eigen::VectorXd predictions;
};

IMVTape imv_forward_batch(const IMVModel& model, std::span<const LabeledWindow* const> batch);

/// Gradients of the batch-mean squared error of the mixture prediction.
IMVModel imv_backward(const IMVModel& model, const IMVTape& tape, std::span<const double> targets);

struct IMVForward {
  double prediction = 0.0;
  Eigen::VectorXd mixture;   // V, sums to 1
  Eigen::MatrixXd temporal;  // n x V, each column sums to 1
  Eigen::VectorXd experts;   // V per-variable predictions mu_v
  std::vector<Eigen::MatrixXd> hidden;  // per variable, n x d
};

IMVForward imv_forward(const LabeledWindow& window, const IMVModel& model);

std::vector<double> imv_predict_batch(const IMVModel& model, std::span<const LabeledWindow> windows);

struct IMVTrainResult {
  IMVModel model;
  TrainingHistory history;
};

/// Same schedule, optimizer and model-selection rule as train_lstm.
IMVTrainResult train_imv(std::span<const LabeledWindow> train, std::span<const LabeledWindow> val,
                         const TrainConfig& cfg, const IMVArch& arch = {});

struct ImportanceReport {
  /// Mean mixture probability per variable.
  Eigen::VectorXd overall;
  /// Mean temporal attention, n x V.
  Eigen::MatrixXd per_timestep;
  /// Variable indices by descending overall importance (ties keep index order).
  std::vector<int> ranking;
};

ImportanceReport importance_report(const IMVModel& model, std::span<const LabeledWindow> windows);

/// `channel,score` rows in channel order.
std::string overall_csv(const ImportanceReport& report);
/// `t,<channel>...` rows, one per timestep.
std::string per_timestep_csv(const ImportanceReport& report);

}  // namespace semsnet
