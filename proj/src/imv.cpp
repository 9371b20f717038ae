#include "semsnet/imv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "semsnet/detail/gates.hpp"
#include "semsnet/detail/training_loop.hpp"
#include "semsnet/errors.hpp"

namespace semsnet {
namespace {

using detail::activate_gates;
using detail::softmax_cols;

std::span<double> view(Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> view(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void fill_uniform(Eigen::MatrixXd& m, double limit, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
  }
}
void fill_uniform(Eigen::VectorXd& v, double limit, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-limit, limit);
}

}  // namespace

void IMVArch::validate() const {
  if (segment_size < 1) throw ConfigError("imv.segment_size must be positive");
}

IMVModel IMVModel::zeros(const IMVArch& arch, Eigen::Index num_variables) {
  arch.validate();
  if (num_variables < 1) throw ConfigError("imv: need at least one variable");
  const Eigen::Index d = arch.segment_size;
  IMVModel m;
  m.blocks.resize(static_cast<std::size_t>(num_variables));
  for (auto& blk : m.blocks) {
    blk.cell = LSTMLayerParams::zeros(1, d);
    blk.attn = Eigen::VectorXd::Zero(d);
    blk.expert_w = Eigen::VectorXd::Zero(2 * d);
    blk.mix_w = Eigen::VectorXd::Zero(2 * d);
  }
  return m;
}

IMVModel IMVModel::initialized(const IMVArch& arch, Rng& rng, Eigen::Index num_variables) {
  IMVModel m = zeros(arch, num_variables);
  const double d = static_cast<double>(arch.segment_size);
  for (auto& blk : m.blocks) {
    fill_uniform(blk.cell.W, 1.0, rng);
    fill_uniform(blk.cell.U, 1.0 / std::sqrt(d), rng);
    blk.cell.gate_b(Gate::kForget).setOnes();
    fill_uniform(blk.attn, 1.0 / std::sqrt(d), rng);
    fill_uniform(blk.expert_w, 1.0 / std::sqrt(2.0 * d), rng);
    fill_uniform(blk.mix_w, 1.0 / std::sqrt(2.0 * d), rng);
  }
  return m;
}

IMVModel IMVModel::zeros_like() const {
  IMVArch arch;
  arch.segment_size = static_cast<int>(segment_size());
  return zeros(arch, num_variables());
}

std::vector<std::span<double>> IMVModel::tensors() {
  std::vector<std::span<double>> out;
  for (auto& blk : blocks) {
    out.push_back(view(blk.cell.W));
    out.push_back(view(blk.cell.U));
    out.push_back(view(blk.cell.b));
    out.push_back(view(blk.attn));
    out.push_back(view(blk.expert_w));
    out.push_back({&blk.expert_b, 1});
    out.push_back(view(blk.mix_w));
    out.push_back({&blk.mix_b, 1});
  }
  return out;
}

void IMVModel::check() const {
  if (blocks.empty()) throw ConfigError("IMV model has no variable blocks");
  const Eigen::Index d = segment_size();
  for (std::size_t v = 0; v < blocks.size(); ++v) {
    const auto& blk = blocks[v];
    blk.cell.check();
    if (blk.cell.input_size() != 1 || blk.cell.hidden_size() != d || blk.attn.size() != d ||
        blk.expert_w.size() != 2 * d || blk.mix_w.size() != 2 * d) {
      throw ConfigError("IMV block " + std::to_string(v) + " has inconsistent shapes");
    }
    if (!blk.attn.allFinite() || !blk.expert_w.allFinite() || !blk.mix_w.allFinite() ||
        !std::isfinite(blk.expert_b) || !std::isfinite(blk.mix_b)) {
      throw ConfigError("IMV block " + std::to_string(v) + " has non-finite parameters");
    }
  }
}

IMVTape imv_forward_batch(const IMVModel& model, std::span<const LabeledWindow* const> batch) {
  if (batch.empty()) throw ConfigError("imv_forward: empty batch");
  if (model.blocks.empty()) throw ConfigError("imv_forward: model has no variable blocks");
  const Eigen::Index V = model.num_variables();
  const Eigen::Index d = model.segment_size();
  const Eigen::Index T = batch.front()->values.rows();
  const auto B = static_cast<Eigen::Index>(batch.size());
  for (const auto* w : batch) {
    if (w->values.rows() != T || w->values.cols() != V || T == 0) {
      throw ConfigError("imv_forward: window shape " + std::to_string(w->values.rows()) + "x" +
                        std::to_string(w->values.cols()) + " does not match " + std::to_string(T) +
                        "x" + std::to_string(V));
    }
  }

  IMVTape tape;
  tape.batch = B;
  tape.steps = T;
  tape.inputs.resize(T * V, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& x = batch[static_cast<std::size_t>(b)]->values;
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index v = 0; v < V; ++v) tape.inputs(t * V + v, b) = x(t, v);
    }
  }

  tape.blocks.resize(static_cast<std::size_t>(V));
  Eigen::MatrixXd scores(V, B);
  for (Eigen::Index v = 0; v < V; ++v) {
    const auto& p = model.blocks[static_cast<std::size_t>(v)];
    auto& bt = tape.blocks[static_cast<std::size_t>(v)];
    bt.gates.reserve(static_cast<std::size_t>(T));
    bt.cell.assign(1, Eigen::MatrixXd::Zero(d, B));
    bt.hidden.assign(1, Eigen::MatrixXd::Zero(d, B));
    Eigen::MatrixXd logits(T, B);
    for (Eigen::Index t = 0; t < T; ++t) {
      Eigen::MatrixXd z = p.cell.W * tape.inputs.row(t * V + v);
      z.noalias() += p.cell.U * bt.hidden.back();
      z.colwise() += p.cell.b;
      activate_gates(z, d);
      Eigen::MatrixXd c = z.middleRows(d, d).cwiseProduct(bt.cell.back()) +
                          z.topRows(d).cwiseProduct(z.bottomRows(d));
      Eigen::MatrixXd h = z.middleRows(2 * d, d).cwiseProduct(c.array().tanh().matrix());
      logits.row(t) = p.attn.transpose() * h;
      bt.gates.push_back(std::move(z));
      bt.cell.push_back(std::move(c));
      bt.hidden.push_back(std::move(h));
    }
    bt.alpha = softmax_cols(logits);
    bt.z = Eigen::MatrixXd::Zero(2 * d, B);
    for (Eigen::Index t = 0; t < T; ++t) {
      bt.z.topRows(d) += bt.hidden[static_cast<std::size_t>(t + 1)] * bt.alpha.row(t).asDiagonal();
    }
    bt.z.bottomRows(d) = bt.hidden.back();
    bt.mu = p.expert_w.transpose() * bt.z;
    bt.mu.array() += p.expert_b;
    bt.score = p.mix_w.transpose() * bt.z;
    bt.score.array() += p.mix_b;
    scores.row(v) = bt.score;
  }
  tape.mixture = softmax_cols(scores);
  tape.predictions = Eigen::VectorXd::Zero(B);
  for (Eigen::Index v = 0; v < V; ++v) {
    tape.predictions += tape.mixture.row(v).cwiseProduct(tape.blocks[static_cast<std::size_t>(v)].mu).transpose();
  }
  return tape;
}

IMVModel imv_backward(const IMVModel& model, const IMVTape& tape, std::span<const double> targets) {
  const Eigen::Index V = model.num_variables();
  const Eigen::Index d = model.segment_size();
  const Eigen::Index B = tape.batch;
  const Eigen::Index T = tape.steps;
  if (static_cast<Eigen::Index>(tape.blocks.size()) != V || T == 0) {
    throw ConfigError("imv_backward: tape does not match model");
  }
  if (static_cast<Eigen::Index>(targets.size()) != B) {
    throw ConfigError("imv_backward: target count != batch size");
  }

  IMVModel grads = model.zeros_like();
  Eigen::RowVectorXd dpred(B);
  for (Eigen::Index b = 0; b < B; ++b) {
    dpred[b] = 2.0 * (tape.predictions[b] - targets[static_cast<std::size_t>(b)]) / static_cast<double>(B);
  }

  for (Eigen::Index v = 0; v < V; ++v) {
    const auto& p = model.blocks[static_cast<std::size_t>(v)];
    const auto& bt = tape.blocks[static_cast<std::size_t>(v)];
    auto& g = grads.blocks[static_cast<std::size_t>(v)];

    const Eigen::RowVectorXd pv = tape.mixture.row(v);
    const Eigen::RowVectorXd dmu = dpred.cwiseProduct(pv);
    Eigen::RowVectorXd dscore(B);
    for (Eigen::Index b = 0; b < B; ++b) dscore[b] = dmu[b] * (bt.mu[b] - tape.predictions[b]);

    g.expert_w = bt.z * dmu.transpose();
    g.expert_b = dmu.sum();
    g.mix_w = bt.z * dscore.transpose();
    g.mix_b = dscore.sum();
    const Eigen::MatrixXd dz = p.expert_w * dmu + p.mix_w * dscore;  // 2d x B
    const auto dctx = dz.topRows(d);

    // Attention: g = sum_t alpha_t h_t, alpha = softmax(attn . h_t).
    Eigen::MatrixXd dalpha(T, B);
    for (Eigen::Index t = 0; t < T; ++t) {
      dalpha.row(t) = bt.hidden[static_cast<std::size_t>(t + 1)].cwiseProduct(dctx).colwise().sum();
    }
    Eigen::MatrixXd dlogit(T, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const double centre = bt.alpha.col(b).dot(dalpha.col(b));
      dlogit.col(b) = bt.alpha.col(b).cwiseProduct((dalpha.col(b).array() - centre).matrix());
    }

    Eigen::MatrixXd dh_next = dz.bottomRows(d);
    Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(d, B);
    Eigen::MatrixXd dgate(4 * d, B);
    for (Eigen::Index tt = T; tt-- > 0;) {
      const auto t = static_cast<std::size_t>(tt);
      const auto& h = bt.hidden[t + 1];
      g.attn += h * dlogit.row(tt).transpose();
      Eigen::MatrixXd dh = dh_next + dctx * bt.alpha.row(tt).asDiagonal();
      dh.noalias() += p.attn * dlogit.row(tt);

      const auto& gates = bt.gates[t];
      const auto i = gates.topRows(d).array();
      const auto f = gates.middleRows(d, d).array();
      const auto o = gates.middleRows(2 * d, d).array();
      const auto gg = gates.bottomRows(d).array();
      const Eigen::ArrayXXd tc = bt.cell[t + 1].array().tanh();
      const Eigen::ArrayXXd dc = dc_next.array() + dh.array() * o * (1.0 - tc * tc);

      dgate.topRows(d) = (dc * gg * i * (1.0 - i)).matrix();
      dgate.middleRows(d, d) = (dc * bt.cell[t].array() * f * (1.0 - f)).matrix();
      dgate.middleRows(2 * d, d) = (dh.array() * tc * o * (1.0 - o)).matrix();
      dgate.bottomRows(d) = (dc * i * (1.0 - gg * gg)).matrix();
      dc_next = (dc * f).matrix();

      g.cell.W.noalias() += dgate * tape.inputs.row(tt * V + v).transpose();
      g.cell.U.noalias() += dgate * bt.hidden[t].transpose();
      g.cell.b += dgate.rowwise().sum();
      dh_next.noalias() = p.cell.U.transpose() * dgate;
    }
  }
  return grads;
}

IMVForward imv_forward(const LabeledWindow& window, const IMVModel& model) {
  const LabeledWindow* ptr = &window;
  IMVTape tape = imv_forward_batch(model, std::span<const LabeledWindow* const>(&ptr, 1));
  const Eigen::Index V = model.num_variables();
  const Eigen::Index T = tape.steps;
  IMVForward out;
  out.prediction = tape.predictions[0];
  out.mixture = tape.mixture.col(0);
  out.temporal.resize(T, V);
  out.experts.resize(V);
  for (Eigen::Index v = 0; v < V; ++v) {
    const auto& bt = tape.blocks[static_cast<std::size_t>(v)];
    out.temporal.col(v) = bt.alpha.col(0);
    out.experts[v] = bt.mu[0];
    Eigen::MatrixXd hs(T, model.segment_size());
    for (Eigen::Index t = 0; t < T; ++t) hs.row(t) = bt.hidden[static_cast<std::size_t>(t + 1)].col(0).transpose();
    out.hidden.push_back(std::move(hs));
  }
  return out;
}

std::vector<double> imv_predict_batch(const IMVModel& model, std::span<const LabeledWindow> windows) {
  constexpr std::size_t kChunk = 64;
  std::vector<double> out;
  out.reserve(windows.size());
  std::vector<const LabeledWindow*> ptrs;
  for (std::size_t lo = 0; lo < windows.size(); lo += kChunk) {
    const std::size_t hi = std::min(windows.size(), lo + kChunk);
    ptrs.clear();
    for (std::size_t k = lo; k < hi; ++k) ptrs.push_back(&windows[k]);
    IMVTape tape = imv_forward_batch(model, ptrs);
    for (Eigen::Index b = 0; b < tape.predictions.size(); ++b) out.push_back(tape.predictions[b]);
  }
  return out;
}

IMVTrainResult train_imv(std::span<const LabeledWindow> train, std::span<const LabeledWindow> val,
                         const TrainConfig& cfg, const IMVArch& arch) {
  if (train.empty()) throw TrainingError("train_imv: empty training set");
  arch.validate();
  cfg.validate();
  Rng init_rng(derive_seed(cfg.rng_seed, "imv.init"));
  IMVTrainResult result{IMVModel::initialized(arch, init_rng, train.front().values.cols()), {}};
  if (cfg.init_bias_to_target_mean) {
    const double mean = detail::mean_target(train);
    for (auto& blk : result.model.blocks) blk.expert_b = mean;
  }

  auto grad_fn = [](const IMVModel& m, std::span<const LabeledWindow* const> batch, Rng&) {
    IMVTape tape = imv_forward_batch(m, batch);
    std::vector<double> targets;
    targets.reserve(batch.size());
    for (const auto* w : batch) targets.push_back(w->sems_label);
    std::vector<double> preds(tape.predictions.data(), tape.predictions.data() + tape.predictions.size());
    const double loss = mse_loss(preds, targets);
    return std::pair<double, IMVModel>(loss, imv_backward(m, tape, targets));
  };
  auto eval_fn = [](const IMVModel& m, std::span<const LabeledWindow> ws) {
    auto preds = imv_predict_batch(m, ws);
    std::vector<double> targets;
    targets.reserve(ws.size());
    for (const auto& w : ws) targets.push_back(w.sems_label);
    return mse_loss(preds, targets);
  };
  result.history = detail::run_training(result.model, train, val, cfg, grad_fn, eval_fn);
  return result;
}

ImportanceReport importance_report(const IMVModel& model, std::span<const LabeledWindow> windows) {
  if (windows.empty()) throw DataError("importance_report: no windows");
  const Eigen::Index V = model.num_variables();
  const Eigen::Index T = windows.front().values.rows();
  ImportanceReport report;
  report.overall = Eigen::VectorXd::Zero(V);
  report.per_timestep = Eigen::MatrixXd::Zero(T, V);

  constexpr std::size_t kChunk = 64;
  std::vector<const LabeledWindow*> ptrs;
  for (std::size_t lo = 0; lo < windows.size(); lo += kChunk) {
    const std::size_t hi = std::min(windows.size(), lo + kChunk);
    ptrs.clear();
    for (std::size_t k = lo; k < hi; ++k) ptrs.push_back(&windows[k]);
    IMVTape tape = imv_forward_batch(model, ptrs);
    report.overall += tape.mixture.rowwise().sum();
    for (Eigen::Index v = 0; v < V; ++v) {
      report.per_timestep.col(v) += tape.blocks[static_cast<std::size_t>(v)].alpha.rowwise().sum();
    }
  }
  const double n = static_cast<double>(windows.size());
  report.overall /= n;
  report.per_timestep /= n;

  report.ranking.resize(static_cast<std::size_t>(V));
  std::iota(report.ranking.begin(), report.ranking.end(), 0);
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](int a, int b) { return report.overall[a] > report.overall[b]; });
  return report;
}

namespace {

std::string variable_name(Eigen::Index v, Eigen::Index num_variables) {
  if (num_variables == static_cast<Eigen::Index>(kNumChannels)) {
    return std::string(kChannelNames[static_cast<std::size_t>(v)]);
  }
  return "var" + std::to_string(v);
}

}  // namespace

std::string overall_csv(const ImportanceReport& report) {
  const Eigen::Index V = report.overall.size();
  std::string out = "channel,score\n";
  for (Eigen::Index v = 0; v < V; ++v) {
    out += variable_name(v, V) + "," + format_double(report.overall[v]) + "\n";
  }
  return out;
}

std::string per_timestep_csv(const ImportanceReport& report) {
  const Eigen::Index V = report.per_timestep.cols();
  std::string out = "t";
  for (Eigen::Index v = 0; v < V; ++v) out += "," + variable_name(v, V);
  out += "\n";
  for (Eigen::Index t = 0; t < report.per_timestep.rows(); ++t) {
    out += std::to_string(t);
    for (Eigen::Index v = 0; v < V; ++v) out += "," + format_double(report.per_timestep(t, v));
    out += "\n";
  }
  return out;
}

}  // namespace semsnet
