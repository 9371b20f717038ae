#include "semsnet/lstm.hpp"

#include <cmath>
#include <string>

#include "semsnet/detail/gates.hpp"
#include "semsnet/detail/training_loop.hpp"
#include "semsnet/errors.hpp"

namespace semsnet {
namespace {

std::span<double> view(Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> view(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void fill_uniform(Eigen::MatrixXd& m, double limit, Rng& rng) {
  // Row-major draw order so the values do not depend on Eigen's storage.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
  }
}

using detail::activate_gates;

}  // namespace

LSTMLayerParams LSTMLayerParams::zeros(Eigen::Index input_size, Eigen::Index hidden_size) {
  LSTMLayerParams p;
  p.W = Eigen::MatrixXd::Zero(4 * hidden_size, input_size);
  p.U = Eigen::MatrixXd::Zero(4 * hidden_size, hidden_size);
  p.b = Eigen::VectorXd::Zero(4 * hidden_size);
  return p;
}

void LSTMLayerParams::check() const {
  const Eigen::Index h = U.cols();
  if (h <= 0 || U.rows() != 4 * h || W.rows() != 4 * h || b.size() != 4 * h) {
    throw ConfigError("LSTM layer: gate blocks disagree in shape");
  }
  if (!W.allFinite() || !U.allFinite() || !b.allFinite()) {
    throw ConfigError("LSTM layer: non-finite parameter");
  }
}

void LSTMArch::validate() const {
  if (hidden_sizes.empty()) throw ConfigError("train.layers must list at least one layer");
  for (int h : hidden_sizes) {
    if (h <= 0) throw ConfigError("train.layers entries must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("train.dropout must lie in [0, 1)");
  }
}

LSTMArch LSTMModel::arch() const {
  LSTMArch a;
  a.hidden_sizes.clear();
  for (const auto& l : layers) a.hidden_sizes.push_back(static_cast<int>(l.hidden_size()));
  a.dropout_rate = dropout_rate;
  return a;
}

LSTMModel LSTMModel::zeros(const LSTMArch& arch, Eigen::Index input_size) {
  arch.validate();
  LSTMModel m;
  m.dropout_rate = arch.dropout_rate;
  Eigen::Index in = input_size;
  for (int h : arch.hidden_sizes) {
    m.layers.push_back(LSTMLayerParams::zeros(in, h));
    in = h;
  }
  m.dense_w = Eigen::VectorXd::Zero(in);
  m.dense_b = 0.0;
  return m;
}

LSTMModel LSTMModel::initialized(const LSTMArch& arch, Rng& rng, Eigen::Index input_size) {
  LSTMModel m = zeros(arch, input_size);
  for (auto& layer : m.layers) {
    fill_uniform(layer.W, 1.0 / std::sqrt(static_cast<double>(layer.input_size())), rng);
    fill_uniform(layer.U, 1.0 / std::sqrt(static_cast<double>(layer.hidden_size())), rng);
    layer.gate_b(Gate::kForget).setOnes();
  }
  const double limit = 1.0 / std::sqrt(static_cast<double>(m.dense_w.size()));
  for (Eigen::Index i = 0; i < m.dense_w.size(); ++i) m.dense_w[i] = rng.uniform(-limit, limit);
  return m;
}

LSTMModel LSTMModel::zeros_like() const {
  LSTMModel g;
  g.dropout_rate = dropout_rate;
  for (const auto& l : layers) g.layers.push_back(LSTMLayerParams::zeros(l.input_size(), l.hidden_size()));
  g.dense_w = Eigen::VectorXd::Zero(dense_w.size());
  g.dense_b = 0.0;
  return g;
}

std::vector<std::span<double>> LSTMModel::tensors() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.push_back(view(l.W));
    out.push_back(view(l.U));
    out.push_back(view(l.b));
  }
  out.push_back(view(dense_w));
  out.push_back({&dense_b, 1});
  return out;
}

void LSTMModel::check() const {
  if (layers.empty()) throw ConfigError("LSTM model has no layers");
  Eigen::Index in = layers.front().input_size();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].check();
    if (layers[k].input_size() != in) {
      throw ConfigError("LSTM layer " + std::to_string(k) + " input size " +
                        std::to_string(layers[k].input_size()) + " != previous hidden size " +
                        std::to_string(in));
    }
    in = layers[k].hidden_size();
  }
  if (dense_w.size() != in) throw ConfigError("dense weight length != last hidden size");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate outside [0, 1)");
  if (!dense_w.allFinite() || !std::isfinite(dense_b)) throw ConfigError("non-finite dense head");
}

CellState lstm_cell_forward(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                            const Eigen::VectorXd& c_prev, const LSTMLayerParams& params) {
  const Eigen::Index h = params.hidden_size();
  if (x.size() != params.input_size()) {
    throw ConfigError("lstm_cell_forward: input length " + std::to_string(x.size()) +
                      " != input size " + std::to_string(params.input_size()));
  }
  if (h_prev.size() != h || c_prev.size() != h) {
    throw ConfigError("lstm_cell_forward: state length != hidden size");
  }
  Eigen::MatrixXd z = params.W * x + params.U * h_prev + params.b;
  activate_gates(z, h);
  auto i = z.col(0).segment(0, h);
  auto f = z.col(0).segment(h, h);
  auto o = z.col(0).segment(2 * h, h);
  auto g = z.col(0).segment(3 * h, h);
  CellState out;
  out.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  out.h = o.cwiseProduct(out.c.array().tanh().matrix());
  return out;
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Eigen::MatrixXd mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return mask;
}

ForwardTape forward_batch(const LSTMModel& model, std::span<const LabeledWindow* const> batch,
                          Mode mode, Rng* rng) {
  if (batch.empty()) throw ConfigError("forward: empty batch");
  if (model.layers.empty()) throw ConfigError("forward: model has no layers");
  const bool dropout = mode == Mode::kTrain && model.dropout_rate > 0.0;
  if (dropout && rng == nullptr) throw ConfigError("forward: train mode needs a random source");

  const Eigen::Index steps = batch.front()->values.rows();
  const Eigen::Index input = model.input_size();
  const auto B = static_cast<Eigen::Index>(batch.size());
  for (const auto* w : batch) {
    if (w->values.rows() != steps || w->values.cols() != input || steps == 0) {
      throw ConfigError("forward: window shape " + std::to_string(w->values.rows()) + "x" +
                        std::to_string(w->values.cols()) + " does not match " +
                        std::to_string(steps) + "x" + std::to_string(input));
    }
  }

  ForwardTape tape;
  tape.mode = mode;
  tape.batch = B;
  tape.inputs.resize(static_cast<std::size_t>(steps));
  for (Eigen::Index t = 0; t < steps; ++t) {
    Eigen::MatrixXd x(input, B);
    for (Eigen::Index b = 0; b < B; ++b) x.col(b) = batch[static_cast<std::size_t>(b)]->values.row(t).transpose();
    tape.inputs[static_cast<std::size_t>(t)] = std::move(x);
  }

  tape.layers.resize(model.layers.size());
  const std::vector<Eigen::MatrixXd>* layer_in = &tape.inputs;
  std::vector<Eigen::MatrixXd> dropped;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const auto& p = model.layers[k];
    auto& lt = tape.layers[k];
    const Eigen::Index H = p.hidden_size();
    const bool last = k + 1 == model.layers.size();
    lt.gates.reserve(static_cast<std::size_t>(steps));
    lt.cell.assign(1, Eigen::MatrixXd::Zero(H, B));
    lt.hidden.assign(1, Eigen::MatrixXd::Zero(H, B));
    for (Eigen::Index t = 0; t < steps; ++t) {
      const auto& x = (*layer_in)[static_cast<std::size_t>(t)];
      Eigen::MatrixXd z = p.W * x;
      z.noalias() += p.U * lt.hidden.back();
      z.colwise() += p.b;
      activate_gates(z, H);
      Eigen::MatrixXd c = z.middleRows(H, H).cwiseProduct(lt.cell.back()) +
                          z.topRows(H).cwiseProduct(z.bottomRows(H));
      Eigen::MatrixXd h = z.middleRows(2 * H, H).cwiseProduct(c.array().tanh().matrix());
      lt.gates.push_back(std::move(z));
      lt.cell.push_back(std::move(c));
      lt.hidden.push_back(std::move(h));
    }
    if (!last) {
      std::vector<Eigen::MatrixXd> next(static_cast<std::size_t>(steps));
      for (Eigen::Index t = 0; t < steps; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        if (dropout) {
          lt.mask.push_back(dropout_mask(H, B, model.dropout_rate, *rng));
          next[ts] = lt.hidden[ts + 1].cwiseProduct(lt.mask.back());
        } else {
          next[ts] = lt.hidden[ts + 1];
        }
      }
      dropped = std::move(next);
      layer_in = &dropped;
    }
  }

  const Eigen::MatrixXd& h_last = tape.layers.back().hidden.back();
  if (dropout) {
    tape.head_mask = dropout_mask(h_last.rows(), B, model.dropout_rate, *rng);
    tape.head_input = h_last.cwiseProduct(tape.head_mask);
  } else {
    tape.head_input = h_last;
  }
  tape.predictions = (model.dense_w.transpose() * tape.head_input).transpose();
  tape.predictions.array() += model.dense_b;
  return tape;
}

LSTMForward forward_sequence(const LabeledWindow& window, const LSTMModel& model, Mode mode,
                             Rng* rng) {
  const LabeledWindow* ptr = &window;
  ForwardTape tape = forward_batch(model, std::span<const LabeledWindow* const>(&ptr, 1), mode, rng);
  LSTMForward out;
  out.prediction = tape.predictions[0];
  out.trace.prediction = out.prediction;
  const auto steps = static_cast<Eigen::Index>(tape.inputs.size());
  for (const auto& lt : tape.layers) {
    const Eigen::Index H = lt.hidden.front().rows();
    Eigen::MatrixXd hs(steps, H);
    Eigen::MatrixXd cs(steps, H);
    for (Eigen::Index t = 0; t < steps; ++t) {
      hs.row(t) = lt.hidden[static_cast<std::size_t>(t + 1)].col(0).transpose();
      cs.row(t) = lt.cell[static_cast<std::size_t>(t + 1)].col(0).transpose();
    }
    out.trace.hidden.push_back(std::move(hs));
    out.trace.cell.push_back(std::move(cs));
  }
  return out;
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty() || predictions.size() != targets.size()) {
    throw ConfigError("mse_loss: inputs must be non-empty and equally long");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    s += d * d;
  }
  return s / static_cast<double>(predictions.size());
}

LSTMModel backward(const LSTMModel& model, const ForwardTape& tape, std::span<const double> targets) {
  if (tape.mode != Mode::kTrain) throw ConfigError("backward: tape was not recorded in train mode");
  if (tape.layers.size() != model.layers.size() || tape.inputs.empty()) {
    throw ConfigError("backward: tape does not match model");
  }
  const Eigen::Index B = tape.batch;
  if (static_cast<Eigen::Index>(targets.size()) != B) {
    throw ConfigError("backward: target count != batch size");
  }
  const bool dropout = model.dropout_rate > 0.0;
  if (dropout && tape.head_mask.size() == 0) throw ConfigError("backward: dropout masks missing");

  LSTMModel grads = model.zeros_like();
  const auto steps = tape.inputs.size();

  Eigen::RowVectorXd dpred(B);
  for (Eigen::Index b = 0; b < B; ++b) {
    dpred[b] = 2.0 * (tape.predictions[b] - targets[static_cast<std::size_t>(b)]) / static_cast<double>(B);
  }
  grads.dense_w = tape.head_input * dpred.transpose();
  grads.dense_b = dpred.sum();

  // External gradient on each layer's (pre-dropout) hidden output, per step.
  std::vector<Eigen::MatrixXd> dh_ext(steps);
  {
    Eigen::MatrixXd d = model.dense_w * dpred;
    if (dropout) d = d.cwiseProduct(tape.head_mask);
    const Eigen::Index H = d.rows();
    for (auto& m : dh_ext) m = Eigen::MatrixXd::Zero(H, B);
    dh_ext.back() = std::move(d);
  }

  for (std::size_t kk = model.layers.size(); kk-- > 0;) {
    const auto& p = model.layers[kk];
    const auto& lt = tape.layers[kk];
    auto& g = grads.layers[kk];
    const Eigen::Index H = p.hidden_size();
    if (kk + 1 < model.layers.size() && dropout && lt.mask.size() != steps) {
      throw ConfigError("backward: dropout masks missing");
    }

    Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(H, B);
    Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(H, B);
    std::vector<Eigen::MatrixXd> dx(kk > 0 ? steps : 0);
    Eigen::MatrixXd dz(4 * H, B);

    for (std::size_t t = steps; t-- > 0;) {
      const auto& gates = lt.gates[t];
      const auto i = gates.topRows(H).array();
      const auto f = gates.middleRows(H, H).array();
      const auto o = gates.middleRows(2 * H, H).array();
      const auto gg = gates.bottomRows(H).array();
      const Eigen::ArrayXXd tc = lt.cell[t + 1].array().tanh();

      const Eigen::ArrayXXd dh = (dh_ext[t] + dh_next).array();
      const Eigen::ArrayXXd dc = dc_next.array() + dh * o * (1.0 - tc * tc);

      dz.topRows(H) = (dc * gg * i * (1.0 - i)).matrix();
      dz.middleRows(H, H) = (dc * lt.cell[t].array() * f * (1.0 - f)).matrix();
      dz.middleRows(2 * H, H) = (dh * tc * o * (1.0 - o)).matrix();
      dz.bottomRows(H) = (dc * i * (1.0 - gg * gg)).matrix();

      dc_next = (dc * f).matrix();

      const Eigen::MatrixXd* x_in;
      Eigen::MatrixXd x_dropped;
      if (kk == 0) {
        x_in = &tape.inputs[t];
      } else {
        const auto& below = tape.layers[kk - 1];
        if (dropout) {
          x_dropped = below.hidden[t + 1].cwiseProduct(below.mask[t]);
          x_in = &x_dropped;
        } else {
          x_in = &below.hidden[t + 1];
        }
      }
      g.W.noalias() += dz * x_in->transpose();
      g.U.noalias() += dz * lt.hidden[t].transpose();
      g.b += dz.rowwise().sum();
      dh_next.noalias() = p.U.transpose() * dz;
      if (kk > 0) {
        Eigen::MatrixXd d = p.W.transpose() * dz;
        if (dropout) d = d.cwiseProduct(tape.layers[kk - 1].mask[t]);
        dx[t] = std::move(d);
      }
    }
    if (kk > 0) dh_ext = std::move(dx);
  }
  return grads;
}

std::vector<double> predict_batch(const LSTMModel& model, std::span<const LabeledWindow> windows) {
  constexpr std::size_t kChunk = 64;
  std::vector<double> out;
  out.reserve(windows.size());
  std::vector<const LabeledWindow*> ptrs;
  for (std::size_t lo = 0; lo < windows.size(); lo += kChunk) {
    const std::size_t hi = std::min(windows.size(), lo + kChunk);
    ptrs.clear();
    for (std::size_t k = lo; k < hi; ++k) ptrs.push_back(&windows[k]);
    ForwardTape tape = forward_batch(model, ptrs, Mode::kInfer, nullptr);
    for (Eigen::Index b = 0; b < tape.predictions.size(); ++b) out.push_back(tape.predictions[b]);
  }
  return out;
}

LSTMTrainResult train_lstm(std::span<const LabeledWindow> train, std::span<const LabeledWindow> val,
                           const TrainConfig& cfg, const LSTMArch& arch) {
  if (train.empty()) throw TrainingError("train_lstm: empty training set");
  arch.validate();
  cfg.validate();
  Rng init_rng(derive_seed(cfg.rng_seed, "lstm.init"));
  LSTMTrainResult result{LSTMModel::initialized(arch, init_rng,
                                                train.front().values.cols()),
                         {}};
  if (cfg.init_bias_to_target_mean) result.model.dense_b = detail::mean_target(train);

  auto grad_fn = [](const LSTMModel& m, std::span<const LabeledWindow* const> batch, Rng& rng) {
    ForwardTape tape = forward_batch(m, batch, Mode::kTrain, &rng);
    std::vector<double> targets;
    targets.reserve(batch.size());
    for (const auto* w : batch) targets.push_back(w->sems_label);
    std::vector<double> preds(tape.predictions.data(), tape.predictions.data() + tape.predictions.size());
    double loss = mse_loss(preds, targets);
    return std::pair<double, LSTMModel>(loss, backward(m, tape, targets));
  };
  auto eval_fn = [](const LSTMModel& m, std::span<const LabeledWindow> ws) {
    auto preds = predict_batch(m, ws);
    std::vector<double> targets;
    targets.reserve(ws.size());
    for (const auto& w : ws) targets.push_back(w.sems_label);
    return mse_loss(preds, targets);
  };
  result.history = detail::run_training(result.model, train, val, cfg, grad_fn, eval_fn);
  return result;
}

}  // namespace semsnet
