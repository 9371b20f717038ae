#include "semsnet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "semsnet/errors.hpp"
#include "semsnet/io.hpp"
#include "semsnet/rng.hpp"

namespace semsnet {
namespace fs = std::filesystem;

namespace {

constexpr std::array<double, 3> kGridC{1.0, 10.0, 100.0};
constexpr std::array<double, 3> kGridEpsilon{0.05, 0.1, 0.5};

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

SvrInput svr_row(double lstm_score, const ChildMeta& meta) {
  return {lstm_score, meta.age_years, gender_code(meta.gender)};
}

std::vector<LabeledWindow> windows_of(std::span<const WritingSession> sessions,
                                      const PipelineConfig& cfg) {
  std::vector<LabeledWindow> out;
  out.reserve(sessions.size() * cfg.num_segments);
  for (const auto& s : sessions) {
    for (auto& w : segment_session(s, cfg.num_segments, cfg.window_len)) out.push_back(std::move(w));
  }
  return out;
}

/// Mean LSTM score per session; windows are laid out session-major.
std::vector<double> child_means(const LSTMModel& model, std::span<const LabeledWindow> normalized,
                                std::size_t per_child) {
  const auto scores = predict_batch(model, normalized);
  std::vector<double> means;
  for (std::size_t lo = 0; lo < scores.size(); lo += per_child) {
    means.push_back(mean_of(std::span<const double>(scores).subspan(lo, per_child)));
  }
  return means;
}

LevelMetrics level_metrics(std::span<const double> predicted, std::span<const double> actual,
                           const EvalConfig& eval) {
  LevelMetrics m;
  m.count = predicted.size();
  m.rmse = rmse(predicted, actual);
  m.counts = confusion(predicted, actual, eval);
  m.classification = classify_metrics(m.counts);
  return m;
}

[[noreturn]] void rethrow_with_stage(const char* stage) {
  try {
    throw;
  } catch (const TrainingError& e) {
    throw TrainingError(std::string(stage) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(stage) + ": " + e.what());
  }
}

template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  // Report the first failure in index order so errors do not depend on jobs.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::string summary_cell(const MetricSummary& s) {
  if (s.defined == 0) return "NA";
  return format_double(s.mean) + " +/- " + format_double(s.stddev);
}

std::string pct_cell(const MetricSummary& s) {
  if (s.defined == 0) return "-";
  return fmt("%.2f", 100.0 * s.mean) + " +/- " + fmt("%.2f", 100.0 * s.stddev);
}

}  // namespace

void PipelineConfig::validate() const {
  if (window_len < 1) throw ConfigError("data.window_len must be positive");
  if (num_segments < 1) throw ConfigError("data.num_segments must be positive");
  if (!(train_fraction > 0.0)) throw ConfigError("split.train_fraction must be positive");
  if (!(val_fraction > 0.0)) throw ConfigError("split.val_fraction must be positive");
  if (!(test_fraction > 0.0)) throw ConfigError("split.test_fraction must be positive");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  if (trials < 1) throw ConfigError("split.trials must be at least 1");
  eval.validate();
  train.validate();
  arch.validate();
  svr.validate();
}

void PipelineModels::check() const {
  if (lstm.layers.empty()) throw ConfigError("pipeline models are untrained (no LSTM layers)");
  lstm.check();
  if (svr.dual_coef.size() != svr.support_vectors.size()) {
    throw ConfigError("pipeline models: SVR coefficient count mismatch");
  }
}

ScorePrediction predict_sems(const WritingSession& session, const PipelineModels& models) {
  const auto& cfg = models.config;
  auto windows = segment_session(session, cfg.num_segments, cfg.window_len);
  auto normalized = normalize_all(windows, models.stats);
  ScorePrediction p;
  p.child_id = session.meta.child_id;
  p.per_window_scores = predict_batch(models.lstm, normalized);
  p.lstm_score = mean_of(p.per_window_scores);
  p.final_score = predict_svr(models.svr, svr_row(p.lstm_score, session.meta), cfg.eval.scale_max);
  return p;
}

EvaluationReport evaluate(const PipelineModels& models, std::span<const WritingSession> sessions) {
  if (sessions.empty()) throw DataError("evaluate: no sessions");
  EvaluationReport r;
  std::vector<double> window_pred, window_label, child_pred;
  for (const auto& s : sessions) {
    auto p = predict_sems(s, models);
    for (double w : p.per_window_scores) {
      window_pred.push_back(predict_svr(models.svr, svr_row(w, s.meta), models.config.eval.scale_max));
      window_label.push_back(s.sems_label);
    }
    child_pred.push_back(p.final_score);
    r.labels.push_back(s.sems_label);
    r.predictions.push_back(std::move(p));
  }
  r.window = level_metrics(window_pred, window_label, models.config.eval);
  r.child = level_metrics(child_pred, r.labels, models.config.eval);
  return r;
}

ChildSplit split_children(std::size_t n, const PipelineConfig& cfg, bool with_test,
                          std::uint64_t seed) {
  const std::size_t minimum = with_test ? 4 : 3;
  if (n < minimum) {
    throw DataError("too few children: need at least " + std::to_string(minimum) + ", got " +
                    std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::size_t n_test = 0;
  if (with_test) {
    const auto want = static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(want, 1, n - 3);
  }
  const std::size_t rest = n - n_test;
  const double val_share = cfg.val_fraction / (cfg.train_fraction + cfg.val_fraction);
  const auto want_val = static_cast<std::size_t>(std::llround(val_share * static_cast<double>(rest)));
  const std::size_t n_val = std::clamp<std::size_t>(want_val, 1, rest - 2);

  ChildSplit split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                   order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

TrainedPipeline fit_pipeline(std::span<const WritingSession> train,
                             std::span<const WritingSession> val, const PipelineConfig& cfg) {
  cfg.validate();
  if (train.size() < 2) throw DataError("fit_pipeline: need at least 2 training children");

  std::vector<LabeledWindow> train_w, val_w;
  try {
    train_w = windows_of(train, cfg);
    val_w = windows_of(val, cfg);
  } catch (...) {
    rethrow_with_stage("segmentation");
  }

  TrainedPipeline out;
  auto& models = out.models;
  models.config = cfg;
  models.stats = fit_channel_stats(train_w);
  train_w = normalize_all(train_w, models.stats);
  val_w = normalize_all(val_w, models.stats);

  try {
    auto lstm = train_lstm(train_w, val_w, cfg.train, cfg.arch);
    models.lstm = std::move(lstm.model);
    out.report.history = std::move(lstm.history);
  } catch (...) {
    rethrow_with_stage("lstm");
  }

  const auto train_means = child_means(models.lstm, train_w, cfg.num_segments);
  std::vector<SvrInput> rows;
  std::vector<double> targets;
  for (std::size_t i = 0; i < train.size(); ++i) {
    rows.push_back(svr_row(train_means[i], train[i].meta));
    targets.push_back(train[i].sems_label);
  }

  try {
    SVRHyper chosen = cfg.svr;
    if (cfg.tune_svr && !val.empty()) {
      const auto val_means = child_means(models.lstm, val_w, cfg.num_segments);
      std::vector<double> val_labels;
      for (const auto& s : val) val_labels.push_back(s.sems_label);
      double best = std::numeric_limits<double>::infinity();
      for (double c : kGridC) {
        for (double eps : kGridEpsilon) {
          SVRHyper h = cfg.svr;
          h.C = c;
          h.epsilon = eps;
          SVRModel m = fit_svr(rows, targets, h);
          std::vector<double> preds;
          for (std::size_t i = 0; i < val.size(); ++i) {
            preds.push_back(predict_svr(m, svr_row(val_means[i], val[i].meta), cfg.eval.scale_max));
          }
          const double e = rmse(preds, val_labels);
          if (e < best) {
            best = e;
            chosen = h;
          }
        }
      }
    }
    models.svr = fit_svr(rows, targets, chosen);
    out.report.chosen_svr = chosen;
  } catch (...) {
    rethrow_with_stage("svr");
  }

  for (const auto& s : train) out.report.train_ids.push_back(s.meta.child_id);
  for (const auto& s : val) out.report.val_ids.push_back(s.meta.child_id);
  if (!val.empty()) out.report.validation = evaluate(models, val);
  return out;
}

TrainedPipeline train_pipeline(std::span<const WritingSession> cohort, const PipelineConfig& cfg) {
  cfg.validate();
  const auto split = split_children(cohort.size(), cfg, false, derive_seed(cfg.rng_seed, "pipeline.split"));
  std::vector<WritingSession> train, val;
  for (auto i : split.train) train.push_back(cohort[i]);
  for (auto i : split.val) val.push_back(cohort[i]);
  PipelineConfig c = cfg;
  c.train.rng_seed = derive_seed(cfg.rng_seed, "pipeline.train");
  return fit_pipeline(train, val, c);
}

MetricSummary summarize(std::span<const std::optional<double>> values) {
  MetricSummary s;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++s.defined;
    }
  }
  if (s.defined == 0) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = sum / static_cast<double>(s.defined);
  if (s.defined > 1) {
    double sq = 0.0;
    for (const auto& v : values) {
      if (v) sq += (*v - s.mean) * (*v - s.mean);
    }
    s.stddev = std::sqrt(sq / static_cast<double>(s.defined - 1));
  }
  return s;
}

std::vector<LevelSummary> aggregate_records(std::span<const TrialRecord> records) {
  std::vector<LevelSummary> out;
  for (const char* level : {"window", "child"}) {
    std::vector<std::optional<double>> rm, acc, f1, sens, spec;
    for (const auto& r : records) {
      if (r.level != level) continue;
      rm.emplace_back(r.rmse);
      acc.push_back(r.accuracy);
      f1.push_back(r.f1);
      sens.push_back(r.sensitivity);
      spec.push_back(r.specificity);
    }
    if (rm.empty()) continue;
    out.push_back({level, summarize(rm), summarize(acc), summarize(f1), summarize(sens), summarize(spec)});
  }
  return out;
}

CVReport run_cv(std::span<const WritingSession> cohort, const PipelineConfig& cfg, int jobs) {
  cfg.validate();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  std::vector<ChildSplit> splits;
  for (std::size_t t = 0; t < trials; ++t) {
    splits.push_back(split_children(cohort.size(), cfg, true, derive_seed(cfg.rng_seed, "cv.split", t)));
  }

  std::vector<std::array<TrialRecord, 2>> rows(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const auto& split = splits[t];
    std::vector<WritingSession> train, val, test;
    for (auto i : split.train) train.push_back(cohort[i]);
    for (auto i : split.val) val.push_back(cohort[i]);
    for (auto i : split.test) test.push_back(cohort[i]);
    PipelineConfig c = cfg;
    c.train.rng_seed = derive_seed(cfg.rng_seed, "cv.trial", t);
    auto fitted = fit_pipeline(train, val, c);
    auto eval = evaluate(fitted.models, test);
    const int trial = static_cast<int>(t) + 1;
    auto record = [trial](const char* level, const LevelMetrics& m) {
      const auto& c = m.classification;
      return TrialRecord{trial, level, m.rmse, c.accuracy, c.f1, c.sensitivity, c.specificity};
    };
    rows[t] = {record("window", eval.window), record("child", eval.child)};
  });

  CVReport report;
  for (const auto& pair : rows) {
    report.records.push_back(pair[0]);
    report.records.push_back(pair[1]);
  }
  report.aggregate = aggregate_records(report.records);
  for (const auto& split : splits) {
    TrialSplit ts;
    for (auto i : split.train) ts.train_ids.push_back(cohort[i].meta.child_id);
    for (auto i : split.val) ts.val_ids.push_back(cohort[i].meta.child_id);
    for (auto i : split.test) ts.test_ids.push_back(cohort[i].meta.child_id);
    report.splits.push_back(std::move(ts));
  }
  return report;
}

void audit_splits(const CVReport& report) {
  for (std::size_t t = 0; t < report.splits.size(); ++t) {
    const auto& s = report.splits[t];
    std::set<std::string> seen;
    for (const auto* side : {&s.train_ids, &s.val_ids, &s.test_ids}) {
      for (const auto& id : *side) {
        if (!seen.insert(id).second) {
          throw DataError("trial " + std::to_string(t + 1) + ": child " + id + " appears in two splits");
        }
      }
    }
  }
}

std::vector<SweepRow> architecture_sweep(std::span<const WritingSession> cohort,
                                         const PipelineConfig& cfg,
                                         std::span<const std::vector<int>> grid, int jobs) {
  if (grid.empty()) throw ConfigError("sweep.grid must list at least one architecture");
  std::vector<SweepRow> rows;
  for (const auto& sizes : grid) {
    PipelineConfig c = cfg;
    c.arch.hidden_sizes = sizes;
    c.arch.validate();
    auto report = run_cv(cohort, c, jobs);
    rows.push_back({sizes, report.aggregate.back()});
  }
  return rows;
}

double constant_baseline_rmse(std::span<const WritingSession> cohort, const PipelineConfig& cfg) {
  cfg.validate();
  double total = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto split = split_children(cohort.size(), cfg, true,
                                      derive_seed(cfg.rng_seed, "cv.split", static_cast<std::uint64_t>(t)));
    double mean = 0.0;
    for (auto i : split.train) mean += cohort[i].sems_label;
    mean /= static_cast<double>(split.train.size());
    std::vector<double> pred, actual;
    for (auto i : split.test) {
      pred.push_back(mean);
      actual.push_back(cohort[i].sems_label);
    }
    total += rmse(pred, actual);
  }
  return total / static_cast<double>(cfg.trials);
}

std::vector<FeatureImportance> svr_input_importance(const PipelineModels& models,
                                                    std::span<const WritingSession> cohort,
                                                    std::uint64_t seed, int shuffles) {
  models.check();
  if (cohort.size() < 2) throw DataError("svr_input_importance: need at least 2 children");
  if (shuffles < 1) throw ConfigError("svr_input_importance: shuffles must be positive");
  const double scale_max = models.config.eval.scale_max;
  std::vector<SvrInput> rows;
  std::vector<double> labels;
  for (const auto& s : cohort) {
    rows.push_back(svr_row(predict_sems(s, models).lstm_score, s.meta));
    labels.push_back(s.sems_label);
  }
  auto error_of = [&](const std::vector<SvrInput>& x) {
    std::vector<double> preds;
    for (const auto& r : x) preds.push_back(predict_svr(models.svr, r, scale_max));
    return rmse(preds, labels);
  };
  const double base = error_of(rows);

  static constexpr std::array<const char*, 3> kNames{"lstm_score", "age", "gender"};
  std::vector<FeatureImportance> out;
  for (std::size_t k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (int s = 0; s < shuffles; ++s) {
      Rng rng(derive_seed(seed, "svr.importance", k * 1000 + static_cast<std::uint64_t>(s)));
      std::vector<double> column;
      for (const auto& r : rows) column.push_back(r[k]);
      rng.shuffle(std::span<double>(column));
      auto permuted = rows;
      for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i][k] = column[i];
      sum += error_of(permuted) - base;
    }
    out.push_back({kNames[k], sum / static_cast<double>(shuffles)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.importance > b.importance; });
  return out;
}

ImportanceReport imv_importance(std::span<const WritingSession> cohort, const PipelineConfig& cfg,
                                const IMVArch& arch, std::uint64_t seed) {
  cfg.validate();
  const auto split = split_children(cohort.size(), cfg, false, derive_seed(seed, "pipeline.split"));
  std::vector<LabeledWindow> train_w, val_w, all_w;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const bool is_val = std::binary_search(split.val.begin(), split.val.end(), i);
    for (auto& w : segment_session(cohort[i], cfg.num_segments, cfg.window_len)) {
      (is_val ? val_w : train_w).push_back(w);
      all_w.push_back(std::move(w));
    }
  }
  const auto stats = fit_channel_stats(train_w);
  TrainConfig tc = cfg.train;
  tc.rng_seed = derive_seed(seed, "interpret.imv");
  auto imv = train_imv(normalize_all(train_w, stats), normalize_all(val_w, stats), tc, arch);
  return importance_report(imv.model, normalize_all(all_w, stats));
}

TraceFiles dump_trace(const WritingSession& session, const PipelineModels& models,
                      const fs::path& out_dir, std::size_t window_index) {
  models.check();
  const auto& cfg = models.config;
  auto windows = segment_session(session, cfg.num_segments, cfg.window_len);
  if (window_index >= windows.size()) {
    throw ConfigError("trace window " + std::to_string(window_index) + " out of range (" +
                      std::to_string(windows.size()) + " windows)");
  }
  const auto& raw = windows[window_index];
  auto fwd = forward_sequence(normalize(raw, models.stats), models.lstm, Mode::kInfer);

  TraceFiles files;
  files.prediction = fwd.prediction;
  std::string text = "t";
  for (auto name : kChannelNames) {
    text += ',';
    text += name;
  }
  text += '\n';
  for (Eigen::Index t = 0; t < raw.values.rows(); ++t) {
    text += std::to_string(t);
    for (Eigen::Index c = 0; c < raw.values.cols(); ++c) text += "," + format_double(raw.values(t, c));
    text += '\n';
  }
  files.input = out_dir / "input.csv";
  write_file_atomic(files.input, text);

  for (std::size_t k = 0; k < fwd.trace.hidden.size(); ++k) {
    const auto& h = fwd.trace.hidden[k];
    text = "t";
    for (Eigen::Index j = 0; j < h.cols(); ++j) text += ",h" + std::to_string(j);
    text += '\n';
    for (Eigen::Index t = 0; t < h.rows(); ++t) {
      text += std::to_string(t);
      for (Eigen::Index j = 0; j < h.cols(); ++j) text += "," + format_double(h(t, j));
      text += '\n';
    }
    files.layers.push_back(out_dir / ("trace_layer" + std::to_string(k + 1) + ".csv"));
    write_file_atomic(files.layers.back(), text);
  }

  const auto offsets = segment_offsets(session.frames.size(), cfg.num_segments, cfg.window_len);
  text = "child_id,window,start_frame,sems_label,prediction\n";
  text += session.meta.child_id + "," + std::to_string(window_index) + "," +
          std::to_string(offsets[window_index]) + "," + format_double(session.sems_label) + "," +
          format_double(fwd.prediction) + "\n";
  files.summary = out_dir / "trace_summary.csv";
  write_file_atomic(files.summary, text);
  return files;
}

std::string cv_report_csv(const CVReport& report) {
  std::string out = "trial,level,rmse,accuracy,f1,sensitivity,specificity\n";
  for (const auto& r : report.records) {
    out += std::to_string(r.trial) + "," + r.level + "," + format_double(r.rmse) + "," +
           opt_cell(r.accuracy) + "," + opt_cell(r.f1) + "," + opt_cell(r.sensitivity) + "," +
           opt_cell(r.specificity) + "\n";
  }
  for (const auto& a : report.aggregate) {
    out += "aggregate," + a.level + "," + summary_cell(a.rmse) + "," + summary_cell(a.accuracy) + "," +
           summary_cell(a.f1) + "," + summary_cell(a.sensitivity) + "," + summary_cell(a.specificity) +
           "\n";
  }
  return out;
}

std::string table2_csv(const CVReport& report) {
  std::string out = "Model,Accuracy mean +/- std (%),F1-Score mean +/- std (%),RMSE mean +/- std\n";
  for (const auto& a : report.aggregate) {
    const std::string rm = a.rmse.defined == 0 ? "-"
                                                 : fmt("%.2f", a.rmse.mean) + " +/- " + fmt("%.2f", a.rmse.stddev);
    out += "LSTM+SVR (" + a.level + " level)," + pct_cell(a.accuracy) + "," + pct_cell(a.f1) + "," + rm + "\n";
  }
  return out;
}

std::string table1_csv(std::span<const SweepRow> rows) {
  std::size_t depth = 2;
  for (const auto& r : rows) depth = std::max(depth, r.hidden_sizes.size());
  std::string out = "Number of layers";
  for (std::size_t k = 0; k < depth; ++k) out += ",Number of Hidden Units L" + std::to_string(k + 1);
  out += ",Accuracy (%),F1 Score (%),RMSE\n";
  for (const auto& r : rows) {
    out += std::to_string(r.hidden_sizes.size());
    for (std::size_t k = 0; k < depth; ++k) {
      out += ",";
      out += k < r.hidden_sizes.size() ? std::to_string(r.hidden_sizes[k]) : "-";
    }
    auto pct = [](const MetricSummary& s) { return s.defined == 0 ? std::string("-") : fmt("%.2f", 100.0 * s.mean); };
    out += "," + pct(r.child.accuracy) + "," + pct(r.child.f1) + "," + fmt("%.2f", r.child.rmse.mean) + "\n";
  }
  return out;
}

std::string importance_csv(std::span<const FeatureImportance> rows) {
  std::string out = "feature,importance\n";
  for (const auto& r : rows) out += r.feature + "," + format_double(r.importance) + "\n";
  return out;
}

std::string metrics_csv(const LevelMetrics& m) {
  const auto& c = m.classification;
  std::string out = "metric,value\n";
  out += "count," + std::to_string(m.count) + "\n";
  out += "rmse," + format_double(m.rmse) + "\n";
  out += "tp," + std::to_string(m.counts.tp) + "\n";
  out += "fp," + std::to_string(m.counts.fp) + "\n";
  out += "tn," + std::to_string(m.counts.tn) + "\n";
  out += "fn," + std::to_string(m.counts.fn) + "\n";
  out += "sensitivity," + format_metric(c.sensitivity) + "\n";
  out += "specificity," + format_metric(c.specificity) + "\n";
  out += "precision," + format_metric(c.precision) + "\n";
  out += "recall," + format_metric(c.recall) + "\n";
  out += "accuracy," + format_metric(c.accuracy) + "\n";
  out += "f1," + format_metric(c.f1) + "\n";
  return out;
}

}  // namespace semsnet
