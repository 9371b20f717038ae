#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semsnet/imv.hpp"
#include "semsnet/lstm.hpp"
#include "semsnet/metrics.hpp"
#include "semsnet/optim.hpp"
#include "semsnet/session_data.hpp"
#include "semsnet/svr.hpp"

namespace semsnet {

struct PipelineConfig {
  std::size_t window_len = kDefaultWindowLen;
  std::size_t num_segments = kDefaultNumSegments;
  /// Shares of children; val and train split the non-test remainder 1:8.
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  int trials = 10;
  EvalConfig eval;
  TrainConfig train;
  LSTMArch arch;
  SVRHyper svr;
  /// Pick C and epsilon on the validation children from the grid
  /// {1, 10, 100} x {0.05, 0.1, 0.5}; otherwise use `svr` as given.
  bool tune_svr = true;
  /// Root seed. Splits and train.rng_seed are derived from it per trial, so
  /// train.rng_seed itself is ignored by the pipeline entry points.
  std::uint64_t rng_seed = 42;

  void validate() const;
};

/// The composed regressor: stats -> LSTM per window -> mean -> SVR.
struct PipelineModels {
  PipelineConfig config;
  ChannelStats stats;
  LSTMModel lstm;
  SVRModel svr;

  void check() const;
};

struct ScorePrediction {
  std::string child_id;
  double lstm_score = 0.0;
  double final_score = 0.0;
  std::vector<double> per_window_scores;
};

/// segment -> normalize -> LSTM per window -> mean -> SVR(mean, age, gender).
ScorePrediction predict_sems(const WritingSession& session, const PipelineModels& models);

struct LevelMetrics {
  std::size_t count = 0;
  double rmse = 0.0;
  ConfusionCounts counts;
  ClassificationMetrics classification;
};

/// Window level: the SVR applied to every window's LSTM score with the
/// child's age and gender. Child level: the final per-child score.
struct EvaluationReport {
  LevelMetrics window;
  LevelMetrics child;
  std::vector<ScorePrediction> predictions;
  std::vector<double> labels;
};

EvaluationReport evaluate(const PipelineModels& models, std::span<const WritingSession> sessions);

struct ChildSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded split of `num_children` indices. With `with_test` false every child
/// lands in train or val (ratio train_fraction : val_fraction). Each used
/// side gets at least one child; train gets at least two.
ChildSplit split_children(std::size_t num_children, const PipelineConfig& cfg, bool with_test,
                          std::uint64_t seed);

struct ValidationReport {
  EvaluationReport validation;
  TrainingHistory history;
  SVRHyper chosen_svr;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

struct TrainedPipeline {
  PipelineModels models;
  ValidationReport report;
};

/// Fits the whole pipeline on explicit train/val sessions.
TrainedPipeline fit_pipeline(std::span<const WritingSession> train,
                             std::span<const WritingSession> val, const PipelineConfig& cfg);

/// Splits the cohort by child (train:val) and calls fit_pipeline.
TrainedPipeline train_pipeline(std::span<const WritingSession> cohort, const PipelineConfig& cfg);

struct TrialRecord {
  int trial = 0;
  std::string level;  // "window" or "child"
  double rmse = 0.0;
  std::optional<double> accuracy;
  std::optional<double> f1;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

struct MetricSummary {
  /// Number of trials where the metric was defined.
  std::size_t defined = 0;
  double mean = 0.0;
  /// Sample standard deviation over defined trials; 0 for a single trial.
  double stddev = 0.0;
};

struct LevelSummary {
  std::string level;
  MetricSummary rmse, accuracy, f1, sensitivity, specificity;
};

struct TrialSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
};

struct CVReport {
  std::vector<TrialRecord> records;  // trial-major, window before child
  std::vector<LevelSummary> aggregate;
  std::vector<TrialSplit> splits;
};

MetricSummary summarize(std::span<const std::optional<double>> values);
std::vector<LevelSummary> aggregate_records(std::span<const TrialRecord> records);

/// Monte-Carlo cross-validation: `cfg.trials` seeded trials, each holding out
/// test_fraction of the children. Trials run on up to `jobs` threads; the
/// report does not depend on `jobs`.
CVReport run_cv(std::span<const WritingSession> cohort, const PipelineConfig& cfg, int jobs = 1);

/// Throws DataError if any child id occurs in two sides of one trial.
void audit_splits(const CVReport& report);

struct SweepRow {
  std::vector<int> hidden_sizes;
  LevelSummary child;
};

std::vector<SweepRow> architecture_sweep(std::span<const WritingSession> cohort,
                                         const PipelineConfig& cfg,
                                         std::span<const std::vector<int>> grid, int jobs = 1);

/// Untrained baseline for the sweep: child-level RMSE of predicting the
/// training-label mean in every trial, averaged over trials.
double constant_baseline_rmse(std::span<const WritingSession> cohort, const PipelineConfig& cfg);

struct FeatureImportance {
  std::string feature;
  double importance = 0.0;
};

/// Permutation importance of the SVR inputs (lstm_score, age, gender): mean
/// increase in child-level RMSE over `shuffles` seeded column shuffles.
/// Returned in descending importance (ties keep input order).
std::vector<FeatureImportance> svr_input_importance(const PipelineModels& models,
                                                    std::span<const WritingSession> cohort,
                                                    std::uint64_t seed, int shuffles = 10);

/// Trains the mixture-attention model on the seeded train/validation child
/// split (channel stats from the train side) and reports importances over
/// every window of the cohort.
ImportanceReport imv_importance(std::span<const WritingSession> cohort, const PipelineConfig& cfg,
                                const IMVArch& arch, std::uint64_t seed);

struct TraceFiles {
  std::filesystem::path input;
  std::vector<std::filesystem::path> layers;
  std::filesystem::path summary;
  double prediction = 0.0;
};

/// Writes input.csv (raw window), trace_layer<k>.csv (hidden states, k from
/// 1) and trace_summary.csv for one window of the session.
TraceFiles dump_trace(const WritingSession& session, const PipelineModels& models,
                      const std::filesystem::path& out_dir, std::size_t window_index = 0);

// -- report text ---------------------------------------------------------

/// trial,level,rmse,accuracy,f1,sensitivity,specificity. After the per-trial
/// rows, one "aggregate" row per level holds "mean +/- std" cells.
std::string cv_report_csv(const CVReport& report);
/// Model,Accuracy mean +/- std (%),F1-Score mean +/- std (%),RMSE mean +/- std
/// with one row per evaluation level, two decimals, "-" for a metric that was
/// undefined in every trial.
std::string table2_csv(const CVReport& report);
/// Number of layers,Number of Hidden Units L1..Lk,Accuracy (%),F1 Score (%),RMSE
/// with k = max(2, deepest architecture); missing layers and undefined
/// metrics print "-".
std::string table1_csv(std::span<const SweepRow> rows);
std::string importance_csv(std::span<const FeatureImportance> rows);
std::string metrics_csv(const LevelMetrics& metrics);

}  // namespace semsnet
