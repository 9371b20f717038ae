#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "checksum.hpp"
#include "semsnet/bundle.hpp"
#include "semsnet/config.hpp"
#include "semsnet/errors.hpp"
#include "semsnet/imv.hpp"
#include "semsnet/io.hpp"
#include "semsnet/pipeline.hpp"
#include "semsnet/session_data.hpp"

namespace semsnet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

/// Collects what a command read and wrote, then emits run_manifest.json.
class Run {
 public:
  Run(std::string command, const CommonOptions& opts)
      : command_(std::move(command)), out_dir_(opts.out), start_(std::chrono::steady_clock::now()) {
    if (!opts.config.empty()) {
      config_ = load_config(opts.config);
      inputs_.push_back(opts.config);
    }
    if (opts.seed) config_.apply_seed(*opts.seed);
    if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
  }

  const RunConfig& config() const { return config_; }
  RunConfig& config() { return config_; }
  const fs::path& out_dir() const { return out_dir_; }

  void input(const fs::path& p) { inputs_.push_back(p.string()); }

  /// Writes `text` to out_dir/rel and records it for the manifest.
  void write(const fs::path& rel, const std::string& text) {
    write_file_atomic(out_dir_ / rel, text);
    output(rel);
  }
  void output(const fs::path& rel) { outputs_.push_back(rel.generic_string()); }

  void finish() {
    std::sort(outputs_.begin(), outputs_.end());
    json checksums = json::object();
    for (const auto& rel : outputs_) checksums[rel] = sha256_file(out_dir_ / rel);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m;
    m["command"] = command_;
    m["seed"] = config_.seed;
    m["config"] = json::parse(run_config_json(config_));
    m["inputs"] = inputs_;
    m["output_dir"] = out_dir_.string();
    m["outputs"] = outputs_;
    m["checksums"] = std::move(checksums);
    m["duration_seconds"] = seconds;
    write_file_atomic(out_dir_ / "run_manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_dir_;
  std::chrono::steady_clock::time_point start_;
  RunConfig config_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

fs::path manifest_path(const fs::path& cohort) {
  return fs::is_directory(cohort) ? cohort / "manifest.csv" : cohort;
}

std::vector<WritingSession> load_cohort(Run& run, const std::string& cohort) {
  const auto path = manifest_path(cohort);
  run.input(path);
  return parse_cohort(path, run.config().pipeline.eval.scale_max);
}

std::string history_csv(const TrainingHistory& h) {
  std::string out = "epoch,train_mse,val_mse\n";
  for (const auto& e : h.epochs) {
    out += std::to_string(e.epoch) + "," + format_double(e.train_mse) + "," +
           (std::isnan(e.val_mse) ? std::string("NA") : format_double(e.val_mse)) + "\n";
  }
  return out;
}

std::string splits_csv(const CVReport& report) {
  std::string out = "trial,split,child_id\n";
  for (std::size_t t = 0; t < report.splits.size(); ++t) {
    const auto& s = report.splits[t];
    const std::string trial = std::to_string(t + 1);
    for (const auto& id : s.train_ids) out += trial + ",train," + id + "\n";
    for (const auto& id : s.val_ids) out += trial + ",val," + id + "\n";
    for (const auto& id : s.test_ids) out += trial + ",test," + id + "\n";
  }
  return out;
}

json prediction_json(const ScorePrediction& p) {
  return {{"child_id", p.child_id},
          {"lstm_score", p.lstm_score},
          {"final_score", p.final_score},
          {"per_window_scores", p.per_window_scores}};
}

WritingSession session_from_file(const fs::path& path, const std::string& child_id, double age,
                                 const std::string& gender) {
  WritingSession s;
  s.meta.child_id = child_id.empty() ? path.stem().string() : child_id;
  s.meta.age_years = age;
  if (gender == "f") {
    s.meta.gender = Gender::kFemale;
  } else if (gender == "m") {
    s.meta.gender = Gender::kMale;
  } else {
    throw ConfigError("--gender must be f or m, got '" + gender + "'");
  }
  if (!(age > 0.0)) throw ConfigError("--age must be positive");
  s.frames = read_session_frames(path);
  return s;
}

/// Mixture importances of the channels and permutation importances of age
/// and gender, the latter as shares of the positive SVR-input importance.
std::string combined_csv(const ImportanceReport& imv, const std::vector<FeatureImportance>& svr) {
  struct Row {
    std::string feature, source;
    double score;
  };
  std::vector<Row> rows;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    rows.push_back({std::string(kChannelNames[c]), "attention", imv.overall[static_cast<Eigen::Index>(c)]});
  }
  double total = 0.0;
  for (const auto& f : svr) total += std::max(0.0, f.importance);
  for (const auto& f : svr) {
    if (f.feature == "lstm_score") continue;
    rows.push_back({f.feature, "svr_permutation", total > 0.0 ? std::max(0.0, f.importance) / total : 0.0});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.score > b.score; });
  std::string out = "rank,feature,source,score\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += std::to_string(k + 1) + "," + rows[k].feature + "," + rows[k].source + "," +
           format_double(rows[k].score) + "\n";
  }
  return out;
}

void add_common(CLI::App& sub, CommonOptions& opts, bool out_required) {
  sub.add_option("--config", opts.config, "INI configuration file");
  sub.add_option("--seed", opts.seed, "Root seed (overrides [run] seed)");
  auto* out = sub.add_option("--out", opts.out, "Output directory");
  if (out_required) out->required();
  sub.add_option("--jobs", opts.jobs, "Worker threads for independent trials")->capture_default_str();
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Handwriting-difficulty (SEMS) score engine"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto* gen = app.add_subcommand("generate", "Write a synthetic cohort (manifest.csv + sessions/)");
  add_common(*gen, opts, true);

  std::string cohort;
  auto* train = app.add_subcommand("train", "Fit the pipeline and write model.json");
  add_common(*train, opts, true);
  train->add_option("cohort", cohort, "Cohort directory or manifest file")->required();

  bool sweep = false;
  auto* cv = app.add_subcommand("crossval", "Monte-Carlo cross-validation (cv_report.csv)");
  add_common(*cv, opts, true);
  cv->add_option("cohort", cohort, "Cohort directory or manifest file")->required();
  cv->add_flag("--sweep", sweep, "Also run the architecture sweep (table1.csv)");

  std::string bundle, session;
  double age = 0.0;
  std::string gender, child_id;
  auto* predict = app.add_subcommand("predict", "Score one session CSV with a model bundle");
  add_common(*predict, opts, false);
  predict->add_option("bundle", bundle, "model.json")->required();
  predict->add_option("session", session, "Session CSV")->required();
  predict->add_option("--age", age, "Age in years")->required();
  predict->add_option("--gender", gender, "f or m")->required();
  predict->add_option("--child-id", child_id, "Identifier (default: file stem)");

  auto* interpret = app.add_subcommand("interpret", "Variable importance (overall.csv, per_timestep.csv)");
  add_common(*interpret, opts, true);
  interpret->add_option("cohort", cohort, "Cohort directory or manifest file")->required();

  std::size_t window = 0;
  auto* trace = app.add_subcommand("trace", "Export the input window and LSTM activations");
  add_common(*trace, opts, true);
  trace->add_option("bundle", bundle, "model.json")->required();
  trace->add_option("session", session, "Session CSV")->required();
  trace->add_option("--window", window, "Window index")->capture_default_str();
  trace->add_option("--child-id", child_id, "Identifier (default: file stem)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << one_line(e.what()) << "\n";
    return kUsage;
  }

  try {
    if (gen->parsed()) {
      Run r("generate", opts);
      r.config().synth.validate();
      auto sessions = generate_synthetic_cohort(r.config().synth, r.config().seed);
      write_cohort(sessions, r.out_dir());
      r.output("manifest.csv");
      for (const auto& s : sessions) r.output(fs::path("sessions") / (s.meta.child_id + ".csv"));
      r.finish();
      out << "wrote " << sessions.size() << " sessions to " << r.out_dir().string() << "\n";
    } else if (train->parsed()) {
      Run r("train", opts);
      auto sessions = load_cohort(r, cohort);
      auto fitted = train_pipeline(sessions, r.config().pipeline);
      r.write("model.json", bundle_to_json(fitted.models));
      r.write("validation_child.csv", metrics_csv(fitted.report.validation.child));
      r.write("validation_window.csv", metrics_csv(fitted.report.validation.window));
      r.write("history.csv", history_csv(fitted.report.history));
      r.finish();
      out << "validation child-level rmse " << format_double(fitted.report.validation.child.rmse)
          << ", window-level rmse " << format_double(fitted.report.validation.window.rmse) << "\n";
    } else if (cv->parsed()) {
      Run r("crossval", opts);
      auto sessions = load_cohort(r, cohort);
      auto report = run_cv(sessions, r.config().pipeline, opts.jobs);
      audit_splits(report);
      r.write("cv_report.csv", cv_report_csv(report));
      r.write("table2.csv", table2_csv(report));
      r.write("splits.csv", splits_csv(report));
      if (sweep) {
        auto rows = architecture_sweep(sessions, r.config().pipeline, r.config().sweep_grid, opts.jobs);
        r.write("table1.csv", table1_csv(rows));
      }
      r.finish();
      const auto& child = report.aggregate.back();
      out << "child-level rmse " << format_double(child.rmse.mean) << " +/- "
          << format_double(child.rmse.stddev) << " over " << r.config().pipeline.trials << " trials\n";
    } else if (predict->parsed()) {
      std::optional<Run> r;
      if (!opts.out.empty()) r.emplace("predict", opts);
      auto models = load_bundle(bundle);
      auto s = session_from_file(session, child_id, age, gender);
      auto p = predict_sems(s, models);
      const std::string record = prediction_json(p).dump(2) + "\n";
      out << p.child_id << ": final_score " << format_double(p.final_score) << " (lstm "
          << format_double(p.lstm_score) << ")\n"
          << record;
      if (r) {
        r->input(bundle);
        r->input(session);
        r->write("prediction.json", record);
        r->finish();
      }
    } else if (interpret->parsed()) {
      Run r("interpret", opts);
      auto sessions = load_cohort(r, cohort);
      const auto& cfg = r.config();
      const auto& pc = cfg.pipeline;
      auto report = imv_importance(sessions, pc, cfg.imv, cfg.seed);
      r.write("overall.csv", overall_csv(report));
      r.write("per_timestep.csv", per_timestep_csv(report));

      auto fitted = train_pipeline(sessions, pc);
      auto svr = svr_input_importance(fitted.models, sessions, derive_seed(cfg.seed, "interpret.svr"));
      r.write("importance_svr.csv", importance_csv(svr));
      r.write("importance_combined.csv", combined_csv(report, svr));
      r.finish();
      out << "top channel " << kChannelNames[static_cast<std::size_t>(report.ranking.front())] << " ("
          << format_double(report.overall[report.ranking.front()]) << ")\n";
    } else if (trace->parsed()) {
      Run r("trace", opts);
      r.input(bundle);
      r.input(session);
      auto models = load_bundle(bundle);
      WritingSession s;
      s.meta.child_id = child_id.empty() ? fs::path(session).stem().string() : child_id;
      s.frames = read_session_frames(session);
      auto files = dump_trace(s, models, r.out_dir(), window);
      r.output("input.csv");
      for (const auto& f : files.layers) r.output(f.filename());
      r.output("trace_summary.csv");
      r.finish();
      out << "window " << window << " prediction " << format_double(files.prediction) << "\n";
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "error[config]: " << one_line(e.what()) << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error[data]: " << one_line(e.what()) << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error[data]: " << one_line(e.what()) << "\n";
    return kDataError;
  } catch (const TrainingError& e) {
    err << "error[training]: " << one_line(e.what()) << "\n";
    return kTrainingError;
  } catch (const std::exception& e) {
    err << "error[internal]: " << one_line(e.what()) << "\n";
    return kInternal;
  }
}

}  // namespace semsnet::cli
