#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semsnet/bundle.hpp"
#include "semsnet/config.hpp"
#include "semsnet/errors.hpp"
#include "semsnet/imv.hpp"
#include "semsnet/metrics.hpp"
#include "semsnet/pipeline.hpp"
#include "semsnet/session_data.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace semsnet;
using namespace pybind11::literals;

namespace {

RunConfig make_config(const std::optional<std::string>& ini, std::optional<std::uint64_t> seed) {
  RunConfig cfg = ini ? parse_config(*ini, "<python>") : RunConfig{};
  if (seed) cfg.apply_seed(*seed);
  cfg.validate();
  return cfg;
}

std::vector<WritingSession> load(const fs::path& cohort, const RunConfig& cfg) {
  const auto manifest = fs::is_directory(cohort) ? cohort / "manifest.csv" : cohort;
  return parse_cohort(manifest, cfg.pipeline.eval.scale_max);
}

py::dict metrics_dict(const LevelMetrics& m) {
  auto opt = [](const std::optional<double>& v) -> py::object {
    return v ? py::object(py::float_(*v)) : py::none();
  };
  py::dict d;
  d["count"] = m.count;
  d["rmse"] = m.rmse;
  d["accuracy"] = opt(m.classification.accuracy);
  d["f1"] = opt(m.classification.f1);
  d["sensitivity"] = opt(m.classification.sensitivity);
  d["specificity"] = opt(m.classification.specificity);
  return d;
}

}  // namespace

PYBIND11_MODULE(_semsnet, m) {
  m.doc() = "LSTM + SVR handwriting-difficulty score engine";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def("default_config", &default_config_ini, "Default configuration as INI text.");

  m.def(
      "generate",
      [](const fs::path& out, std::optional<std::string> config, std::optional<std::uint64_t> seed) {
        const auto cfg = make_config(config, seed);
        auto sessions = generate_synthetic_cohort(cfg.synth, cfg.seed);
        return write_cohort(sessions, out);
      },
      py::arg("out"), py::arg("config") = py::none(), py::arg("seed") = py::none(),
      "Write a synthetic cohort; returns the manifest path.");

  m.def(
      "train",
      [](const fs::path& cohort, std::optional<std::string> config, std::optional<std::uint64_t> seed) {
        const auto cfg = make_config(config, seed);
        auto sessions = load(cohort, cfg);
        TrainedPipeline fitted;
        {
          py::gil_scoped_release release;
          fitted = train_pipeline(sessions, cfg.pipeline);
        }
        py::dict out;
        out["bundle"] = bundle_to_json(fitted.models);
        out["validation"] = py::dict("window"_a = metrics_dict(fitted.report.validation.window),
                                     "child"_a = metrics_dict(fitted.report.validation.child));
        out["train_ids"] = fitted.report.train_ids;
        out["val_ids"] = fitted.report.val_ids;
        return out;
      },
      py::arg("cohort"), py::arg("config") = py::none(), py::arg("seed") = py::none(),
      "Fit on a train/validation split; returns the model bundle JSON and validation metrics.");

  m.def(
      "predict",
      [](const std::string& bundle, const fs::path& session, double age, const std::string& gender,
         std::string child_id) {
        auto models = bundle_from_json(bundle);
        WritingSession s;
        s.meta.child_id = child_id.empty() ? session.stem().string() : child_id;
        s.meta.age_years = age;
        if (gender != "f" && gender != "m") throw ConfigError("gender must be 'f' or 'm'");
        s.meta.gender = gender == "f" ? Gender::kFemale : Gender::kMale;
        s.frames = read_session_frames(session);
        auto p = predict_sems(s, models);
        py::dict d;
        d["child_id"] = p.child_id;
        d["lstm_score"] = p.lstm_score;
        d["final_score"] = p.final_score;
        d["per_window_scores"] = p.per_window_scores;
        return d;
      },
      py::arg("bundle"), py::arg("session"), py::arg("age"), py::arg("gender"), py::arg("child_id") = "",
      "Score one session CSV with a bundle JSON string.");

  m.def(
      "crossval",
      [](const fs::path& cohort, std::optional<std::string> config, std::optional<std::uint64_t> seed,
         int jobs) {
        const auto cfg = make_config(config, seed);
        auto sessions = load(cohort, cfg);
        CVReport report;
        {
          py::gil_scoped_release release;
          report = run_cv(sessions, cfg.pipeline, jobs);
        }
        audit_splits(report);
        py::dict out;
        out["cv_report"] = cv_report_csv(report);
        out["table2"] = table2_csv(report);
        py::list aggregate;
        for (const auto& level : report.aggregate) {
          aggregate.append(py::dict("level"_a = level.level, "rmse_mean"_a = level.rmse.mean,
                                    "rmse_std"_a = level.rmse.stddev));
        }
        out["aggregate"] = aggregate;
        return out;
      },
      py::arg("cohort"), py::arg("config") = py::none(), py::arg("seed") = py::none(), py::arg("jobs") = 1,
      "Monte-Carlo cross-validation; returns the report CSVs and per-level RMSE summaries.");

  m.def(
      "importance",
      [](const fs::path& cohort, std::optional<std::string> config, std::optional<std::uint64_t> seed) {
        const auto cfg = make_config(config, seed);
        auto sessions = load(cohort, cfg);
        ImportanceReport report;
        {
          py::gil_scoped_release release;
          report = imv_importance(sessions, cfg.pipeline, cfg.imv, cfg.seed);
        }
        py::dict out;
        for (std::size_t c = 0; c < kNumChannels; ++c) {
          out[py::str(std::string(kChannelNames[c]))] = report.overall[static_cast<Eigen::Index>(c)];
        }
        return out;
      },
      py::arg("cohort"), py::arg("config") = py::none(), py::arg("seed") = py::none(),
      "Mixture-attention channel importances, keyed by channel name.");

  m.def(
      "rmse", [](std::vector<double> predicted, std::vector<double> actual) { return rmse(predicted, actual); },
      py::arg("predicted"), py::arg("actual"));

  m.def(
      "classify",
      [](std::vector<double> predicted, std::vector<double> actual, double threshold) {
        EvalConfig cfg;
        cfg.threshold = threshold;
        const auto c = confusion(predicted, actual, cfg);
        const auto cm = classify_metrics(c);
        auto opt = [](const std::optional<double>& v) -> py::object {
          return v ? py::object(py::float_(*v)) : py::none();
        };
        return py::dict("tp"_a = c.tp, "fp"_a = c.fp, "tn"_a = c.tn, "fn"_a = c.fn,
                        "accuracy"_a = opt(cm.accuracy), "f1"_a = opt(cm.f1),
                        "sensitivity"_a = opt(cm.sensitivity), "specificity"_a = opt(cm.specificity));
      },
      py::arg("predicted"), py::arg("actual"), py::arg("threshold") = 7.0,
      "Confusion counts and ratios for score >= threshold as the positive class.");
}
