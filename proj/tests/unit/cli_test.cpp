#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "checksum.hpp"
#include "semsnet/io.hpp"

namespace semsnet::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "semsnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("semsnet_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path tiny_config(const fs::path& dir) {
  const auto path = dir / "tiny.ini";
  write_file_atomic(path,
                    "[data]\nwindow_len = 20\nnum_segments = 5\n"
                    "[split]\ntrials = 2\n"
                    "[train]\nepochs = 2\n"
                    "[lstm]\nhidden_sizes = 6\n"
                    "[synth]\nchildren = 10\nframes = 200\n"
                    "[sweep]\ngrid = 4;4,3\n");
  return path;
}

std::size_t count_lines(const fs::path& path) {
  const auto text = read_file(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

TEST(Cli, NoSubcommandIsUsageError) {
  auto r = invoke({});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_TRUE(r.err.starts_with("error[usage]: ")) << r.err;
}

TEST(Cli, UnknownFlagIsUsageError) {
  auto r = invoke({"generate", "--out", "x", "--bogus"});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_TRUE(r.err.starts_with("error[usage]: ")) << r.err;
}

TEST(Cli, HelpExitsZero) {
  auto r = invoke({"--help"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("crossval"), std::string::npos);
}

TEST(Cli, GenerateDefaultCohortHasFortyRows) {
  auto dir = scratch("gen40");
  auto r = invoke({"generate", "--out", dir.string(), "--seed", "3"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(count_lines(dir / "manifest.csv"), 41u);
  EXPECT_TRUE(fs::exists(dir / "sessions" / "child_039.csv"));
  auto m = nlohmann::json::parse(read_file(dir / "run_manifest.json"));
  EXPECT_EQ(m["command"], "generate");
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["checksums"].size(), 41u);
  EXPECT_EQ(m["checksums"]["manifest.csv"], sha256_file(dir / "manifest.csv"));
}

TEST(Cli, RepeatedRunsProduceIdenticalFiles) {
  auto dir = scratch("repeat");
  const auto cfg = tiny_config(dir);
  ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--out", (dir / "cohort").string()}).code, kOk);
  nlohmann::json first;
  for (int k = 0; k < 2; ++k) {
    const auto out = dir / ("cv" + std::to_string(k));
    auto r = invoke({"crossval", (dir / "cohort").string(), "--config", cfg.string(), "--out", out.string()});
    ASSERT_EQ(r.code, kOk) << r.err;
    auto sums = nlohmann::json::parse(read_file(out / "run_manifest.json"))["checksums"];
    if (k == 0) first = sums; else EXPECT_EQ(sums, first);
  }
}

TEST(Cli, InvalidConfigNamesTheField) {
  auto dir = scratch("badcfg");
  write_file_atomic(dir / "bad.ini", "[synth]\nchildren = -1\n");
  auto r = invoke({"generate", "--config", (dir / "bad.ini").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_TRUE(r.err.starts_with("error[config]: ")) << r.err;
  EXPECT_NE(r.err.find("children"), std::string::npos) << r.err;
}

TEST(Cli, MissingManifestIsDataError) {
  auto dir = scratch("nomanifest");
  auto r = invoke({"train", dir.string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_TRUE(r.err.starts_with("error[data]: ")) << r.err;
  EXPECT_NE(r.err.find((dir / "manifest.csv").string()), std::string::npos) << r.err;
}

TEST(Cli, ConstantLabelCohortTrainsToSmallRmse) {
  auto dir = scratch("constant");
  write_file_atomic(dir / "c.ini",
                    "[data]\nwindow_len = 20\nnum_segments = 5\n"
                    "[train]\nepochs = 20\n"
                    "[lstm]\nhidden_sizes = 6\n"
                    "[synth]\nchildren = 10\nframes = 200\nmode = constant\nnoise = 0\n");
  const auto cfg = (dir / "c.ini").string();
  ASSERT_EQ(invoke({"generate", "--config", cfg, "--out", (dir / "cohort").string()}).code, kOk);
  auto r = invoke({"train", (dir / "cohort").string(), "--config", cfg, "--out", (dir / "m").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto text = read_file(dir / "m" / "validation_child.csv");
  const auto at = text.find("\nrmse,");
  ASSERT_NE(at, std::string::npos) << text;
  EXPECT_LT(std::stod(text.substr(at + 6)), 0.1);
}

TEST(Cli, MissingConfigFileIsConfigError) {
  auto dir = scratch("nocfg");
  auto r = invoke({"generate", "--config", (dir / "absent.ini").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_TRUE(r.err.starts_with("error[config]: ")) << r.err;
}

TEST(Cli, CrossvalWritesReportsAndSweep) {
  auto dir = scratch("cv");
  const auto cfg = tiny_config(dir);
  ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--out", (dir / "cohort").string()}).code, kOk);
  auto r = invoke({"crossval", (dir / "cohort").string(), "--config", cfg.string(), "--out",
                   (dir / "cv").string(), "--sweep", "--jobs", "2"});
  ASSERT_EQ(r.code, kOk) << r.err;
  // 2 trials x 2 levels + 2 aggregate rows + header
  EXPECT_EQ(count_lines(dir / "cv" / "cv_report.csv"), 7u);
  EXPECT_EQ(count_lines(dir / "cv" / "table2.csv"), 3u);
  EXPECT_EQ(count_lines(dir / "cv" / "table1.csv"), 3u);
  // 10 children per trial
  EXPECT_EQ(count_lines(dir / "cv" / "splits.csv"), 21u);
}

TEST(Cli, TrainPredictTraceRoundTrip) {
  auto dir = scratch("train");
  const auto cfg = tiny_config(dir);
  ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--out", (dir / "cohort").string()}).code, kOk);
  auto r = invoke({"train", (dir / "cohort").string(), "--config", cfg.string(), "--out", (dir / "m").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  for (const char* f : {"model.json", "validation_child.csv", "validation_window.csv", "history.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "m" / f)) << f;
  }
  EXPECT_EQ(count_lines(dir / "m" / "history.csv"), 3u);

  const auto session = (dir / "cohort" / "sessions" / "child_004.csv").string();
  r = invoke({"predict", (dir / "m" / "model.json").string(), session, "--age", "8", "--gender", "f", "--out",
              (dir / "p").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  auto p = nlohmann::json::parse(read_file(dir / "p" / "prediction.json"));
  EXPECT_EQ(p["child_id"], "child_004");
  EXPECT_EQ(p["per_window_scores"].size(), 5u);
  const double final_score = p["final_score"];
  EXPECT_GE(final_score, 0.0);
  EXPECT_LE(final_score, 10.0);

  r = invoke({"trace", (dir / "m" / "model.json").string(), session, "--window", "2", "--out",
              (dir / "t").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(count_lines(dir / "t" / "input.csv"), 21u);
  EXPECT_EQ(count_lines(dir / "t" / "trace_layer1.csv"), 21u);

  r = invoke({"predict", (dir / "m" / "model.json").string(), session, "--age", "8", "--gender", "x"});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_NE(r.err.find("--gender"), std::string::npos);
}

TEST(Cli, ShortSessionIsDataError) {
  auto dir = scratch("short");
  const auto cfg = tiny_config(dir);
  ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--out", (dir / "cohort").string()}).code, kOk);
  ASSERT_EQ(invoke({"train", (dir / "cohort").string(), "--config", cfg.string(), "--out",
                    (dir / "m").string()}).code, kOk);
  const auto text = read_file(dir / "cohort" / "sessions" / "child_000.csv");
  std::istringstream in(text);
  std::string line, head;
  for (int k = 0; k < 11 && std::getline(in, line); ++k) head += line + "\n";
  write_file_atomic(dir / "short.csv", head);
  auto r = invoke({"predict", (dir / "m" / "model.json").string(), (dir / "short.csv").string(), "--age", "8",
                   "--gender", "m"});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_TRUE(r.err.starts_with("error[data]: ")) << r.err;
}

TEST(Cli, InterpretWritesRankings) {
  auto dir = scratch("interpret");
  const auto cfg = tiny_config(dir);
  ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--out", (dir / "cohort").string()}).code, kOk);
  auto r = invoke({"interpret", (dir / "cohort").string(), "--config", cfg.string(), "--out",
                   (dir / "i").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(count_lines(dir / "i" / "overall.csv"), 11u);
  std::istringstream overall(read_file(dir / "i" / "overall.csv"));
  std::string line;
  std::getline(overall, line);
  EXPECT_EQ(line, "channel,score");
  double total = 0.0;
  while (std::getline(overall, line)) total += std::stod(line.substr(line.find(',') + 1));
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_EQ(count_lines(dir / "i" / "per_timestep.csv"), 21u);
  EXPECT_EQ(count_lines(dir / "i" / "importance_svr.csv"), 4u);
  EXPECT_EQ(count_lines(dir / "i" / "importance_combined.csv"), 13u);
}

}  // namespace
}  // namespace semsnet::cli
