#include "semsnet/session_data.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <unistd.h>
#include <sstream>

#include "semsnet/errors.hpp"
#include "test_support.hpp"

namespace semsnet {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("semsnet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

const char* kSessionHeader =
    "timestamp_ms,tip_pressure,finger_pressure,acc_x,acc_y,acc_z,gyro_x,gyro_y,gyro_z,angle,"
    "writing_speed\n";

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseCohort, SingleSessionThreeRows) {
  TempDir dir;
  write_file(dir.path() / "s.csv", std::string(kSessionHeader) +
                                       "0,1,2,0.1,0.2,9.8,1,2,3,55,20\n"
                                       "10,1.5,2,0.1,0.2,9.8,1,2,3,55,21\n"
                                       "20,1.25,2,0.1,0.2,9.8,1,2,3,55,22\n");
  write_file(dir.path() / "manifest.csv",
             "child_id,age_years,gender,sems_label,session_file\nc1,7.5,f,3,s.csv\n");
  auto cohort = parse_cohort(dir.path() / "manifest.csv");
  ASSERT_EQ(cohort.size(), 1u);
  EXPECT_EQ(cohort[0].meta.child_id, "c1");
  EXPECT_EQ(cohort[0].meta.gender, Gender::kFemale);
  EXPECT_EQ(cohort[0].sems_label, 3.0);
  ASSERT_EQ(cohort[0].frames.size(), 3u);
  EXPECT_EQ(cohort[0].frames[2].timestamp_ms, 20);
  EXPECT_EQ(cohort[0].frames[1][Channel::kTipPressure], 1.5);
  EXPECT_EQ(cohort[0].frames[2][Channel::kWritingSpeed], 22.0);
}

TEST(ParseCohort, WrongColumnCountNamesLine) {
  TempDir dir;
  write_file(dir.path() / "s.csv", std::string(kSessionHeader) +
                                       "0,1,2,0.1,0.2,9.8,1,2,3,55,20\n"
                                       "10,1,2,0.1,0.2,9.8,1,2,3,55\n");
  auto msg = message_of([&] { read_session_frames(dir.path() / "s.csv"); });
  EXPECT_NE(msg.find("s.csv:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("columns"), std::string::npos) << msg;
}

TEST(ParseCohort, NonNumericCellNamesLine) {
  TempDir dir;
  write_file(dir.path() / "s.csv", std::string(kSessionHeader) + "0,1,x,0.1,0.2,9.8,1,2,3,55,20\n");
  auto msg = message_of([&] { read_session_frames(dir.path() / "s.csv"); });
  EXPECT_NE(msg.find("s.csv:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("finger_pressure"), std::string::npos) << msg;
}

TEST(ParseCohort, RepeatedTimestampRejected) {
  TempDir dir;
  write_file(dir.path() / "s.csv", std::string(kSessionHeader) +
                                       "0,1,2,0.1,0.2,9.8,1,2,3,55,20\n"
                                       "10,1,2,0.1,0.2,9.8,1,2,3,55,20\n"
                                       "10,1,2,0.1,0.2,9.8,1,2,3,55,20\n");
  auto msg = message_of([&] { read_session_frames(dir.path() / "s.csv"); });
  EXPECT_NE(msg.find("non-monotonic"), std::string::npos) << msg;
  EXPECT_NE(msg.find("s.csv:4"), std::string::npos) << msg;
}

TEST(ParseCohort, LabelOutOfRangeRejected) {
  TempDir dir;
  write_file(dir.path() / "s.csv", std::string(kSessionHeader) + "0,1,2,0.1,0.2,9.8,1,2,3,55,20\n");
  write_file(dir.path() / "manifest.csv",
             "child_id,age_years,gender,sems_label,session_file\nc1,7.5,m,12.5,s.csv\n");
  auto msg = message_of([&] { parse_cohort(dir.path() / "manifest.csv"); });
  EXPECT_NE(msg.find("manifest.csv:2"), std::string::npos) << msg;
  // The manuscript scale admits the same label.
  EXPECT_EQ(parse_cohort(dir.path() / "manifest.csv", kManuscriptScaleMax).size(), 1u);
}

TEST(ParseCohort, BadGenderAndMissingFiles) {
  TempDir dir;
  write_file(dir.path() / "manifest.csv",
             "child_id,age_years,gender,sems_label,session_file\nc1,7.5,x,2,s.csv\n");
  EXPECT_NE(message_of([&] { parse_cohort(dir.path() / "manifest.csv"); }).find("gender"),
            std::string::npos);
  write_file(dir.path() / "manifest.csv",
             "child_id,age_years,gender,sems_label,session_file\nc1,7.5,f,2,missing.csv\n");
  EXPECT_NE(message_of([&] { parse_cohort(dir.path() / "manifest.csv"); }).find("missing.csv"),
            std::string::npos);
  EXPECT_NE(message_of([&] { parse_cohort(dir.path() / "nope.csv"); }).find("nope.csv"),
            std::string::npos);
}

TEST(ParseCohort, NegativePressureRejected) {
  TempDir dir;
  write_file(dir.path() / "s.csv", std::string(kSessionHeader) + "0,-1,2,0.1,0.2,9.8,1,2,3,55,20\n");
  EXPECT_THROW(read_session_frames(dir.path() / "s.csv"), DataError);
}

TEST(WriteCohort, RoundTripsExactly) {
  TempDir dir;
  SynthConfig cfg;
  cfg.children = 3;
  cfg.frames = 50;
  auto cohort = generate_synthetic_cohort(cfg, 9);
  // Values that stress the shortest-round-trip formatting.
  cohort[0].frames[0][Channel::kAngle] = 0.1 + 0.2;
  cohort[0].frames[1][Channel::kAccX] = -1.0 / 3.0;
  cohort[0].frames[2][Channel::kGyroZ] = 1e-300;
  auto manifest = write_cohort(cohort, dir.path());
  auto back = parse_cohort(manifest);
  ASSERT_EQ(back.size(), cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    EXPECT_EQ(back[i].meta.child_id, cohort[i].meta.child_id);
    EXPECT_EQ(back[i].meta.age_years, cohort[i].meta.age_years);
    EXPECT_EQ(back[i].meta.gender, cohort[i].meta.gender);
    EXPECT_EQ(back[i].sems_label, cohort[i].sems_label);
    ASSERT_EQ(back[i].frames.size(), cohort[i].frames.size());
    for (std::size_t k = 0; k < cohort[i].frames.size(); ++k) {
      EXPECT_EQ(back[i].frames[k].timestamp_ms, cohort[i].frames[k].timestamp_ms);
      EXPECT_EQ(back[i].frames[k].values, cohort[i].frames[k].values);
    }
  }
}

WritingSession ramp_session(std::size_t frames, double label = 4.0) {
  WritingSession s;
  s.meta = {"ramp", 8.0, Gender::kMale};
  s.sems_label = label;
  for (std::size_t k = 0; k < frames; ++k) {
    SensorFrame f;
    f.timestamp_ms = static_cast<std::int64_t>(10 * k);
    f.values.fill(static_cast<double>(k));
    s.frames.push_back(f);
  }
  return s;
}

TEST(Segment, ContiguousWindowsForExactFit) {
  auto offsets = segment_offsets(2400, 20, 120);
  ASSERT_EQ(offsets.size(), 20u);
  for (std::size_t k = 0; k < 20; ++k) EXPECT_EQ(offsets[k], 120 * k);

  auto windows = segment_session(ramp_session(2400), 20, 120);
  ASSERT_EQ(windows.size(), 20u);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_EQ(windows[k].values.rows(), 120);
    EXPECT_EQ(windows[k].values.cols(), 10);
    EXPECT_EQ(windows[k].values(0, 0), static_cast<double>(120 * k));
    EXPECT_EQ(windows[k].sems_label, 4.0);
    EXPECT_EQ(windows[k].source_child, "ramp");
  }
}

TEST(Segment, MinimalSessionDuplicatesWindow) {
  auto windows = segment_session(ramp_session(120), 20, 120);
  ASSERT_EQ(windows.size(), 20u);
  for (const auto& w : windows) EXPECT_EQ(w.values, windows.front().values);
}

TEST(Segment, TooShortSessionReportsLengths) {
  auto msg = message_of([] { segment_session(ramp_session(119), 20, 120); });
  EXPECT_NE(msg.find("119"), std::string::npos) << msg;
  EXPECT_NE(msg.find("120"), std::string::npos) << msg;
}

TEST(Segment, OffsetsAreCountedAndNonDecreasing) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    const std::size_t frames = n + rng.below(5000);
    const std::size_t segments = 1 + rng.below(40);
    auto offsets = segment_offsets(frames, segments, n);
    ASSERT_EQ(offsets.size(), segments);
    EXPECT_EQ(offsets.front(), 0u);
    EXPECT_TRUE(std::is_sorted(offsets.begin(), offsets.end()));
    EXPECT_LE(offsets.back() + n, frames);
    if (segments > 1) EXPECT_EQ(offsets.back(), frames - n);
  }
}

TEST(ChannelStats, ConstantChannelGetsUnitStd) {
  LabeledWindow w;
  w.values = Eigen::MatrixXd::Random(30, 10);
  w.values.col(3).setConstant(5.0);
  std::vector<LabeledWindow> ws{w};
  auto s = fit_channel_stats(ws);
  EXPECT_DOUBLE_EQ(s.mean[3], 5.0);
  EXPECT_EQ(s.stddev[3], 1.0);
  for (double sd : s.stddev) EXPECT_GT(sd, 0.0);
}

TEST(ChannelStats, SymmetricValuesHaveZeroMean) {
  LabeledWindow w;
  w.values.resize(4, 10);
  w.values.col(0) << -1, 1, -1, 1;
  for (int c = 1; c < 10; ++c) w.values.col(c) << 1, 2, 3, 4;
  std::vector<LabeledWindow> ws{w};
  auto s = fit_channel_stats(ws);
  EXPECT_EQ(s.mean[0], 0.0);
  EXPECT_DOUBLE_EQ(s.stddev[0], 1.0);
}

/// Two-pass mean/variance over the flattened channel.
std::pair<double, double> two_pass(std::span<const LabeledWindow> ws, int c) {
  double sum = 0.0, n = 0.0;
  for (const auto& w : ws) {
    for (Eigen::Index t = 0; t < w.values.rows(); ++t) {
      sum += w.values(t, c);
      n += 1.0;
    }
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& w : ws) {
    for (Eigen::Index t = 0; t < w.values.rows(); ++t) ss += (w.values(t, c) - mean) * (w.values(t, c) - mean);
  }
  return {mean, std::sqrt(ss / n)};
}

TEST(ChannelStats, MatchesTwoPassOracleOnPooledSets) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LabeledWindow> a, b;
    for (std::size_t k = 0, n = 1 + rng.below(5); k < n; ++k) {
      auto w = testing::random_window(1 + static_cast<Eigen::Index>(rng.below(30)), 10, rng);
      w.values.array() = w.values.array() * rng.uniform(0.5, 20) + rng.uniform(-100, 100);
      a.push_back(w);
    }
    for (std::size_t k = 0, n = 1 + rng.below(5); k < n; ++k) {
      b.push_back(testing::random_window(1 + static_cast<Eigen::Index>(rng.below(30)), 10, rng));
    }
    std::vector<LabeledWindow> all = a;
    all.insert(all.end(), b.begin(), b.end());
    auto s = fit_channel_stats(all);
    for (int c = 0; c < 10; ++c) {
      auto [mean, sd] = two_pass(all, c);
      EXPECT_NEAR(s.mean[static_cast<std::size_t>(c)], mean, 1e-10 * std::max(1.0, std::abs(mean)));
      EXPECT_NEAR(s.stddev[static_cast<std::size_t>(c)], sd, 1e-10 * std::max(1.0, sd));
    }
  }
}

TEST(ChannelStats, EmptyInputFails) {
  EXPECT_THROW(fit_channel_stats({}), DataError);
}

TEST(Normalize, MeanWindowBecomesZero) {
  ChannelStats s;
  for (std::size_t c = 0; c < 10; ++c) {
    s.mean[c] = static_cast<double>(c) - 3.0;
    s.stddev[c] = 0.5 + static_cast<double>(c);
  }
  LabeledWindow w;
  w.values.resize(7, 10);
  for (int c = 0; c < 10; ++c) w.values.col(c).setConstant(s.mean[static_cast<std::size_t>(c)]);
  w.sems_label = 6.0;
  auto n = normalize(w, s);
  EXPECT_EQ(n.values, Eigen::MatrixXd::Zero(7, 10));
  EXPECT_EQ(n.sems_label, 6.0);
}

TEST(Normalize, IdentityStatsAreIdentity) {
  Rng rng(3);
  auto w = testing::random_window(9, 10, rng, 2.0);
  EXPECT_EQ(normalize(w, ChannelStats::identity()).values, w.values);
}

TEST(Normalize, RoundTripWithinRelativeTolerance) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    ChannelStats s;
    for (std::size_t c = 0; c < 10; ++c) {
      s.mean[c] = rng.uniform(-50, 50);
      s.stddev[c] = rng.uniform(0.01, 30);
    }
    auto w = testing::random_window(20, 10, rng);
    w.values *= rng.uniform(0.1, 100);
    auto back = denormalize(normalize(w, s), s);
    for (Eigen::Index t = 0; t < w.values.rows(); ++t) {
      for (Eigen::Index c = 0; c < 10; ++c) {
        const double x = w.values(t, c);
        const double scale = std::max(std::abs(x), std::abs(s.mean[static_cast<std::size_t>(c)]));
        EXPECT_LE(std::abs(back.values(t, c) - x), 1e-12 * scale);
      }
    }
  }
}

TEST(Synthetic, SameSeedIdentical) {
  SynthConfig cfg;
  cfg.children = 4;
  cfg.frames = 300;
  auto a = generate_synthetic_cohort(cfg, 42);
  auto b = generate_synthetic_cohort(cfg, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sems_label, b[i].sems_label);
    EXPECT_EQ(a[i].meta.age_years, b[i].meta.age_years);
    for (std::size_t k = 0; k < a[i].frames.size(); ++k) {
      ASSERT_EQ(a[i].frames[k].values, b[i].frames[k].values);
    }
  }
  auto c = generate_synthetic_cohort(cfg, 43);
  EXPECT_NE(a[0].sems_label, c[0].sems_label);
}

/// Recomputes the documented score function from the generated channels.
double documented_score(const WritingSession& s, double scale_max, bool tip_only) {
  const auto n = static_cast<double>(s.frames.size());
  double mean = 0.0;
  for (const auto& f : s.frames) mean += f.values[0];
  mean /= n;
  double var = 0.0, energy = 0.0;
  for (const auto& f : s.frames) {
    var += (f.values[0] - mean) * (f.values[0] - mean);
    energy += f.values[5] * f.values[5] + f.values[6] * f.values[6] + f.values[7] * f.values[7];
  }
  const double s_tip = std::clamp((std::sqrt(var / n) - 0.1) / 0.9, 0.0, 1.0);
  const double s_gyro = std::clamp((std::sqrt(energy / n) - 5.0) / 22.0, 0.0, 1.0);
  return tip_only ? scale_max * s_tip : scale_max * (0.5 * s_tip + 0.5 * s_gyro);
}

TEST(Synthetic, NoiselessLabelEqualsDocumentedScore) {
  for (SynthMode mode : {SynthMode::kMixed, SynthMode::kTipOnly}) {
    SynthConfig cfg;
    cfg.children = 8;
    cfg.frames = 500;
    cfg.noise = 0.0;
    cfg.mode = mode;
    for (const auto& s : generate_synthetic_cohort(cfg, 5)) {
      EXPECT_NEAR(s.sems_label, documented_score(s, 12.0, mode == SynthMode::kTipOnly), 1e-9);
    }
  }
}

TEST(Synthetic, SessionsSatisfyInvariants) {
  SynthConfig cfg;
  cfg.children = 10;
  cfg.frames = 400;
  cfg.noise = 3.0;
  for (const auto& s : generate_synthetic_cohort(cfg, 6)) {
    EXPECT_NO_THROW(validate_session(s, cfg.scale_max));
    EXPECT_EQ(s.frames.size(), 400u);
    EXPECT_EQ(s.frames[1].timestamp_ms - s.frames[0].timestamp_ms, 10);
  }
}

TEST(Synthetic, ConstantModeCarriesConstant) {
  SynthConfig cfg;
  cfg.children = 3;
  cfg.frames = 50;
  cfg.mode = SynthMode::kConstant;
  cfg.constant_label = 4.5;
  cfg.noise = 0.0;
  for (const auto& s : generate_synthetic_cohort(cfg, 1)) EXPECT_EQ(s.sems_label, 4.5);
}

TEST(Synthetic, NonPositiveSizesRejected) {
  SynthConfig cfg;
  cfg.children = 0;
  EXPECT_THROW(generate_synthetic_cohort(cfg, 1), ConfigError);
  cfg.children = 3;
  cfg.frames = -1;
  EXPECT_THROW(generate_synthetic_cohort(cfg, 1), ConfigError);
}

}  // namespace
}  // namespace semsnet
