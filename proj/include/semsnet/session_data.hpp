#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace semsnet {

inline constexpr std::size_t kNumChannels = 10;

enum class Channel : std::size_t {
  kTipPressure = 0,
  kFingerPressure,
  kAccX,
  kAccY,
  kAccZ,
  kGyroX,
  kGyroY,
  kGyroZ,
  kAngle,
  kWritingSpeed,
};

/// Column names, in storage order, as they appear in session CSV headers.
inline constexpr std::array<std::string_view, kNumChannels> kChannelNames = {
    "tip_pressure", "finger_pressure", "acc_x",  "acc_y", "acc_z",
    "gyro_x",       "gyro_y",          "gyro_z", "angle", "writing_speed"};

constexpr std::size_t channel_index(Channel c) {
  return static_cast<std::size_t>(c);
}

/// One timestamped sample of the ten pen channels.
struct SensorFrame {
  std::int64_t timestamp_ms = 0;
  std::array<double, kNumChannels> values{};

  double operator[](Channel c) const { return values[channel_index(c)]; }
  double& operator[](Channel c) { return values[channel_index(c)]; }
};

enum class Gender : int { kFemale = 0, kMale = 1 };

struct ChildMeta {
  std::string child_id;
  double age_years = 0.0;
  Gender gender = Gender::kFemale;
};

inline double gender_code(Gender g) { return static_cast<double>(g); }

struct WritingSession {
  ChildMeta meta;
  std::vector<SensorFrame> frames;
  double sems_label = 0.0;
};

/// Fixed window of `n` timesteps (rows) by 10 channels (columns).
struct LabeledWindow {
  Eigen::MatrixXd values;
  double sems_label = 0.0;
  std::string source_child;

  std::size_t length() const { return static_cast<std::size_t>(values.rows()); }
};

struct ChannelStats {
  std::array<double, kNumChannels> mean{};
  std::array<double, kNumChannels> stddev{};

  static ChannelStats identity();
};

inline constexpr double kDefaultScaleMax = 12.0;
inline constexpr double kManuscriptScaleMax = 14.0;

// -- validation and file I/O -------------------------------------------------

/// Throws DataError if the session violates any WritingSession/SensorFrame
/// invariant (empty frames, non-increasing timestamps, negative pressure or
/// speed, non-finite values, label outside [0, scale_max], bad age).
void validate_session(const WritingSession& session, double scale_max);

/// Reads one session CSV (header + one row per frame). Errors name the file
/// and 1-based line number.
std::vector<SensorFrame> read_session_frames(const std::filesystem::path& path);

void write_session_frames(const std::filesystem::path& path,
                          std::span<const SensorFrame> frames);

/// Parses a cohort manifest and every session file it references. Session
/// paths are resolved relative to the manifest's directory.
std::vector<WritingSession> parse_cohort(const std::filesystem::path& manifest_path,
                                         double scale_max = kDefaultScaleMax);

/// Writes `manifest.csv` and `sessions/<child_id>.csv` under `dir`. Returns
/// the manifest path.
std::filesystem::path write_cohort(std::span<const WritingSession> cohort,
                                   const std::filesystem::path& dir);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// -- windowing and normalization ---------------------------------------------

inline constexpr std::size_t kDefaultNumSegments = 20;
inline constexpr std::size_t kDefaultWindowLen = 120;

/// Start offsets floor(k * (T - n) / (segments - 1)), k = 0..segments-1.
std::vector<std::size_t> segment_offsets(std::size_t num_frames,
                                         std::size_t num_segments,
                                         std::size_t window_len);

std::vector<LabeledWindow> segment_session(const WritingSession& session,
                                           std::size_t num_segments = kDefaultNumSegments,
                                           std::size_t window_len = kDefaultWindowLen);

/// Pooled per-channel mean and population standard deviation over every
/// timestep of every window. Channels with zero spread get stddev 1.
ChannelStats fit_channel_stats(std::span<const LabeledWindow> windows);

LabeledWindow normalize(const LabeledWindow& window, const ChannelStats& stats);
LabeledWindow denormalize(const LabeledWindow& window, const ChannelStats& stats);

std::vector<LabeledWindow> normalize_all(std::span<const LabeledWindow> windows,
                                         const ChannelStats& stats);

// -- synthetic cohorts -------------------------------------------------------

enum class SynthMode {
  /// Label driven by tip-pressure variability and gyro energy.
  kMixed,
  /// Label driven by tip-pressure variability only; every other channel is
  /// label-independent noise.
  kTipOnly,
  /// Every child carries `constant_label`.
  kConstant,
};

std::string_view to_string(SynthMode mode);
SynthMode synth_mode_from_string(std::string_view text);

struct SynthConfig {
  int children = 40;
  int frames = 2400;
  int sample_period_ms = 10;
  double scale_max = kDefaultScaleMax;
  /// Half-width of the uniform label noise added to the score function.
  double noise = 0.25;
  SynthMode mode = SynthMode::kMixed;
  double constant_label = 5.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Documented ground-truth score of a synthetic session, before noise.
///
/// With sd_tip the population standard deviation of tip_pressure over the
/// whole session and rms_gyro = sqrt(mean over frames of gyro_x^2 + gyro_y^2
/// + gyro_z^2):
///
///   s_tip  = clamp((sd_tip - 0.1) / 0.9, 0, 1)
///   s_gyro = clamp((rms_gyro - 5) / 22, 0, 1)
///   kMixed:    score = scale_max * (0.5 * s_tip + 0.5 * s_gyro)
///   kTipOnly:  score = scale_max * s_tip
///   kConstant: score = constant_label
///
/// The generated label is clamp(score + noise * U(-1, 1), 0, scale_max).
double synthetic_score(std::span<const SensorFrame> frames, const SynthConfig& config);

/// Deterministic cohort for a fixed seed. Children are named `child_000`,...
///
/// Per child, with severities u, w ~ U(0, 1):
///   tip_pressure    = max(0, 3 + (0.1 + 0.9 u) * N(0,1))
///   gyro            = tremor of amplitude 2 + 28 w deg/s at 6-10 Hz plus
///                     N(0, 3^2) noise per axis
///   remaining channels: white noise around population baselines (the tilt
///   angle also carries a 0.3 Hz sway with a random phase).
/// No channel has a per-child offset, so a window does not identify its child
/// except through the label-bearing statistics.
/// In kTipOnly mode there is no tremor: the gyro axes are white noise only.
std::vector<WritingSession> generate_synthetic_cohort(const SynthConfig& config,
                                                      std::uint64_t seed);

}  // namespace semsnet
