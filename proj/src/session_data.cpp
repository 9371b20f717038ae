#include "semsnet/session_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "semsnet/errors.hpp"
#include "semsnet/io.hpp"
#include "semsnet/rng.hpp"

namespace semsnet {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestHeader =
    "child_id,age_years,gender,sems_label,session_file";

std::string session_header() {
  std::string h = "timestamp_ms";
  for (auto name : kChannelNames) {
    h += ',';
    h += name;
  }
  return h;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string location(const fs::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

double parse_real(std::string_view cell, const fs::path& file, std::size_t line,
                  std::string_view column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
    throw DataError(location(file, line) + ": non-numeric value '" + std::string(cell) +
                    "' in column " + std::string(column));
  }
  if (!std::isfinite(value)) {
    throw DataError(location(file, line) + ": non-finite value in column " +
                    std::string(column));
  }
  return value;
}

std::int64_t parse_int(std::string_view cell, const fs::path& file, std::size_t line,
                       std::string_view column) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
    throw DataError(location(file, line) + ": non-integer value '" + std::string(cell) +
                    "' in column " + std::string(column));
  }
  return value;
}

/// Reads all lines; strips a trailing '\r' and drops a final empty line.
std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool is_nonnegative_channel(std::size_t c) {
  return c == channel_index(Channel::kTipPressure) ||
         c == channel_index(Channel::kFingerPressure) ||
         c == channel_index(Channel::kWritingSpeed);
}

}  // namespace

ChannelStats ChannelStats::identity() {
  ChannelStats s;
  s.mean.fill(0.0);
  s.stddev.fill(1.0);
  return s;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void validate_session(const WritingSession& session, double scale_max) {
  const std::string& id = session.meta.child_id;
  if (session.frames.empty()) throw DataError("session " + id + ": no frames");
  if (!(session.meta.age_years > 0.0) || !std::isfinite(session.meta.age_years)) {
    throw DataError("session " + id + ": age_years must be positive");
  }
  if (session.meta.gender != Gender::kFemale && session.meta.gender != Gender::kMale) {
    throw DataError("session " + id + ": invalid gender code");
  }
  if (!(session.sems_label >= 0.0 && session.sems_label <= scale_max)) {
    throw DataError("session " + id + ": sems_label " + format_double(session.sems_label) +
                    " outside [0, " + format_double(scale_max) + "]");
  }
  for (std::size_t i = 0; i < session.frames.size(); ++i) {
    const auto& f = session.frames[i];
    if (i > 0 && f.timestamp_ms <= session.frames[i - 1].timestamp_ms) {
      throw DataError("session " + id + ": non-increasing timestamp at frame " +
                      std::to_string(i));
    }
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      if (!std::isfinite(f.values[c])) {
        throw DataError("session " + id + ": non-finite " + std::string(kChannelNames[c]) +
                        " at frame " + std::to_string(i));
      }
      if (is_nonnegative_channel(c) && f.values[c] < 0.0) {
        throw DataError("session " + id + ": negative " + std::string(kChannelNames[c]) +
                        " at frame " + std::to_string(i));
      }
    }
  }
}

std::vector<SensorFrame> read_session_frames(const fs::path& path) {
  auto lines = read_lines(path);
  if (lines.empty() || lines.front() != session_header()) {
    throw DataError(location(path, 1) + ": expected header '" + session_header() + "'");
  }
  std::vector<SensorFrame> frames;
  frames.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto cells = split_commas(lines[i]);
    if (cells.size() != kNumChannels + 1) {
      throw DataError(location(path, line_no) + ": expected " +
                      std::to_string(kNumChannels + 1) + " columns, found " +
                      std::to_string(cells.size()));
    }
    SensorFrame f;
    f.timestamp_ms = parse_int(cells[0], path, line_no, "timestamp_ms");
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      f.values[c] = parse_real(cells[c + 1], path, line_no, kChannelNames[c]);
      if (is_nonnegative_channel(c) && f.values[c] < 0.0) {
        throw DataError(location(path, line_no) + ": negative " +
                        std::string(kChannelNames[c]));
      }
    }
    if (!frames.empty() && f.timestamp_ms <= frames.back().timestamp_ms) {
      throw DataError(location(path, line_no) + ": non-monotonic timestamp " +
                      std::to_string(f.timestamp_ms) + " after " +
                      std::to_string(frames.back().timestamp_ms));
    }
    frames.push_back(f);
  }
  return frames;
}

void write_session_frames(const fs::path& path, std::span<const SensorFrame> frames) {
  std::string text = session_header();
  text += '\n';
  for (const auto& f : frames) {
    text += std::to_string(f.timestamp_ms);
    for (double v : f.values) {
      text += ',';
      text += format_double(v);
    }
    text += '\n';
  }
  write_file_atomic(path, text);
}

std::vector<WritingSession> parse_cohort(const fs::path& manifest_path, double scale_max) {
  if (!fs::exists(manifest_path)) {
    throw DataError("manifest not found: " + manifest_path.string());
  }
  auto lines = read_lines(manifest_path);
  if (lines.empty() || lines.front() != kManifestHeader) {
    throw DataError(location(manifest_path, 1) + ": expected header '" +
                    std::string(kManifestHeader) + "'");
  }
  const fs::path base = manifest_path.parent_path();
  std::vector<WritingSession> cohort;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto cells = split_commas(lines[i]);
    if (cells.size() != 5) {
      throw DataError(location(manifest_path, line_no) + ": expected 5 columns, found " +
                      std::to_string(cells.size()));
    }
    WritingSession s;
    s.meta.child_id = std::string(cells[0]);
    if (s.meta.child_id.empty()) {
      throw DataError(location(manifest_path, line_no) + ": empty child_id");
    }
    s.meta.age_years = parse_real(cells[1], manifest_path, line_no, "age_years");
    if (!(s.meta.age_years > 0.0)) {
      throw DataError(location(manifest_path, line_no) + ": age_years must be positive");
    }
    if (cells[2] == "f") {
      s.meta.gender = Gender::kFemale;
    } else if (cells[2] == "m") {
      s.meta.gender = Gender::kMale;
    } else {
      throw DataError(location(manifest_path, line_no) + ": gender must be 'f' or 'm'");
    }
    s.sems_label = parse_real(cells[3], manifest_path, line_no, "sems_label");
    if (s.sems_label < 0.0 || s.sems_label > scale_max) {
      throw DataError(location(manifest_path, line_no) + ": sems_label " +
                      std::string(cells[3]) + " outside [0, " + format_double(scale_max) +
                      "]");
    }
    fs::path session_path = base / fs::path(std::string(cells[4]));
    if (!fs::exists(session_path)) {
      throw DataError(location(manifest_path, line_no) + ": session file not found: " +
                      session_path.string());
    }
    s.frames = read_session_frames(session_path);
    if (s.frames.empty()) {
      throw DataError(location(session_path, 1) + ": session has no frames");
    }
    cohort.push_back(std::move(s));
  }
  return cohort;
}

fs::path write_cohort(std::span<const WritingSession> cohort, const fs::path& dir) {
  fs::create_directories(dir / "sessions");
  std::string manifest(kManifestHeader);
  manifest += '\n';
  for (const auto& s : cohort) {
    const std::string rel = "sessions/" + s.meta.child_id + ".csv";
    write_session_frames(dir / rel, s.frames);
    manifest += s.meta.child_id;
    manifest += ',';
    manifest += format_double(s.meta.age_years);
    manifest += s.meta.gender == Gender::kFemale ? ",f," : ",m,";
    manifest += format_double(s.sems_label);
    manifest += ',';
    manifest += rel;
    manifest += '\n';
  }
  const fs::path manifest_path = dir / "manifest.csv";
  write_file_atomic(manifest_path, manifest);
  return manifest_path;
}

// -- windowing ----------------------------------------------------------------

std::vector<std::size_t> segment_offsets(std::size_t num_frames, std::size_t num_segments,
                                         std::size_t window_len) {
  if (num_segments == 0) throw ConfigError("num_segments must be positive");
  if (window_len == 0) throw ConfigError("window_len must be positive");
  if (num_frames < window_len) {
    throw DataError("session too short: " + std::to_string(num_frames) +
                    " frames, window_len " + std::to_string(window_len));
  }
  std::vector<std::size_t> offsets(num_segments, 0);
  if (num_segments == 1) return offsets;
  const std::size_t span = num_frames - window_len;
  for (std::size_t k = 0; k < num_segments; ++k) {
    offsets[k] = k * span / (num_segments - 1);
  }
  return offsets;
}

std::vector<LabeledWindow> segment_session(const WritingSession& session,
                                           std::size_t num_segments,
                                           std::size_t window_len) {
  std::vector<std::size_t> offsets;
  try {
    offsets = segment_offsets(session.frames.size(), num_segments, window_len);
  } catch (const DataError& e) {
    throw DataError("session " + session.meta.child_id + ": " + e.what());
  }
  if (num_segments > 1 && offsets.back() < num_segments - 1) {
    std::clog << "warning: session " << session.meta.child_id << " has "
              << session.frames.size() << " frames; " << num_segments
              << " windows of length " << window_len << " overlap as duplicates\n";
  }
  std::vector<LabeledWindow> windows;
  windows.reserve(num_segments);
  for (std::size_t start : offsets) {
    LabeledWindow w;
    w.values.resize(static_cast<Eigen::Index>(window_len), kNumChannels);
    for (std::size_t t = 0; t < window_len; ++t) {
      const auto& f = session.frames[start + t];
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        w.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = f.values[c];
      }
    }
    w.sems_label = session.sems_label;
    w.source_child = session.meta.child_id;
    windows.push_back(std::move(w));
  }
  return windows;
}

ChannelStats fit_channel_stats(std::span<const LabeledWindow> windows) {
  if (windows.empty()) throw DataError("fit_channel_stats: no windows");
  ChannelStats stats;
  // Welford accumulation, merged per window.
  std::array<double, kNumChannels> mean{};
  std::array<double, kNumChannels> m2{};
  double count = 0.0;
  for (const auto& w : windows) {
    if (w.values.cols() != static_cast<Eigen::Index>(kNumChannels)) {
      throw DataError("fit_channel_stats: window has wrong channel count");
    }
    for (Eigen::Index t = 0; t < w.values.rows(); ++t) {
      count += 1.0;
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        double x = w.values(t, static_cast<Eigen::Index>(c));
        double delta = x - mean[c];
        mean[c] += delta / count;
        m2[c] += delta * (x - mean[c]);
      }
    }
  }
  if (count == 0.0) throw DataError("fit_channel_stats: windows are empty");
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    stats.mean[c] = mean[c];
    double sd = std::sqrt(m2[c] / count);
    // Constant channel: relative spread at rounding level.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean[c])))) sd = 1.0;
    stats.stddev[c] = sd;
  }
  return stats;
}

LabeledWindow normalize(const LabeledWindow& window, const ChannelStats& stats) {
  LabeledWindow out = window;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    auto col = out.values.col(static_cast<Eigen::Index>(c));
    col = (col.array() - stats.mean[c]) / stats.stddev[c];
  }
  return out;
}

LabeledWindow denormalize(const LabeledWindow& window, const ChannelStats& stats) {
  LabeledWindow out = window;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    auto col = out.values.col(static_cast<Eigen::Index>(c));
    col = col.array() * stats.stddev[c] + stats.mean[c];
  }
  return out;
}

std::vector<LabeledWindow> normalize_all(std::span<const LabeledWindow> windows,
                                         const ChannelStats& stats) {
  std::vector<LabeledWindow> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(normalize(w, stats));
  return out;
}

// -- synthetic cohorts --------------------------------------------------------

std::string_view to_string(SynthMode mode) {
  switch (mode) {
    case SynthMode::kMixed: return "mixed";
    case SynthMode::kTipOnly: return "tip_only";
    case SynthMode::kConstant: return "constant";
  }
  return "mixed";
}

SynthMode synth_mode_from_string(std::string_view text) {
  if (text == "mixed") return SynthMode::kMixed;
  if (text == "tip_only") return SynthMode::kTipOnly;
  if (text == "constant") return SynthMode::kConstant;
  throw ConfigError("synth.mode: unknown mode '" + std::string(text) + "'");
}

void SynthConfig::validate() const {
  if (children <= 0) throw ConfigError("synth.children must be positive");
  if (frames <= 0) throw ConfigError("synth.frames must be positive");
  if (sample_period_ms <= 0) throw ConfigError("synth.sample_period_ms must be positive");
  if (!(scale_max > 0.0) || scale_max > kManuscriptScaleMax) {
    throw ConfigError("synth.scale_max must be in (0, 14]");
  }
  if (!(noise >= 0.0)) throw ConfigError("synth.noise must be non-negative");
  if (mode == SynthMode::kConstant && !(constant_label >= 0.0 && constant_label <= scale_max)) {
    throw ConfigError("synth.constant_label must lie in [0, scale_max]");
  }
}

double synthetic_score(std::span<const SensorFrame> frames, const SynthConfig& config) {
  if (config.mode == SynthMode::kConstant) return config.constant_label;
  if (frames.empty()) throw DataError("synthetic_score: no frames");
  const double n = static_cast<double>(frames.size());
  double tip_mean = 0.0;
  for (const auto& f : frames) tip_mean += f[Channel::kTipPressure];
  tip_mean /= n;
  double tip_var = 0.0;
  double gyro_energy = 0.0;
  for (const auto& f : frames) {
    double d = f[Channel::kTipPressure] - tip_mean;
    tip_var += d * d;
    gyro_energy += f[Channel::kGyroX] * f[Channel::kGyroX] +
                   f[Channel::kGyroY] * f[Channel::kGyroY] +
                   f[Channel::kGyroZ] * f[Channel::kGyroZ];
  }
  tip_var /= n;
  gyro_energy /= n;
  const double s_tip = std::clamp((std::sqrt(tip_var) - 0.1) / 0.9, 0.0, 1.0);
  const double s_gyro = std::clamp((std::sqrt(gyro_energy) - 5.0) / 22.0, 0.0, 1.0);
  if (config.mode == SynthMode::kTipOnly) return config.scale_max * s_tip;
  return config.scale_max * (0.5 * s_tip + 0.5 * s_gyro);
}

std::vector<WritingSession> generate_synthetic_cohort(const SynthConfig& config,
                                                      std::uint64_t seed) {
  config.validate();
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<WritingSession> cohort;
  cohort.reserve(static_cast<std::size_t>(config.children));
  for (int child = 0; child < config.children; ++child) {
    Rng rng(derive_seed(seed, "synth.child", static_cast<std::uint64_t>(child)));
    WritingSession s;
    char id[32];
    std::snprintf(id, sizeof(id), "child_%03d", child);
    s.meta.child_id = id;
    s.meta.age_years = rng.uniform(7.0, 9.0);
    s.meta.gender = rng.uniform() < 0.5 ? Gender::kFemale : Gender::kMale;

    const double u = rng.uniform();
    const double w = rng.uniform();
    const double tip_sd = 0.1 + 0.9 * u;
    const double tremor_amp = config.mode == SynthMode::kTipOnly ? 0.0 : 2.0 + 28.0 * w;
    const double tremor_hz = rng.uniform(6.0, 10.0);
    const double tremor_phase = rng.uniform(0.0, kTwoPi);
    const double angle_phase = rng.uniform(0.0, kTwoPi);

    s.frames.resize(static_cast<std::size_t>(config.frames));
    for (int k = 0; k < config.frames; ++k) {
      auto& f = s.frames[static_cast<std::size_t>(k)];
      f.timestamp_ms = static_cast<std::int64_t>(k) * config.sample_period_ms;
      const double t = static_cast<double>(f.timestamp_ms) / 1000.0;
      const double tremor = kTwoPi * tremor_hz * t + tremor_phase;
      f[Channel::kTipPressure] = std::max(0.0, 3.0 + tip_sd * rng.normal());
      f[Channel::kFingerPressure] = std::max(0.0, 2.0 + 0.2 * rng.normal());
      f[Channel::kAccX] = 0.5 * rng.normal();
      f[Channel::kAccY] = 0.5 * rng.normal();
      f[Channel::kAccZ] = 9.81 + 0.5 * rng.normal();
      f[Channel::kGyroX] = tremor_amp * std::sin(tremor) + 3.0 * rng.normal();
      f[Channel::kGyroY] = 0.7 * tremor_amp * std::cos(tremor) + 3.0 * rng.normal();
      f[Channel::kGyroZ] = 3.0 * rng.normal();
      f[Channel::kAngle] = 55.0 + 5.0 * std::sin(kTwoPi * 0.3 * t + angle_phase) + rng.normal();
      f[Channel::kWritingSpeed] = std::max(0.0, 20.0 + 5.0 * rng.normal());
    }
    const double score = synthetic_score(s.frames, config);
    const double jitter = config.noise * rng.uniform(-1.0, 1.0);
    s.sems_label = std::clamp(score + jitter, 0.0, config.scale_max);
    cohort.push_back(std::move(s));
  }
  return cohort;
}

}  // namespace semsnet
