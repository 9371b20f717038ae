#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semsnet/rng.hpp"
#include "semsnet/session_data.hpp"

namespace semsnet::testing {

inline LabeledWindow random_window(Eigen::Index steps, Eigen::Index channels, Rng& rng,
                                   double label = 0.0) {
  LabeledWindow w;
  w.values.resize(steps, channels);
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index c = 0; c < channels; ++c) w.values(t, c) = rng.normal();
  }
  w.sems_label = label;
  w.source_child = "rand";
  return w;
}

inline std::vector<LabeledWindow> random_windows(std::size_t count, Eigen::Index steps, Rng& rng) {
  std::vector<LabeledWindow> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(random_window(steps, static_cast<Eigen::Index>(kNumChannels), rng,
                                rng.uniform(0.0, 12.0)));
  }
  return out;
}

/// Relative error with a floor on the denominator: central differences with
/// eps 1e-5 carry ~1e-10 absolute noise, so gradients below 1e-5 are
/// compared absolutely.
inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-5});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace semsnet::testing
