#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace semsnet {

enum class Kernel { kRbf, kLinear };

std::string_view to_string(Kernel kernel);
Kernel kernel_from_string(std::string_view text);

struct SVRHyper {
  double C = 10.0;
  double epsilon = 0.1;
  Kernel kernel = Kernel::kRbf;
  /// RBF width; <= 0 selects 1 / (3 * variance of the standardized features).
  double gamma = 0.0;
  /// Stop once the maximal KKT violation of the working pair drops below this.
  /// At 1e-3 the decision function can still sit ~2e-3 from the exact optimum.
  double tolerance = 1e-6;
  long max_iterations = 10'000'000;

  void validate() const;
};

/// (lstm_score, age_years, gender_code)
using SvrInput = std::array<double, 3>;

struct SVRModel {
  Kernel kernel = Kernel::kRbf;
  double gamma = 1.0;
  double C = 10.0;
  double epsilon = 0.1;
  /// Standardized feature vectors with a nonzero dual coefficient.
  std::vector<SvrInput> support_vectors;
  /// beta_i = alpha_i - alpha_i^*, |beta_i| <= C.
  std::vector<double> dual_coef;
  double bias = 0.0;
  SvrInput feature_mean{0.0, 0.0, 0.0};
  SvrInput feature_std{1.0, 1.0, 1.0};

  SvrInput standardize(const SvrInput& raw) const;
  double kernel_value(const SvrInput& a, const SvrInput& b) const;

  /// Unclamped sum_i beta_i K(sv_i, x) + b on a raw input.
  double decision(const SvrInput& raw) const;
};

/// Epsilon-SVR dual solved by SMO with second-order working-set selection.
/// Features are standardized internally (zero-spread columns keep std 1).
SVRModel fit_svr(std::span<const SvrInput> rows, std::span<const double> targets,
                 const SVRHyper& hyper);

/// decision(x) clamped to [0, scale_max].
double predict_svr(const SVRModel& model, const SvrInput& x, double scale_max);

}  // namespace semsnet
