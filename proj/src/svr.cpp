#include "semsnet/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "semsnet/errors.hpp"

namespace semsnet {
namespace {

constexpr double kTau = 1e-12;

}  // namespace

std::string_view to_string(Kernel kernel) {
  return kernel == Kernel::kLinear ? "linear" : "rbf";
}

Kernel kernel_from_string(std::string_view text) {
  if (text == "rbf") return Kernel::kRbf;
  if (text == "linear") return Kernel::kLinear;
  throw ConfigError("svr.kernel: unknown kernel '" + std::string(text) + "'");
}

void SVRHyper::validate() const {
  if (!(C > 0.0)) throw ConfigError("svr.C must be positive");
  if (!(epsilon >= 0.0)) throw ConfigError("svr.epsilon must be non-negative");
  if (!(tolerance > 0.0)) throw ConfigError("svr.tolerance must be positive");
  if (max_iterations <= 0) throw ConfigError("svr.max_iterations must be positive");
}

SvrInput SVRModel::standardize(const SvrInput& raw) const {
  SvrInput z;
  for (std::size_t k = 0; k < 3; ++k) z[k] = (raw[k] - feature_mean[k]) / feature_std[k];
  return z;
}

double SVRModel::kernel_value(const SvrInput& a, const SvrInput& b) const {
  if (kernel == Kernel::kLinear) return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  double d2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-gamma * d2);
}

double SVRModel::decision(const SvrInput& raw) const {
  const SvrInput z = standardize(raw);
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) {
    f += dual_coef[i] * kernel_value(support_vectors[i], z);
  }
  return f;
}

double predict_svr(const SVRModel& model, const SvrInput& x, double scale_max) {
  return std::clamp(model.decision(x), 0.0, scale_max);
}

SVRModel fit_svr(std::span<const SvrInput> rows, std::span<const double> targets,
                 const SVRHyper& hyper) {
  hyper.validate();
  if (rows.size() < 2) throw DataError("fit_svr: need at least 2 rows, got " + std::to_string(rows.size()));
  if (rows.size() != targets.size()) throw DataError("fit_svr: row/target count mismatch");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(targets[i]) || !std::isfinite(rows[i][0]) || !std::isfinite(rows[i][1]) ||
        !std::isfinite(rows[i][2])) {
      throw DataError("fit_svr: non-finite value in row " + std::to_string(i));
    }
  }

  const std::size_t l = rows.size();
  SVRModel model;
  model.kernel = hyper.kernel;
  model.C = hyper.C;
  model.epsilon = hyper.epsilon;

  // Standardization.
  for (std::size_t k = 0; k < 3; ++k) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[k];
    mean /= static_cast<double>(l);
    double var = 0.0;
    for (const auto& r : rows) var += (r[k] - mean) * (r[k] - mean);
    double sd = std::sqrt(var / static_cast<double>(l));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) sd = 1.0;
    model.feature_mean[k] = mean;
    model.feature_std[k] = sd;
  }
  std::vector<SvrInput> z(l);
  for (std::size_t i = 0; i < l; ++i) z[i] = model.standardize(rows[i]);

  if (hyper.gamma > 0.0) {
    model.gamma = hyper.gamma;
  } else {
    double mean = 0.0;
    for (const auto& v : z) mean += v[0] + v[1] + v[2];
    mean /= static_cast<double>(3 * l);
    double var = 0.0;
    for (const auto& v : z) {
      for (double x : v) var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(3 * l);
    model.gamma = var > 0.0 ? 1.0 / (3.0 * var) : 1.0 / 3.0;
  }

  std::vector<double> K(l * l);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i; j < l; ++j) {
      K[i * l + j] = K[j * l + i] = model.kernel_value(z[i], z[j]);
    }
  }

  // Doubled problem: variable t < l is alpha_t (sign +1), t >= l is
  // alpha*_{t-l} (sign -1). Q_ts = s_t s_s K(t mod l, s mod l).
  const std::size_t n = 2 * l;
  const double C = hyper.C;
  std::vector<double> alpha(n, 0.0), grad(n);
  std::vector<int> sign(n);
  for (std::size_t t = 0; t < n; ++t) {
    const bool upper = t < l;
    sign[t] = upper ? 1 : -1;
    grad[t] = upper ? hyper.epsilon - targets[t] : hyper.epsilon + targets[t - l];
  }
  auto kidx = [l](std::size_t t) { return t < l ? t : t - l; };
  auto Q = [&](std::size_t t, std::size_t s) {
    return static_cast<double>(sign[t] * sign[s]) * K[kidx(t) * l + kidx(s)];
  };
  auto at_upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  long iter = 0;
  for (; iter < hyper.max_iterations; ++iter) {
    // First index: maximal violation among variables free to move "up".
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (sign[t] == 1) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = t;
        }
      } else if (!at_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i = t;
      }
    }
    if (i == n) break;

    // Second index: largest guaranteed objective decrease.
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    const double qii = Q(i, i);
    for (std::size_t t = 0; t < n; ++t) {
      if (sign[t] == 1) {
        if (!at_lower(t)) {
          const double diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (diff > 0.0) {
            double quad = qii + Q(t, t) - 2.0 * sign[i] * Q(i, t);
            if (quad <= 0.0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= best_obj) {
              best_obj = obj;
              j = t;
            }
          }
        }
      } else if (!at_upper(t)) {
        const double diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (diff > 0.0) {
          double quad = qii + Q(t, t) + 2.0 * sign[i] * Q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    if (gmax + gmax2 < hyper.tolerance || j == n) break;

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double qij = Q(i, j);
    const double qjj = Q(j, j);
    if (sign[i] != sign[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * dai + Q(t, j) * daj;
  }
  if (iter >= hyper.max_iterations) {
    throw TrainingError("fit_svr: SMO did not converge within " + std::to_string(hyper.max_iterations) +
                        " iterations");
  }

  // Bias from free variables, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = sign[t] * grad[t];
    if (at_upper(t)) {
      if (sign[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (sign[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      sum_free += yg;
    }
  }
  const double rho = free_count > 0 ? sum_free / static_cast<double>(free_count) : (ub + lb) / 2.0;
  model.bias = -rho;

  for (std::size_t i = 0; i < l; ++i) {
    const double beta = alpha[i] - alpha[i + l];
    if (beta != 0.0) {
      model.support_vectors.push_back(z[i]);
      model.dual_coef.push_back(beta);
    }
  }
  return model;
}

}  // namespace semsnet
