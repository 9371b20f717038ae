#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace semsnet::detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// z (4H x B, gate order i f o g) -> activated gates in place.
inline void activate_gates(Eigen::MatrixXd& z, Eigen::Index hidden) {
  z.topRows(3 * hidden) = z.topRows(3 * hidden).unaryExpr([](double v) { return sigmoid(v); });
  z.bottomRows(hidden) = z.bottomRows(hidden).array().tanh();
}

/// Column-wise softmax, shifted by the column max.
inline Eigen::MatrixXd softmax_cols(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const double mx = logits.col(b).maxCoeff();
    out.col(b) = (logits.col(b).array() - mx).exp().matrix();
    out.col(b) /= out.col(b).sum();
  }
  return out;
}

}  // namespace semsnet::detail
