#include "semsnet/svr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qp_oracle.hpp"
#include "semsnet/errors.hpp"
#include "semsnet/rng.hpp"

namespace semsnet {
namespace {

struct Dataset {
  std::vector<SvrInput> rows;
  std::vector<double> targets;
};

Dataset random_dataset(Rng& rng, std::size_t n) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.rows.push_back({rng.uniform(0, 12), rng.uniform(7, 9), rng.uniform() < 0.5 ? 0.0 : 1.0});
    d.targets.push_back(rng.uniform(0, 12));
  }
  return d;
}

testing::QpSolution oracle_for(const Dataset& d, const SVRModel& m) {
  std::vector<std::array<double, 3>> z;
  for (const auto& r : d.rows) z.push_back(m.standardize(r));
  return testing::solve_svr_dual(z, d.targets, m.C, m.epsilon, m.kernel == Kernel::kLinear,
                                 m.gamma);
}

TEST(Svr, ConstantTargetsPredictConstant) {
  Rng rng(1);
  auto d = random_dataset(rng, 6);
  std::fill(d.targets.begin(), d.targets.end(), 4.0);
  auto m = fit_svr(d.rows, d.targets, SVRHyper{});
  EXPECT_TRUE(m.dual_coef.empty());
  for (int k = 0; k < 20; ++k) {
    SvrInput x{rng.uniform(0, 12), rng.uniform(7, 9), 1.0};
    EXPECT_NEAR(m.decision(x), 4.0, 1e-6);
  }
  auto oracle = oracle_for(d, m);
  for (double b : oracle.beta) EXPECT_NEAR(b, 0.0, 1e-9);
  EXPECT_NEAR(oracle.bias, 4.0, 1e-6);
}

TEST(Svr, LinearKernelMatchesQpOracle) {
  Dataset d;
  for (int i = 0; i < 5; ++i) {
    d.rows.push_back({static_cast<double>(i), 7.0 + 0.3 * i, static_cast<double>(i % 2)});
    d.targets.push_back(1.0 + 1.5 * i);
  }
  SVRHyper h;
  h.kernel = Kernel::kLinear;
  h.epsilon = 0.01;
  auto m = fit_svr(d.rows, d.targets, h);
  auto oracle = oracle_for(d, m);
  for (const auto& r : d.rows) {
    EXPECT_NEAR(m.decision(r), oracle.decision_standardized(m.standardize(r)), 1e-3);
  }
}

TEST(Svr, RandomSmallDatasetsMatchQpOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 12; ++trial) {
    auto d = random_dataset(rng, 2 + rng.below(5));
    SVRHyper h;
    h.C = trial % 3 == 0 ? 1.0 : 10.0;
    h.kernel = trial % 4 == 3 ? Kernel::kLinear : Kernel::kRbf;
    auto m = fit_svr(d.rows, d.targets, h);
    auto oracle = oracle_for(d, m);
    for (int k = 0; k < 10; ++k) {
      SvrInput x = k < static_cast<int>(d.rows.size())
                       ? d.rows[static_cast<std::size_t>(k)]
                       : SvrInput{rng.uniform(0, 12), rng.uniform(7, 9), rng.uniform() < 0.5 ? 0.0 : 1.0};
      EXPECT_NEAR(m.decision(x), oracle.decision_standardized(m.standardize(x)), 1e-3)
          << "trial " << trial;
    }
  }
}

TEST(Svr, DualConstraintsAndKktAudit) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = random_dataset(rng, 3 + rng.below(30));
    SVRHyper h;
    h.C = trial % 2 ? 1.0 : 100.0;
    auto m = fit_svr(d.rows, d.targets, h);
    const double sum = std::accumulate(m.dual_coef.begin(), m.dual_coef.end(), 0.0);
    EXPECT_NEAR(sum, 0.0, 1e-8);
    for (std::size_t i = 0; i < m.dual_coef.size(); ++i) {
      EXPECT_LE(std::abs(m.dual_coef[i]), h.C + 1e-8);
    }
    // Non-bound support vectors sit on the tube edge.
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
      const auto z = m.standardize(d.rows[i]);
      for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
        if (m.support_vectors[s] != z) continue;
        const double b = std::abs(m.dual_coef[s]);
        if (b > 1e-8 && b < h.C - 1e-8) {
          EXPECT_NEAR(std::abs(m.decision(d.rows[i]) - d.targets[i]), h.epsilon, 1e-2);
        }
      }
    }
  }
}

TEST(Svr, EpsilonSeparableDataHasZeroLoss) {
  Rng rng(4);
  Dataset d;
  for (int i = 0; i < 25; ++i) {
    SvrInput x{rng.uniform(0, 12), rng.uniform(7, 9), rng.uniform() < 0.5 ? 0.0 : 1.0};
    d.rows.push_back(x);
    d.targets.push_back(0.8 * x[0] + 0.5 * x[1] - 1.0 * x[2] + rng.uniform(-0.05, 0.05));
  }
  SVRHyper h;
  h.kernel = Kernel::kLinear;
  h.C = 100.0;
  h.epsilon = 0.1;
  auto m = fit_svr(d.rows, d.targets, h);
  double loss = 0.0;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    loss += std::max(0.0, std::abs(m.decision(d.rows[i]) - d.targets[i]) - h.epsilon);
  }
  EXPECT_LT(loss, 1e-2);
}

TEST(Svr, DeterministicFit) {
  Rng rng(5);
  auto d = random_dataset(rng, 15);
  auto a = fit_svr(d.rows, d.targets, SVRHyper{});
  auto b = fit_svr(d.rows, d.targets, SVRHyper{});
  EXPECT_EQ(a.dual_coef, b.dual_coef);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(Svr, RejectsDegenerateInput) {
  std::vector<SvrInput> one{{1.0, 8.0, 0.0}};
  std::vector<double> t{2.0};
  EXPECT_THROW(fit_svr(one, t, SVRHyper{}), DataError);
  EXPECT_THROW(fit_svr({}, {}, SVRHyper{}), DataError);
  std::vector<SvrInput> two{{1.0, 8.0, 0.0}, {NAN, 8.0, 1.0}};
  std::vector<double> t2{1.0, 2.0};
  EXPECT_THROW(fit_svr(two, t2, SVRHyper{}), DataError);
  SVRHyper bad;
  bad.C = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Svr, PredictionClampsToScale) {
  SVRModel m;
  m.bias = 13.2;
  EXPECT_EQ(predict_svr(m, {1.0, 8.0, 0.0}, 12.0), 12.0);
  m.bias = -0.5;
  EXPECT_EQ(predict_svr(m, {1.0, 8.0, 0.0}, 12.0), 0.0);
  m.bias = 3.5;
  EXPECT_EQ(predict_svr(m, {1.0, 8.0, 0.0}, 12.0), 3.5);
}

}  // namespace
}  // namespace semsnet
