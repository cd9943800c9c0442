#include <gtest/gtest.h>

#include <Eigen/QR>
#include <random>

#include "cqr/error.hpp"
#include "cqr/estimator.hpp"
#include "cqr/oracles.hpp"
#include "support.hpp"

using testing_support::one_sample;

namespace {

cqr::FitConfig full_range() {
  cqr::FitConfig c;
  c.tau_max = 1.0 - 1e-12;
  return c;
}

}  // namespace

TEST(Fit, OneSampleUncensored) {
  const auto q = cqr::fit(one_sample({1, 2, 3}, {1, 1, 1}), full_range());
  ASSERT_EQ(q.segment_count(), 3u);
  EXPECT_EQ(q.breakpoints()[0], 0.0);
  EXPECT_NEAR(q.breakpoints()[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(q.breakpoints()[2], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(q.coefficients()[0][0], 1.0);
  EXPECT_EQ(q.coefficients()[1][0], 2.0);
  EXPECT_EQ(q.coefficients()[2][0], 3.0);
  EXPECT_EQ(q.tau_end(), 1.0);
}

TEST(Fit, OneSampleFirstCensored) {
  const auto q = cqr::fit(one_sample({1, 2, 3}, {0, 1, 1}), full_range());
  ASSERT_EQ(q.segment_count(), 2u);
  EXPECT_EQ(q.breakpoints()[1], 0.5);
  EXPECT_EQ(q.coefficients()[0][0], 2.0);
  EXPECT_EQ(q.coefficients()[1][0], 3.0);
  EXPECT_EQ(q.tau_end(), 1.0);
}

TEST(Fit, LastObservationCensoredGivesLastFollowUp) {
  const auto d = one_sample({1, 2, 3}, {1, 1, 0});
  const auto q = cqr::fit(d, full_range());
  EXPECT_EQ(q.coefficients().back()[0], 3.0);
  EXPECT_EQ(q.flags().back(), cqr::SegmentFlag::Nonunique);
  EXPECT_NEAR(q.tau_end(), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(cqr::oracles::km_quantile(d, 0.9), 3.0);
}

TEST(Fit, TiedEventsMatchKaplanMeierMass) {
  const auto q = cqr::fit(one_sample({2, 2, 3}, {1, 1, 1}), full_range());
  EXPECT_EQ(q.evaluate(0.0)[0], 2.0);
  EXPECT_EQ(q.evaluate(0.66)[0], 2.0);
  EXPECT_EQ(q.evaluate(0.67)[0], 3.0);
}

TEST(Fit, DefaultTauMaxIsOneMinusOneOverN) {
  const auto q = cqr::fit(one_sample({1, 2, 3, 4}, {1, 1, 1, 1}));
  EXPECT_NEAR(q.tau_end(), 0.75, 1e-15);
  EXPECT_THROW(q.evaluate(0.8), cqr::Error);
}

TEST(Fit, RejectsInvalidTauMax) {
  cqr::FitConfig c;
  c.tau_max = 1.5;
  EXPECT_THROW(cqr::fit(one_sample({1, 2}, {1, 1}), c), cqr::Error);
}

TEST(Fit, MaxRoundsStopsEarly) {
  cqr::FitConfig c = full_range();
  c.max_rounds = 2;
  const auto q = cqr::fit(one_sample({1, 2, 3, 4, 5}, {1, 1, 1, 1, 1}), c);
  EXPECT_EQ(q.segment_count(), 2u);
  EXPECT_NEAR(q.tau_end(), 0.4, 1e-15);
}

TEST(Fit, TwoSampleUncensoredIsQuantileDifference) {
  // Group 0: 1..5, group 1: 10..50 step 10 (equal sizes).
  testing_support::Rows rows;
  for (int k = 1; k <= 5; ++k) rows.push_back({double(k), 1, 0});
  for (int k = 1; k <= 5; ++k) rows.push_back({10.0 * k, 1, 1});
  const auto d = cqr::load_dataset(rows);
  const auto q = cqr::fit(d, full_range());
  testing_support::Rows g0, g1;
  for (int k = 1; k <= 5; ++k) {
    g0.push_back({double(k), 1});
    g1.push_back({10.0 * k, 1});
  }
  const auto d0 = cqr::load_dataset(g0);
  const auto d1 = cqr::load_dataset(g1);
  for (int j = 0; j < 100; ++j) {
    const double tau = (j + 0.5) / 100.0;
    if (tau >= q.tau_end()) break;
    const double q0 = cqr::oracles::km_quantile(d0, tau);
    const double q1 = cqr::oracles::km_quantile(d1, tau);
    EXPECT_NEAR(q.evaluate(tau)[0], q0, 1e-12) << tau;
    EXPECT_NEAR(q.evaluate(tau)[1], q1 - q0, 1e-12) << tau;
  }
}

TEST(Fit, TwoSampleCensoredIsKaplanMeierDifference) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    testing_support::Rows rows, g0, g1;
    for (int i = 0; i < 40; ++i) {
      const int group = i % 2;
      const double t = std::floor(10.0 * std::uniform_real_distribution<>()(rng)) + 5.0 * group;
      const double status = std::bernoulli_distribution(0.7)(rng) ? 1.0 : 0.0;
      rows.push_back({t, status, double(group)});
      (group ? g1 : g0).push_back({t, status});
    }
    const auto q = cqr::fit(cqr::load_dataset(rows), full_range());
    const auto d0 = cqr::load_dataset(g0);
    const auto d1 = cqr::load_dataset(g1);
    const auto f0 = cqr::oracles::kaplan_meier(d0);
    const auto f1 = cqr::oracles::kaplan_meier(d1);
    for (int j = 0; j < 200; ++j) {
      const double tau = (j + 0.37) / 200.0;
      if (tau >= q.tau_end()) break;
      const double q0 = cqr::oracles::km_inverse(f0, tau);
      const double q1 = cqr::oracles::km_inverse(f1, tau);
      EXPECT_NEAR(q.evaluate(tau)[0], q0, 1e-9) << "rep " << rep << " tau " << tau;
      EXPECT_NEAR(q.evaluate(tau)[1], q1 - q0, 1e-9) << "rep " << rep << " tau " << tau;
    }
  }
}

TEST(EquationResidual, ZeroAtTauZeroAndSmallEverywhere) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const auto d = cqr::load_dataset(testing_support::censored_rows(rng, 80, 3, 4.0));
    const auto q = cqr::fit(d);
    EXPECT_EQ(cqr::equation_residual(q, d, 0.0).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE(cqr::max_equation_residual(q, d), 1e-8 * 80);
  }
}

TEST(EquationResidual, DetectsAPerturbedCoefficient) {
  std::mt19937_64 rng(22);
  const auto d = cqr::load_dataset(testing_support::censored_rows(rng, 60, 2, 4.0));
  const auto q = cqr::fit(d);
  auto coefficients = q.coefficients();
  const std::size_t k = q.segment_index(0.3);
  coefficients[k][0] += 0.1;
  const cqr::QuantileProcess bad(q.breakpoints(), q.survival(), coefficients, q.tau_end(), q.flags(), q.traces());
  EXPECT_GT(cqr::equation_residual(bad, d, q.segment_end(k) - 1e-9).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(EquationResidual, BeyondTauEndThrows) {
  const auto d = one_sample({1, 2, 3}, {1, 1, 0});
  const auto q = cqr::fit(d, full_range());
  EXPECT_THROW(cqr::equation_residual(q, d, 0.9), cqr::Error);
}

TEST(PhiTrace, OneSampleFirstObservationRisesAcrossFirstSegment) {
  const auto d = one_sample({1, 2, 3}, {1, 1, 1});
  const auto q = cqr::fit(d, full_range());
  const auto trace = cqr::phi_trace(q, d, 0);
  EXPECT_DOUBLE_EQ(trace(0.0), 0.0);
  EXPECT_NEAR(trace(1.0 / 6.0), 0.5, 1e-12);
  EXPECT_NEAR(trace.left_limit(1.0 / 3.0), 1.0, 1e-12);
  EXPECT_EQ(trace(0.5), 1.0);
  EXPECT_THROW(cqr::phi_trace(q, d, 3), cqr::Error);
}

TEST(PhiTrace, EventsAreContinuousAndRankScoresSumToTau) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 15; ++rep) {
    const auto d = cqr::load_dataset(testing_support::censored_rows(rng, 30, 2, 0.0));
    const auto q = cqr::fit(d);
    std::vector<cqr::PhiTrace> traces;
    for (std::size_t i = 0; i < d.n(); ++i) traces.push_back(cqr::phi_trace(q, d, i));
    for (std::size_t i = 0; i < d.n(); ++i)
      for (std::size_t k = 1; k < q.segment_count(); ++k) {
        const double b = q.breakpoints()[k];
        EXPECT_NEAR(traces[i](b), traces[i].left_limit(b), 1e-9) << "obs " << i << " segment " << k;
      }
    for (double tau : {0.1, 0.35, 0.6, 0.9}) {
      if (tau >= q.tau_end()) continue;
      Eigen::Vector2d lhs = Eigen::Vector2d::Zero();
      Eigen::Vector2d total = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < d.n(); ++i) {
        lhs += traces[i](tau) * d.z(i).transpose();
        total += d.z(i).transpose();
      }
      EXPECT_LT((lhs - tau * total).cwiseAbs().maxCoeff(), 1e-9) << tau;
    }
  }
}

TEST(FitInvariants, BasisHasRankPAndWeightsInUnitInterval) {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = cqr::load_dataset(testing_support::censored_rows(rng, 70, 3, 3.0, rep % 2 == 0));
    const auto q = cqr::fit(d);
    for (std::size_t k = 0; k < q.segment_count(); ++k) {
      const auto& t = q.traces()[k];
      ASSERT_EQ(t.basis.size(), d.p());
      Eigen::MatrixXd m(3, 3);
      for (std::size_t r = 0; r < 3; ++r) {
        m.row(static_cast<Eigen::Index>(r)) = d.z(t.basis[r].index);
        const double fitted = d.z(t.basis[r].index).dot(q.coefficients()[k]);
        EXPECT_NEAR(fitted, d.x(t.basis[r].index), 1e-9 * (1.0 + std::abs(fitted)));
        EXPECT_GE(t.basis[r].weight, 0.0);
        EXPECT_LE(t.basis[r].weight, 1.0);
      }
      EXPECT_EQ(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(m).rank(), 3);
      EXPECT_TRUE(t.certificate_ok);
      EXPECT_GT(t.lambda, 0.0);
      EXPECT_LE(t.lambda, 1.0);
    }
  }
}

TEST(FitProperty, UncensoredObjectiveMatchesEnumeration) {
  std::mt19937_64 rng(25);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t p = 1 + rng() % 3;
    const auto d = cqr::load_dataset(testing_support::censored_rows(rng, 15, p, 0.0, rep % 2 == 0));
    const auto q = cqr::fit(d, full_range());
    for (std::size_t k = 0; k < q.segment_count(); ++k) {
      const double tau = q.breakpoints()[k];
      const double best = cqr::oracles::brute_force_rq(d, tau).objective;
      EXPECT_NEAR(cqr::oracles::check_objective(d, q.coefficients()[k], tau), best, 1e-10);
    }
  }
}

TEST(FitProperty, ResponseEquivariance) {
  std::mt19937_64 rng(26);
  for (int rep = 0; rep < 10; ++rep) {
    auto rows = testing_support::censored_rows(rng, 50, 2, 4.0);
    const auto d = cqr::load_dataset(rows);
    for (auto& r : rows) r[0] += 2.0 - 0.5 * r[2];
    const auto e = cqr::load_dataset(rows);
    const auto a = cqr::fit(d);
    const auto b = cqr::fit(e);
    ASSERT_EQ(a.segment_count(), b.segment_count());
    cqr::Vector c(2);
    c << 2.0, -0.5;
    for (std::size_t k = 0; k < a.segment_count(); ++k) {
      EXPECT_NEAR(a.breakpoints()[k], b.breakpoints()[k], 1e-12);
      EXPECT_LT((b.coefficients()[k] - a.coefficients()[k] - c).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(FitProperty, Deterministic) {
  std::mt19937_64 rng(27);
  const auto d = cqr::load_dataset(testing_support::censored_rows(rng, 100, 3, 3.0));
  const auto a = cqr::fit(d);
  const auto b = cqr::fit(d);
  EXPECT_EQ(a.breakpoints(), b.breakpoints());
  for (std::size_t k = 0; k < a.segment_count(); ++k) EXPECT_EQ(a.coefficients()[k], b.coefficients()[k]);
}
