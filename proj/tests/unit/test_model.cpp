#include <gtest/gtest.h>

#include "cqr/csv.hpp"
#include "cqr/error.hpp"
#include "cqr/model.hpp"

using cqr::Error;
using cqr::ErrorCode;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

cqr::QuantileProcess three_step(double tau_end) {
  std::vector<cqr::Vector> b(3, cqr::Vector(1));
  b[0] << 1.0;
  b[1] << 2.0;
  b[2] << 3.0;
  return cqr::QuantileProcess({0.0, 1.0 / 3.0, 2.0 / 3.0}, b, tau_end);
}

}  // namespace

TEST(Dataset, InterceptOnlyRows) {
  const auto d = cqr::load_dataset({{1.0, 1}, {2.0, 1}});
  EXPECT_EQ(d.p(), 1u);
  EXPECT_EQ(d.n(), 2u);
  EXPECT_EQ(d.z(0)[0], 1.0);
  EXPECT_EQ(d.z(1)[0], 1.0);
}

TEST(Dataset, CovariateRowsKeepOrder) {
  const auto d = cqr::load_dataset({{1.0, 1, 0.5}, {2.0, 0, 0.7}, {3.0, 1, 0.7}});
  EXPECT_EQ(d.p(), 2u);
  EXPECT_EQ(d.n(), 3u);
  EXPECT_TRUE(d.event(0));
  EXPECT_FALSE(d.event(1));
  EXPECT_TRUE(d.event(2));
  EXPECT_EQ(d.x(1), 2.0);
  EXPECT_EQ(d.z(1)[1], 0.7);
  EXPECT_EQ(d.event_count(), 2u);
}

TEST(Dataset, ConstantCovariateIsSingular) {
  try {
    cqr::load_dataset({{1, 1, 3}, {2, 1, 3}}, {"dose"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularDesign);
    EXPECT_NE(std::string(e.what()).find("dose"), std::string::npos);
    EXPECT_TRUE(e.is_data_error());
  }
}

TEST(Dataset, DuplicateColumnIsSingular) {
  EXPECT_EQ(code_of([] { cqr::load_dataset({{1, 1, 1, 2}, {2, 1, 2, 4}, {3, 0, 5, 10}}); }),
            ErrorCode::SingularDesign);
}

TEST(Dataset, RejectsBadStatusAndNonFiniteTime) {
  EXPECT_EQ(code_of([] { cqr::load_dataset({{1, 2}}); }), ErrorCode::MalformedRow);
  EXPECT_EQ(code_of([] { cqr::load_dataset({{NAN, 1}}); }), ErrorCode::MalformedRow);
  EXPECT_EQ(code_of([] { cqr::load_dataset({{1, 1, 0.5}, {2, 1}}); }), ErrorCode::MalformedRow);
}

TEST(Dataset, RejectsMissingInterceptAndMixedArity) {
  cqr::Vector z(2);
  z << 2.0, 1.0;
  std::vector<cqr::Observation> obs{{1.0, 1, z}};
  EXPECT_EQ(code_of([&] { cqr::Dataset d(obs); }), ErrorCode::MalformedRow);
  cqr::Vector one(1);
  one << 1.0;
  cqr::Vector two(2);
  two << 1.0, 0.5;
  std::vector<cqr::Observation> mixed{{1.0, 1, one}, {2.0, 1, two}};
  EXPECT_EQ(code_of([&] { cqr::Dataset d(mixed); }), ErrorCode::MalformedRow);
}

TEST(Dataset, NegativeTimesAllowed) {
  const auto d = cqr::load_dataset({{-3.5, 1}, {-1.0, 0}});
  EXPECT_EQ(d.x(0), -3.5);
}

TEST(StepFunction, RightContinuousWithLeftLimits) {
  cqr::StepFunction f({1.0, 2.0}, {0.25, 1.0}, 0.0);
  EXPECT_EQ(f(0.5), 0.0);
  EXPECT_EQ(f(1.0), 0.25);
  EXPECT_EQ(f.left_limit(1.0), 0.0);
  EXPECT_EQ(f(1.5), 0.25);
  EXPECT_EQ(f(2.0), 1.0);
  EXPECT_EQ(f.left_limit(2.0), 0.25);
  EXPECT_EQ(f(99.0), 1.0);
}

TEST(StepFunction, RejectsUnsortedJumps) {
  EXPECT_THROW(cqr::StepFunction({2.0, 1.0}, {0.0, 1.0}), Error);
  EXPECT_THROW(cqr::StepFunction({1.0}, {0.0, 1.0}), Error);
}

TEST(QuantileProcess, EvaluateReturnsRightValueAtBreakpoints) {
  const auto q = three_step(1.0);
  EXPECT_EQ(q.evaluate(1.0 / 3.0)[0], 2.0);
  EXPECT_EQ(q.evaluate(0.2)[0], 1.0);
  EXPECT_EQ(q.evaluate(0.0)[0], 1.0);
  EXPECT_EQ(q.evaluate(0.999)[0], 3.0);
  EXPECT_EQ(q.segment_end(2), 1.0);
}

TEST(QuantileProcess, EvaluateBeyondTauEndThrows) {
  const auto q = three_step(0.95);
  EXPECT_EQ(code_of([&] { q.evaluate(0.99); }), ErrorCode::TauOutOfRange);
  EXPECT_EQ(code_of([&] { q.evaluate(0.95); }), ErrorCode::TauOutOfRange);
  EXPECT_EQ(code_of([&] { q.evaluate(-0.1); }), ErrorCode::TauOutOfRange);
}

TEST(QuantileProcess, PiecewiseConstantWithinSegments) {
  const auto q = three_step(1.0);
  for (double a = 0.0; a < 1.0; a += 0.01) {
    const double b = a + 0.004;
    if (q.segment_index(a) == q.segment_index(b)) {
      EXPECT_EQ(q.evaluate(a), q.evaluate(b));
    }
  }
}

TEST(QuantileProcess, RejectsMalformedBreakpoints) {
  std::vector<cqr::Vector> b(2, cqr::Vector::Ones(1));
  EXPECT_THROW(cqr::QuantileProcess({0.1, 0.5}, b, 1.0), Error);
  EXPECT_THROW(cqr::QuantileProcess({0.0, 0.0}, b, 1.0), Error);
  EXPECT_THROW(cqr::QuantileProcess({0.0, 0.5}, b, 0.4), Error);
  EXPECT_THROW(cqr::QuantileProcess({0.0}, b, 1.0), Error);
}

TEST(Errors, SolverDefectsAreNotDataErrors) {
  EXPECT_FALSE(Error(ErrorCode::CycleDetected, "x").is_data_error());
  EXPECT_FALSE(Error(ErrorCode::ResidualCheckFailed, "x").is_data_error());
  EXPECT_TRUE(Error(ErrorCode::MalformedRow, "x").is_data_error());
  EXPECT_EQ(cqr::to_string(ErrorCode::TauOutOfRange), "TauOutOfRange");
}
