#include "cqr/model.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "cqr/error.hpp"

namespace cqr {
namespace {

Eigen::Index column_rank(const RowMatrix& m, Eigen::Index cols) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.leftCols(cols));
  qr.setThreshold(1e-10);
  return qr.rank();
}

}  // namespace

Dataset::Dataset(std::span<const Observation> observations, std::vector<std::string> covariate_names) {
  if (observations.empty()) throw Error(ErrorCode::MalformedRow, "dataset has no observations");
  const auto p = observations.front().z.size();
  if (p < 1) throw Error(ErrorCode::MalformedRow, "covariate vector must contain the intercept");

  const auto n = static_cast<Eigen::Index>(observations.size());
  times_.resize(n);
  covariates_.resize(n, p);
  events_.resize(observations.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = observations[static_cast<std::size_t>(i)];
    const auto row = std::to_string(i + 1);
    if (obs.z.size() != p) throw Error(ErrorCode::MalformedRow, "row " + row + " has wrong arity");
    if (!std::isfinite(obs.x)) throw Error(ErrorCode::MalformedRow, "row " + row + " has a non-finite time");
    if (obs.delta != 0 && obs.delta != 1)
      throw Error(ErrorCode::MalformedRow, "row " + row + " has status outside {0,1}");
    if (obs.z[0] != 1.0) throw Error(ErrorCode::MalformedRow, "row " + row + " lacks the leading intercept 1");
    if (!obs.z.allFinite()) throw Error(ErrorCode::MalformedRow, "row " + row + " has a non-finite covariate");
    times_[i] = obs.x;
    covariates_.row(i) = obs.z.transpose();
    events_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(obs.delta);
  }

  names_.assign(1, "(intercept)");
  for (Eigen::Index k = 1; k < p; ++k) {
    const auto idx = static_cast<std::size_t>(k - 1);
    names_.push_back(idx < covariate_names.size() ? covariate_names[idx] : "z" + std::to_string(k));
  }

  // Grow the design one column at a time so a rank failure names its column.
  for (Eigen::Index k = 1; k <= p; ++k) {
    if (column_rank(covariates_, k) < k) {
      throw Error(ErrorCode::SingularDesign,
                  "column '" + names_[static_cast<std::size_t>(k - 1)] +
                      "' is collinear with the preceding columns; drop it and refit");
    }
  }
}

std::size_t Dataset::event_count() const noexcept {
  return static_cast<std::size_t>(std::count(events_.begin(), events_.end(), std::uint8_t{1}));
}

Observation Dataset::observation(std::size_t i) const {
  return Observation{x(i), events_[i], covariates_.row(static_cast<Eigen::Index>(i)).transpose()};
}

StepFunction::StepFunction(std::vector<double> jump_points, std::vector<double> values, double initial_value)
    : jumps_(std::move(jump_points)), values_(std::move(values)), initial_(initial_value) {
  if (jumps_.size() != values_.size())
    throw Error(ErrorCode::InvalidArgument, "step function needs one value per jump point");
  if (std::adjacent_find(jumps_.begin(), jumps_.end(), std::greater_equal<>()) != jumps_.end())
    throw Error(ErrorCode::InvalidArgument, "step function jump points must be strictly increasing");
}

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t);
  if (it == jumps_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
  const auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t);
  if (it == jumps_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

const char* to_string(SegmentFlag flag) noexcept {
  switch (flag) {
    case SegmentFlag::UniqueUncensoredS: return "UniqueUncensoredS";
    case SegmentFlag::UniqueMixedS: return "UniqueMixedS";
    case SegmentFlag::Nonunique: return "Nonunique";
  }
  return "Unknown";
}

QuantileProcess::QuantileProcess(std::vector<double> breakpoints, std::vector<Vector> coefficients,
                                 double tau_end)
    : QuantileProcess(breakpoints, {}, std::move(coefficients), tau_end, {}, {}) {}

QuantileProcess::QuantileProcess(std::vector<double> breakpoints, std::vector<double> survival,
                                 std::vector<Vector> coefficients, double tau_end,
                                 std::vector<SegmentFlag> flags, std::vector<SegmentTrace> traces,
                                 std::vector<double> masses)
    : breakpoints_(std::move(breakpoints)),
      survival_(std::move(survival)),
      coefficients_(std::move(coefficients)),
      flags_(std::move(flags)),
      traces_(std::move(traces)),
      masses_(std::move(masses)),
      tau_end_(tau_end) {
  if (breakpoints_.empty() || breakpoints_.front() != 0.0)
    throw Error(ErrorCode::InvalidArgument, "process must start at tau = 0");
  if (coefficients_.size() != breakpoints_.size())
    throw Error(ErrorCode::InvalidArgument, "one coefficient vector per breakpoint required");
  if (std::adjacent_find(breakpoints_.begin(), breakpoints_.end(), std::greater_equal<>()) !=
      breakpoints_.end())
    throw Error(ErrorCode::InvalidArgument, "breakpoints must be strictly increasing");
  if (breakpoints_.back() >= 1.0) throw Error(ErrorCode::InvalidArgument, "breakpoints must lie below 1");
  if (tau_end_ > 1.0 || tau_end_ < breakpoints_.back())
    throw Error(ErrorCode::InvalidArgument, "tau_end must lie in [last breakpoint, 1]");
  if (survival_.empty()) {
    survival_.reserve(breakpoints_.size());
    for (double t : breakpoints_) survival_.push_back(1.0 - t);
  }
  if (flags_.empty()) flags_.assign(breakpoints_.size(), SegmentFlag::UniqueUncensoredS);
  if (survival_.size() != breakpoints_.size() || flags_.size() != breakpoints_.size() ||
      (!traces_.empty() && traces_.size() != breakpoints_.size()))
    throw Error(ErrorCode::InvalidArgument, "per-segment arrays disagree in length");
}

std::size_t QuantileProcess::p() const noexcept {
  return coefficients_.empty() ? 0 : static_cast<std::size_t>(coefficients_.front().size());
}

double QuantileProcess::segment_end(std::size_t k) const {
  return k + 1 < breakpoints_.size() ? breakpoints_[k + 1] : tau_end_;
}

std::size_t QuantileProcess::segment_index(double tau) const {
  if (!(tau >= 0.0) || !(tau < tau_end_)) {
    throw Error(ErrorCode::TauOutOfRange,
                "tau = " + std::to_string(tau) + " outside [0, " + std::to_string(tau_end_) + ")");
  }
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), tau);
  return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

const Vector& QuantileProcess::evaluate(double tau) const { return coefficients_[segment_index(tau)]; }

}  // namespace cqr
