#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cqr {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One subject: follow-up time, event indicator and covariates with a leading 1.
struct Observation {
  double x = 0.0;
  int delta = 1;
  Vector z;
};

/// Right-censored sample. Immutable after construction; the covariate matrix
/// is verified to have full column rank.
class Dataset {
 public:
  /// `covariate_names` labels z[1..p-1] for diagnostics; the intercept is
  /// always called "(intercept)". Throws Error{MalformedRow} or
  /// Error{SingularDesign}.
  explicit Dataset(std::span<const Observation> observations,
                   std::vector<std::string> covariate_names = {});

  std::size_t n() const noexcept { return static_cast<std::size_t>(times_.size()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(covariates_.cols()); }

  double x(std::size_t i) const { return times_[static_cast<Eigen::Index>(i)]; }
  bool event(std::size_t i) const { return events_[i] != 0; }
  auto z(std::size_t i) const { return covariates_.row(static_cast<Eigen::Index>(i)); }

  const Vector& times() const noexcept { return times_; }
  const RowMatrix& covariates() const noexcept { return covariates_; }
  std::span<const std::uint8_t> events() const noexcept { return events_; }
  const std::vector<std::string>& covariate_names() const noexcept { return names_; }

  std::size_t event_count() const noexcept;
  Observation observation(std::size_t i) const;

 private:
  Vector times_;
  RowMatrix covariates_;
  std::vector<std::uint8_t> events_;
  std::vector<std::string> names_;
};

/// Right-continuous step function: `initial_value` before the first jump point,
/// `values[k]` on [jump_points[k], jump_points[k+1]).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> jump_points, std::vector<double> values, double initial_value = 0.0);

  double operator()(double t) const;
  /// Value just before `t` (left limit).
  double left_limit(double t) const;

  const std::vector<double>& jump_points() const noexcept { return jumps_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double initial_value() const noexcept { return initial_; }
  bool empty() const noexcept { return jumps_.empty(); }

 private:
  std::vector<double> jumps_;
  std::vector<double> values_;
  double initial_ = 0.0;
};

/// Uniqueness classification of one segment of the fitted process.
enum class SegmentFlag : std::uint8_t {
  UniqueUncensoredS,  // the interpolated basis holds events only
  UniqueMixedS,       // censored basis members with interior weights, strict certificate
  Nonunique,          // degenerate certificate with a zero-cost feasible move
};

const char* to_string(SegmentFlag flag) noexcept;

/// A member of the p-member interpolated set at the start of a segment.
struct BasisEntry {
  std::size_t index = 0;
  bool event = true;
  double weight = 0.0;  // w_i at the start of the segment
  double gamma = 0.0;   // dual multiplier (events only; 0 for censored members)
};

/// An observation lying on the hyperplane but outside the basis; its split
/// weight is 0 or 1 depending on the side it was assigned to.
struct DegenerateEntry {
  std::size_t index = 0;
  double weight = 0.0;
};

/// Per-segment record of the interpolated set and the round's certificate.
struct SegmentTrace {
  std::vector<BasisEntry> basis;
  std::vector<DegenerateEntry> degenerate;
  Vector h_hat;
  double lambda = 1.0;         // relative breakpoint closing the segment
  double dual_residual = 0.0;  // max-norm of the interpolation-dual identity
  bool certificate_ok = true;  // sign constraints held and residual within tolerance
};

/// Piecewise-constant cadlag coefficient process tau -> beta(tau).
class QuantileProcess {
 public:
  QuantileProcess() = default;

  /// Builds a process without traces (flags default to UniqueUncensoredS).
  QuantileProcess(std::vector<double> breakpoints, std::vector<Vector> coefficients, double tau_end);

  QuantileProcess(std::vector<double> breakpoints, std::vector<double> survival,
                  std::vector<Vector> coefficients, double tau_end, std::vector<SegmentFlag> flags,
                  std::vector<SegmentTrace> traces, std::vector<double> masses = {});

  std::size_t p() const noexcept;
  std::size_t segment_count() const noexcept { return breakpoints_.size(); }

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  /// 1 - tau_k accumulated multiplicatively; exact companion of breakpoints().
  const std::vector<double>& survival() const noexcept { return survival_; }
  const std::vector<Vector>& coefficients() const noexcept { return coefficients_; }
  const std::vector<SegmentFlag>& flags() const noexcept { return flags_; }
  const std::vector<SegmentTrace>& traces() const noexcept { return traces_; }
  /// Per-observation masses used in the fit; empty means unit masses.
  const std::vector<double>& masses() const noexcept { return masses_; }
  double tau_end() const noexcept { return tau_end_; }

  /// Right end of segment k (next breakpoint, or tau_end for the last one).
  double segment_end(std::size_t k) const;

  /// Index k with tau_k <= tau < tau_{k+1}. Throws TauOutOfRange.
  std::size_t segment_index(double tau) const;

  /// beta(tau), the right-hand value at breakpoints. Throws TauOutOfRange
  /// unless 0 <= tau < tau_end.
  const Vector& evaluate(double tau) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> survival_;
  std::vector<Vector> coefficients_;
  std::vector<SegmentFlag> flags_;
  std::vector<SegmentTrace> traces_;
  std::vector<double> masses_;
  double tau_end_ = 0.0;
};

}  // namespace cqr
