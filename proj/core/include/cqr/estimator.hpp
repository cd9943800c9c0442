#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cqr/model.hpp"
#include "cqr/plmin.hpp"

namespace cqr {

struct FitConfig {
  /// Ceiling on the estimated range; values <= 0 mean the default 1 - 1/n.
  double tau_max = 0.0;
  /// Verify the estimating-equation residual before returning.
  bool residual_check = true;
  /// Safety bound on the number of rounds; 0 means 10 n.
  std::size_t max_rounds = 0;
  PlminTolerances tolerances;
};

/// Fits the whole coefficient process by chaining rounds:
/// 1 - tau_{k+1} = (1 - tau_k)(1 - lambda_b), phi carried over by continuity.
/// Stops at lambda_b = 1, at the first nonunique segment (tau_end is then its
/// left end), once tau reaches tau_max, or after max_rounds.
/// Throws Error{ResidualCheckFailed} if the residual check is on and fails.
QuantileProcess fit(const Dataset& data, const FitConfig& config = {});

/// Same as fit() with per-observation masses multiplying every summand of
/// the estimating equation.
QuantileProcess fit_weighted(const Dataset& data, std::span<const double> masses, const FitConfig& config = {});

/// Left side minus right side of the empirical estimating equation at `tau`,
/// evaluated from the recorded coefficients and weight traces with the
/// integral taken in closed form segment by segment. Uses the process's masses.
/// Throws Error{TauOutOfRange}.
Vector equation_residual(const QuantileProcess& process, const Dataset& data, double tau);

/// Batched form of equation_residual; `taus` must be ascending.
std::vector<Vector> equation_residuals(const QuantileProcess& process, const Dataset& data,
                                       std::span<const double> taus);

/// Largest |residual| over all breakpoints and the grid 0.05, 0.10, ..., 0.95
/// (restricted to [0, tau_end)).
double max_equation_residual(const QuantileProcess& process, const Dataset& data);

/// Residual tolerance used by fit(): 1e-8 * max(n, total mass).
double residual_tolerance(const QuantileProcess& process, const Dataset& data);

struct LinearPiece {
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  double value_lo = 0.0;
  double slope = 0.0;  // d phi / d tau
};

/// phi_i(tau) reconstructed from the weight traces: piecewise linear in tau,
/// continuous for events.
class PhiTrace {
 public:
  explicit PhiTrace(std::vector<LinearPiece> pieces) : pieces_(std::move(pieces)) {}
  double operator()(double tau) const;
  /// Limit from the left at `tau` (tau > 0).
  double left_limit(double tau) const;
  const std::vector<LinearPiece>& pieces() const noexcept { return pieces_; }

 private:
  std::vector<LinearPiece> pieces_;
};

/// Throws Error{IndexOutOfRange}.
PhiTrace phi_trace(const QuantileProcess& process, const Dataset& data, std::size_t i);

}  // namespace cqr
