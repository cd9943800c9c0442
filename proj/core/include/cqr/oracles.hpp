#pragma once

// Brute-force and textbook implementations of the special cases the
// estimator must reproduce. Written from the definitions; nothing here
// shares code with the round solver or the process estimator.

#include <cstddef>
#include <span>
#include <vector>

#include "cqr/model.hpp"

namespace cqr::oracles {

/// Product-limit estimate of the distribution function F(t) = 1 - S(t) for a
/// one-sample dataset (p = 1), optionally with positive case weights.
StepFunction kaplan_meier(const Dataset& data, std::span<const double> weights = {});

/// Nelson-Aalen cumulative hazard; jump at each event time t equals
/// (weighted events at t) / (weighted number at risk at t).
StepFunction nelson_aalen(const Dataset& data, std::span<const double> weights = {});

/// Hazard increments d(t)/Y(t) at the distinct event times, in time order.
std::vector<double> nelson_aalen_increments(const Dataset& data, std::span<const double> weights = {});

/// Cadlag inverse sup{t : F(t) <= tau}. When tau is at or beyond the total
/// mass of F and `last_follow_up` is given, returns that time (the
/// last-observation-censored convention). Throws Error{BeyondSupport} when no
/// convention applies.
double km_inverse(const StepFunction& cdf, double tau, const double* last_follow_up = nullptr);

/// Convenience: km_inverse(kaplan_meier(data, weights), tau, max x).
double km_quantile(const Dataset& data, double tau, std::span<const double> weights = {});

struct BruteForceResult {
  double objective = 0.0;
  Vector minimizer;
};

/// Uncensored check-loss minimum sum_i [(T_i - z_i'b)^- + tau (T_i - z_i'b)]
/// over every rank-p interpolating subset. Guards: n <= 30, p <= 4.
/// Throws Error{TooLarge}, Error{InvalidArgument} when censored observations are present.
BruteForceResult brute_force_rq(const Dataset& data, double tau);

/// Check loss of an arbitrary coefficient vector (uncensored data).
double check_objective(const Dataset& data, const Vector& beta, double tau);

/// Minimum of sum_i m_i (x_i - z_i'b)^+ under the side constraints implied by
/// phi (x_i <= z_i'b for phi_i = 1, = for phi_i in (0,1), >= for phi_i = 0,
/// events only), by enumerating rank-p interpolating vertices. Guard: n <= 12.
/// Throws Error{TooLarge}, Error{Infeasible}.
BruteForceResult brute_force_round(const Dataset& data, std::span<const double> phi,
                                   std::span<const double> masses = {});

}  // namespace cqr::oracles
