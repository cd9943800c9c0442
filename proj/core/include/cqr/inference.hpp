#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cqr/estimator.hpp"
#include "cqr/model.hpp"

namespace cqr {

/// Normal quantile used for the two-sided 95% Wald intervals.
inline constexpr double kWaldZ = 1.959964;

/// Positive multipliers for one bootstrap replicate.
struct PerturbWeights {
  std::vector<double> xi;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

/// Standard exponential multipliers drawn from stream `replicate` under `seed`.
PerturbWeights exponential_weights(std::size_t n, std::uint64_t seed, std::uint64_t replicate);

/// Fit with every term of observation i multiplied by xi_i.
/// Throws Error{InvalidArgument} on a length mismatch or a non-positive weight,
/// otherwise whatever fit() throws.
QuantileProcess perturbed_fit(const Dataset& data, const PerturbWeights& weights, const FitConfig& config = {});

/// Average of the process over [tau1, tau2), integrated exactly over the steps.
/// Throws Error{TauOutOfRange} unless 0 <= tau1 < tau2 <= tau_end.
Vector trimmed_mean_effect(const QuantileProcess& process, double tau1, double tau2);

struct BootstrapOptions {
  std::size_t replicates = 200;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: one per hardware thread
  /// Minimum fraction of replicates that must cover every requested tau.
  double min_fraction = 0.5;
  bool percentile = false;
  std::optional<std::pair<double, double>> trim;
  FitConfig fit;
  /// Replaces the exponential multipliers; called as generator(replicate, n).
  std::function<std::vector<double>(std::size_t, std::size_t)> weight_generator;
};

struct IntervalSummary {
  Vector point;
  Vector se;
  Vector lower;  // Wald
  Vector upper;
  Vector pct_lower;  // percentile, filled when requested
  Vector pct_upper;
  RowMatrix draws;  // included replicates x p
  std::size_t excluded = 0;
};

struct TrimmedSummary {
  double tau1 = 0.0;
  double tau2 = 0.0;
  IntervalSummary estimate;
};

struct BootstrapSummary {
  std::vector<double> taus;
  std::vector<IntervalSummary> at;  // one per tau
  std::optional<TrimmedSummary> trimmed;
  std::size_t replicates = 0;
  std::size_t failed_fits = 0;  // replicate fits that raised an error
  double point_tau_end = 0.0;
};

/// Multiplier bootstrap around an existing point fit. Replicates whose tau_end
/// does not exceed a requested tau are dropped for that tau only.
/// Throws Error{InvalidArgument} (fewer than 2 replicates), Error{TauOutOfRange}
/// (a tau at or beyond the point fit's tau_end), Error{TooFewReplicates}.
BootstrapSummary bootstrap(const Dataset& data, const QuantileProcess& point, std::span<const double> taus,
                           const BootstrapOptions& options = {});

/// Fits the point process first with options.fit, then bootstraps.
BootstrapSummary bootstrap(const Dataset& data, std::span<const double> taus, const BootstrapOptions& options = {});

}  // namespace cqr
