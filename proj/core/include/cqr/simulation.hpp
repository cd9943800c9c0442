#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cqr/model.hpp"

namespace cqr {

/// Data-generating settings on the log time scale. Covariates are
/// Z1 ~ Bernoulli(0.5) and Z2 ~ Uniform[0,1]; censoring is uniform on
/// [0, censor_max] on the original time scale.
///   1: log{-log(1-t)} + (1.25t ^ 0.5) Z1 + 0.5 Z2
///   2: log{-log(1-t)} + 0.5 Z1 + 0.5 Z2
///   3: log{-log(1-(t v 0.4))} + (t v 0.4) Z1 + 0.5 Z2   (atom below 0.4)
struct Scenario {
  int id = 2;
  double censor_max = 5.0;  // <= 0 disables censoring

  /// Throws Error{InvalidArgument} for ids other than 1, 2, 3.
  static Scenario make(int id);

  /// True coefficient vector (intercept, Z1, Z2) at tau in [0,1).
  Vector truth(double tau) const;
  std::size_t p() const noexcept { return 3; }
};

struct SimulatedSample {
  Dataset data;
  std::vector<double> log_t;  // latent log survival times
  std::vector<double> c;      // latent censoring times, original scale
  double censoring_rate = 0.0;
};

/// Draws n subjects with log T = Q_Z(U), U ~ Uniform(0,1), X = log(T ^ C).
/// Stream `replicate` of `seed` is used, so replicates are independent of
/// each other and of how many are drawn. Throws Error{InvalidArgument} (n < 2).
SimulatedSample generate(const Scenario& scenario, std::size_t n, std::uint64_t seed, std::uint64_t replicate = 0);

/// Accelerated failure time design for timing runs: log T = e + sum_m
/// (-1)^(m-1)/2 Z_m, e minimum extreme value, Z_m ~ Uniform[0,1], censoring
/// uniform on [0, c] with c tuned so the sample censoring fraction is as close
/// as possible to `censoring`.
Dataset timing_design(std::size_t n, std::size_t p, double censoring, std::uint64_t seed);

struct MonteCarloOptions {
  std::size_t n = 200;
  std::size_t reps = 200;
  std::vector<double> taus{0.1, 0.3, 0.5, 0.7};
  std::size_t boot = 0;  // 0 skips standard errors and coverage
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct MonteCarloCell {
  double tau = 0.0;
  std::size_t component = 0;
  double truth = 0.0;
  std::size_t replicates = 0;  // replicates whose fit reached this tau
  double bias = 0.0;
  double sd = 0.0;
  double median_bias = 0.0;
  double mean_se = 0.0;   // NaN without bootstrap
  double coverage = 0.0;  // in [0,1]; NaN without bootstrap
};

struct ReplicateFailure {
  std::size_t replicate = 0;
  std::string reason;
};

struct MonteCarloReport {
  int scenario = 2;
  MonteCarloOptions options;
  std::vector<MonteCarloCell> cells;  // tau-major, then component
  std::size_t completed = 0;
  std::vector<ReplicateFailure> failures;
  double censoring_mean = 0.0;
  double censoring_min = 0.0;
  double censoring_max = 0.0;
  std::string banner;  // non-empty for settings where only median-bias is meaningful

  const MonteCarloCell& cell(double tau, std::size_t component) const;
};

/// Fits every replicate and compares with the true coefficients. A replicate
/// whose tau_end does not exceed a tau is left out of that tau's cells only;
/// replicates whose fit or bootstrap raises an error go to the failure ledger.
/// Throws Error{InvalidArgument} (reps < 2) and Error{TooManyFailures} when
/// more than 10% of replicates fail.
MonteCarloReport run_monte_carlo(const Scenario& scenario, const MonteCarloOptions& options);

/// Aligned text table: one row per (tau, component) with bias and SD (x1000),
/// mean SE (x1000), coverage (%) and median-bias (x1000).
void write_table(std::ostream& out, const MonteCarloReport& report);

}  // namespace cqr
