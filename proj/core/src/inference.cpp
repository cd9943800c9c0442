#include "cqr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "cqr/error.hpp"
#include "cqr/parallel.hpp"
#include "cqr/random.hpp"

namespace cqr {
namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double sorted_quantile(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

IntervalSummary summarize(const Vector& point, const std::vector<const Vector*>& draws, std::size_t excluded,
                          bool percentile) {
  const auto p = point.size();
  IntervalSummary s;
  s.point = point;
  s.excluded = excluded;
  s.draws.resize(idx(draws.size()), p);
  for (std::size_t r = 0; r < draws.size(); ++r) s.draws.row(idx(r)) = draws[r]->transpose();

  const double count = static_cast<double>(draws.size());
  const Vector mean = s.draws.colwise().sum().transpose() / count;
  s.se = Vector::Zero(p);
  for (std::size_t r = 0; r < draws.size(); ++r) s.se += (s.draws.row(idx(r)).transpose() - mean).cwiseAbs2();
  s.se = (s.se / (count - 1.0)).cwiseSqrt();
  s.lower = point - kWaldZ * s.se;
  s.upper = point + kWaldZ * s.se;
  if (percentile) {
    s.pct_lower.resize(p);
    s.pct_upper.resize(p);
    std::vector<double> column(draws.size());
    for (Eigen::Index j = 0; j < p; ++j) {
      for (std::size_t r = 0; r < draws.size(); ++r) column[r] = s.draws(idx(r), j);
      s.pct_lower[j] = sorted_quantile(column, 0.025);
      s.pct_upper[j] = sorted_quantile(column, 0.975);
    }
  }
  return s;
}

std::string fmt_tau(double tau) {
  std::ostringstream os;
  os.precision(17);
  os << tau;
  return os.str();
}

}  // namespace

PerturbWeights exponential_weights(std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
  PerturbWeights w{std::vector<double>(n), seed, replicate};
  StreamRng rng(seed, replicate);
  for (auto& x : w.xi) x = rng.exponential();
  return w;
}

QuantileProcess perturbed_fit(const Dataset& data, const PerturbWeights& weights, const FitConfig& config) {
  if (weights.xi.size() != data.n())
    throw Error(ErrorCode::InvalidArgument, "perturbation weights need one entry per observation");
  for (double x : weights.xi)
    if (!(x > 0.0 && std::isfinite(x))) throw Error(ErrorCode::InvalidArgument, "perturbation weights must be positive");
  return fit_weighted(data, weights.xi, config);
}

Vector trimmed_mean_effect(const QuantileProcess& process, double tau1, double tau2) {
  if (!(tau1 >= 0.0 && tau1 < tau2 && tau2 <= process.tau_end()))
    throw Error(ErrorCode::TauOutOfRange, "trimming range must satisfy 0 <= tau1 < tau2 <= tau_end = " +
                                              fmt_tau(process.tau_end()));
  Vector total = Vector::Zero(idx(process.p()));
  for (std::size_t k = 0; k < process.segment_count(); ++k) {
    const double lo = std::max(tau1, process.breakpoints()[k]);
    const double hi = std::min(tau2, process.segment_end(k));
    if (hi > lo) total += (hi - lo) * process.coefficients()[k];
  }
  return total / (tau2 - tau1);
}

BootstrapSummary bootstrap(const Dataset& data, const QuantileProcess& point, std::span<const double> taus,
                           const BootstrapOptions& options) {
  const std::size_t B = options.replicates;
  if (B < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least 2 replicates");
  for (double tau : taus) {
    if (!(tau >= 0.0 && tau < point.tau_end()))
      throw Error(ErrorCode::TauOutOfRange, "tau " + fmt_tau(tau) + " is not below the fitted tau_end " +
                                                fmt_tau(point.tau_end()));
  }
  if (options.trim) trimmed_mean_effect(point, options.trim->first, options.trim->second);

  struct Replicate {
    bool ok = false;
    double tau_end = 0.0;
    std::vector<Vector> at;
    Vector trimmed;
  };
  std::vector<Replicate> reps(B);
  parallel_for(B, options.threads, [&](std::size_t r) {
    try {
      PerturbWeights w;
      if (options.weight_generator) {
        w.xi = options.weight_generator(r, data.n());
        w.seed = options.seed;
        w.replicate = r;
      } else {
        w = exponential_weights(data.n(), options.seed, r);
      }
      const QuantileProcess q = perturbed_fit(data, w, options.fit);
      Replicate& out = reps[r];
      out.tau_end = q.tau_end();
      for (double tau : taus) out.at.push_back(tau < q.tau_end() ? q.evaluate(tau) : Vector());
      if (options.trim && options.trim->second <= q.tau_end())
        out.trimmed = trimmed_mean_effect(q, options.trim->first, options.trim->second);
      out.ok = true;
    } catch (const Error&) {
      reps[r].ok = false;
    }
  });

  const auto floor_count = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(options.min_fraction * static_cast<double>(B))));
  BootstrapSummary summary;
  summary.taus.assign(taus.begin(), taus.end());
  summary.replicates = B;
  summary.point_tau_end = point.tau_end();
  for (const auto& r : reps) summary.failed_fits += r.ok ? 0 : 1;

  for (std::size_t t = 0; t < taus.size(); ++t) {
    std::vector<const Vector*> draws;
    for (const auto& r : reps)
      if (r.ok && r.at[t].size() > 0) draws.push_back(&r.at[t]);
    if (draws.size() < floor_count)
      throw Error(ErrorCode::TooFewReplicates, std::to_string(draws.size()) + " of " + std::to_string(B) +
                                                   " replicates reach tau " + fmt_tau(taus[t]));
    summary.at.push_back(summarize(point.evaluate(taus[t]), draws, B - draws.size(), options.percentile));
  }
  if (options.trim) {
    std::vector<const Vector*> draws;
    for (const auto& r : reps)
      if (r.ok && r.trimmed.size() > 0) draws.push_back(&r.trimmed);
    if (draws.size() < floor_count)
      throw Error(ErrorCode::TooFewReplicates, std::to_string(draws.size()) + " of " + std::to_string(B) +
                                                   " replicates cover the trimming range");
    const auto [t1, t2] = *options.trim;
    summary.trimmed = TrimmedSummary{
        t1, t2, summarize(trimmed_mean_effect(point, t1, t2), draws, B - draws.size(), options.percentile)};
  }
  return summary;
}

BootstrapSummary bootstrap(const Dataset& data, std::span<const double> taus, const BootstrapOptions& options) {
  return bootstrap(data, fit(data, options.fit), taus, options);
}

}  // namespace cqr
