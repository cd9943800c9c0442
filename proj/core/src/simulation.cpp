#include "cqr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cqr/error.hpp"
#include "cqr/estimator.hpp"
#include "cqr/inference.hpp"
#include "cqr/parallel.hpp"
#include "cqr/random.hpp"

namespace cqr {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  if (v.size() % 2 == 1) return v[m];
  const double upper = v[m];
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m)));
}

double fraction_censored(const std::vector<double>& log_t, const std::vector<double>& v, double c) {
  std::size_t censored = 0;
  for (std::size_t i = 0; i < log_t.size(); ++i) censored += std::log(c * v[i]) < log_t[i] ? 1 : 0;
  return static_cast<double>(censored) / static_cast<double>(log_t.size());
}

}  // namespace

Scenario Scenario::make(int id) {
  if (id < 1 || id > 3) throw Error(ErrorCode::InvalidArgument, "scenario must be 1, 2 or 3");
  return Scenario{id, 5.0};
}

Vector Scenario::truth(double tau) const {
  Vector b(3);
  switch (id) {
    case 1:
      b << std::log(-std::log1p(-tau)), std::min(1.25 * tau, 0.5), 0.5;
      break;
    case 2:
      b << std::log(-std::log1p(-tau)), 0.5, 0.5;
      break;
    case 3: {
      const double t = std::max(tau, 0.4);
      b << std::log(-std::log1p(-t)), t, 0.5;
      break;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "scenario must be 1, 2 or 3");
  }
  return b;
}

SimulatedSample generate(const Scenario& scenario, std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "simulation needs n >= 2");
  StreamRng rng(seed, replicate);
  std::vector<Observation> obs(n);
  std::vector<double> log_t(n);
  std::vector<double> c(n, std::numeric_limits<double>::infinity());
  std::size_t censored = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Vector z(3);
    z << 1.0, rng.bernoulli(0.5) ? 1.0 : 0.0, rng.uniform();
    const double u = rng.uniform();
    const double v = rng.uniform();
    log_t[i] = z.dot(scenario.truth(u));
    double x = log_t[i];
    int delta = 1;
    if (scenario.censor_max > 0.0) {
      c[i] = scenario.censor_max * v;
      const double log_c = std::log(c[i]);
      if (log_c < log_t[i]) {
        x = log_c;
        delta = 0;
        ++censored;
      }
    }
    obs[i] = Observation{x, delta, std::move(z)};
  }
  return SimulatedSample{Dataset(obs, {"z1", "z2"}), std::move(log_t), std::move(c),
                         static_cast<double>(censored) / static_cast<double>(n)};
}

Dataset timing_design(std::size_t n, std::size_t p, double censoring, std::uint64_t seed) {
  if (n < 2 || p < 1) throw Error(ErrorCode::InvalidArgument, "timing design needs n >= 2 and p >= 1");
  StreamRng rng(seed, 0);
  std::vector<Vector> z(n);
  std::vector<double> log_t(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i].resize(static_cast<Eigen::Index>(p));
    z[i][0] = 1.0;
    double lt = std::log(rng.exponential());
    for (std::size_t m = 1; m < p; ++m) {
      z[i][static_cast<Eigen::Index>(m)] = rng.uniform();
      lt += (m % 2 == 1 ? 0.5 : -0.5) * z[i][static_cast<Eigen::Index>(m)];
    }
    log_t[i] = lt;
    v[i] = rng.uniform();
  }
  double c = std::numeric_limits<double>::infinity();
  if (censoring > 0.0) {
    double lo = 1e-6;
    double hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      (fraction_censored(log_t, v, mid) > censoring ? lo : hi) = mid;
    }
    c = hi;
  }
  std::vector<Observation> obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double log_c = std::log(c * v[i]);
    const bool event = !(log_c < log_t[i]);
    obs[i] = Observation{event ? log_t[i] : log_c, event ? 1 : 0, std::move(z[i])};
  }
  return Dataset(obs);
}

const MonteCarloCell& MonteCarloReport::cell(double tau, std::size_t component) const {
  for (const auto& c : cells)
    if (c.tau == tau && c.component == component) return c;
  throw Error(ErrorCode::InvalidArgument, "no such cell in the report");
}

MonteCarloReport run_monte_carlo(const Scenario& scenario, const MonteCarloOptions& options) {
  if (options.reps < 2) throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs reps >= 2");
  if (options.taus.empty()) throw Error(ErrorCode::InvalidArgument, "no evaluation taus given");
  for (double tau : options.taus)
    if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidArgument, "taus must lie in (0,1)");
  if (options.boot == 1) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least 2 replicates");

  struct Outcome {
    bool ok = false;
    std::string reason;
    double censoring = 0.0;
    std::vector<Vector> estimate;
    std::vector<Vector> se;
  };
  std::vector<Outcome> outcomes(options.reps);
  const std::uint64_t boot_seed = mix64(options.seed ^ 0x5bd1e995ULL);

  parallel_for(options.reps, options.threads, [&](std::size_t r) {
    Outcome& out = outcomes[r];
    try {
      const SimulatedSample sample = generate(scenario, options.n, options.seed, r);
      out.censoring = sample.censoring_rate;
      const QuantileProcess q = fit(sample.data);
      std::vector<double> reachable;
      for (double tau : options.taus) {
        out.estimate.push_back(tau < q.tau_end() ? q.evaluate(tau) : Vector());
        if (tau < q.tau_end()) reachable.push_back(tau);
      }
      if (options.boot >= 2 && !reachable.empty()) {
        BootstrapOptions bo;
        bo.replicates = options.boot;
        bo.seed = boot_seed + r;
        bo.threads = 1;
        const BootstrapSummary s = bootstrap(sample.data, q, reachable, bo);
        std::size_t k = 0;
        for (const auto& est : out.estimate) out.se.push_back(est.size() > 0 ? s.at[k++].se : Vector());
      }
      out.ok = true;
    } catch (const Error& e) {
      out.ok = false;
      out.reason = e.what();
    }
  });

  MonteCarloReport report;
  report.scenario = scenario.id;
  report.options = options;
  if (scenario.id == 3)
    report.banner = "discontinuous baseline: outside the asymptotic theory; only median-bias is a meaningful summary";

  std::vector<double> rates;
  std::vector<const Outcome*> good;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (outcomes[r].ok) {
      good.push_back(&outcomes[r]);
      rates.push_back(outcomes[r].censoring);
    } else {
      report.failures.push_back({r, outcomes[r].reason});
    }
  }
  report.completed = good.size();
  if (10 * report.failures.size() > options.reps || good.size() < 2) {
    throw Error(ErrorCode::TooManyFailures, std::to_string(report.failures.size()) + " of " +
                                                std::to_string(options.reps) + " replicates failed; first: " +
                                                report.failures.front().reason);
  }
  report.censoring_mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
  report.censoring_min = *std::min_element(rates.begin(), rates.end());
  report.censoring_max = *std::max_element(rates.begin(), rates.end());

  for (std::size_t t = 0; t < options.taus.size(); ++t) {
    const Vector truth = scenario.truth(options.taus[t]);
    for (std::size_t j = 0; j < scenario.p(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      MonteCarloCell cell;
      cell.tau = options.taus[t];
      cell.component = j;
      cell.truth = truth[jj];
      std::vector<const Outcome*> usable;
      for (const Outcome* o : good)
        if (o->estimate[t].size() > 0) usable.push_back(o);
      cell.replicates = usable.size();
      if (usable.size() < 2) {
        cell.bias = cell.sd = cell.median_bias = cell.mean_se = cell.coverage = kNaN;
        report.cells.push_back(cell);
        continue;
      }
      const double count = static_cast<double>(usable.size());
      std::vector<double> errors;
      for (const Outcome* o : usable) errors.push_back(o->estimate[t][jj] - truth[jj]);
      const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / count;
      double ss = 0.0;
      for (double e : errors) ss += (e - mean) * (e - mean);
      cell.bias = mean;
      cell.sd = std::sqrt(ss / (count - 1.0));
      cell.median_bias = median(errors);
      if (options.boot >= 2) {
        double se_sum = 0.0;
        std::size_t covered = 0;
        for (const Outcome* o : usable) {
          const double se = o->se[t][jj];
          const double est = o->estimate[t][jj];
          se_sum += se;
          covered += (std::abs(est - truth[jj]) <= kWaldZ * se) ? 1 : 0;
        }
        cell.mean_se = se_sum / count;
        cell.coverage = static_cast<double>(covered) / count;
      } else {
        cell.mean_se = kNaN;
        cell.coverage = kNaN;
      }
      report.cells.push_back(cell);
    }
  }
  return report;
}

void write_table(std::ostream& out, const MonteCarloReport& report) {
  static const char* const kNames[] = {"intercept", "Z1", "Z2"};
  const auto saved_flags = out.flags();
  const auto saved_precision = out.precision();
  out << "Scenario " << report.scenario << ": n=" << report.options.n << ", " << report.completed << " of "
      << report.options.reps << " replicates, bootstrap B=" << report.options.boot << '\n';
  out << std::fixed << std::setprecision(1) << "censoring rate: mean " << 100.0 * report.censoring_mean
      << "%, range " << 100.0 * report.censoring_min << "% to " << 100.0 * report.censoring_max << "%\n";
  if (!report.banner.empty()) out << "NOTE: " << report.banner << '\n';
  out << std::setw(6) << "tau" << std::setw(11) << "component" << std::setw(8) << "B" << std::setw(8) << "SD"
      << std::setw(8) << "SE" << std::setw(8) << "CI" << std::setw(9) << "MedB" << std::setw(7) << "reps" << '\n';
  double last_tau = -1.0;
  for (const auto& c : report.cells) {
    if (c.tau != last_tau) {
      out << std::setw(6) << std::setprecision(2) << c.tau;
      last_tau = c.tau;
    } else {
      out << std::setw(6) << "";
    }
    out << std::setw(11) << kNames[c.component] << std::setprecision(0) << std::setw(8) << 1000.0 * c.bias
        << std::setw(8) << 1000.0 * c.sd;
    if (std::isnan(c.mean_se)) {
      out << std::setw(8) << "-" << std::setw(8) << "-";
    } else {
      out << std::setw(8) << 1000.0 * c.mean_se << std::setprecision(1) << std::setw(8) << 100.0 * c.coverage;
    }
    out << std::setprecision(0) << std::setw(9) << 1000.0 * c.median_bias << std::setw(7) << c.replicates << '\n';
  }
  out << "B, SD, SE and MedB are x1000; CI is the coverage (%) of the Wald 95% interval.\n";
  out.flags(saved_flags);
  out.precision(saved_precision);
}

}  // namespace cqr
