#include "cqr/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include <Eigen/LU>

#include "cqr/error.hpp"

namespace cqr::oracles {
namespace {

struct TimeGroup {
  double events = 0.0;  // weighted events at this time
  double total = 0.0;   // weighted observations at this time
};

std::map<double, TimeGroup> group_by_time(const Dataset& data, std::span<const double> weights) {
  if (data.p() != 1) throw Error(ErrorCode::InvalidArgument, "one-sample oracle needs p = 1");
  if (!weights.empty() && weights.size() != data.n())
    throw Error(ErrorCode::InvalidArgument, "one weight per observation required");
  std::map<double, TimeGroup> groups;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    auto& g = groups[data.x(i)];
    g.total += w;
    if (data.event(i)) g.events += w;
  }
  return groups;
}

/// Calls visit(t, d, y) for each distinct event time, y the weight at risk.
void walk_events(const std::map<double, TimeGroup>& groups,
                 const std::function<void(double, double, double)>& visit) {
  double at_risk = 0.0;
  for (const auto& [t, g] : groups) at_risk += g.total;
  for (const auto& [t, g] : groups) {
    if (g.events > 0.0) visit(t, g.events, at_risk);
    at_risk -= g.total;
  }
}

template <typename F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> pick(k);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == k) {
      f(pick);
      return;
    }
    for (std::size_t i = start; i + (k - depth) <= n; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

bool interpolate(const Dataset& data, const std::vector<std::size_t>& subset, Vector& beta) {
  const auto p = static_cast<Eigen::Index>(data.p());
  Eigen::MatrixXd m(p, p);
  Vector x(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    m.row(k) = data.z(subset[static_cast<std::size_t>(k)]);
    x[k] = data.x(subset[static_cast<std::size_t>(k)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) return false;
  beta = lu.solve(x);
  return true;
}

}  // namespace

StepFunction kaplan_meier(const Dataset& data, std::span<const double> weights) {
  std::vector<double> jumps;
  std::vector<double> values;
  double survival = 1.0;
  walk_events(group_by_time(data, weights), [&](double t, double d, double y) {
    survival *= 1.0 - d / y;
    jumps.push_back(t);
    values.push_back(1.0 - survival);
  });
  return StepFunction(std::move(jumps), std::move(values), 0.0);
}

StepFunction nelson_aalen(const Dataset& data, std::span<const double> weights) {
  std::vector<double> jumps;
  std::vector<double> values;
  double cumulative = 0.0;
  walk_events(group_by_time(data, weights), [&](double t, double d, double y) {
    cumulative += d / y;
    jumps.push_back(t);
    values.push_back(cumulative);
  });
  return StepFunction(std::move(jumps), std::move(values), 0.0);
}

std::vector<double> nelson_aalen_increments(const Dataset& data, std::span<const double> weights) {
  std::vector<double> increments;
  walk_events(group_by_time(data, weights), [&](double, double d, double y) { increments.push_back(d / y); });
  return increments;
}

double km_inverse(const StepFunction& cdf, double tau, const double* last_follow_up) {
  if (!(tau >= 0.0 && tau < 1.0)) throw Error(ErrorCode::TauOutOfRange, "tau must lie in [0,1)");
  const auto& jumps = cdf.jump_points();
  const auto& values = cdf.values();
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    if (values[k] > tau) return jumps[k];
  }
  if (last_follow_up != nullptr) return *last_follow_up;
  throw Error(ErrorCode::BeyondSupport, "tau at or beyond the total mass of the distribution");
}

double km_quantile(const Dataset& data, double tau, std::span<const double> weights) {
  const double last = data.times().maxCoeff();
  return km_inverse(kaplan_meier(data, weights), tau, &last);
}

double check_objective(const Dataset& data, const Vector& beta, double tau) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double u = data.x(i) - data.z(i).dot(beta);
    total += std::max(-u, 0.0) + tau * u;
  }
  return total;
}

BruteForceResult brute_force_rq(const Dataset& data, double tau) {
  if (data.n() > 30 || data.p() > 4) throw Error(ErrorCode::TooLarge, "brute force guard: n <= 30, p <= 4");
  if (data.event_count() != data.n()) throw Error(ErrorCode::InvalidArgument, "brute_force_rq needs uncensored data");
  BruteForceResult best{std::numeric_limits<double>::infinity(), Vector()};
  Vector beta;
  for_each_subset(data.n(), data.p(), [&](const std::vector<std::size_t>& subset) {
    if (!interpolate(data, subset, beta)) return;
    const double value = check_objective(data, beta, tau);
    if (value < best.objective) best = {value, beta};
  });
  if (best.minimizer.size() == 0) throw Error(ErrorCode::Infeasible, "no rank-p interpolating subset");
  return best;
}

BruteForceResult brute_force_round(const Dataset& data, std::span<const double> phi, std::span<const double> masses) {
  if (data.n() > 12) throw Error(ErrorCode::TooLarge, "brute force guard: n <= 12");
  if (phi.size() != data.n()) throw Error(ErrorCode::InvalidArgument, "phi needs one entry per observation");
  BruteForceResult best{std::numeric_limits<double>::infinity(), Vector()};
  Vector beta;
  for_each_subset(data.n(), data.p(), [&](const std::vector<std::size_t>& subset) {
    if (!interpolate(data, subset, beta)) return;
    double value = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      const double u = data.x(i) - data.z(i).dot(beta);
      const double tol = 1e-9 * (1.0 + std::abs(data.x(i)));
      if (data.event(i)) {
        if (phi[i] <= 0.0 && u < -tol) return;
        if (phi[i] >= 1.0 && u > tol) return;
        if (phi[i] > 0.0 && phi[i] < 1.0 && std::abs(u) > tol) return;
      }
      value += (masses.empty() ? 1.0 : masses[i]) * std::max(u, 0.0);
    }
    if (value < best.objective) best = {value, beta};
  });
  if (best.minimizer.size() == 0) throw Error(ErrorCode::Infeasible, "no feasible interpolating vertex");
  return best;
}

}  // namespace cqr::oracles
