#include "cqr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cqr/error.hpp"

namespace cqr {
namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double mass_of(const QuantileProcess& process, std::size_t i) {
  return process.masses().empty() ? 1.0 : process.masses()[i];
}

/// Per-segment pieces of the estimating equation, all linear in the relative
/// position lambda within the segment:
///   integrand  = free - lambda * moving
///   left side  = below + lambda * moving
struct SegmentTerms {
  Vector free;
  Vector below;
  Vector moving;
};

SegmentTerms segment_terms(const QuantileProcess& process, const Dataset& data, std::size_t k) {
  const auto p = idx(data.p());
  SegmentTerms terms{Vector::Zero(p), Vector::Zero(p), Vector::Zero(p)};
  const Vector residual = data.times() - data.covariates() * process.coefficients()[k];

  // Weights recorded for interpolated observations; -1 marks "not on the plane".
  std::vector<double> weight(data.n(), -1.0);
  std::vector<double> gamma(data.n(), 0.0);
  if (!process.traces().empty()) {
    const auto& trace = process.traces()[k];
    for (const auto& e : trace.basis) {
      weight[e.index] = e.weight;
      gamma[e.index] = e.gamma;
    }
    for (const auto& e : trace.degenerate) weight[e.index] = e.weight;
  }

  for (std::size_t i = 0; i < data.n(); ++i) {
    const double m = mass_of(process, i);
    const auto z = data.z(i).transpose();
    const double r = residual[idx(i)];
    const bool on = weight[i] >= 0.0 && std::abs(r) <= 1e-9 * (1.0 + std::abs(data.x(i)));
    if (on) {
      terms.free.noalias() += m * (1.0 - weight[i]) * z;
      if (data.event(i)) {
        terms.below.noalias() += m * weight[i] * z;
        terms.moving.noalias() += m * gamma[i] * z;
      }
    } else if (r > 0.0) {
      terms.free.noalias() += m * z;
    } else if (r < 0.0) {
      if (data.event(i)) terms.below.noalias() += m * z;
    } else {
      // Exactly on the plane without a recorded weight: counts as at risk.
      terms.free.noalias() += m * z;
    }
  }
  return terms;
}

/// Right-side contribution of segment k between its start and the point whose
/// survival (1 - tau) equals `survival_end`.
Vector segment_integral(const SegmentTerms& terms, double survival_start, double survival_end) {
  const double log_factor = std::log(survival_start / survival_end);
  const double lambda_end = 1.0 - survival_end / survival_start;
  return terms.free * log_factor - terms.moving * (log_factor - lambda_end);
}

}  // namespace

QuantileProcess fit(const Dataset& data, const FitConfig& config) { return fit_weighted(data, {}, config); }

QuantileProcess fit_weighted(const Dataset& data, std::span<const double> masses, const FitConfig& config) {
  const std::size_t n = data.n();
  const double tau_max = config.tau_max > 0.0 ? config.tau_max : 1.0 - 1.0 / static_cast<double>(n);
  if (!(tau_max > 0.0 && tau_max < 1.0))
    throw Error(ErrorCode::InvalidArgument, "tau_max must lie in (0,1)");
  const std::size_t max_rounds = config.max_rounds > 0 ? config.max_rounds : 10 * n;

  PlminEngine engine(data, masses, config.tolerances);

  std::vector<double> breakpoints;
  std::vector<double> survival;
  std::vector<Vector> coefficients;
  std::vector<SegmentFlag> flags;
  std::vector<SegmentTrace> traces;

  Vector warm = Vector::Zero(idx(data.p()));
  warm[0] = data.times().minCoeff() - 1.0;
  std::vector<double> phi(n, 0.0);
  double surv = 1.0;
  double tau_end = 1.0;

  for (std::size_t round = 0;; ++round) {
    if (round == 0) {
      engine.start(phi, warm);
    } else {
      engine.restart(phi);
    }
    engine.optimize();
    RoundOutput out = engine.finish();

    const double tau = 1.0 - surv;
    if (!breakpoints.empty() && breakpoints.back() == tau) {
      // lambda_b too small to move tau in floating point: the new right value wins.
      breakpoints.pop_back();
      survival.pop_back();
      coefficients.pop_back();
      flags.pop_back();
      traces.pop_back();
    }
    breakpoints.push_back(tau);
    survival.push_back(surv);
    coefficients.push_back(out.beta);
    flags.push_back(out.classification);
    traces.push_back(SegmentTrace{std::move(out.state.basis), std::move(out.state.degenerate),
                                  std::move(out.state.h_hat), out.lambda_b, out.dual_residual,
                                  out.certificate_ok});

    if (out.classification == SegmentFlag::Nonunique) {
      tau_end = tau;
      break;
    }
    if (out.lambda_b >= 1.0) {
      tau_end = 1.0;
      break;
    }
    surv *= 1.0 - out.lambda_b;
    const double next_tau = 1.0 - surv;
    if (next_tau >= tau_max || round + 1 >= max_rounds || next_tau >= 1.0) {
      tau_end = std::min(next_tau, 1.0);
      break;
    }
    phi = std::move(out.phi_next);
  }

  QuantileProcess process(std::move(breakpoints), std::move(survival), std::move(coefficients), tau_end,
                          std::move(flags), std::move(traces),
                          std::vector<double>(masses.begin(), masses.end()));
  if (config.residual_check) {
    const double worst = max_equation_residual(process, data);
    const double tol = residual_tolerance(process, data);
    if (!(worst <= tol)) {
      throw Error(ErrorCode::ResidualCheckFailed, "estimating-equation residual " + std::to_string(worst) +
                                                      " exceeds " + std::to_string(tol));
    }
  }
  return process;
}

std::vector<Vector> equation_residuals(const QuantileProcess& process, const Dataset& data,
                                       std::span<const double> taus) {
  if (!std::is_sorted(taus.begin(), taus.end()))
    throw Error(ErrorCode::InvalidArgument, "taus must be ascending");
  std::vector<Vector> out;
  out.reserve(taus.size());
  if (taus.empty()) return out;
  const std::size_t last = process.segment_index(taus.back());
  process.segment_index(taus.front());

  Vector integral = Vector::Zero(idx(data.p()));
  std::size_t t = 0;
  const auto& surv = process.survival();
  for (std::size_t k = 0; k <= last && t < taus.size(); ++k) {
    const SegmentTerms terms = segment_terms(process, data, k);
    const double seg_end = process.segment_end(k);
    for (; t < taus.size() && (taus[t] < seg_end || k == last); ++t) {
      const double s_tau = 1.0 - taus[t];
      const double lambda = 1.0 - s_tau / surv[k];
      const Vector lhs = terms.below + lambda * terms.moving;
      const Vector rhs = integral + segment_integral(terms, surv[k], s_tau);
      out.push_back(lhs - rhs);
    }
    if (k + 1 < process.segment_count()) integral += segment_integral(terms, surv[k], surv[k + 1]);
  }
  return out;
}

Vector equation_residual(const QuantileProcess& process, const Dataset& data, double tau) {
  const double one[] = {tau};
  return equation_residuals(process, data, one).front();
}

double residual_tolerance(const QuantileProcess& process, const Dataset& data) {
  const double total = process.masses().empty()
                           ? static_cast<double>(data.n())
                           : std::accumulate(process.masses().begin(), process.masses().end(), 0.0);
  return 1e-8 * std::max(static_cast<double>(data.n()), total);
}

double max_equation_residual(const QuantileProcess& process, const Dataset& data) {
  std::vector<double> taus;
  for (double b : process.breakpoints())
    if (b < process.tau_end()) taus.push_back(b);
  for (int g = 1; g <= 19; ++g) {
    const double t = 0.05 * g;
    if (t < process.tau_end()) taus.push_back(t);
  }
  std::sort(taus.begin(), taus.end());
  double worst = 0.0;
  for (const auto& r : equation_residuals(process, data, taus)) worst = std::max(worst, r.cwiseAbs().maxCoeff());
  return worst;
}

double PhiTrace::operator()(double tau) const {
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
    if (tau >= it->tau_lo) return it->value_lo + it->slope * (tau - it->tau_lo);
  }
  throw Error(ErrorCode::TauOutOfRange, "tau below the trace");
}

double PhiTrace::left_limit(double tau) const {
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
    if (tau > it->tau_lo) return it->value_lo + it->slope * (tau - it->tau_lo);
  }
  throw Error(ErrorCode::TauOutOfRange, "no left limit at the start of the trace");
}

PhiTrace phi_trace(const QuantileProcess& process, const Dataset& data, std::size_t i) {
  if (i >= data.n()) throw Error(ErrorCode::IndexOutOfRange, "observation " + std::to_string(i) + " out of range");
  std::vector<LinearPiece> pieces;
  const auto z = data.z(i);
  for (std::size_t k = 0; k < process.segment_count(); ++k) {
    LinearPiece piece;
    piece.tau_lo = process.breakpoints()[k];
    piece.tau_hi = process.segment_end(k);
    const double r = data.x(i) - z.dot(process.coefficients()[k]);
    bool on = false;
    if (!process.traces().empty()) {
      const auto& trace = process.traces()[k];
      for (const auto& e : trace.basis) {
        if (e.index != i) continue;
        on = true;
        piece.value_lo = e.weight;
        piece.slope = e.event ? e.gamma / process.survival()[k] : 0.0;
      }
      for (const auto& e : trace.degenerate) {
        if (e.index != i) continue;
        on = true;
        piece.value_lo = e.weight;
      }
    }
    if (!on) piece.value_lo = r < 0.0 ? 1.0 : 0.0;
    pieces.push_back(piece);
  }
  return PhiTrace(std::move(pieces));
}

}  // namespace cqr
