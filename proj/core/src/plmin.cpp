#include "cqr/plmin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "cqr/error.hpp"

namespace cqr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

EventRole classify(bool event, double phi) noexcept {
  if (!event) return EventRole::Censored;
  if (phi <= 0.0) return EventRole::Plus;
  if (phi >= 1.0) return EventRole::Minus;
  return EventRole::Zero;
}

PlminEngine::PlminEngine(const Dataset& data, std::span<const double> masses, PlminTolerances tol)
    : data_(data), tol_(tol), n_(data.n()), p_(data.p()) {
  if (masses.empty()) {
    masses_.assign(n_, 1.0);
  } else {
    if (masses.size() != n_) throw Error(ErrorCode::InvalidArgument, "one mass per observation required");
    for (double m : masses) {
      if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::InvalidArgument, "masses must be positive");
    }
    masses_.assign(masses.begin(), masses.end());
  }
  mass_total_ = std::accumulate(masses_.begin(), masses_.end(), 0.0);
  side_.assign(n_, Side::Above);
  role_.assign(n_, EventRole::Plus);
  phi_.assign(n_, 0.0);
}

void PlminEngine::set_phi(std::span<const double> phi) {
  if (phi.size() != n_) throw Error(ErrorCode::InvalidArgument, "phi needs one entry per observation");
  phi_.assign(phi.begin(), phi.end());
  for (std::size_t i = 0; i < n_; ++i) {
    if (data_.event(i) && !(phi_[i] >= 0.0 && phi_[i] <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "phi values must lie in [0,1]");
    role_[i] = classify(data_.event(i), phi_[i]);
  }
}

int PlminEngine::precedence(std::size_t i) const {
  switch (role_[i]) {
    case EventRole::Zero: return 0;
    case EventRole::Plus: return 1;
    case EventRole::Censored: return 2;
    case EventRole::Minus: return 3;
  }
  return 4;
}

bool PlminEngine::precedes(std::size_t a, std::size_t b) const {
  const int pa = precedence(a);
  const int pb = precedence(b);
  return pa != pb ? pa < pb : a < b;
}

double PlminEngine::activation_tol(std::size_t i) const {
  return tol_.activation * (1.0 + std::abs(data_.x(i)));
}

void PlminEngine::start(std::span<const double> phi, const Vector& warm_start) {
  set_phi(phi);
  if (warm_start.size() != idx(p_)) throw Error(ErrorCode::InvalidArgument, "warm start has wrong length");
  beta_ = warm_start;
  residual_ = data_.times() - data_.covariates() * beta_;
  bland_ = false;
  pivots_ = 0;
  basis_.clear();

  std::vector<std::size_t> on_plane;
  for (std::size_t i = 0; i < n_; ++i) {
    const double r = residual_[idx(i)];
    const double t = activation_tol(i);
    const bool ok = role_[i] == EventRole::Plus    ? r >= -t
                    : role_[i] == EventRole::Minus ? r <= t
                    : role_[i] == EventRole::Zero  ? std::abs(r) <= t
                                                   : true;
    if (!ok) throw Error(ErrorCode::InvalidArgument, "warm start violates the side constraint of observation " +
                                                         std::to_string(i));
    if (std::abs(r) <= t) on_plane.push_back(i);
    switch (role_[i]) {
      case EventRole::Plus: side_[i] = Side::Above; break;
      case EventRole::Minus: side_[i] = Side::Below; break;
      case EventRole::Zero: side_[i] = Side::Basis; break;
      case EventRole::Censored: side_[i] = r >= 0.0 ? Side::Above : Side::Below; break;
    }
  }

  // Admit interpolated observations in precedence order while the rank grows.
  std::sort(on_plane.begin(), on_plane.end(), [this](std::size_t a, std::size_t b) { return precedes(a, b); });
  Eigen::MatrixXd rows(0, idx(p_));
  for (std::size_t i : on_plane) {
    if (basis_.size() == p_) break;
    Eigen::MatrixXd trial(rows.rows() + 1, idx(p_));
    trial << rows, data_.z(i);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(trial);
    lu.setThreshold(1e-10);
    if (lu.rank() == trial.rows()) {
      rows = std::move(trial);
      basis_.push_back(i);
      side_[i] = Side::Basis;
    } else if (role_[i] == EventRole::Zero) {
      throw Error(ErrorCode::RankDeficientVertex, "interior-weight observations are linearly dependent");
    }
  }
  for (std::size_t i : basis_) residual_[idx(i)] = 0.0;
  if (basis_.size() == p_) refresh_vertex();
}

void PlminEngine::restart(std::span<const double> phi) {
  if (!at_vertex()) throw Error(ErrorCode::InvalidArgument, "restart requires a completed round");
  set_phi(phi);
  bland_ = false;
  pivots_ = 0;
  compute_duals();
}

Vector PlminEngine::above_sum() const {
  Vector sum = Vector::Zero(idx(p_));
  const auto& z = data_.covariates();
  for (std::size_t i = 0; i < n_; ++i) {
    if (side_[i] == Side::Above) sum.noalias() += masses_[i] * z.row(idx(i)).transpose();
  }
  return sum;
}

void PlminEngine::refresh_vertex() {
  Eigen::MatrixXd m(idx(p_), idx(p_));
  Vector x(idx(p_));
  for (std::size_t k = 0; k < p_; ++k) {
    m.row(idx(k)) = data_.z(basis_[k]);
    x[idx(k)] = data_.x(basis_[k]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw Error(ErrorCode::RankDeficientVertex, "interpolated set lost full rank");
  basis_inverse_ = lu.inverse();
  beta_ = lu.solve(x);
  residual_.noalias() = data_.times() - data_.covariates() * beta_;
  for (std::size_t i : basis_) residual_[idx(i)] = 0.0;
  compute_duals();
}

void PlminEngine::compute_duals() {
  rhs_ = above_sum();
  for (std::size_t i : basis_) {
    const double c = role_[i] == EventRole::Censored ? 1.0 : 1.0 - phi_[i];
    rhs_.noalias() += masses_[i] * c * data_.z(i).transpose();
  }
  duals_.noalias() = basis_inverse_.transpose() * rhs_;
  // One step of refinement keeps the certificate residual at rounding level.
  Eigen::MatrixXd m(idx(p_), idx(p_));
  for (std::size_t k = 0; k < p_; ++k) m.row(idx(k)) = data_.z(basis_[k]);
  const Vector defect = m.transpose() * duals_ - rhs_;
  duals_.noalias() -= basis_inverse_.transpose() * defect;
}

std::vector<PlminEngine::Edge> PlminEngine::edges() const {
  std::vector<Edge> out;
  for (std::size_t k = 0; k < p_; ++k) {
    const std::size_t i = basis_[k];
    const double u = duals_[idx(k)];
    switch (role_[i]) {
      case EventRole::Plus: out.push_back({k, -1, u}); break;
      case EventRole::Minus: out.push_back({k, +1, -u}); break;
      case EventRole::Zero: break;
      case EventRole::Censored:
        out.push_back({k, +1, masses_[i] - u});
        out.push_back({k, -1, u});
        break;
    }
  }
  return out;
}

PlminEngine::Ratio PlminEngine::ratio_test(const Vector& direction, const Eigen::VectorXd& zd) const {
  const double zeps = 1e-13 * (1.0 + direction.cwiseAbs().maxCoeff()) * static_cast<double>(p_);
  Ratio best;
  double t_min = kInf;
  for (std::size_t i = 0; i < n_; ++i) {
    const double rate = zd[idx(i)];
    const double r = residual_[idx(i)];
    double t = kInf;
    if (side_[i] == Side::Above && rate > zeps) {
      t = std::max(r, 0.0) / rate;
    } else if (side_[i] == Side::Below && rate < -zeps) {
      t = std::max(-r, 0.0) / -rate;
    } else {
      continue;
    }
    if (t < t_min) {
      t_min = t;
      best.entering = i;
    }
  }
  if (t_min == kInf) return best;
  best.blocked = true;
  best.step = t_min;
  // Every observation reached at the same step is a candidate; precedence decides.
  for (std::size_t i = 0; i < n_; ++i) {
    if (i == best.entering || side_[i] == Side::Basis) continue;
    const double rate = zd[idx(i)];
    const bool approaching = (side_[i] == Side::Above && rate > zeps) || (side_[i] == Side::Below && rate < -zeps);
    if (!approaching) continue;
    if (std::abs(residual_[idx(i)] - t_min * rate) <= activation_tol(i) && precedes(i, best.entering)) {
      best.entering = i;
    }
  }
  return best;
}

SearchStep PlminEngine::vertex_step() {
  const double rc_tol = tol_.reduced_cost * mass_total_;
  const auto all = edges();
  const Edge* chosen = nullptr;
  double best_rate = 0.0;
  for (const auto& e : all) {
    if (e.reduced_cost >= -rc_tol) continue;
    if (bland_) {
      if (chosen == nullptr || precedes(basis_[e.position], basis_[chosen->position])) chosen = &e;
    } else {
      const double rate = -e.reduced_cost / basis_inverse_.col(idx(e.position)).norm();
      if (rate > best_rate) {
        best_rate = rate;
        chosen = &e;
      }
    }
  }
  SearchStep result;
  if (chosen == nullptr) {
    result.kind = SearchStep::Kind::Optimal;
    result.objective = objective();
    return result;
  }

  const Vector d = static_cast<double>(chosen->direction) * basis_inverse_.col(idx(chosen->position));
  const Eigen::VectorXd zd = data_.covariates() * d;
  const auto ratio = ratio_test(d, zd);
  if (!ratio.blocked) throw Error(ErrorCode::UnboundedObjective, "descending edge with no blocking observation");

  if (std::abs(residual_[idx(ratio.entering)]) <= activation_tol(ratio.entering)) bland_ = true;
  if (++pivots_ > tol_.max_pivots_factor * (n_ + p_))
    throw Error(ErrorCode::CycleDetected, "pivot limit exceeded within one round");

  const std::size_t leaving = basis_[chosen->position];
  side_[leaving] = chosen->direction > 0 ? Side::Below : Side::Above;
  basis_[chosen->position] = ratio.entering;
  side_[ratio.entering] = Side::Basis;
  refresh_vertex();

  result.kind = SearchStep::Kind::Moved;
  result.entering = ratio.entering;
  result.leaving = static_cast<std::ptrdiff_t>(leaving);
  result.step = ratio.step;
  result.objective = objective();
  return result;
}

SearchStep PlminEngine::descent_step() {
  const auto k = idx(basis_.size());
  Eigen::MatrixXd null_basis;
  if (k == 0) {
    null_basis = Eigen::MatrixXd::Identity(idx(p_), idx(p_));
  } else {
    Eigen::MatrixXd a(idx(p_), k);
    for (Eigen::Index j = 0; j < k; ++j) a.col(j) = data_.z(basis_[static_cast<std::size_t>(j)]).transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    null_basis = q.rightCols(idx(p_) - k);
  }
  const Vector g = above_sum();
  Vector d = null_basis * (null_basis.transpose() * g);
  Eigen::VectorXd zd;
  Ratio ratio;
  if (d.norm() > 1e-12 * (1.0 + g.norm())) {
    zd = data_.covariates() * d;
    ratio = ratio_test(d, zd);
    if (!ratio.blocked) throw Error(ErrorCode::UnboundedObjective, "objective decreases without bound");
  } else {
    // Flat subspace: take the lexicographically first projected coordinate axis.
    for (Eigen::Index j = 0; j < idx(p_); ++j) {
      d = null_basis * null_basis.row(j).transpose();
      if (d.norm() > 1e-6) break;
    }
    zd = data_.covariates() * d;
    ratio = ratio_test(d, zd);
    if (!ratio.blocked) {
      d = -d;
      zd = -zd;
      ratio = ratio_test(d, zd);
    }
    if (!ratio.blocked) throw Error(ErrorCode::RankDeficientVertex, "no observation blocks a free direction");
  }
  if (++pivots_ > tol_.max_pivots_factor * (n_ + p_))
    throw Error(ErrorCode::CycleDetected, "step limit exceeded within one round");

  beta_.noalias() += ratio.step * d;
  residual_.noalias() -= ratio.step * zd;
  basis_.push_back(ratio.entering);
  side_[ratio.entering] = Side::Basis;
  for (std::size_t i : basis_) residual_[idx(i)] = 0.0;
  if (basis_.size() == p_) refresh_vertex();

  SearchStep result;
  result.kind = SearchStep::Kind::Moved;
  result.entering = ratio.entering;
  result.step = ratio.step;
  result.objective = objective();
  return result;
}

SearchStep PlminEngine::step() { return at_vertex() ? vertex_step() : descent_step(); }

std::size_t PlminEngine::optimize() {
  std::size_t moves = 0;
  while (step().kind == SearchStep::Kind::Moved) ++moves;
  return moves;
}

double PlminEngine::objective() const {
  double total = 0.0;
  for (std::size_t i = 0; i < n_; ++i) total += masses_[i] * std::max(residual_[idx(i)], 0.0);
  return total;
}

RoundOutput PlminEngine::finish() {
  if (!at_vertex()) throw Error(ErrorCode::InvalidArgument, "round finished before reaching a vertex");
  const double rc_tol = tol_.reduced_cost * mass_total_;

  RoundOutput out;
  out.beta = beta_;
  out.objective = objective();
  out.pivots = pivots_;
  auto& state = out.state;
  state.phi = phi_;
  for (std::size_t i = 0; i < n_; ++i) {
    switch (role_[i]) {
      case EventRole::Plus: state.d_plus.push_back(i); break;
      case EventRole::Zero: state.d_zero.push_back(i); break;
      case EventRole::Minus: state.d_minus.push_back(i); break;
      case EventRole::Censored: break;
    }
    if (side_[i] != Side::Basis && std::abs(residual_[idx(i)]) <= activation_tol(i))
      state.degenerate.push_back({i, side_[i] == Side::Below ? 1.0 : 0.0});
  }

  bool signs_ok = true;
  for (std::size_t k = 0; k < p_; ++k) {
    const std::size_t i = basis_[k];
    const double u = duals_[idx(k)];
    BasisEntry entry{i, role_[i] != EventRole::Censored, 0.0, 0.0};
    if (entry.event) {
      entry.weight = phi_[i];
      entry.gamma = std::abs(u) <= rc_tol ? 0.0 : u / masses_[i];
      if (role_[i] == EventRole::Plus && entry.gamma < 0.0) signs_ok = false;
      if (role_[i] == EventRole::Minus && entry.gamma > 0.0) signs_ok = false;
    } else {
      double w = u / masses_[i];
      const double slack = rc_tol / masses_[i];
      if (w < 0.0 && w >= -slack) w = 0.0;
      if (w > 1.0 && w <= 1.0 + slack) w = 1.0;
      if (w < 0.0 || w > 1.0) signs_ok = false;
      entry.weight = w;
    }
    state.basis.push_back(entry);
  }

  state.h_hat = above_sum();
  Vector combination = Vector::Zero(idx(p_));
  for (const auto& e : state.basis) {
    const auto z = data_.z(e.index).transpose();
    state.h_hat.noalias() += masses_[e.index] * (1.0 - e.weight) * z;
    if (e.event) combination.noalias() += masses_[e.index] * e.gamma * z;
  }
  out.dual_residual = (combination - state.h_hat).cwiseAbs().maxCoeff();
  out.certificate_ok = signs_ok && out.dual_residual <= tol_.dual;

  out.lambda_b = compute_breakpoint(state);
  out.phi_next = update_weights(state, out.lambda_b, tol_.weight_snap);

  // A tight edge that can actually be travelled means another minimizer exists.
  bool nonunique = false;
  for (const auto& e : edges()) {
    if (e.reduced_cost > rc_tol) continue;
    const Vector d = static_cast<double>(e.direction) * basis_inverse_.col(idx(e.position));
    const Eigen::VectorXd zd = data_.covariates() * d;
    const auto ratio = ratio_test(d, zd);
    if (!ratio.blocked || ratio.step * d.cwiseAbs().maxCoeff() > tol_.activation) {
      nonunique = true;
      break;
    }
  }
  const bool mixed = std::any_of(state.basis.begin(), state.basis.end(), [](const BasisEntry& e) { return !e.event; });
  out.classification = nonunique ? SegmentFlag::Nonunique
                       : mixed   ? SegmentFlag::UniqueMixedS
                                 : SegmentFlag::UniqueUncensoredS;
  return out;
}

RoundOutput PlminEngine::solve(std::span<const double> phi, const Vector& warm_start) {
  start(phi, warm_start);
  optimize();
  return finish();
}

RoundOutput solve_round(const RoundInput& input) {
  if (input.data == nullptr) throw Error(ErrorCode::InvalidArgument, "round input has no dataset");
  PlminEngine engine(*input.data, input.masses);
  return engine.solve(input.phi, input.warm_start);
}

double compute_breakpoint(const PartitionState& state) {
  double lambda = kInf;
  for (const auto& e : state.basis) {
    if (!e.event || e.gamma == 0.0) continue;
    const double candidate = ((e.gamma > 0.0 ? 1.0 : 0.0) - e.weight) / e.gamma;
    lambda = std::min(lambda, candidate);
  }
  if (lambda == kInf) return 1.0;
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::NonPositiveBreakpoint,
                "relative breakpoint " + std::to_string(lambda) + " from inconsistent weight/multiplier signs");
  }
  return std::min(lambda, 1.0);
}

std::vector<double> update_weights(const PartitionState& state, double lambda_b, double snap) {
  std::vector<double> next = state.phi;
  for (const auto& e : state.basis) {
    if (!e.event) continue;
    double w = e.weight + lambda_b * e.gamma;
    if (std::abs(w) <= snap) w = 0.0;
    if (std::abs(w - 1.0) <= snap) w = 1.0;
    if (w < -1e-9 || w > 1.0 + 1e-9) {
      throw Error(ErrorCode::WeightOutOfRange, "updated weight " + std::to_string(w) + " for observation " +
                                                   std::to_string(e.index));
    }
    next[e.index] = std::clamp(w, 0.0, 1.0);
  }
  return next;
}

RoundOutput resolve_degeneracy(const Dataset& data, std::span<const double> phi,
                               std::span<const std::size_t> interpolated, const Vector& beta,
                               std::span<const double> masses) {
  PlminEngine engine(data, masses);
  engine.start(phi, beta);
  // Only the listed observations count as interpolated; verify they supply rank p.
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(interpolated.size()), static_cast<Eigen::Index>(data.p()));
  for (std::size_t k = 0; k < interpolated.size(); ++k) rows.row(static_cast<Eigen::Index>(k)) = data.z(interpolated[k]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(rows);
  lu.setThreshold(1e-10);
  if (static_cast<std::size_t>(lu.rank()) < data.p())
    throw Error(ErrorCode::RankDeficientVertex, "interpolated set does not have full rank");
  engine.optimize();
  return engine.finish();
}

}  // namespace cqr
