#pragma once

// One round of progressive localized minimization: minimize the convex
// piecewise-linear objective sum_i m_i (x_i - z_i'b)^+ under the side
// constraints implied by the current phi values, then read off the
// interpolated set, the split weights, the dual multipliers and the relative
// breakpoint at which the round's coefficient vector stops solving the
// estimating equation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cqr/model.hpp"

namespace cqr {

struct PlminTolerances {
  /// Relative activation tolerance: |x_i - z_i'b| <= activation * (1 + |x_i|)
  /// marks a newly blocking observation during a line search.
  double activation = 1e-9;
  /// Absolute per-component tolerance on the interpolation-dual identity.
  double dual = 1e-8;
  /// Reduced costs above -reduced_cost * sum(m) count as non-negative.
  double reduced_cost = 1e-12;
  /// Updated weights within this distance of 0 or 1 are snapped to the bound.
  double weight_snap = 1e-10;
  /// Pivots per round before anti-cycling is declared broken.
  std::size_t max_pivots_factor = 50;
};

/// Role of an event in a round, read off its phi value.
enum class EventRole : std::uint8_t {
  Plus,      // phi = 0: must stay on or below the observation (x >= z'b)
  Zero,      // phi in (0,1): must stay interpolated
  Minus,     // phi = 1: must stay on or above (x <= z'b)
  Censored,  // unconstrained; contributes a kink to the objective
};

EventRole classify(bool event, double phi) noexcept;

/// Position of an observation relative to the current hyperplane. Tracked
/// combinatorially; the basis is interpolated by construction.
enum class Side : std::uint8_t { Above, Below, Basis };

/// Active-set bookkeeping of one round.
struct PartitionState {
  std::vector<double> phi;  // per observation (censored entries unused)
  std::vector<std::size_t> d_minus, d_zero, d_plus;
  std::vector<BasisEntry> basis;            // the p-member interpolated set S
  std::vector<DegenerateEntry> degenerate;  // interpolated but outside S
  Vector h_hat;
};

struct RoundInput {
  const Dataset* data = nullptr;
  std::vector<double> phi;  // one entry per observation; censored entries ignored
  Vector warm_start;        // feasible for the round's side constraints
  double tau = 0.0;
  std::vector<double> masses;  // empty means unit masses
};

struct RoundOutput {
  Vector beta;
  PartitionState state;
  double lambda_b = 1.0;
  std::vector<double> phi_next;
  SegmentFlag classification = SegmentFlag::UniqueUncensoredS;
  double dual_residual = 0.0;
  bool certificate_ok = true;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Outcome of one steepest-descent move.
struct SearchStep {
  enum class Kind : std::uint8_t { Moved, Optimal } kind = Kind::Optimal;
  std::size_t entering = 0;  // observation that became interpolated
  std::ptrdiff_t leaving = -1;  // observation released from the basis, if any
  double step = 0.0;
  double objective = 0.0;
};

/// Stateful round solver. One instance serves a whole fit: after a round the
/// basis and side labels carry over, and the next round starts from the
/// previous vertex, which is feasible by continuity of phi.
class PlminEngine {
 public:
  explicit PlminEngine(const Dataset& data, std::span<const double> masses = {}, PlminTolerances tol = {});

  /// Starts a round from an arbitrary feasible point. Observations found on
  /// the hyperplane are admitted to the basis in precedence order (interior
  /// events, then phi = 0 events, censored, phi = 1 events; index breaks ties)
  /// while they raise its rank.
  void start(std::span<const double> phi, const Vector& warm_start);

  /// Starts the next round from the current vertex with updated phi values.
  void restart(std::span<const double> phi);

  /// Single move: a projected steepest-descent line search while fewer than p
  /// observations are interpolated, otherwise a steepest-edge pivot along a
  /// descending edge of the vertex. Returns Optimal when no feasible
  /// direction decreases the objective.
  SearchStep step();

  /// Repeats step() until optimal; returns the number of moves.
  std::size_t optimize();

  /// Extracts the certificate, breakpoint, updated phi and classification at
  /// the current (optimal) vertex.
  RoundOutput finish();

  /// start/restart + optimize + finish.
  RoundOutput solve(std::span<const double> phi, const Vector& warm_start);

  const Vector& beta() const noexcept { return beta_; }
  double objective() const;
  std::span<const std::size_t> basis() const noexcept { return basis_; }
  Side side(std::size_t i) const { return side_[i]; }
  bool at_vertex() const noexcept { return basis_.size() == p_; }
  bool anti_cycling_active() const noexcept { return bland_; }

 private:
  struct Edge {
    std::size_t position = 0;
    int direction = 0;  // +1: member moves below the hyperplane, -1: above
    double reduced_cost = 0.0;
  };
  struct Ratio {
    bool blocked = false;
    double step = 0.0;
    std::size_t entering = 0;
  };

  void set_phi(std::span<const double> phi);
  int precedence(std::size_t i) const;
  bool precedes(std::size_t a, std::size_t b) const;
  double activation_tol(std::size_t i) const;

  void refresh_vertex();
  void compute_duals();
  std::vector<Edge> edges() const;
  Ratio ratio_test(const Vector& direction, const Eigen::VectorXd& zd) const;
  SearchStep vertex_step();
  SearchStep descent_step();
  Vector above_sum() const;

  const Dataset& data_;
  std::vector<double> masses_;
  double mass_total_ = 0.0;
  PlminTolerances tol_;
  std::size_t n_ = 0;
  std::size_t p_ = 0;

  std::vector<double> phi_;
  std::vector<EventRole> role_;
  std::vector<Side> side_;
  std::vector<std::size_t> basis_;

  Vector beta_;
  Vector residual_;
  Eigen::MatrixXd basis_inverse_;  // inverse of the p x p matrix with rows z_i, i in S
  Vector duals_;                   // per basis position: m_i * gamma_i (events), m_i * w_i (censored)
  Vector rhs_;
  bool bland_ = false;
  std::size_t pivots_ = 0;
};

/// Solves one round from scratch (independent of any previous round).
/// Throws Error{UnboundedObjective}, Error{CycleDetected},
/// Error{InvalidArgument} on an infeasible warm start.
RoundOutput solve_round(const RoundInput& input);

/// Relative breakpoint: min over basis events with nonzero gamma of
/// (1{gamma > 0} - w) / gamma, or 1 when there are none; capped at 1.
/// Throws Error{NonPositiveBreakpoint}.
double compute_breakpoint(const PartitionState& state);

/// phi at tau + lambda_b (1 - tau): w + lambda_b * gamma for basis events,
/// unchanged elsewhere. Throws Error{WeightOutOfRange}.
std::vector<double> update_weights(const PartitionState& state, double lambda_b,
                                   double snap = PlminTolerances{}.weight_snap);

/// Picks a p-member basis out of an interpolated set larger than p, following
/// the precedence order, and restores the sign conditions by degenerate
/// pivots. `beta` must interpolate every listed observation.
/// Throws Error{RankDeficientVertex} when the set does not have rank p.
RoundOutput resolve_degeneracy(const Dataset& data, std::span<const double> phi,
                               std::span<const std::size_t> interpolated, const Vector& beta,
                               std::span<const double> masses = {});

}  // namespace cqr
