#pragma once

#include "harmrec/choice.hpp"
#include "harmrec/policy.hpp"
#include "harmrec/types.hpp"

#include <optional>
#include <vector>

namespace harmrec {

/// E_pi[alpha_v (v - u)] + beta (u0 - u): the mean one-step change of the profile.
Vector drift(const Instance& instance, const Policy& policy, const Vector& u,
             const SamplingOptions& opts = {});

/// G(p) = (beta u0 + sum_v alpha_v p_v v) / (beta + sum_v alpha_v p_v).
Vector attraction_average(const Instance& instance, const Vector& p);

/// F(pi, u) = G(p(pi, u)). Fixed points of F are exactly the zeros of the drift.
Vector fixed_point_map(const Instance& instance, const Policy& policy, const Vector& u,
                       const SamplingOptions& opts = {});

struct SolverOptions {
  double tol = 1e-3;
  int max_iter = 10;
};

struct StationaryResult {
  Vector u_bar;
  double residual = 0.0;  // ||F(pi, u_bar) - u_bar||_2
  int iterations = 0;     // evaluations of F
  bool converged = false;
  std::optional<double> lipschitz_bound;
  bool condition_holds = false;
  std::vector<Vector> iterates;  // u^0, u^1, ..., u_bar
};

/// Iterates u <- F(pi, u) from `u_init` (u0 when empty) until ||F(u) - u|| <= tol.
/// Non-convergence is reported through `converged`, never thrown.
StationaryResult solve_stationary(const Instance& instance, const Policy& policy,
                                  const std::optional<Vector>& u_init = std::nullopt,
                                  const SolverOptions& solver = {},
                                  const SamplingOptions& opts = {});

struct ContractionReport {
  bool holds = false;
  double bound = 0.0;      // admissible max item norm
  double lipschitz = 0.0;  // NaN when alpha_h == 0
  double max_item_norm = 0.0;
  bool degenerate = false; // alpha_h == 0: bound is vacuous
};

/// Sufficient condition for F(pi, .) to be a contraction uniformly in pi:
/// max_v ||v|| < (sqrt(||u0||^2 + 12 (alpha_nh + beta) / (5 n d alpha_h)) - ||u0||) / 6,
/// with Lipschitz constant L = (3 delta^2 + ||u0|| delta) 5 n d alpha_h / (alpha_nh + beta).
ContractionReport contraction_condition(const Instance& instance);

struct RescaleResult {
  Instance instance;
  double tau = 1.0;
};

/// Scales items by tau and u0 by 1/tau (scores unchanged) so that the contraction
/// condition holds strictly. Since ||tau v|| ||u0 / tau|| is invariant, this is possible
/// only when 12 max||v|| ||u0|| < 12 (alpha_nh + beta) / (5 n d alpha_h); otherwise throws
/// NumericError. `fraction` in (0, 1) picks tau as that fraction of the largest admissible one.
RescaleResult rescale_to_contraction(const Instance& instance, double fraction = 0.9);

/// Whether some rescaling satisfies the contraction condition.
bool contraction_attainable(const Instance& instance);

struct Trajectory {
  std::vector<Vector> profiles;
  std::optional<std::size_t> converged_at;
};

/// Mean-field evolution u(t+1) = u(t) + drift(u(t)) from `u_start`, stopping when
/// ||u(t+1) - u(t)||_inf < tol_inf or after max_steps steps.
Trajectory simulate_evolution(const Instance& instance, const Policy& policy,
                              const Vector& u_start, double tol_inf = 1e-3,
                              std::size_t max_steps = 10000, const SamplingOptions& opts = {});

}  // namespace harmrec
