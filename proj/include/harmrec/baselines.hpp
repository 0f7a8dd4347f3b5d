#pragma once

#include "harmrec/dynamics.hpp"
#include "harmrec/policy.hpp"
#include "harmrec/types.hpp"

#include <optional>
#include <vector>

namespace harmrec {

/// The k highest-scoring items of a candidate set; ties go to the lower index.
ItemSet top_k_items(const ItemSet& candidates, const Vector& scores, int k);

/// Dirac policy on the top-k set of every candidate set at profile u.
Policy top_k_policy(const Instance& instance, const Vector& u, PolicyClass cls);

/// Uniform over D_C (bounded) or rho_{v|C} = min(1, k/|C|) (independent).
Policy uniform_policy(const Instance& instance, PolicyClass cls);

/// Top-k at the inherent profile u0.
Policy static_optimal_policy(const Instance& instance, PolicyClass cls);

struct AlternatingStep {
  Policy policy;
  Vector profile;     // stationary profile of `policy`
  double objective;   // p_CLK - lambda p_H at `profile`
  bool solver_converged;
};

struct AlternatingTrace {
  std::vector<AlternatingStep> steps;
  bool converged = false;
};

struct AlternatingResult {
  Policy policy;
  AlternatingTrace trace;
};

struct AlternatingOptions {
  int max_steps = 10;
  double profile_tol = 2.5e-3;
  SolverOptions solver{};
  SamplingOptions sampling{};
};

/// Alternates top-k at the current profile with the stationary profile of that policy,
/// starting from u0. Stops once the policy repeats or successive profiles are within
/// `profile_tol` (l2).
AlternatingResult alternating_optimization(const Instance& instance, PolicyClass cls,
                                           const AlternatingOptions& options = {});

struct CounterexampleParams {
  double b1 = 20.0;
  double b2 = 3.0;
  std::optional<double> c;  // default: g(s_{v1}) = 0.8 at u0
  double lambda = 100.0;
  double alpha = 0.5;
};

/// Item indices in the counterexample instance.
struct CounterexampleItems {
  static constexpr int v0 = 0;
  static constexpr int v1 = 1;
  static constexpr int harmful = 2;
};

/// Three items in R^3: v0 = (1, B2, -B2), v1 = (0.99, -B2, B2), harmful vH = (0, B2, -B2);
/// u0 = (B1, 0, 0), k = 1, beta = 0, alpha_h = alpha_nh, one candidate set {v0, v1}.
/// Top-k keeps recommending v0 while recommending v1 keeps harm negligible.
Instance alternating_counterexample(const CounterexampleParams& params);

}  // namespace harmrec
