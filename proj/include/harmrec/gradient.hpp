#pragma once

#include "harmrec/dynamics.hpp"
#include "harmrec/policy.hpp"
#include "harmrec/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace harmrec {

/// dG/dp (d x n): column v is alpha_v (v - G(p)) / (beta + sum_w alpha_w p_w).
Matrix grad_G_wrt_p(const Instance& instance, const Vector& p);

/// d p_{.|E} / du (n x d) for a single recommended set E.
Matrix grad_item_probs_wrt_u(const Instance& instance, const ItemSet& rec, const Vector& u);

/// d p / du (n x d) for the selection probabilities induced by a policy.
Matrix grad_pv_wrt_u(const Instance& instance, const Policy& policy, const Vector& u,
                     const SamplingOptions& opts = {});

/// d p / d pi (n x m).
Matrix grad_pv_wrt_pi(const Instance& instance, const Policy& policy, const Vector& u,
                      const SamplingOptions& opts = {});

struct MapJacobians {
  Matrix wrt_u;   // d x d
  Matrix wrt_pi;  // d x m
};

/// Jacobians of F(pi, u) = G(p(pi, u)).
MapJacobians grad_F(const Instance& instance, const Policy& policy, const Vector& u,
                    const SamplingOptions& opts = {});

/// d u_bar / d pi = (I - dF/du)^{-1} dF/dpi at a fixed point u_bar. Throws
/// ImplicitFunctionError when I - dF/du is numerically singular.
Matrix jacobian_stationary(const Instance& instance, const Policy& policy, const Vector& u_bar,
                           const SamplingOptions& opts = {});

struct GradientReport {
  Vector u_bar;
  double objective = 0.0;
  double p_clk = 0.0;
  double p_h = 0.0;
  Vector grad_f;      // m
  Matrix jac_ubar;    // d x m
  Matrix grad_u_F;    // d x d
  Matrix grad_pi_F;   // d x m
  double rcond = 0.0; // reciprocal condition estimate of I - dF/du
  std::optional<double> fd_max_rel_err;
};

/// Gradient of f(pi) = p_CLK(pi, u_bar(pi)) - lambda p_H(pi, u_bar(pi)) at a given fixed point.
GradientReport grad_objective_at(const Instance& instance, const Policy& policy,
                                 const Vector& u_bar, const SamplingOptions& opts = {});

/// Solves for the stationary profile first; throws NumericError if the solver does not converge.
GradientReport grad_objective(const Instance& instance, const Policy& policy,
                              const SolverOptions& solver = {}, const SamplingOptions& opts = {});

/// f(pi) with the stationary profile solved from u0.
double stationary_objective(const Instance& instance, const Policy& policy,
                            const SolverOptions& solver = {}, const SamplingOptions& opts = {});

/// Central differences with step h_i = rel_step * max(1, |x_i|).
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double rel_step = 1e-5);
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                  double rel_step = 1e-5);

/// max_i |a_i - b_i| / max(||b||_inf, tiny).
double max_relative_error(const Vector& analytic, const Vector& reference);

/// Analytic gradient compared against central differences of the full pipeline
/// pi -> u_bar(pi) -> f. Policy parameters are perturbed without re-projection.
GradientReport gradient_check(const Instance& instance, const Policy& policy,
                              const SolverOptions& solver, const SamplingOptions& opts = {},
                              double rel_step = 1e-5);

// Multilinear extension of a set function under independent sampling with marginals rho.

using SetFunction = std::function<double(const ItemSet&)>;

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct GradEstimate {
  Vector value;
  Vector std_error;
};

double multilinear_exact(const ItemSet& candidates, const Vector& rho, const SetFunction& z);
Vector multilinear_grad_exact(const ItemSet& candidates, const Vector& rho, const SetFunction& z);

/// Mean of z(E_l) over N independent draws.
Estimate multilinear_estimate(const ItemSet& candidates, const Vector& rho, const SetFunction& z,
                              std::size_t samples, std::uint64_t seed);

/// Mean of z(E_l + v) - z(E_l - v) over N draws, per coordinate.
GradEstimate multilinear_grad_estimate(const ItemSet& candidates, const Vector& rho,
                                       const SetFunction& z, std::size_t samples,
                                       std::uint64_t seed);

/// Pipage rounding of a fractional point of {rho in [0,1]^s : sum rho <= k} to an integral one
/// without decreasing the multilinear extension (evaluated exactly).
Vector pipage_round(const ItemSet& candidates, const Vector& rho, int k, const SetFunction& z);

}  // namespace harmrec
