#include "harmrec/dynamics.hpp"

#include <cmath>
#include <limits>

namespace harmrec {

namespace {

struct Drift {
  Vector pull;     // beta u0 + sum_v alpha_v p_v v
  double weight;   // beta + sum_v alpha_v p_v
};

Drift attraction_terms(const Instance& inst, const Vector& p) {
  const Vector weights = inst.alphas().cwiseProduct(p);
  return {inst.params.beta * inst.u0 + inst.catalog.items * weights,
          inst.params.beta + weights.sum()};
}

}  // namespace

Vector attraction_average(const Instance& inst, const Vector& p) {
  const auto terms = attraction_terms(inst, p);
  if (terms.weight == 0.0) {
    throw NumericError("degenerate dynamics: beta + sum_v alpha_v p_v = 0");
  }
  return terms.pull / terms.weight;
}

Vector drift(const Instance& inst, const Policy& policy, const Vector& u,
             const SamplingOptions& opts) {
  const auto terms = attraction_terms(inst, selection_probs(inst, policy, u, opts));
  return terms.pull - terms.weight * u;
}

Vector fixed_point_map(const Instance& inst, const Policy& policy, const Vector& u,
                       const SamplingOptions& opts) {
  return attraction_average(inst, selection_probs(inst, policy, u, opts));
}

StationaryResult solve_stationary(const Instance& inst, const Policy& policy,
                                  const std::optional<Vector>& u_init,
                                  const SolverOptions& solver, const SamplingOptions& opts) {
  if (!(solver.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (solver.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  const PolicySpace space(inst, policy.cls);
  const auto dist = expand(space, policy.params, opts);
  const double c = inst.params.c;

  StationaryResult result;
  const auto contraction = contraction_condition(inst);
  result.condition_holds = contraction.holds;
  if (contraction.holds && std::isfinite(contraction.lipschitz)) {
    result.lipschitz_bound = contraction.lipschitz;
  }

  Vector u = u_init.value_or(inst.u0);
  if (u.size() != inst.dimension()) throw ConfigError("initial profile dimension mismatch");
  result.iterates.push_back(u);
  for (int it = 1; it <= solver.max_iter; ++it) {
    const Vector next =
        attraction_average(inst, selection_probs(dist, ScoreState::at(inst.catalog, u), c));
    result.iterations = it;
    result.residual = (next - u).norm();
    if (!std::isfinite(result.residual)) break;
    if (result.residual <= solver.tol) {
      result.converged = true;
      break;
    }
    u = next;
    result.iterates.push_back(u);
  }
  result.u_bar = u;
  return result;
}

ContractionReport contraction_condition(const Instance& inst) {
  ContractionReport report;
  const auto& p = inst.params;
  const double n = static_cast<double>(inst.num_items());
  const double d = static_cast<double>(inst.dimension());
  const double u0_norm = inst.u0.norm();
  report.max_item_norm = inst.catalog.items.colwise().norm().maxCoeff();
  const double delta = report.max_item_norm;
  if (p.alpha_h == 0.0) {
    report.degenerate = true;
    report.holds = true;
    report.bound = std::numeric_limits<double>::infinity();
    report.lipschitz = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  const double restoring = p.alpha_nh + p.beta;
  const double ratio = 12.0 * restoring / (5.0 * n * d * p.alpha_h);
  report.bound = (std::sqrt(u0_norm * u0_norm + ratio) - u0_norm) / 6.0;
  report.holds = delta < report.bound;
  report.lipschitz = restoring > 0.0
                         ? (3.0 * delta * delta + u0_norm * delta) * 5.0 * n * d * p.alpha_h / restoring
                         : std::numeric_limits<double>::infinity();
  return report;
}

namespace {

// Largest tau for which the rescaled instance satisfies the condition, from
// 36 delta^2 tau^2 + 12 ||u0|| delta < 12 (alpha_nh + beta) / (5 n d alpha_h).
double max_tau(const Instance& inst) {
  const auto& p = inst.params;
  const double n = static_cast<double>(inst.num_items());
  const double d = static_cast<double>(inst.dimension());
  const double delta = inst.catalog.items.colwise().norm().maxCoeff();
  const double ratio = 12.0 * (p.alpha_nh + p.beta) / (5.0 * n * d * p.alpha_h);
  const double slack = ratio - 12.0 * inst.u0.norm() * delta;
  if (!(slack > 0.0)) return 0.0;
  if (delta == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(slack) / (6.0 * delta);
}

}  // namespace

bool contraction_attainable(const Instance& inst) {
  if (inst.params.alpha_h == 0.0) return true;
  return max_tau(inst) > 0.0;
}

RescaleResult rescale_to_contraction(const Instance& inst, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("rescale fraction must lie in (0, 1)");
  if (inst.params.alpha_h == 0.0) throw NumericError("rescaling requires alpha_h > 0");
  if (contraction_condition(inst).holds) return {inst, 1.0};
  const double tau_max = max_tau(inst);
  if (!(tau_max > 0.0)) {
    throw NumericError(
        "no rescaling satisfies the contraction condition: max||v|| * ||u0|| is scale invariant "
        "and too large for this catalog");
  }
  const double tau = fraction * tau_max;
  RescaleResult out{inst, tau};
  out.instance.catalog.items *= tau;
  out.instance.u0 /= tau;
  return out;
}

Trajectory simulate_evolution(const Instance& inst, const Policy& policy, const Vector& u_start,
                              double tol_inf, std::size_t max_steps,
                              const SamplingOptions& opts) {
  if (!(tol_inf > 0.0)) throw ConfigError("trajectory tolerance must be positive");
  if (u_start.size() != inst.dimension()) throw ConfigError("start profile dimension mismatch");
  const PolicySpace space(inst, policy.cls);
  const auto dist = expand(space, policy.params, opts);
  const Vector alphas = inst.alphas();
  const double beta = inst.params.beta;

  Trajectory traj;
  traj.profiles.push_back(u_start);
  Vector u = u_start;
  for (std::size_t t = 0; t < max_steps; ++t) {
    const Vector p = selection_probs(dist, ScoreState::at(inst.catalog, u), inst.params.c);
    const Vector weights = alphas.cwiseProduct(p);
    const Vector next = beta * inst.u0 + inst.catalog.items * weights +
                        (1.0 - weights.sum() - beta) * u;
    const double step = (next - u).cwiseAbs().maxCoeff();
    u = next;
    traj.profiles.push_back(u);
    if (step < tol_inf) {
      traj.converged_at = t + 1;
      break;
    }
  }
  return traj;
}

}  // namespace harmrec
