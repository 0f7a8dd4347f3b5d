#include "harmrec/optimizer.hpp"

#include "harmrec/baselines.hpp"
#include "harmrec/choice.hpp"
#include "harmrec/gradient.hpp"

#include <cmath>
#include <random>

namespace harmrec {

namespace {

struct Evaluation {
  double objective = 0.0;
  Vector u_bar;
};

std::optional<Evaluation> evaluate(const Instance& inst, const Policy& policy,
                                   const OptimizeConfig& config, std::string& error) {
  try {
    const auto stationary =
        solve_stationary(inst, policy, std::nullopt, config.solver, config.sampling);
    if (!stationary.converged) {
      error = "stationary solver did not converge (residual " +
              std::to_string(stationary.residual) + ")";
      return std::nullopt;
    }
    const auto ch = click_and_harm_probs(inst, policy, stationary.u_bar, config.sampling);
    const double f = ch.p_clk - inst.params.lambda * ch.p_h;
    if (!std::isfinite(f)) {
      error = "objective is not finite";
      return std::nullopt;
    }
    return Evaluation{f, stationary.u_bar};
  } catch (const NumericError& e) {
    error = e.what();
    return std::nullopt;
  }
}

void check_config(const OptimizeConfig& config) {
  if (config.max_iters < 0) throw ConfigError("max_iters must be non-negative");
  if (!(config.step_init > 0.0)) throw ConfigError("step_init must be positive");
  if (!(config.backtrack > 0.0 && config.backtrack < 1.0)) {
    throw ConfigError("backtrack factor must lie in (0, 1)");
  }
  if (config.max_backtracks < 0) throw ConfigError("max_backtracks must be non-negative");
  if (!(config.ftol >= 0.0)) throw ConfigError("ftol must be non-negative");
  if (config.random_starts < 0) throw ConfigError("random_starts must be non-negative");
}

}  // namespace

StartOutcome pga(const Instance& inst, const Policy& start, const OptimizeConfig& config,
                 std::string label) {
  check_config(config);
  const PolicySpace space(inst, start.cls);
  StartOutcome out;
  out.label = std::move(label);
  out.initial = start;
  Policy current{start.cls, space.project(start.params)};
  out.policy = current;

  std::string error;
  auto eval = evaluate(inst, current, config, error);
  if (!eval) {
    out.failed = true;
    out.diagnostic = "start: " + error;
    return out;
  }
  out.objective = eval->objective;
  out.u_bar = eval->u_bar;

  for (int it = 0; it <= config.max_iters; ++it) {
    Vector grad;
    try {
      grad = grad_objective_at(inst, current, eval->u_bar, config.sampling).grad_f;
    } catch (const NumericError& e) {
      out.diagnostic = std::string("gradient: ") + e.what();
      break;
    }
    const double pg_norm = (space.project(current.params + grad) - current.params).norm();
    if (it == 0) {
      out.trace.push_back({0, eval->objective, 0.0, pg_norm});
    } else {
      out.trace.back().proj_grad_norm = pg_norm;
    }
    if (it == config.max_iters || pg_norm == 0.0) break;

    double step = config.step_init;
    std::optional<Evaluation> accepted;
    Policy candidate{current.cls, {}};
    for (int bt = 0; bt <= config.max_backtracks; ++bt, step *= config.backtrack) {
      candidate.params = space.project(current.params + step * grad);
      const Vector move = candidate.params - current.params;
      if (move.norm() == 0.0) break;
      auto trial = evaluate(inst, candidate, config, error);
      if (!trial) continue;
      if (trial->objective >= eval->objective + config.armijo * grad.dot(move)) {
        accepted = std::move(trial);
        break;
      }
    }
    if (!accepted) break;
    const double gain = accepted->objective - eval->objective;
    current = candidate;
    eval = std::move(accepted);
    out.policy = current;
    out.objective = eval->objective;
    out.u_bar = eval->u_bar;
    out.trace.push_back({it + 1, eval->objective, step, 0.0});
    if (gain < config.ftol) break;
  }
  return out;
}

std::vector<std::pair<std::string, Policy>> default_starts(const Instance& inst, PolicyClass cls,
                                                           const OptimizeConfig& config) {
  check_config(config);
  const PolicySpace space(inst, cls);
  auto interior = [&](const Policy& p) { return Policy{cls, space.project(p.params / 100.0)}; };

  std::vector<std::pair<std::string, Policy>> starts;
  starts.emplace_back("u0", static_optimal_policy(inst, cls));
  const Policy uniform = uniform_policy(inst, cls);
  starts.emplace_back("uniform", uniform);
  starts.emplace_back("uniform-interior", interior(uniform));

  std::mt19937_64 rng(config.seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Policy> random;
  for (int r = 0; r < config.random_starts; ++r) {
    Vector x(space.dimension());
    for (std::size_t b = 0; b < space.num_blocks(); ++b) {
      auto block = x.segment(space.offset(b), space.block_size(b));
      if (cls == PolicyClass::bounded) {
        for (Index i = 0; i < block.size(); ++i) block(i) = expo(rng);
        block /= block.sum();
      } else {
        for (Index i = 0; i < block.size(); ++i) block(i) = unif(rng);
      }
    }
    random.push_back(Policy{cls, space.project(x)});
  }
  for (int r = 0; r < config.random_starts; ++r) {
    starts.emplace_back("random-" + std::to_string(r + 1), random[static_cast<std::size_t>(r)]);
  }
  for (int r = 0; r < config.random_starts; ++r) {
    starts.emplace_back("random-interior-" + std::to_string(r + 1),
                        interior(random[static_cast<std::size_t>(r)]));
  }
  return starts;
}

OptimizeResult multi_start(const Instance& inst, PolicyClass cls, const OptimizeConfig& config) {
  return multi_start(inst, default_starts(inst, cls, config), config);
}

OptimizeResult multi_start(const Instance& inst,
                           const std::vector<std::pair<std::string, Policy>>& starts,
                           const OptimizeConfig& config) {
  if (starts.empty()) throw ConfigError("no starting policies");
  OptimizeResult result;
  bool found = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    result.starts.push_back(pga(inst, starts[i].second, config, starts[i].first));
    const auto& outcome = result.starts.back();
    if (outcome.failed) continue;
    if (!found || outcome.objective > result.objective) {
      found = true;
      result.best_start = i;
      result.objective = outcome.objective;
      result.policy = outcome.policy;
      result.u_bar = outcome.u_bar;
    }
  }
  if (!found) {
    std::string why;
    for (const auto& s : result.starts) why += "\n  " + s.label + ": " + s.diagnostic;
    throw NumericError("every optimizer start failed:" + why);
  }
  return result;
}

}  // namespace harmrec
