#include "harmrec/baselines.hpp"

#include "harmrec/choice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace harmrec {

ItemSet top_k_items(const ItemSet& candidates, const Vector& scores, int k) {
  ItemSet order = candidates;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });
  order.resize(std::min(order.size(), static_cast<std::size_t>(std::max(k, 0))));
  std::sort(order.begin(), order.end());
  return order;
}

Policy top_k_policy(const Instance& inst, const Vector& u, PolicyClass cls) {
  const PolicySpace space(inst, cls);
  const Vector s = scores(inst.catalog, u);
  Policy policy{cls, Vector::Zero(space.dimension())};
  for (std::size_t b = 0; b < space.num_blocks(); ++b) {
    const ItemSet& cand = space.candidates(b);
    const ItemSet best = top_k_items(cand, s, space.budget());
    if (cls == PolicyClass::bounded) {
      const auto& subsets = space.subsets(b);
      const auto it = std::find(subsets.begin(), subsets.end(), best);
      policy.params(space.offset(b) + std::distance(subsets.begin(), it)) = 1.0;
    } else {
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (std::binary_search(best.begin(), best.end(), cand[i])) {
          policy.params(space.offset(b) + static_cast<Index>(i)) = 1.0;
        }
      }
    }
  }
  return policy;
}

Policy uniform_policy(const Instance& inst, PolicyClass cls) {
  const PolicySpace space(inst, cls);
  Policy policy{cls, Vector(space.dimension())};
  for (std::size_t b = 0; b < space.num_blocks(); ++b) {
    const double size = static_cast<double>(space.block_size(b));
    const double value = cls == PolicyClass::bounded ? 1.0 / size
                                                     : std::min(1.0, space.budget() / size);
    policy.params.segment(space.offset(b), space.block_size(b)).setConstant(value);
  }
  return policy;
}

Policy static_optimal_policy(const Instance& inst, PolicyClass cls) {
  return top_k_policy(inst, inst.u0, cls);
}

AlternatingResult alternating_optimization(const Instance& inst, PolicyClass cls,
                                           const AlternatingOptions& options) {
  AlternatingResult result;
  Vector profile = inst.u0;
  for (int step = 0; step < options.max_steps; ++step) {
    Policy policy = top_k_policy(inst, profile, cls);
    if (!result.trace.steps.empty() && result.trace.steps.back().policy.params == policy.params) {
      result.trace.converged = true;
      break;
    }
    const auto stationary =
        solve_stationary(inst, policy, std::nullopt, options.solver, options.sampling);
    const auto ch = click_and_harm_probs(inst, policy, stationary.u_bar, options.sampling);
    const double moved = (stationary.u_bar - profile).norm();
    profile = stationary.u_bar;
    result.trace.steps.push_back({std::move(policy), profile,
                                  ch.p_clk - inst.params.lambda * ch.p_h, stationary.converged});
    if (moved < options.profile_tol) {
      result.trace.converged = true;
      break;
    }
  }
  result.policy = result.trace.steps.back().policy;
  return result;
}

Instance alternating_counterexample(const CounterexampleParams& p) {
  if (!(p.b1 > p.b2) || !(p.b2 > 1.0)) {
    throw ConfigError("the counterexample requires B1 > B2 > 1");
  }
  if (!(p.alpha > 0.0) || p.alpha > 1.0) throw ConfigError("alpha must lie in (0, 1]");
  if (0.99 * p.b1 > kMaxScoreExponent) throw ConfigError("B1 too large for the score guard");
  Matrix items(3, 3);
  items.col(CounterexampleItems::v0) << 1.0, p.b2, -p.b2;
  items.col(CounterexampleItems::v1) << 0.99, -p.b2, p.b2;
  items.col(CounterexampleItems::harmful) << 0.0, p.b2, -p.b2;

  Instance inst;
  inst.catalog = ItemCatalog(items, {CounterexampleItems::harmful});
  inst.candidates = CandidateCollection{{{CounterexampleItems::v0, CounterexampleItems::v1}}, {1.0}};
  inst.u0 = Vector::Zero(3);
  inst.u0(0) = p.b1;
  inst.params.alpha_h = p.alpha;
  inst.params.alpha_nh = p.alpha;
  inst.params.beta = 0.0;
  inst.params.lambda = p.lambda;
  inst.params.k = 1;
  const double s_v1 = std::exp(0.99 * p.b1);
  inst.params.c = p.c.value_or(s_v1 / 4.0);
  if (!(inst.params.c > 0.0)) throw ConfigError("c must be positive");
  if (click_prob(s_v1, inst.params.c) < 0.8 - 1e-12) {
    throw ConfigError("c too large: recommending v1 at u0 must be accepted with probability >= 0.8");
  }
  validate(inst);
  return inst;
}

}  // namespace harmrec
