#include "harmrec/experiment.hpp"

#include "harmrec/choice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace harmrec {

namespace {

const std::vector<std::string> kPolicyNames{"grad", "alt", "u0", "unif"};

struct Evaluated {
  double f, p_clk, p_h, residual;
  Vector u_bar;
};

Evaluated evaluate(const Instance& inst, const Policy& policy, const ExperimentConfig& cfg) {
  const auto st = solve_stationary(inst, policy, std::nullopt, cfg.eval_solver, cfg.sampling);
  if (!st.converged) {
    throw NumericError("stationary solver did not converge (residual " + std::to_string(st.residual) + ")");
  }
  const auto ch = click_and_harm_probs(inst, policy, st.u_bar, cfg.sampling);
  return {ch.p_clk - inst.params.lambda * ch.p_h, ch.p_clk, ch.p_h, st.residual, st.u_bar};
}

// One solver and one sampling scheme for every stationary solve, so that the optimizer's
// objective and the reported one coincide exactly.
ExperimentConfig harmonized(ExperimentConfig cfg) {
  cfg.optimize.solver = cfg.eval_solver;
  cfg.optimize.sampling = cfg.sampling;
  cfg.alternating.solver = cfg.eval_solver;
  cfg.alternating.sampling = cfg.sampling;
  return cfg;
}

Policy choose(const Instance& inst, const std::string& name, const ExperimentConfig& cfg) {
  if (name == "grad") return multi_start(inst, cfg.cls, cfg.optimize).policy;
  if (name == "alt") return alternating_optimization(inst, cfg.cls, cfg.alternating).policy;
  if (name == "u0") return static_optimal_policy(inst, cfg.cls);
  return uniform_policy(inst, cfg.cls);
}

PolicyRow run_cell(const Instance& inst, std::size_t user, const std::string& name,
                   const ExperimentConfig& cfg) {
  PolicyRow row;
  row.user = user;
  row.policy = name;
  try {
    row.chosen = choose(inst, name, cfg);
    const auto e = evaluate(inst, row.chosen, cfg);
    row.f = e.f;
    row.p_clk = e.p_clk;
    row.p_h = e.p_h;
    row.residual = e.residual;
    row.u_bar = e.u_bar;
    row.ok = true;
    if (cfg.trajectories) {
      const auto traj = simulate_evolution(inst, row.chosen, inst.u0, cfg.trajectory_tol,
                                           cfg.trajectory_max_steps, cfg.sampling);
      row.distance = (traj.profiles.back() - e.u_bar).norm();
      row.trajectory_steps = traj.profiles.size() - 1;
      if (!traj.converged_at) {
        row.ok = false;
        row.error = "trajectory did not converge within " + std::to_string(cfg.trajectory_max_steps) + " steps";
      }
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

// Runs task(i) for i in [0, count) on up to `workers` threads.
template <class Task>
void parallel_for(std::size_t count, unsigned workers, Task&& task) {
  const std::size_t threads = std::min<std::size_t>(std::max(workers, 1U), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void check(const ExperimentConfig& cfg) {
  if (cfg.policies.empty()) throw ConfigError("no policies selected");
  for (const auto& p : cfg.policies) {
    if (std::find(kPolicyNames.begin(), kPolicyNames.end(), p) == kPolicyNames.end()) {
      throw ConfigError("unknown policy '" + p + "' (expected grad, alt, u0 or unif)");
    }
  }
  if (!(cfg.eval_solver.tol > 0.0) || cfg.eval_solver.max_iter < 1) {
    throw ConfigError("invalid evaluation solver settings");
  }
  if (!(cfg.trajectory_tol > 0.0)) throw ConfigError("trajectory tolerance must be positive");
}

const PolicyRow* ExperimentReport::find(std::size_t user, const std::string& policy) const {
  for (const auto& r : rows) {
    if (r.user == user && r.policy == policy) return &r;
  }
  return nullptr;
}

ExperimentReport run_compare(const std::vector<Instance>& instances, const ExperimentConfig& config) {
  check(config);
  const ExperimentConfig cfg = harmonized(config);
  for (const auto& inst : instances) validate(inst);
  std::vector<std::vector<PolicyRow>> per_user(instances.size());
  parallel_for(instances.size(), cfg.workers, [&](std::size_t u) {
    for (const auto& name : cfg.policies) per_user[u].push_back(run_cell(instances[u], u, name, cfg));
  });

  ExperimentReport report;
  for (auto& rows : per_user) {
    for (auto& r : rows) {
      if (!r.ok) ++report.failures;
      report.rows.push_back(std::move(r));
    }
  }
  for (const auto& name : cfg.policies) {
    PolicySummary s;
    s.policy = name;
    std::vector<double> f, clk, h, dist;
    for (const auto& r : report.rows) {
      if (r.policy != name) continue;
      ++s.count;
      if (!r.ok) {
        ++s.failures;
        continue;
      }
      f.push_back(r.f);
      clk.push_back(r.p_clk);
      h.push_back(r.p_h);
      if (r.distance) dist.push_back(*r.distance);
    }
    std::tie(s.f_mean, s.f_std) = mean_std(f);
    std::tie(s.p_clk_mean, s.p_clk_std) = mean_std(clk);
    std::tie(s.p_h_mean, s.p_h_std) = mean_std(h);
    if (!dist.empty()) {
      const auto [m, sd] = mean_std(dist);
      s.distance_mean = m;
      s.distance_std = sd;
    }
    report.summaries.push_back(s);
  }
  return report;
}

std::vector<ObjectiveDifferences> grad_differences(const ExperimentReport& report) {
  std::vector<ObjectiveDifferences> out;
  std::vector<std::string> others;
  for (const auto& s : report.summaries) {
    if (s.policy != "grad") others.push_back(s.policy);
  }
  for (const auto& other : others) {
    ObjectiveDifferences diff{other, {}};
    for (const auto& r : report.rows) {
      if (r.policy != "grad" || !r.ok) continue;
      const PolicyRow* o = report.find(r.user, other);
      if (o && o->ok) diff.values.push_back(r.f - o->f);
    }
    out.push_back(std::move(diff));
  }
  return out;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "lambda") return SweepAxis::lambda;
  if (name == "beta") return SweepAxis::beta;
  if (name == "c") return SweepAxis::c;
  if (name == "alpha_ratio") return SweepAxis::alpha_ratio;
  if (name == "k") return SweepAxis::k;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::lambda: return "lambda";
    case SweepAxis::beta: return "beta";
    case SweepAxis::c: return "c";
    case SweepAxis::alpha_ratio: return "alpha_ratio";
    case SweepAxis::k: return "k";
  }
  return "?";
}

KSweepMode parse_k_mode(const std::string& name) {
  if (name == "fixed-c") return KSweepMode::fixed_c;
  if (name == "fixed-ratio") return KSweepMode::fixed_ratio;
  throw ConfigError("unknown k sweep mode '" + name + "' (fixed-c or fixed-ratio)");
}

Instance apply_sweep_value(const Instance& base, SweepAxis axis, double value, KSweepMode mode) {
  Instance inst = base;
  auto& p = inst.params;
  switch (axis) {
    case SweepAxis::lambda: p.lambda = value; break;
    case SweepAxis::beta: p.beta = value; break;
    case SweepAxis::c: p.c = value; break;
    case SweepAxis::alpha_ratio: p.alpha_h = value * p.alpha_nh; break;
    case SweepAxis::k: {
      if (value < 1.0 || value != std::floor(value)) throw ConfigError("k grid values must be positive integers");
      const int k = static_cast<int>(value);
      if (mode == KSweepMode::fixed_ratio) p.c = base.params.c * k / base.params.k;
      p.k = k;
      break;
    }
  }
  validate(inst);
  return inst;
}

std::vector<SweepPoint> run_sweep(const std::vector<Instance>& instances, SweepAxis axis,
                                  const std::vector<double>& grid, const ExperimentConfig& cfg,
                                  KSweepMode mode) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  check(cfg);
  std::vector<std::vector<Instance>> points;
  for (double value : grid) {
    std::vector<Instance> batch;
    for (const auto& inst : instances) {
      try {
        batch.push_back(apply_sweep_value(inst, axis, value, mode));
      } catch (const ConfigError& e) {
        throw ConfigError(to_string(axis) + " = " + std::to_string(value) + ": " + e.what());
      }
    }
    points.push_back(std::move(batch));
  }
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < grid.size(); ++i) out.push_back({grid[i], run_compare(points[i], cfg)});
  return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("a line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("a line fit needs distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy == 0.0 ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / syy;
  return fit;
}

CounterexampleReport run_counterexample(const CounterexampleParams& base,
                                        const std::vector<double>& lambdas,
                                        const ExperimentConfig& config) {
  if (lambdas.empty()) throw ConfigError("lambda grid is empty");
  check(config);
  const ExperimentConfig cfg = harmonized(config);
  CounterexampleReport report;
  std::vector<double> xs, gaps;
  for (double lambda : lambdas) {
    CounterexampleParams params = base;
    params.lambda = lambda;
    const Instance inst = alternating_counterexample(params);
    CounterexampleRow row;
    row.lambda = lambda;
    row.alt_policy = alternating_optimization(inst, cfg.cls, cfg.alternating).policy;
    row.grad_policy = multi_start(inst, cfg.cls, cfg.optimize).policy;
    const auto alt = evaluate(inst, row.alt_policy, cfg);
    const auto grad = evaluate(inst, row.grad_policy, cfg);
    row.f_alt = alt.f;
    row.p_clk_alt = alt.p_clk;
    row.p_h_alt = alt.p_h;
    row.f_grad = grad.f;
    row.p_clk_grad = grad.p_clk;
    row.p_h_grad = grad.p_h;
    row.gap = grad.f - alt.f;
    xs.push_back(lambda);
    gaps.push_back(row.gap);
    report.rows.push_back(std::move(row));
  }
  report.alt_policy_constant = std::all_of(report.rows.begin(), report.rows.end(), [&](const auto& r) {
    return r.alt_policy.params == report.rows.front().alt_policy.params;
  });
  if (xs.size() >= 2) {
    const auto fit = fit_line(xs, gaps);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
    report.r2 = fit.r2;
  }
  return report;
}

}  // namespace harmrec
