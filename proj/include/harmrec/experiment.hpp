#pragma once

#include "harmrec/baselines.hpp"
#include "harmrec/dynamics.hpp"
#include "harmrec/optimizer.hpp"
#include "harmrec/policy.hpp"
#include "harmrec/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace harmrec {

struct ExperimentConfig {
  PolicyClass cls = PolicyClass::bounded;
  std::vector<std::string> policies{"grad", "alt", "u0", "unif"};
  OptimizeConfig optimize{};
  AlternatingOptions alternating{};
  // Used for every stationary solve, including those inside the optimizer and the
  // alternating baseline; overrides their own solver and sampling settings.
  SolverOptions eval_solver{1e-10, 5000};
  SamplingOptions sampling{};
  bool trajectories = false;
  double trajectory_tol = 1e-3;
  std::size_t trajectory_max_steps = 10000;
  unsigned workers = 1;
};

/// Throws ConfigError for unknown policy names or inconsistent settings.
void check(const ExperimentConfig& config);

struct PolicyRow {
  std::size_t user = 0;
  std::string policy;
  bool ok = false;
  std::string error;
  double f = 0.0;
  double p_clk = 0.0;
  double p_h = 0.0;
  double residual = 0.0;
  std::optional<double> distance;  // ||lim u(t) - u_bar||
  std::optional<std::size_t> trajectory_steps;
  Policy chosen;
  Vector u_bar;
};

struct PolicySummary {
  std::string policy;
  std::size_t count = 0;
  std::size_t failures = 0;
  double f_mean = 0.0, f_std = 0.0;
  double p_clk_mean = 0.0, p_clk_std = 0.0;
  double p_h_mean = 0.0, p_h_std = 0.0;
  std::optional<double> distance_mean, distance_std;
};

struct ExperimentReport {
  std::vector<PolicyRow> rows;  // user-major, policies in config order
  std::vector<PolicySummary> summaries;
  std::size_t failures = 0;

  const PolicyRow* find(std::size_t user, const std::string& policy) const;
};

/// Evaluates each configured policy on each instance at that policy's stationary profile.
ExperimentReport run_compare(const std::vector<Instance>& instances, const ExperimentConfig& config);

/// Per-user f(grad) - f(other) for each other policy (users where both succeeded).
struct ObjectiveDifferences {
  std::string other;
  std::vector<double> values;
};
std::vector<ObjectiveDifferences> grad_differences(const ExperimentReport& report);

enum class SweepAxis { lambda, beta, c, alpha_ratio, k };
SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

enum class KSweepMode { fixed_c, fixed_ratio };
KSweepMode parse_k_mode(const std::string& name);

struct SweepPoint {
  double value = 0.0;
  ExperimentReport report;
};

/// Applies one grid value to every instance. alpha_ratio sets alpha_h = ratio * alpha_nh;
/// the k axis in fixed_ratio mode scales c with k relative to the instance's own k.
Instance apply_sweep_value(const Instance& instance, SweepAxis axis, double value,
                           KSweepMode mode = KSweepMode::fixed_c);

std::vector<SweepPoint> run_sweep(const std::vector<Instance>& instances, SweepAxis axis,
                                  const std::vector<double>& grid, const ExperimentConfig& config,
                                  KSweepMode mode = KSweepMode::fixed_c);

struct CounterexampleRow {
  double lambda = 0.0;
  double f_alt = 0.0, p_clk_alt = 0.0, p_h_alt = 0.0;
  double f_grad = 0.0, p_clk_grad = 0.0, p_h_grad = 0.0;
  double gap = 0.0;
  Policy alt_policy;
  Policy grad_policy;
};

struct CounterexampleReport {
  std::vector<CounterexampleRow> rows;
  double slope = 0.0;      // least-squares fit of gap against lambda
  double intercept = 0.0;
  double r2 = 0.0;
  bool alt_policy_constant = false;
};

CounterexampleReport run_counterexample(const CounterexampleParams& base,
                                        const std::vector<double>& lambdas,
                                        const ExperimentConfig& config);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace harmrec
