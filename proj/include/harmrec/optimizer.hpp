#pragma once

#include "harmrec/dynamics.hpp"
#include "harmrec/policy.hpp"
#include "harmrec/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace harmrec {

struct OptimizeConfig {
  int max_iters = 200;
  double step_init = 1.0;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double armijo = 1e-4;
  double ftol = 1e-4;
  int random_starts = 3;
  std::uint64_t seed = 42;
  // Stationary solves inside the optimizer need far tighter tolerances than the
  // reporting solver so that objective differences and IFT gradients are meaningful.
  SolverOptions solver{1e-10, 5000};
  SamplingOptions sampling{};
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double step = 0.0;           // accepted step size (0 for the start point)
  double proj_grad_norm = 0.0; // ||P(pi + grad) - pi||
};

struct StartOutcome {
  std::string label;
  Policy initial;
  Policy policy;
  double objective = 0.0;
  Vector u_bar;
  std::vector<IterationRecord> trace;
  bool failed = false;
  std::string diagnostic;
};

struct OptimizeResult {
  Policy policy;
  double objective = 0.0;
  Vector u_bar;
  std::size_t best_start = 0;
  std::vector<StartOutcome> starts;
};

/// Projected gradient ascent with Armijo backtracking from a single start. The start is
/// projected onto the feasible set first. Never throws for numerical trouble along the way;
/// failures are recorded in the outcome.
StartOutcome pga(const Instance& instance, const Policy& start, const OptimizeConfig& config,
                 std::string label = "custom");

/// The starting policies: static optimum at u0, uniform, uniform pulled into the interior,
/// and `random_starts` random and random-interior policies drawn from `seed`.
std::vector<std::pair<std::string, Policy>> default_starts(const Instance& instance,
                                                           PolicyClass cls,
                                                           const OptimizeConfig& config);

/// Runs pga from every default start and keeps the best. Throws NumericError when every
/// start fails.
OptimizeResult multi_start(const Instance& instance, PolicyClass cls, const OptimizeConfig& config);

/// Same, with explicit starts.
OptimizeResult multi_start(const Instance& instance,
                           const std::vector<std::pair<std::string, Policy>>& starts,
                           const OptimizeConfig& config);

}  // namespace harmrec
