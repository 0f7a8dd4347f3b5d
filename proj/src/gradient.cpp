#include "harmrec/gradient.hpp"

#include "harmrec/choice.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace harmrec {

namespace {

constexpr double kSingularRcond = 1e-12;

// Derivatives of one recommended set at a score state. vt is the n x d matrix of item profiles.
struct SetDerivatives {
  const ScoreState& state;
  const Matrix& vt;
  const Vector& m_omega;  // sum_w s_w w
  double c;

  Vector weighted_sum(const ItemSet& rec) const {
    Vector m = Vector::Zero(vt.cols());
    for (int v : rec) m += state.s(v) * vt.row(v).transpose();
    return m;
  }

  Matrix item_probs(const ItemSet& rec) const {
    const double a = state.set_total(rec) + c;
    if (a == 0.0) {
      throw NumericError("selection probabilities are undefined for an empty recommendation with c = 0");
    }
    const Vector m_rec = weighted_sum(rec);
    const double s_omega = state.total;
    // T_v = s_v (a v - m_E) / a^2 is the derivative of s_v / (s_E + c).
    Matrix t = (a * vt).rowwise() - m_rec.transpose();
    t = state.s.asDiagonal() * t / (a * a);
    Matrix out = (c / s_omega) * t;
    out -= (c / (a * s_omega * s_omega)) * state.s * m_omega.transpose();
    for (int v : rec) out.row(v) += t.row(v);
    return out;
  }

  // d g(s_E) / du = c m_E / (s_E + c)^2
  Vector click(const ItemSet& rec) const {
    const double a = state.set_total(rec) + c;
    if (a == 0.0) throw NumericError("click probability is undefined for s_E = c = 0");
    return (c / (a * a)) * weighted_sum(rec);
  }
};

struct Context {
  PolicySpace space;
  std::vector<WeightedSet> dist;
  ScoreState state;
  Matrix vt;
  Vector m_omega;

  Context(const Instance& inst, const Policy& policy, const Vector& u, const SamplingOptions& opts)
      : space(inst, policy.cls),
        dist(expand(space, policy.params, opts)),
        state(ScoreState::at(inst.catalog, u)),
        vt(inst.catalog.items.transpose()),
        m_omega(inst.catalog.items * state.s) {}

  SetDerivatives sets(double c) const { return {state, vt, m_omega, c}; }
};

Matrix pv_wrt_u(const Context& ctx, const Instance& inst) {
  const auto sets = ctx.sets(inst.params.c);
  Matrix out = Matrix::Zero(inst.num_items(), inst.dimension());
  for (const auto& term : ctx.dist) out += term.weight * sets.item_probs(term.items);
  return out;
}

Matrix pv_wrt_pi(const Context& ctx, const Instance& inst, const Policy& policy,
                 const SamplingOptions& opts) {
  const double c = inst.params.c;
  return expectation_jacobian(ctx.space, policy.params, opts, inst.num_items(),
                              [&](const ItemSet& rec) { return item_probs_given_rec(rec, ctx.state, c); });
}

}  // namespace

Matrix grad_G_wrt_p(const Instance& inst, const Vector& p) {
  const Vector alphas = inst.alphas();
  const double denom = inst.params.beta + alphas.dot(p);
  if (denom == 0.0) throw NumericError("degenerate dynamics: beta + sum_v alpha_v p_v = 0");
  const Vector g = (inst.params.beta * inst.u0 + inst.catalog.items * alphas.cwiseProduct(p)) / denom;
  return (inst.catalog.items.colwise() - g) * (alphas / denom).asDiagonal();
}

Matrix grad_item_probs_wrt_u(const Instance& inst, const ItemSet& rec, const Vector& u) {
  const auto state = ScoreState::at(inst.catalog, u);
  const Matrix vt = inst.catalog.items.transpose();
  const Vector m_omega = inst.catalog.items * state.s;
  return SetDerivatives{state, vt, m_omega, inst.params.c}.item_probs(rec);
}

Matrix grad_pv_wrt_u(const Instance& inst, const Policy& policy, const Vector& u,
                     const SamplingOptions& opts) {
  return pv_wrt_u(Context(inst, policy, u, opts), inst);
}

Matrix grad_pv_wrt_pi(const Instance& inst, const Policy& policy, const Vector& u,
                      const SamplingOptions& opts) {
  return pv_wrt_pi(Context(inst, policy, u, opts), inst, policy, opts);
}

MapJacobians grad_F(const Instance& inst, const Policy& policy, const Vector& u,
                    const SamplingOptions& opts) {
  const Context ctx(inst, policy, u, opts);
  const Matrix dg = grad_G_wrt_p(inst, selection_probs(ctx.dist, ctx.state, inst.params.c));
  return {dg * pv_wrt_u(ctx, inst), dg * pv_wrt_pi(ctx, inst, policy, opts)};
}

namespace {

Eigen::PartialPivLU<Matrix> factor_ift(const Matrix& grad_u_F, double& rcond) {
  const Matrix a = Matrix::Identity(grad_u_F.rows(), grad_u_F.cols()) - grad_u_F;
  Eigen::PartialPivLU<Matrix> lu(a);
  rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    throw ImplicitFunctionError("I - dF/du is singular at the stationary profile (rcond = " +
                                    std::to_string(rcond) + ")",
                                rcond);
  }
  return lu;
}

}  // namespace

Matrix jacobian_stationary(const Instance& inst, const Policy& policy, const Vector& u_bar,
                           const SamplingOptions& opts) {
  const auto jac = grad_F(inst, policy, u_bar, opts);
  double rcond = 0.0;
  return factor_ift(jac.wrt_u, rcond).solve(jac.wrt_pi);
}

GradientReport grad_objective_at(const Instance& inst, const Policy& policy, const Vector& u_bar,
                                 const SamplingOptions& opts) {
  const double c = inst.params.c;
  const double lambda = inst.params.lambda;
  const Context ctx(inst, policy, u_bar, opts);
  const auto sets = ctx.sets(c);

  GradientReport report;
  report.u_bar = u_bar;
  const Matrix dg = grad_G_wrt_p(inst, selection_probs(ctx.dist, ctx.state, c));
  report.grad_u_F = dg * pv_wrt_u(ctx, inst);
  report.grad_pi_F = dg * pv_wrt_pi(ctx, inst, policy, opts);
  report.jac_ubar = factor_ift(report.grad_u_F, report.rcond).solve(report.grad_pi_F);

  report.p_clk = click_prob(ctx.dist, ctx.state, c);
  const double r = ctx.state.harmful / ctx.state.total;
  report.p_h = (1.0 - report.p_clk) * r;
  report.objective = report.p_clk - lambda * report.p_h;

  const Vector clk_pi =
      expectation_jacobian(ctx.space, policy.params, opts, 1, [&](const ItemSet& rec) {
        return Vector::Constant(1, click_prob(ctx.state.set_total(rec), c));
      }).row(0).transpose();
  Vector clk_u = Vector::Zero(inst.dimension());
  for (const auto& term : ctx.dist) clk_u += term.weight * sets.click(term.items);
  Vector m_harm = Vector::Zero(inst.dimension());
  for (int h : inst.catalog.harmful) m_harm += ctx.state.s(h) * inst.catalog.items.col(h);
  const Vector r_u = (m_harm - r * ctx.m_omega) / ctx.state.total;

  const Vector u_part = (1.0 + lambda * r) * clk_u - lambda * (1.0 - report.p_clk) * r_u;
  report.grad_f = (1.0 + lambda * r) * clk_pi + report.jac_ubar.transpose() * u_part;
  return report;
}

GradientReport grad_objective(const Instance& inst, const Policy& policy,
                              const SolverOptions& solver, const SamplingOptions& opts) {
  const auto stationary = solve_stationary(inst, policy, std::nullopt, solver, opts);
  if (!stationary.converged) {
    throw NumericError("stationary solver did not converge (residual " +
                       std::to_string(stationary.residual) + ")");
  }
  return grad_objective_at(inst, policy, stationary.u_bar, opts);
}

double stationary_objective(const Instance& inst, const Policy& policy,
                            const SolverOptions& solver, const SamplingOptions& opts) {
  const auto stationary = solve_stationary(inst, policy, std::nullopt, solver, opts);
  if (!stationary.converged) {
    throw NumericError("stationary solver did not converge (residual " +
                       std::to_string(stationary.residual) + ")");
  }
  const auto ch = click_and_harm_probs(inst, policy, stationary.u_bar, opts);
  return ch.p_clk - inst.params.lambda * ch.p_h;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double rel_step) {
  Vector g(x.size());
  Vector y = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    y(i) = x(i) + h;
    const double up = f(y);
    y(i) = x(i) - h;
    const double down = f(y);
    y(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                  double rel_step) {
  Matrix jac;
  Vector y = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    y(i) = x(i) + h;
    const Vector up = f(y);
    y(i) = x(i) - h;
    const Vector down = f(y);
    y(i) = x(i);
    if (i == 0) jac.resize(up.size(), x.size());
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

double max_relative_error(const Vector& analytic, const Vector& reference) {
  if (analytic.size() != reference.size()) throw ConfigError("gradient size mismatch");
  if (analytic.size() == 0) return 0.0;
  const double scale = std::max(reference.cwiseAbs().maxCoeff(), 1e-300);
  return (analytic - reference).cwiseAbs().maxCoeff() / scale;
}

GradientReport gradient_check(const Instance& inst, const Policy& policy,
                              const SolverOptions& solver, const SamplingOptions& opts,
                              double rel_step) {
  auto report = grad_objective(inst, policy, solver, opts);
  const Vector fd = finite_difference_gradient(
      [&](const Vector& params) {
        return stationary_objective(inst, Policy{policy.cls, params}, solver, opts);
      },
      policy.params, rel_step);
  report.fd_max_rel_err = max_relative_error(report.grad_f, fd);
  return report;
}

namespace {

void check_marginals(const ItemSet& candidates, const Vector& rho) {
  if (static_cast<std::size_t>(rho.size()) != candidates.size()) {
    throw ConfigError("marginals and candidate set differ in size");
  }
  if (!rho.allFinite()) throw ConfigError("marginals must be finite");
}

std::vector<double> enumeration_weights(const Vector& rho) {
  const auto s = static_cast<int>(rho.size());
  if (s > 24) throw ConfigError("exact multilinear evaluation is limited to 24 items");
  const std::uint64_t count = std::uint64_t{1} << s;
  std::vector<double> w(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    double p = 1.0;
    for (int i = 0; i < s; ++i) p *= (mask >> i) & 1U ? rho(i) : 1.0 - rho(i);
    w[mask] = p;
  }
  return w;
}

std::vector<bool> draw(const Vector& rho, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<bool> in(static_cast<std::size_t>(rho.size()));
  for (Index i = 0; i < rho.size(); ++i) in[static_cast<std::size_t>(i)] = unif(rng) < rho(i);
  return in;
}

ItemSet members(const ItemSet& candidates, const std::vector<bool>& in) {
  ItemSet out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (in[i]) out.push_back(candidates[i]);
  }
  return out;
}

}  // namespace

double multilinear_exact(const ItemSet& candidates, const Vector& rho, const SetFunction& z) {
  check_marginals(candidates, rho);
  const auto w = enumeration_weights(rho);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < w.size(); ++mask) {
    if (w[mask] != 0.0) total += w[mask] * z(subset_from_mask(candidates, mask));
  }
  return total;
}

Vector multilinear_grad_exact(const ItemSet& candidates, const Vector& rho, const SetFunction& z) {
  check_marginals(candidates, rho);
  const auto s = static_cast<int>(rho.size());
  const std::uint64_t count = std::uint64_t{1} << s;
  std::vector<double> values(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) values[mask] = z(subset_from_mask(candidates, mask));
  Vector grad = Vector::Zero(s);
  for (int w = 0; w < s; ++w) {
    Vector others = rho;
    others(w) = 0.0;
    const auto weights = enumeration_weights(others);
    const std::uint64_t bit = std::uint64_t{1} << w;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      if ((mask & bit) || weights[mask] == 0.0) continue;
      grad(w) += weights[mask] * (values[mask | bit] - values[mask]);
    }
  }
  return grad;
}

Estimate multilinear_estimate(const ItemSet& candidates, const Vector& rho, const SetFunction& z,
                              std::size_t samples, std::uint64_t seed) {
  check_marginals(candidates, rho);
  if (samples < 2) throw ConfigError("at least two samples are required");
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t l = 0; l < samples; ++l) {
    const double value = z(members(candidates, draw(rho, rng)));
    sum += value;
    sum_sq += value * value;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

GradEstimate multilinear_grad_estimate(const ItemSet& candidates, const Vector& rho,
                                       const SetFunction& z, std::size_t samples,
                                       std::uint64_t seed) {
  check_marginals(candidates, rho);
  if (samples < 2) throw ConfigError("at least two samples are required");
  const Index s = rho.size();
  std::mt19937_64 rng(seed);
  Vector sum = Vector::Zero(s);
  Vector sum_sq = Vector::Zero(s);
  for (std::size_t l = 0; l < samples; ++l) {
    auto in = draw(rho, rng);
    for (Index w = 0; w < s; ++w) {
      const auto wi = static_cast<std::size_t>(w);
      const bool was = in[wi];
      in[wi] = true;
      const double with = z(members(candidates, in));
      in[wi] = false;
      const double without = z(members(candidates, in));
      in[wi] = was;
      const double diff = with - without;
      sum(w) += diff;
      sum_sq(w) += diff * diff;
    }
  }
  const double n = static_cast<double>(samples);
  GradEstimate out;
  out.value = sum / n;
  out.std_error.resize(s);
  for (Index w = 0; w < s; ++w) {
    const double var = std::max(0.0, (sum_sq(w) - n * out.value(w) * out.value(w)) / (n - 1.0));
    out.std_error(w) = std::sqrt(var / n);
  }
  return out;
}

Vector pipage_round(const ItemSet& candidates, const Vector& rho, int k, const SetFunction& z) {
  check_marginals(candidates, rho);
  constexpr double eps = 1e-12;
  if (rho.minCoeff() < -eps || rho.maxCoeff() > 1.0 + eps || rho.sum() > k + 1e-9) {
    throw ConfigError("pipage rounding needs a feasible point");
  }
  Vector x = rho.cwiseMax(0.0).cwiseMin(1.0);
  auto value = [&](const Vector& y) { return multilinear_exact(candidates, y, z); };
  auto fractional = [&] {
    std::vector<Index> out;
    for (Index i = 0; i < x.size(); ++i) {
      if (x(i) > eps && x(i) < 1.0 - eps) out.push_back(i);
    }
    return out;
  };
  for (auto frac = fractional(); !frac.empty(); frac = fractional()) {
    if (frac.size() == 1) {
      Vector up = x;
      Vector down = x;
      up(frac[0]) = 1.0;
      down(frac[0]) = 0.0;
      x = value(up) >= value(down) ? up : down;
      continue;
    }
    const Index i = frac[0];
    const Index j = frac[1];
    Vector a = x;
    const double ea = std::min(1.0 - x(i), x(j));
    a(i) += ea;
    a(j) -= ea;
    Vector b = x;
    const double eb = std::min(x(i), 1.0 - x(j));
    b(i) -= eb;
    b(j) += eb;
    x = value(a) >= value(b) ? a : b;
    for (Index t : {i, j}) {
      if (x(t) < eps) x(t) = 0.0;
      if (x(t) > 1.0 - eps) x(t) = 1.0;
    }
  }
  return x;
}

}  // namespace harmrec
