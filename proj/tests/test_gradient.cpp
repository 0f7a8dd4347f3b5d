#include "harmrec/baselines.hpp"
#include "harmrec/gradient.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <Eigen/LU>
#include <unsupported/Eigen/AutoDiff>

#include <gtest/gtest.h>

using namespace harmrec;

namespace {

using AD = Eigen::AutoDiffScalar<Eigen::VectorXd>;
using ADVector = Eigen::Matrix<AD, Eigen::Dynamic, 1>;

// Independent forward-mode implementation of F and of (p_CLK, p_H) for bounded policies.
struct ForwardModel {
  const Instance& inst;
  const PolicySpace& space;

  void eval(const ADVector& pi, const ADVector& u, ADVector& F, AD& p_clk, AD& p_h) const {
    const Index n = inst.num_items();
    const Index d = inst.dimension();
    std::vector<AD> s(static_cast<std::size_t>(n));
    AD s_all = 0.0, s_harm = 0.0;
    for (Index v = 0; v < n; ++v) {
      AD dot = 0.0;
      for (Index i = 0; i < d; ++i) dot += inst.catalog.items(i, v) * u(i);
      s[static_cast<std::size_t>(v)] = exp(dot);
      s_all += s[static_cast<std::size_t>(v)];
      if (inst.catalog.is_harmful[static_cast<std::size_t>(v)]) s_harm += s[static_cast<std::size_t>(v)];
    }
    std::vector<AD> p(static_cast<std::size_t>(n), AD(0.0));
    p_clk = 0.0;
    const double c = inst.params.c;
    for (std::size_t b = 0; b < space.num_blocks(); ++b) {
      for (std::size_t j = 0; j < space.subsets(b).size(); ++j) {
        const ItemSet& rec = space.subsets(b)[j];
        const AD w = space.block_prob(b) * pi(space.offset(b) + static_cast<Index>(j));
        AD s_rec = 0.0;
        for (int v : rec) s_rec += s[static_cast<std::size_t>(v)];
        const AD accept = s_rec / (s_rec + c);
        p_clk += w * accept;
        for (Index v = 0; v < n; ++v) {
          AD pv = (1.0 - accept) * s[static_cast<std::size_t>(v)] / s_all;
          if (std::binary_search(rec.begin(), rec.end(), static_cast<int>(v))) {
            pv += accept * s[static_cast<std::size_t>(v)] / s_rec;
          }
          p[static_cast<std::size_t>(v)] += w * pv;
        }
      }
    }
    p_h = (1.0 - p_clk) * s_harm / s_all;
    const Vector a = inst.alphas();
    AD den = inst.params.beta;
    F = ADVector(d);
    for (Index i = 0; i < d; ++i) F(i) = inst.params.beta * inst.u0(i);
    for (Index v = 0; v < n; ++v) {
      den += a(v) * p[static_cast<std::size_t>(v)];
      for (Index i = 0; i < d; ++i) F(i) += a(v) * p[static_cast<std::size_t>(v)] * inst.catalog.items(i, v);
    }
    for (Index i = 0; i < d; ++i) F(i) /= den;
  }
};

}  // namespace

TEST(Gradient, MatchesForwardModeImplicitDifferentiation) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 8; ++t) {
    const Instance inst = testing_util::random_instance(rng, 4 + t % 3, 1, 2 + t % 2, 1 + t % 2, 0.6);
    const PolicySpace space(inst, PolicyClass::bounded);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector x(space.dimension());
    for (Index i = 0; i < x.size(); ++i) x(i) = unif(rng);
    const Policy pol{PolicyClass::bounded, space.project(x)};
    const auto rep = grad_objective(inst, pol, {1e-13, 2000});

    const Index m = space.dimension(), d = inst.dimension();
    ADVector pi(m), u(d);
    for (Index i = 0; i < m; ++i) pi(i) = AD(pol.params(i), m + d, i);
    for (Index i = 0; i < d; ++i) u(i) = AD(rep.u_bar(i), m + d, m + i);
    ADVector F;
    AD p_clk, p_h;
    ForwardModel{inst, space}.eval(pi, u, F, p_clk, p_h);
    Matrix Fpi(d, m), Fu(d, d);
    for (Index i = 0; i < d; ++i) {
      Fpi.row(i) = F(i).derivatives().head(m).transpose();
      Fu.row(i) = F(i).derivatives().tail(d).transpose();
    }
    const Matrix J = (Matrix::Identity(d, d) - Fu).partialPivLu().solve(Fpi);
    const Vector f_grad = p_clk.derivatives() - inst.params.lambda * p_h.derivatives();
    const Vector expected = f_grad.head(m) + J.transpose() * f_grad.tail(d);

    EXPECT_LT((rep.grad_u_F - Fu).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((rep.grad_pi_F - Fpi).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((rep.jac_ubar - J).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_LT(max_relative_error(rep.grad_f, expected), 1e-10);
    EXPECT_NEAR(rep.p_clk, p_clk.value(), 1e-14);
    EXPECT_NEAR(rep.p_h, p_h.value(), 1e-14);
  }
}

TEST(Gradient, ItemProbJacobianMatchesForwardMode) {
  std::mt19937_64 rng(22);
  const Instance inst = testing_util::random_instance(rng, 5, 2, 3, 2, 0.8);
  const Vector u = inst.u0 + Vector::Constant(3, 0.2);
  for (const ItemSet& rec : {ItemSet{}, ItemSet{0}, ItemSet{1, 3}}) {
    const Matrix got = grad_item_probs_wrt_u(inst, rec, u);
    const auto fn = [&](const Vector& x) { return oracle::choice_given_rec(inst.catalog.items, rec, x, inst.params.c); };
    const Matrix fd = finite_difference_jacobian(fn, u, 1e-6);
    EXPECT_LT((got - fd).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Gradient, FiniteDifferenceCheckIndependentClass) {
  std::mt19937_64 rng(23);
  const Instance inst = testing_util::random_instance(rng, 5, 1, 2, 2, 0.6);
  const Policy pol = uniform_policy(inst, PolicyClass::independent);
  const auto rep = gradient_check(inst, pol, {1e-13, 2000});
  ASSERT_TRUE(rep.fd_max_rel_err.has_value());
  EXPECT_LT(*rep.fd_max_rel_err, 1e-6);
}

TEST(Multilinear, ExactMatchesBruteForce) {
  const ItemSet cand{0, 2, 3, 5};
  const Vector w = (Vector(6) << 0.3, 0, -1.2, 0.7, 0, 2.0).finished();
  const SetFunction z = [&](const ItemSet& e) {
    double s = 0.0;
    for (int v : e) s += w(v);
    return std::sqrt(1.0 + s * s) + static_cast<double>(e.size() % 2);
  };
  const Vector rho = (Vector(4) << 0.1, 0.5, 0.8, 0.35).finished();
  double value = 0.0;
  Vector grad = Vector::Zero(4);
  for (int mask = 0; mask < 16; ++mask) {
    ItemSet e;
    double pr = 1.0;
    for (int i = 0; i < 4; ++i) {
      const bool in = mask >> i & 1;
      if (in) e.push_back(cand[static_cast<std::size_t>(i)]);
      pr *= in ? rho(i) : 1 - rho(i);
    }
    value += pr * z(e);
    for (int i = 0; i < 4; ++i) {
      const bool in = mask >> i & 1;
      const double other = in ? rho(i) : 1 - rho(i);
      grad(i) += (in ? 1.0 : -1.0) * pr / other * z(e);
    }
  }
  EXPECT_NEAR(multilinear_exact(cand, rho, z), value, 1e-14);
  EXPECT_LT((multilinear_grad_exact(cand, rho, z) - grad).cwiseAbs().maxCoeff(), 1e-13);
  const auto est = multilinear_estimate(cand, rho, z, 20000, 5);
  EXPECT_LT(std::abs(est.value - value), 4 * est.std_error);
  const auto gest = multilinear_grad_estimate(cand, rho, z, 20000, 5);
  for (Index i = 0; i < 4; ++i) EXPECT_LT(std::abs(gest.value(i) - grad(i)), 4 * gest.std_error(i) + 1e-12);
  EXPECT_THROW(multilinear_estimate(cand, rho, z, 1, 0), ConfigError);
}

TEST(Multilinear, PipageRoundingIsIntegralAndDoesNotDecrease) {
  const ItemSet cand{0, 1, 2, 3, 4};
  const Vector w = (Vector(5) << 1.0, 0.4, 0.9, 0.2, 0.6).finished();
  const SetFunction z = [&](const ItemSet& e) {
    double s = 0.0;
    for (int v : e) s += w(v);
    return 1.0 - std::exp(-s);  // monotone submodular
  };
  const Vector rho = (Vector(5) << 0.3, 0.5, 0.4, 0.2, 0.6).finished();
  const Vector r = pipage_round(cand, rho, 2, z);
  for (Index i = 0; i < r.size(); ++i) EXPECT_TRUE(r(i) == 0.0 || r(i) == 1.0);
  EXPECT_LE(r.sum(), 2.0 + 1e-12);
  EXPECT_GE(multilinear_exact(cand, r, z), multilinear_exact(cand, rho, z) - 1e-12);
}
