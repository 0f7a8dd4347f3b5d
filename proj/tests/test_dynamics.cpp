#include "harmrec/baselines.hpp"
#include "harmrec/dynamics.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace harmrec;

TEST(Dynamics, DriftVanishesAtStationaryProfile) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const Instance inst = testing_util::random_instance(rng, 5, 1, 3, 1 + t % 2);
    const Policy pol = uniform_policy(inst, t % 2 ? PolicyClass::independent : PolicyClass::bounded);
    const auto res = solve_stationary(inst, pol, std::nullopt, {1e-12, 1000});
    ASSERT_TRUE(res.converged);
    EXPECT_LT(drift(inst, pol, res.u_bar).norm(), 1e-11);
    EXPECT_TRUE(res.condition_holds);
    EXPECT_EQ(res.iterates.front(), inst.u0);
  }
}

TEST(Dynamics, NoAttractionKeepsInherentProfile) {
  std::mt19937_64 rng(12);
  Instance inst = testing_util::random_instance(rng, 4, 1, 2, 1);
  inst.params.alpha_h = inst.params.alpha_nh = 0.0;
  const Policy pol = uniform_policy(inst, PolicyClass::bounded);
  const auto res = solve_stationary(inst, pol, Vector::Constant(2, 0.3), {1e-12, 10});
  EXPECT_LT((res.u_bar - inst.u0).norm(), 1e-15);
}

TEST(Dynamics, AttractionAverageIsConvexCombination) {
  std::mt19937_64 rng(13);
  const Instance inst = testing_util::random_instance(rng, 4, 1, 2, 1);
  Vector p(4);
  p << 0.1, 0.2, 0.3, 0.4;
  const Vector a = inst.alphas();
  Vector num = inst.params.beta * inst.u0;
  double den = inst.params.beta;
  for (Index v = 0; v < 4; ++v) {
    num += a(v) * p(v) * inst.catalog.items.col(v);
    den += a(v) * p(v);
  }
  EXPECT_LT((attraction_average(inst, p) - num / den).norm(), 1e-15);
  Instance degenerate = inst;
  degenerate.params.beta = 0;
  EXPECT_THROW(attraction_average(degenerate, Vector::Zero(4)), NumericError);
}

TEST(Dynamics, RescalingKeepsScoresAndEnforcesCondition) {
  std::mt19937_64 rng(14);
  const Instance base = testing_util::random_instance(rng, 6, 2, 3, 1);
  Instance wide = base;
  wide.catalog.items *= 50.0;
  wide.u0 /= 50.0;
  EXPECT_FALSE(contraction_condition(wide).holds);
  const auto r = rescale_to_contraction(wide);
  EXPECT_TRUE(contraction_condition(r.instance).holds);
  const Vector before = wide.catalog.items.transpose() * wide.u0;
  const Vector after = r.instance.catalog.items.transpose() * r.instance.u0;
  EXPECT_LT((before - after).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(rescale_to_contraction(wide, 1.5), ConfigError);

  Instance hopeless = base;
  hopeless.u0 *= 1e4;
  EXPECT_FALSE(contraction_attainable(hopeless));
  EXPECT_THROW(rescale_to_contraction(hopeless), NumericError);
}

TEST(Dynamics, ConditionFormula) {
  Matrix items(1, 2);
  items << 0.1, -0.05;
  Instance inst;
  inst.catalog = ItemCatalog(items, {1});
  inst.candidates = full_catalog_candidates(inst.catalog);
  inst.u0 = Vector::Constant(1, 0.2);
  const auto rep = contraction_condition(inst);
  const double K = 12 * (0.5 + 0.15) / (5 * 2 * 1 * 0.25);
  EXPECT_NEAR(rep.bound, (std::sqrt(0.04 + K) - 0.2) / 6, 1e-15);
  EXPECT_NEAR(rep.lipschitz, (3 * 0.01 + 0.2 * 0.1) * 5 * 2 * 0.25 / 0.65, 1e-15);
  EXPECT_TRUE(rep.holds);
}

TEST(Dynamics, SolverReportsNonConvergence) {
  std::mt19937_64 rng(15);
  const Instance inst = testing_util::random_instance(rng, 5, 1, 2, 1);
  const Policy pol = uniform_policy(inst, PolicyClass::bounded);
  const auto res = solve_stationary(inst, pol, Vector::Constant(2, 5.0), {1e-14, 2});
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 2);
}

TEST(Dynamics, TrajectoryReachesStationaryProfile) {
  std::mt19937_64 rng(16);
  const Instance inst = testing_util::random_instance(rng, 5, 1, 2, 1);
  const Policy pol = uniform_policy(inst, PolicyClass::bounded);
  const auto tr = simulate_evolution(inst, pol, inst.u0, 1e-9);
  ASSERT_TRUE(tr.converged_at.has_value());
  const auto res = solve_stationary(inst, pol, std::nullopt, {1e-12, 1000});
  // the last step is below 1e-9 and the map contracts, so the limit is close
  EXPECT_LT((tr.profiles.back() - res.u_bar).norm(), 1e-6);
  // one explicit step of the mean-field update
  const Vector& u1 = tr.profiles.at(1);
  EXPECT_LT((u1 - inst.u0 - drift(inst, pol, inst.u0)).norm(), 1e-15);
}
