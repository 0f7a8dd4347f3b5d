#include "harmrec/data.hpp"
#include "harmrec/experiment.hpp"

#include <gtest/gtest.h>

using namespace harmrec;

namespace {

std::vector<Instance> batch(int users, std::uint64_t seed) {
  SyntheticConfig sc;
  sc.users = users;
  sc.seed = seed;
  return generate_synthetic(sc);
}

}  // namespace

TEST(Experiment, RowsAreConsistent) {
  const auto inst = batch(4, 2);
  ExperimentConfig cfg;
  cfg.trajectories = true;
  cfg.workers = 2;
  const auto rep = run_compare(inst, cfg);
  EXPECT_EQ(rep.failures, 0u);
  ASSERT_EQ(rep.rows.size(), 16u);
  for (const auto& row : rep.rows) {
    ASSERT_TRUE(row.ok) << row.error;
    const double lambda = inst[row.user].params.lambda;
    EXPECT_NEAR(row.f, row.p_clk - lambda * row.p_h, 1e-12);
    ASSERT_TRUE(row.distance.has_value());
  }
  const auto serial = run_compare(inst, [&] { auto c = cfg; c.workers = 1; return c; }());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) EXPECT_EQ(rep.rows[i].f, serial.rows[i].f);
  ASSERT_EQ(rep.summaries.size(), 4u);
  EXPECT_EQ(rep.summaries[0].policy, "grad");
  ASSERT_NE(rep.find(3, "unif"), nullptr);
  EXPECT_EQ(rep.find(9, "unif"), nullptr);
}

TEST(Experiment, ZeroLambdaGradNearBestClicks) {
  auto inst = batch(3, 4);
  for (auto& i : inst) i.params.lambda = 0.0;
  const auto rep = run_compare(inst, ExperimentConfig{});
  for (std::size_t u = 0; u < inst.size(); ++u) {
    const auto* g = rep.find(u, "grad");
    for (const char* other : {"u0", "unif"}) EXPECT_GE(g->p_clk, rep.find(u, other)->p_clk - 1e-9);
    EXPECT_GE(g->p_clk, rep.find(u, "alt")->p_clk - 1e-3);
  }
}

TEST(Experiment, ConfigChecks) {
  ExperimentConfig cfg;
  cfg.policies = {"grad", "oracle"};
  EXPECT_THROW(check(cfg), ConfigError);
  EXPECT_THROW(parse_sweep_axis("gamma"), ConfigError);
  EXPECT_THROW(parse_k_mode("fixed"), ConfigError);
  EXPECT_EQ(parse_k_mode("fixed-ratio"), KSweepMode::fixed_ratio);
}

TEST(Experiment, SweepValueApplication) {
  const auto inst = batch(1, 5).front();
  EXPECT_DOUBLE_EQ(apply_sweep_value(inst, SweepAxis::lambda, 7).params.lambda, 7);
  EXPECT_DOUBLE_EQ(apply_sweep_value(inst, SweepAxis::alpha_ratio, 0.5).params.alpha_h,
                   0.5 * inst.params.alpha_nh);
  const auto k2 = apply_sweep_value(inst, SweepAxis::k, 2, KSweepMode::fixed_ratio);
  EXPECT_EQ(k2.params.k, 2);
  EXPECT_DOUBLE_EQ(k2.params.c, 2 * inst.params.c);
  EXPECT_DOUBLE_EQ(apply_sweep_value(inst, SweepAxis::k, 3).params.c, inst.params.c);
  EXPECT_THROW(apply_sweep_value(inst, SweepAxis::beta, 0.9), ConfigError);
}

TEST(Experiment, LineFit) {
  const auto fit = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(fit.slope, 2, 1e-14);
  EXPECT_NEAR(fit.intercept, 1, 1e-14);
  EXPECT_NEAR(fit.r2, 1, 1e-14);
  const auto noisy = fit_line({0, 1, 2}, {0, 1, 0});
  EXPECT_NEAR(noisy.slope, 0, 1e-14);
  EXPECT_NEAR(noisy.r2, 0, 1e-14);
}
