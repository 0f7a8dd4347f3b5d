#include "harmrec/choice.hpp"
#include "harmrec/projection.hpp"
#include "oracles.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace harmrec;

namespace {

ItemCatalog small_catalog() {
  Matrix items(2, 4);
  items << 0.3, -0.2, 0.5, 0.1,
           0.1, 0.4, -0.3, 0.2;
  return ItemCatalog(items, {2});
}

}  // namespace

TEST(Choice, ProbabilitiesSumToOneAndMatchTwoStageForm) {
  const auto cat = small_catalog();
  const Vector u = Vector::Constant(2, 0.7);
  for (const ItemSet& rec : {ItemSet{}, ItemSet{0}, ItemSet{1, 3}, ItemSet{0, 1, 3}}) {
    const Vector p = item_probs_given_rec(rec, ScoreState::at(cat, u), 1.3);
    EXPECT_NEAR(p.sum(), 1.0, 1e-14);
    const Vector ref = oracle::choice_given_rec(cat.items, rec, u, 1.3);
    EXPECT_LT((p - ref).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Choice, AgreesWithMonteCarloSimulation) {
  const auto cat = small_catalog();
  const Vector u = (Vector(2) << 1.0, -0.5).finished();
  const ItemSet rec{1, 3};
  const Vector p = item_probs_given_rec(rec, ScoreState::at(cat, u), 0.8);
  const std::size_t draws = 400000;
  const Vector freq = oracle::simulate_choice(cat.items, rec, u, 0.8, draws, 7);
  for (Index v = 0; v < p.size(); ++v) {
    const double se = std::sqrt(p(v) * (1 - p(v)) / draws);
    EXPECT_LT(std::abs(freq(v) - p(v)), 5 * se) << "item " << v;
  }
}

TEST(Choice, ClickProbabilityAndGuards) {
  EXPECT_DOUBLE_EQ(click_prob(3.0, 1.0), 0.75);
  EXPECT_DOUBLE_EQ(click_prob(0.0, 2.0), 0.0);
  EXPECT_THROW(click_prob(0.0, 0.0), NumericError);
  EXPECT_THROW(click_prob(-1.0, 1.0), ConfigError);
  const Vector v = Vector::Constant(2, 30.0);
  EXPECT_THROW(score(v, Vector::Constant(2, 10.0)), NumericError);
  EXPECT_THROW(score(v, Vector::Constant(3, 0.1)), ConfigError);
  EXPECT_NEAR(score(v, Vector::Constant(2, 0.01)), std::exp(0.6), 1e-15);
}

TEST(Choice, EmptyRecommendationWithZeroC) {
  const auto cat = small_catalog();
  EXPECT_THROW(item_probs_given_rec({}, ScoreState::at(cat, Vector::Zero(2)), 0.0), NumericError);
}

TEST(Choice, ZeroProfileGivesUniformScores) {
  const auto cat = small_catalog();
  const Vector s = scores(cat, Vector::Zero(2));
  EXPECT_TRUE(s.isApproxToConstant(1.0));
  EXPECT_DOUBLE_EQ(total_score(cat, {0, 2}, Vector::Zero(2)), 2.0);
  EXPECT_DOUBLE_EQ(total_score(cat, {}, Vector::Zero(2)), 0.0);
}

TEST(Projection, SimplexMatchesKktOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.5);
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + t % 6;
    Vector x(m);
    for (Index i = 0; i < m; ++i) x(i) = g(rng);
    const Vector y = project_simplex(x);
    EXPECT_LT((y - oracle::kkt_simplex(x)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((project_simplex(y) - y).norm(), 1e-12);
  }
}

TEST(Projection, CappedSimplexMatchesKktOracle) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.5, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + t % 6;
    const int k = 1 + t % 3;
    Vector x(m);
    for (Index i = 0; i < m; ++i) x(i) = g(rng);
    const Vector y = project_capped_simplex(x, k);
    EXPECT_LT((y - oracle::kkt_capped_simplex(x, k)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((project_capped_simplex(y, k) - y).norm(), 1e-12);
  }
}

TEST(Projection, RejectsNonFinite) {
  Vector x = Vector::Zero(3);
  x(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(project_simplex(x), ConfigError);
  EXPECT_THROW(project_capped_simplex(x, 1), ConfigError);
}
