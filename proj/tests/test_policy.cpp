#include "harmrec/baselines.hpp"
#include "harmrec/io.hpp"
#include "harmrec/policy.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace harmrec;

namespace {

Instance two_sets() {
  Matrix items = Matrix::Zero(2, 5);
  items.row(0) << 0.1, 0.2, 0.3, 0.4, 0.5;
  Instance inst;
  inst.catalog = ItemCatalog(items, {4});
  inst.candidates.sets = {{0, 1, 2}, {1, 3}};
  inst.candidates.probs = {0.25, 0.75};
  inst.params.k = 2;
  inst.u0 = Vector::Zero(2);
  return inst;
}

}  // namespace

TEST(Policy, BoundedSubsetsEnumerateAllSmallSets) {
  const ItemSet cand{1, 4, 6, 9};
  for (int k = 1; k <= 4; ++k) {
    auto got = bounded_subsets(cand, k);
    EXPECT_TRUE(got.front().empty());
    auto ref = oracle::small_subsets(cand, k);
    std::sort(got.begin(), got.end());
    std::sort(ref.begin(), ref.end());
    EXPECT_EQ(got, ref);
  }
}

TEST(Policy, SpaceLayoutAndFeasibility) {
  const Instance inst = two_sets();
  const PolicySpace bounded(inst, PolicyClass::bounded);
  EXPECT_EQ(bounded.num_blocks(), 2u);
  EXPECT_EQ(bounded.block_size(0), 7);  // 1 + 3 + 3
  EXPECT_EQ(bounded.block_size(1), 4);
  EXPECT_EQ(bounded.dimension(), 11);
  const PolicySpace indep(inst, PolicyClass::independent);
  EXPECT_EQ(indep.dimension(), 5);

  const Policy unif = uniform_policy(inst, PolicyClass::bounded);
  EXPECT_TRUE(bounded.feasible(unif.params));
  EXPECT_NEAR(unif.params.head(7).sum(), 1.0, 1e-15);
  Vector bad = unif.params;
  bad(0) += 0.1;
  EXPECT_FALSE(bounded.feasible(bad));
  EXPECT_THROW(bounded.check(bad), ConfigError);
  EXPECT_THROW(bounded.check(Vector::Zero(3)), ConfigError);
  EXPECT_TRUE(bounded.feasible(bounded.project(bad)));

  const Policy ind = uniform_policy(inst, PolicyClass::independent);
  EXPECT_NEAR(ind.params(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(ind.params(3), 1.0, 1e-15);
  EXPECT_THROW(parse_policy_class("greedy"), ConfigError);
}

TEST(Policy, ExpandWeightsSumToOne) {
  const Instance inst = two_sets();
  for (auto cls : {PolicyClass::bounded, PolicyClass::independent}) {
    const PolicySpace space(inst, cls);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector x(space.dimension());
    for (Index i = 0; i < x.size(); ++i) x(i) = unif(rng);
    const Vector p = space.project(x);
    double total = 0.0;
    for (const auto& w : expand(space, p)) total += w.weight;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Policy, IndependentExpansionMatchesProductMeasure) {
  const Instance inst = two_sets();
  const PolicySpace space(inst, PolicyClass::independent);
  Vector rho(5);
  rho << 0.2, 0.5, 0.9, 0.4, 0.3;
  for (const auto& w : expand(space, rho)) {
    const ItemSet& cand = space.candidates(w.block);
    double expected = space.block_prob(w.block);
    for (std::size_t i = 0; i < cand.size(); ++i) {
      const double r = rho(space.offset(w.block) + static_cast<Index>(i));
      const bool in = std::find(w.items.begin(), w.items.end(), cand[i]) != w.items.end();
      expected *= in ? r : 1 - r;
    }
    EXPECT_NEAR(w.weight, expected, 1e-15);
  }
}

TEST(Policy, JsonRoundTrip) {
  const Instance inst = two_sets();
  for (auto cls : {PolicyClass::bounded, PolicyClass::independent}) {
    const PolicySpace space(inst, cls);
    const Policy p{cls, space.project(Vector::LinSpaced(space.dimension(), 0.0, 1.0))};
    const Policy back = policy_from_json(inst, to_json(inst, p));
    EXPECT_EQ(back.cls, cls);
    EXPECT_LT((back.params - p.params).norm(), 1e-15);
  }
  const Instance again = instance_from_json(to_json(inst));
  EXPECT_EQ(again.candidates.sets, inst.candidates.sets);
  EXPECT_EQ(again.catalog.harmful, inst.catalog.harmful);
  EXPECT_TRUE(again.catalog.items.isApprox(inst.catalog.items));
}

TEST(Validation, RejectsBadInstances) {
  Instance inst = two_sets();
  EXPECT_NO_THROW(validate(inst));
  auto with = [&](auto mutate) {
    Instance copy = inst;
    mutate(copy);
    return copy;
  };
  EXPECT_THROW(validate(with([](Instance& i) { i.candidates.probs = {0.5, 0.6}; })), ConfigError);
  EXPECT_THROW(validate(with([](Instance& i) { i.candidates.sets[1] = {1, 4}; })), ConfigError);
  EXPECT_THROW(validate(with([](Instance& i) { i.candidates.sets[0] = {2, 1}; })), ConfigError);
  EXPECT_THROW(validate(with([](Instance& i) { i.params.k = 0; })), ConfigError);
  EXPECT_THROW(validate(with([](Instance& i) { i.params.c = -1; })), ConfigError);
  EXPECT_THROW(validate(with([](Instance& i) { i.params.beta = 0.9; })), ConfigError);
  EXPECT_THROW(validate(with([](Instance& i) { i.u0 = Vector::Zero(3); })), ConfigError);
  EXPECT_THROW(ItemCatalog(Matrix::Zero(2, 2), {5}), ConfigError);
  EXPECT_THROW(instance_from_json(Json::parse(R"({"dimension": 2, "items": []})")), ConfigError);
}
