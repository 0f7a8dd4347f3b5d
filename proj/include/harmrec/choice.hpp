#pragma once

#include "harmrec/policy.hpp"
#include "harmrec/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

namespace harmrec {

/// Scores are e^{v.u}; larger exponents are rejected instead of overflowing.
inline constexpr double kMaxScoreExponent = 500.0;

/// s_v = e^{v.u}.
template <class DerivedV, class DerivedU>
typename DerivedV::Scalar score(const Eigen::MatrixBase<DerivedV>& v,
                                const Eigen::MatrixBase<DerivedU>& u) {
  using std::abs;
  using std::exp;
  if (v.size() != u.size()) {
    throw ConfigError("item dimension " + std::to_string(v.size()) +
                      " does not match profile dimension " + std::to_string(u.size()));
  }
  const auto x = v.dot(u);
  if (!(abs(x) <= kMaxScoreExponent)) {
    throw NumericError("score exponent " + std::to_string(static_cast<double>(x)) +
                       " exceeds the overflow guard; rescale the profiles");
  }
  return exp(x);
}

/// g(s_E) = s_E / (s_E + c): probability of accepting a recommendation of total score s_E.
template <class Scalar>
Scalar click_prob(Scalar total, Scalar c) {
  if (total < Scalar(0) || c < Scalar(0)) throw ConfigError("scores and c must be non-negative");
  if (total == Scalar(0) && c == Scalar(0)) {
    throw NumericError("click probability is undefined for s_E = c = 0");
  }
  return total / (total + c);
}

/// All item scores at a profile, with the catalog and harmful totals.
struct ScoreState {
  Vector s;
  double total = 0.0;
  double harmful = 0.0;

  static ScoreState at(const ItemCatalog& catalog, const Vector& u);
  double set_total(const ItemSet& items) const;
};

Vector scores(const ItemCatalog& catalog, const Vector& u);

/// s_A; zero for the empty set.
double total_score(const ItemCatalog& catalog, const ItemSet& items, const Vector& u);

/// The full vector p_{.|E}: the chance of selecting each catalog item given recommendation E.
Vector item_probs_given_rec(const ItemSet& rec, const ScoreState& state, double c);

double item_prob_given_rec(int item, const ItemSet& rec, const ItemCatalog& catalog,
                           const Vector& u, double c);

/// p_v = E_{C,E}[p_{v|E}] for a precomputed set distribution.
Vector selection_probs(const std::vector<WeightedSet>& dist, const ScoreState& state, double c);

/// p_CLK = E_{C,E}[g(s_E)] for a precomputed set distribution.
double click_prob(const std::vector<WeightedSet>& dist, const ScoreState& state, double c);

Vector selection_probs(const Instance& instance, const Policy& policy, const Vector& u,
                       const SamplingOptions& opts = {});

struct ClickHarm {
  double p_clk = 0.0;
  double p_h = 0.0;
};

ClickHarm click_and_harm_probs(const Instance& instance, const Policy& policy, const Vector& u,
                               const SamplingOptions& opts = {});

/// f0 = p_CLK - lambda p_H at a fixed profile.
double static_objective(const Instance& instance, const Policy& policy, const Vector& u,
                        double lambda, const SamplingOptions& opts = {});

}  // namespace harmrec
