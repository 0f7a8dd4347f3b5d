#include "harmrec/choice.hpp"

namespace harmrec {

ScoreState ScoreState::at(const ItemCatalog& catalog, const Vector& u) {
  ScoreState state;
  state.s = scores(catalog, u);
  state.total = state.s.sum();
  for (int h : catalog.harmful) state.harmful += state.s(h);
  return state;
}

double ScoreState::set_total(const ItemSet& items) const {
  double total = 0.0;
  for (int v : items) total += s(v);
  return total;
}

Vector scores(const ItemCatalog& catalog, const Vector& u) {
  if (u.size() != catalog.dimension()) {
    throw ConfigError("profile dimension " + std::to_string(u.size()) +
                      " does not match item dimension " + std::to_string(catalog.dimension()));
  }
  const Vector exponent = catalog.items.transpose() * u;
  if (!(exponent.cwiseAbs().maxCoeff() <= kMaxScoreExponent)) {
    throw NumericError("score exponent exceeds the overflow guard; rescale the profiles");
  }
  return exponent.array().exp().matrix();
}

double total_score(const ItemCatalog& catalog, const ItemSet& items, const Vector& u) {
  double total = 0.0;
  for (int v : items) {
    if (v < 0 || v >= catalog.size()) {
      throw ConfigError("item index " + std::to_string(v) + " out of range");
    }
    total += score(catalog.items.col(v), u);
  }
  return total;
}

Vector item_probs_given_rec(const ItemSet& rec, const ScoreState& state, double c) {
  const double set_total = state.set_total(rec);
  if (set_total == 0.0 && c == 0.0) {
    throw NumericError("selection probabilities are undefined for an empty recommendation with c = 0");
  }
  // s_v / (s_E + c) inside E, plus the organic share c s_v / ((s_E + c) s_Omega) everywhere.
  const double denom = set_total + c;
  Vector p = (c / (denom * state.total)) * state.s;
  for (int v : rec) p(v) += state.s(v) / denom;
  return p;
}

double item_prob_given_rec(int item, const ItemSet& rec, const ItemCatalog& catalog,
                           const Vector& u, double c) {
  if (item < 0 || item >= catalog.size()) {
    throw ConfigError("item index " + std::to_string(item) + " out of range");
  }
  for (int v : rec) {
    if (v < 0 || v >= catalog.size()) {
      throw ConfigError("item index " + std::to_string(v) + " out of range");
    }
  }
  return item_probs_given_rec(rec, ScoreState::at(catalog, u), c)(item);
}

Vector selection_probs(const std::vector<WeightedSet>& dist, const ScoreState& state, double c) {
  Vector p = Vector::Zero(state.s.size());
  for (const auto& term : dist) p += term.weight * item_probs_given_rec(term.items, state, c);
  return p;
}

double click_prob(const std::vector<WeightedSet>& dist, const ScoreState& state, double c) {
  double p = 0.0;
  for (const auto& term : dist) p += term.weight * click_prob(state.set_total(term.items), c);
  return p;
}

Vector selection_probs(const Instance& instance, const Policy& policy, const Vector& u,
                       const SamplingOptions& opts) {
  const PolicySpace space(instance, policy.cls);
  return selection_probs(expand(space, policy.params, opts),
                         ScoreState::at(instance.catalog, u), instance.params.c);
}

ClickHarm click_and_harm_probs(const Instance& instance, const Policy& policy, const Vector& u,
                               const SamplingOptions& opts) {
  const PolicySpace space(instance, policy.cls);
  const auto state = ScoreState::at(instance.catalog, u);
  ClickHarm out;
  out.p_clk = click_prob(expand(space, policy.params, opts), state, instance.params.c);
  out.p_h = (1.0 - out.p_clk) * state.harmful / state.total;
  return out;
}

double static_objective(const Instance& instance, const Policy& policy, const Vector& u,
                        double lambda, const SamplingOptions& opts) {
  const auto ch = click_and_harm_probs(instance, policy, u, opts);
  return ch.p_clk - lambda * ch.p_h;
}

}  // namespace harmrec
