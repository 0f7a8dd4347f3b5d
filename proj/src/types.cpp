#include "harmrec/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace harmrec {

ItemCatalog::ItemCatalog(Matrix profiles, std::vector<int> harmful_items)
    : items(std::move(profiles)), harmful(std::move(harmful_items)) {
  std::sort(harmful.begin(), harmful.end());
  harmful.erase(std::unique(harmful.begin(), harmful.end()), harmful.end());
  is_harmful.assign(static_cast<std::size_t>(items.cols()), false);
  for (int h : harmful) {
    if (h < 0 || h >= items.cols()) {
      throw ConfigError("harmful index " + std::to_string(h) + " out of range");
    }
    is_harmful[static_cast<std::size_t>(h)] = true;
  }
}

Vector Instance::alphas() const {
  Vector a(num_items());
  for (Index v = 0; v < a.size(); ++v) {
    a(v) = params.alpha(catalog.is_harmful[static_cast<std::size_t>(v)]);
  }
  return a;
}

void validate(const ItemCatalog& catalog) {
  if (catalog.size() < 1) throw ConfigError("catalog must contain at least one item");
  if (catalog.dimension() < 1) throw ConfigError("item dimension must be positive");
  if (!catalog.items.allFinite()) throw ConfigError("item profiles must be finite");
  if (catalog.is_harmful.size() != static_cast<std::size_t>(catalog.size())) {
    throw ConfigError("harm labels do not match catalog size");
  }
}

void validate(const DynamicsParams& p) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(p.alpha_h) || !in_unit(p.alpha_nh) || !in_unit(p.beta)) {
    throw ConfigError("alpha_h, alpha_nh and beta must lie in [0, 1]");
  }
  if (p.alpha_h + p.beta > 1.0 + 1e-12 || p.alpha_nh + p.beta > 1.0 + 1e-12) {
    throw ConfigError("alpha + beta must not exceed 1");
  }
  if (!(p.c >= 0.0) || !std::isfinite(p.c)) throw ConfigError("c must be non-negative");
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) {
    throw ConfigError("lambda must be non-negative");
  }
  if (p.k < 1) throw ConfigError("k must be at least 1");
}

void validate(const Instance& inst) {
  validate(inst.catalog);
  validate(inst.params);
  if (inst.u0.size() != inst.dimension()) {
    throw ConfigError("u0 dimension does not match item dimension");
  }
  if (!inst.u0.allFinite()) throw ConfigError("u0 must be finite");
  const auto& cc = inst.candidates;
  if (cc.sets.empty()) throw ConfigError("candidate collection is empty");
  if (cc.sets.size() != cc.probs.size()) {
    throw ConfigError("candidate sets and probabilities differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < cc.sets.size(); ++i) {
    if (!(cc.probs[i] >= 0.0)) throw ConfigError("candidate probabilities must be >= 0");
    total += cc.probs[i];
    const auto& set = cc.sets[i];
    if (set.empty()) throw ConfigError("candidate set " + std::to_string(i) + " is empty");
    if (!std::is_sorted(set.begin(), set.end()) ||
        std::adjacent_find(set.begin(), set.end()) != set.end()) {
      throw ConfigError("candidate set " + std::to_string(i) + " must be sorted and unique");
    }
    for (int v : set) {
      if (v < 0 || v >= inst.num_items()) {
        throw ConfigError("candidate item " + std::to_string(v) + " out of range");
      }
      if (inst.catalog.is_harmful[static_cast<std::size_t>(v)]) {
        throw ConfigError("candidate set " + std::to_string(i) + " contains harmful item " +
                          std::to_string(v));
      }
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("candidate probabilities must sum to 1");
}

CandidateCollection full_catalog_candidates(const ItemCatalog& catalog) {
  ItemSet safe;
  for (Index v = 0; v < catalog.size(); ++v) {
    if (!catalog.is_harmful[static_cast<std::size_t>(v)]) safe.push_back(static_cast<int>(v));
  }
  if (safe.empty()) throw ConfigError("every item is harmful; no candidates remain");
  return CandidateCollection{{safe}, {1.0}};
}

}  // namespace harmrec
