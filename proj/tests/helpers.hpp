#pragma once

#include "harmrec/dynamics.hpp"
#include "harmrec/types.hpp"

#include <numeric>
#include <random>

namespace testing_util {

using namespace harmrec;

// Random small instance with Gaussian items and profile, rescaled to satisfy the contraction
// condition. Built by hand so tests do not depend on the synthetic generator.
inline Instance random_instance(std::mt19937_64& rng, int n, int h, int d, int k,
                                double profile_scale = 0.3) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix items(d, n);
  for (Index j = 0; j < items.size(); ++j) items.data()[j] = gauss(rng);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> harmful(perm.begin(), perm.begin() + h);
  std::sort(harmful.begin(), harmful.end());
  Instance inst;
  inst.catalog = ItemCatalog(items, harmful);
  inst.candidates = full_catalog_candidates(inst.catalog);
  inst.params.k = k;
  inst.u0 = Vector(d);
  for (Index i = 0; i < d; ++i) inst.u0(i) = gauss(rng);
  // keep the score spread small enough for the condition to be attainable
  const double delta = inst.catalog.items.colwise().norm().maxCoeff();
  const double K = 12.0 * (inst.params.alpha_nh + inst.params.beta) /
                   (5.0 * n * d * inst.params.alpha_h);
  inst.u0 *= profile_scale * K / (12.0 * delta * inst.u0.norm());
  return rescale_to_contraction(inst).instance;
}

}  // namespace testing_util
