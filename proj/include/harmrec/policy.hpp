#pragma once

#include "harmrec/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace harmrec {

enum class PolicyClass { bounded, independent };

std::string to_string(PolicyClass cls);
PolicyClass parse_policy_class(std::string_view name);

/// D_C = {E subset of C : |E| <= k}, ordered by size then lexicographically.
/// The empty set is always the first entry.
std::vector<ItemSet> bounded_subsets(const ItemSet& candidates, int k);

/// Controls how expectations over independently sampled recommendation sets
/// are evaluated: exact enumeration for small candidate sets, Monte Carlo
/// with a fixed seed (common random numbers) otherwise.
struct SamplingOptions {
  std::size_t exact_cap = 12;
  std::size_t samples = 1024;
  std::uint64_t seed = 0;
};

/// Parameter layout of one policy class over an instance's candidate collection.
/// Parameters are stored as one flat vector with a contiguous block per candidate set:
/// p_{E|C} over D_C for bounded cardinality, rho_{v|C} over C for independent sampling.
class PolicySpace {
 public:
  PolicySpace(const Instance& instance, PolicyClass cls);

  PolicyClass policy_class() const { return cls_; }
  int budget() const { return k_; }
  std::size_t num_blocks() const { return sets_.size(); }
  Index dimension() const { return dimension_; }
  Index offset(std::size_t block) const { return offsets_[block]; }
  Index block_size(std::size_t block) const;
  const ItemSet& candidates(std::size_t block) const { return sets_[block]; }
  double block_prob(std::size_t block) const { return probs_[block]; }
  /// Bounded cardinality only: the subsets indexed by the block's coordinates.
  const std::vector<ItemSet>& subsets(std::size_t block) const { return subsets_[block]; }

  bool feasible(const Vector& params, double tol = 1e-9) const;
  Vector project(const Vector& params) const;
  /// Checks dimension and feasibility; throws ConfigError on violation.
  void check(const Vector& params, double tol = 1e-9) const;

 private:
  PolicyClass cls_;
  int k_;
  std::vector<ItemSet> sets_;
  std::vector<double> probs_;
  std::vector<std::vector<ItemSet>> subsets_;
  std::vector<Index> offsets_;
  Index dimension_ = 0;
};

/// A recommendation policy: bounded-cardinality table or independent-sampling marginals.
struct Policy {
  PolicyClass cls = PolicyClass::bounded;
  Vector params;
};

/// One term of the expectation over (C, E): weight = p_C * p_{E|C}.
struct WeightedSet {
  std::size_t block;
  ItemSet items;
  double weight;
};

/// The distribution over recommended sets induced by a policy. Zero-weight terms are dropped.
std::vector<WeightedSet> expand(const PolicySpace& space, const Vector& params,
                                const SamplingOptions& opts = {});

/// Whether a block of an independent-sampling policy is enumerated exactly.
bool exact_block(const PolicySpace& space, std::size_t block, const SamplingOptions& opts);

/// Uniform draws (samples x |C|) used for Monte-Carlo blocks; a deterministic
/// function of the seed and the block index.
Matrix block_uniforms(const PolicySpace& space, std::size_t block, const SamplingOptions& opts);

/// Items of `candidates` selected by the bits of `mask`.
ItemSet subset_from_mask(const ItemSet& candidates, std::uint64_t mask);

/// Jacobian (rows x m) of E_{pi}[z(E)] with respect to the policy parameters,
/// where z maps a recommended set to a vector of length `rows`.
///  - bounded: column (C,E) is p_C z(E)
///  - independent, exact: column (C,v) is p_C E_{rho}[z(E + v) - z(E - v)]
///  - independent, sampled: the same expectation estimated on the block's samples
template <class SetFn>
Matrix expectation_jacobian(const PolicySpace& space, const Vector& params,
                            const SamplingOptions& opts, Index rows, SetFn&& z) {
  Matrix jac = Matrix::Zero(rows, space.dimension());
  for (std::size_t b = 0; b < space.num_blocks(); ++b) {
    const double pc = space.block_prob(b);
    const Index off = space.offset(b);
    if (pc == 0.0) continue;
    if (space.policy_class() == PolicyClass::bounded) {
      const auto& subsets = space.subsets(b);
      for (std::size_t j = 0; j < subsets.size(); ++j) {
        jac.col(off + static_cast<Index>(j)) = pc * z(subsets[j]);
      }
      continue;
    }
    const ItemSet& cand = space.candidates(b);
    const auto s = static_cast<int>(cand.size());
    const auto rho = params.segment(off, s);
    if (exact_block(space, b, opts)) {
      const std::uint64_t count = std::uint64_t{1} << s;
      Matrix values(rows, static_cast<Index>(count));
      for (std::uint64_t mask = 0; mask < count; ++mask) {
        values.col(static_cast<Index>(mask)) = z(subset_from_mask(cand, mask));
      }
      for (int w = 0; w < s; ++w) {
        const std::uint64_t bit = std::uint64_t{1} << w;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
          if (mask & bit) continue;
          double weight = 1.0;
          for (int i = 0; i < s && weight != 0.0; ++i) {
            if (i == w) continue;
            weight *= (mask >> i) & 1U ? rho(i) : 1.0 - rho(i);
          }
          if (weight == 0.0) continue;
          jac.col(off + w) += pc * weight *
                              (values.col(static_cast<Index>(mask | bit)) -
                               values.col(static_cast<Index>(mask)));
        }
      }
    } else {
      const Matrix u = block_uniforms(space, b, opts);
      const double scale = pc / static_cast<double>(u.rows());
      std::vector<bool> in(static_cast<std::size_t>(s));
      for (Index l = 0; l < u.rows(); ++l) {
        ItemSet drawn;
        for (int i = 0; i < s; ++i) {
          in[static_cast<std::size_t>(i)] = u(l, i) < rho(i);
          if (in[static_cast<std::size_t>(i)]) drawn.push_back(cand[static_cast<std::size_t>(i)]);
        }
        const Vector base = z(drawn);
        for (int w = 0; w < s; ++w) {
          ItemSet other;
          other.reserve(drawn.size() + 1);
          for (int i = 0; i < s; ++i) {
            const bool keep = i == w ? !in[static_cast<std::size_t>(i)] : in[static_cast<std::size_t>(i)];
            if (keep) other.push_back(cand[static_cast<std::size_t>(i)]);
          }
          const Vector alt = z(other);
          if (in[static_cast<std::size_t>(w)]) {
            jac.col(off + w) += scale * (base - alt);
          } else {
            jac.col(off + w) += scale * (alt - base);
          }
        }
      }
    }
  }
  return jac;
}

}  // namespace harmrec
