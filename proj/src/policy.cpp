#include "harmrec/policy.hpp"

#include "harmrec/projection.hpp"

#include <cmath>
#include <random>

namespace harmrec {

std::string to_string(PolicyClass cls) {
  return cls == PolicyClass::bounded ? "bounded" : "independent";
}

PolicyClass parse_policy_class(std::string_view name) {
  if (name == "bounded") return PolicyClass::bounded;
  if (name == "independent") return PolicyClass::independent;
  throw ConfigError("unknown policy class '" + std::string(name) + "'");
}

namespace {

void append_combinations(const ItemSet& items, std::size_t size, std::size_t start,
                         ItemSet& current, std::vector<ItemSet>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i + (size - current.size()) <= items.size(); ++i) {
    current.push_back(items[i]);
    append_combinations(items, size, i + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<ItemSet> bounded_subsets(const ItemSet& candidates, int k) {
  std::vector<ItemSet> out;
  const std::size_t top = std::min(candidates.size(), static_cast<std::size_t>(std::max(k, 0)));
  ItemSet current;
  for (std::size_t size = 0; size <= top; ++size) {
    append_combinations(candidates, size, 0, current, out);
  }
  return out;
}

PolicySpace::PolicySpace(const Instance& instance, PolicyClass cls)
    : cls_(cls),
      k_(instance.params.k),
      sets_(instance.candidates.sets),
      probs_(instance.candidates.probs) {
  if (k_ < 1) throw ConfigError("k must be at least 1");
  offsets_.reserve(sets_.size());
  for (const auto& set : sets_) {
    offsets_.push_back(dimension_);
    if (cls_ == PolicyClass::bounded) {
      subsets_.push_back(bounded_subsets(set, k_));
      dimension_ += static_cast<Index>(subsets_.back().size());
    } else {
      subsets_.emplace_back();
      dimension_ += static_cast<Index>(set.size());
    }
  }
}

Index PolicySpace::block_size(std::size_t block) const {
  return cls_ == PolicyClass::bounded ? static_cast<Index>(subsets_[block].size())
                                      : static_cast<Index>(sets_[block].size());
}

bool PolicySpace::feasible(const Vector& params, double tol) const {
  if (params.size() != dimension_ || !params.allFinite()) return false;
  for (std::size_t b = 0; b < sets_.size(); ++b) {
    const auto block = params.segment(offsets_[b], block_size(b));
    if (block.minCoeff() < -tol) return false;
    if (cls_ == PolicyClass::bounded) {
      if (std::abs(block.sum() - 1.0) > tol) return false;
    } else {
      if (block.maxCoeff() > 1.0 + tol) return false;
      if (block.sum() > k_ + tol) return false;
    }
  }
  return true;
}

Vector PolicySpace::project(const Vector& params) const {
  if (params.size() != dimension_) throw ConfigError("policy dimension mismatch");
  Vector out(dimension_);
  for (std::size_t b = 0; b < sets_.size(); ++b) {
    const Vector block = params.segment(offsets_[b], block_size(b));
    out.segment(offsets_[b], block_size(b)) =
        cls_ == PolicyClass::bounded ? project_simplex(block)
                                     : project_capped_simplex(block, static_cast<double>(k_));
  }
  return out;
}

void PolicySpace::check(const Vector& params, double tol) const {
  if (params.size() != dimension_) {
    throw ConfigError("policy has " + std::to_string(params.size()) + " parameters, expected " +
                      std::to_string(dimension_));
  }
  if (!feasible(params, tol)) {
    throw ConfigError("policy violates the " + to_string(cls_) + " constraints");
  }
}

bool exact_block(const PolicySpace& space, std::size_t block, const SamplingOptions& opts) {
  return space.candidates(block).size() <= std::min<std::size_t>(opts.exact_cap, 62);
}

Matrix block_uniforms(const PolicySpace& space, std::size_t block, const SamplingOptions& opts) {
  const auto s = static_cast<Index>(space.candidates(block).size());
  const auto n = static_cast<Index>(std::max<std::size_t>(opts.samples, 1));
  std::mt19937_64 rng(opts.seed ^ (0x9E3779B97F4A7C15ULL * (block + 1)));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix u(n, s);
  for (Index l = 0; l < n; ++l) {
    for (Index i = 0; i < s; ++i) u(l, i) = unif(rng);
  }
  return u;
}

ItemSet subset_from_mask(const ItemSet& candidates, std::uint64_t mask) {
  ItemSet out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if ((mask >> i) & 1U) out.push_back(candidates[i]);
  }
  return out;
}

std::vector<WeightedSet> expand(const PolicySpace& space, const Vector& params,
                                const SamplingOptions& opts) {
  if (params.size() != space.dimension()) throw ConfigError("policy dimension mismatch");
  std::vector<WeightedSet> out;
  for (std::size_t b = 0; b < space.num_blocks(); ++b) {
    const double pc = space.block_prob(b);
    if (pc == 0.0) continue;
    const Index off = space.offset(b);
    if (space.policy_class() == PolicyClass::bounded) {
      const auto& subsets = space.subsets(b);
      for (std::size_t j = 0; j < subsets.size(); ++j) {
        const double w = params(off + static_cast<Index>(j));
        if (w != 0.0) out.push_back({b, subsets[j], pc * w});
      }
      continue;
    }
    const ItemSet& cand = space.candidates(b);
    const auto s = static_cast<int>(cand.size());
    const auto rho = params.segment(off, s);
    if (exact_block(space, b, opts)) {
      const std::uint64_t count = std::uint64_t{1} << s;
      for (std::uint64_t mask = 0; mask < count; ++mask) {
        double w = 1.0;
        for (int i = 0; i < s && w != 0.0; ++i) w *= (mask >> i) & 1U ? rho(i) : 1.0 - rho(i);
        if (w != 0.0) out.push_back({b, subset_from_mask(cand, mask), pc * w});
      }
    } else {
      const Matrix u = block_uniforms(space, b, opts);
      const double w = pc / static_cast<double>(u.rows());
      for (Index l = 0; l < u.rows(); ++l) {
        ItemSet drawn;
        for (int i = 0; i < s; ++i) {
          if (u(l, i) < rho(i)) drawn.push_back(cand[static_cast<std::size_t>(i)]);
        }
        out.push_back({b, std::move(drawn), w});
      }
    }
  }
  return out;
}

}  // namespace harmrec
