#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace harmrec {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Sorted list of item indices; used for candidate sets and recommended sets.
using ItemSet = std::vector<int>;

/// Invalid input, inconsistent dimensions, or parameters outside their domain.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity that is mathematically undefined at the given arguments
/// (0/0 in the click probability, zero dynamics denominator, score overflow).
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The linear system of the implicit function theorem is singular.
class ImplicitFunctionError : public NumericError {
 public:
  ImplicitFunctionError(const std::string& what, double rcond)
      : NumericError(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Item profiles stored column-wise (d x n) plus the harmful subset.
struct ItemCatalog {
  Matrix items;                 // column v is the profile of item v
  std::vector<int> harmful;     // sorted, unique
  std::vector<bool> is_harmful; // size n, derived from `harmful`

  ItemCatalog() = default;
  ItemCatalog(Matrix profiles, std::vector<int> harmful_items);

  Index dimension() const { return items.rows(); }
  Index size() const { return items.cols(); }
};

struct CandidateCollection {
  std::vector<ItemSet> sets;
  std::vector<double> probs;

  std::size_t size() const { return sets.size(); }
};

struct DynamicsParams {
  double alpha_h = 0.25;
  double alpha_nh = 0.5;
  double beta = 0.15;
  double c = 1.0;
  double lambda = 100.0;
  int k = 1;

  double alpha(bool harmful) const { return harmful ? alpha_h : alpha_nh; }
};

/// A complete problem: catalog, candidate sets, dynamics and the inherent profile u0.
struct Instance {
  ItemCatalog catalog;
  CandidateCollection candidates;
  DynamicsParams params;
  Vector u0;

  Index dimension() const { return catalog.dimension(); }
  Index num_items() const { return catalog.size(); }

  /// Per-item attraction rate alpha_v.
  Vector alphas() const;
};

/// Throws ConfigError listing the first violated invariant.
void validate(const ItemCatalog& catalog);
void validate(const DynamicsParams& params);
void validate(const Instance& instance);

/// The single candidate set Omega \ H with probability one.
CandidateCollection full_catalog_candidates(const ItemCatalog& catalog);

}  // namespace harmrec
