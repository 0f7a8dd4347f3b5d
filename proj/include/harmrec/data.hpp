#pragma once

#include "harmrec/dynamics.hpp"
#include "harmrec/policy.hpp"
#include "harmrec/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace harmrec {

// ---- synthetic instances ----

struct SyntheticConfig {
  int n = 6;           // items
  int h = 1;           // harmful items
  int d = 2;           // profile dimension
  int users = 1;
  std::uint64_t seed = 0;
  DynamicsParams params{};
  double item_std = 1.0;
  double user_std = 1.0;
  // Fraction of the largest score spread max||v|| ||u0|| compatible with the contraction
  // condition; u0 is shrunk to it when the Gaussian draw exceeds it.
  double spread = 0.2;
  // tau as a fraction of the largest rescaling that keeps the contraction condition.
  double rescale_fraction = 0.9;
  // 0: the single candidate set Omega \ H. Otherwise this many random sets of
  // `candidate_size` non-harmful items with uniform probabilities.
  int candidate_sets = 0;
  int candidate_size = 0;
};

/// One user per instance; all users share the catalog, the harmful set and the candidates.
std::vector<Instance> generate_synthetic(const SyntheticConfig& config);

/// Shrinks u0 when needed so that some rescaling satisfies the contraction condition,
/// then rescales. Returns the factor applied to u0 before rescaling (1 if untouched).
double enforce_contraction(Instance& instance, double spread, double rescale_fraction = 0.9);

// ---- ratings and matrix factorization ----

struct Rating {
  int user;  // dense index
  int item;  // dense index
  double value;
};

class RatingsTable {
 public:
  void add(const std::string& user_id, const std::string& item_id, double rating);

  const std::vector<Rating>& ratings() const { return ratings_; }
  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  std::size_t size() const { return ratings_.size(); }

  /// Item ids with the most ratings, ties by first appearance.
  std::vector<std::string> top_items(std::size_t count) const;
  /// User ids with the most ratings among `items`, ties by first appearance.
  std::vector<std::string> top_users(const std::vector<std::string>& items, std::size_t count) const;
  /// Ratings restricted to the given users and items.
  RatingsTable subset(const std::vector<std::string>& users,
                      const std::vector<std::string>& items) const;

 private:
  std::vector<Rating> ratings_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, int> user_index_;
  std::unordered_map<std::string, int> item_index_;
  std::map<std::pair<int, int>, std::size_t> seen_;
};

/// CSV with header user_id,item_id,rating.
RatingsTable read_ratings_csv(std::istream& in);
RatingsTable read_ratings_csv(const std::string& path);

/// CSV with header item_id,harmful (0/1).
std::unordered_map<std::string, bool> read_harm_labels_csv(std::istream& in);
std::unordered_map<std::string, bool> read_harm_labels_csv(const std::string& path);

struct MfConfig {
  int epochs = 100;
  double lr = 0.01;
  double reg = 0.01;
  int latent = 10;
  std::uint64_t seed = 0;
  double init_std = 0.1;
};

struct MfModel {
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  Matrix user_factors;  // users x latent
  Matrix item_factors;  // items x latent
  Vector user_bias;
  Vector item_bias;
  double global_mean = 0.0;
  double rmse = 0.0;
  std::vector<double> rmse_history;  // training RMSE after each epoch

  int latent() const { return static_cast<int>(user_factors.cols()); }
  double predict(int user, int item) const;
  /// (item factors, item bias, 1)
  Vector item_embedding(int item) const;
  /// (user factors, 1, user bias + global mean); item_embedding . user_embedding = predict.
  Vector user_embedding(int user) const;
};

MfModel fit_mf(const RatingsTable& ratings, const MfConfig& config = {});

// ---- instance assembly and calibration ----

enum class ContractionMode {
  shrink,   // temper scores when rescaling alone cannot satisfy the condition
  rescale,  // rescale only; instances that cannot be rescaled are reported and skipped
};

ContractionMode parse_contraction_mode(const std::string& name);

struct AssembledUser {
  std::string user_id;
  Instance instance;
  double score_temperature = 1.0;  // factor applied to u0 before rescaling
};

struct AssembleResult {
  std::vector<AssembledUser> users;
  std::vector<std::string> skipped;  // rescale mode only
};

/// One instance per requested user: u0 = user embedding, items = item embeddings of all
/// model items, harmful items from `labels`. Throws ConfigError naming unlabeled items.
AssembleResult assemble_instances(const MfModel& model,
                                  const std::unordered_map<std::string, bool>& labels,
                                  const std::vector<std::string>& users,
                                  const DynamicsParams& params,
                                  ContractionMode mode = ContractionMode::shrink,
                                  double spread = 0.2);

/// `count` user ids drawn without replacement from the model by seed.
std::vector<std::string> sample_users(const MfModel& model, std::size_t count, std::uint64_t seed);

struct CalibrationRow {
  double c = 0.0;
  double p_clk_alt = 0.0;
  double p_h_alt = 0.0;
  double p_clk_unif = 0.0;
  double p_h_unif = 0.0;
};

struct CalibrationReport {
  std::vector<CalibrationRow> rows;
  double chosen_c = 0.0;
  std::vector<std::size_t> sample;  // indices into the instance list
};

struct CalibrationOptions {
  std::size_t sample_size = 10;
  std::uint64_t seed = 0;
  PolicyClass cls = PolicyClass::bounded;
  SolverOptions solver{};
  SamplingOptions sampling{};
};

/// Largest candidate c whose alternating-policy p_CLK, averaged over a seeded user sample,
/// exceeds 0.5.
CalibrationReport calibrate_c(const std::vector<Instance>& instances,
                              const std::vector<double>& candidate_cs,
                              const CalibrationOptions& options = {});

/// Same on an explicit sample; the result does not depend on the sample's order.
CalibrationReport calibrate_c_on(const std::vector<const Instance*>& sample,
                                 const std::vector<double>& candidate_cs,
                                 const CalibrationOptions& options = {});

}  // namespace harmrec
