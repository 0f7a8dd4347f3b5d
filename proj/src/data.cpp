#include "harmrec/data.hpp"

#include "harmrec/baselines.hpp"
#include "harmrec/choice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace harmrec {

namespace {

double contraction_ratio(const Instance& inst) {
  const auto& p = inst.params;
  return 12.0 * (p.alpha_nh + p.beta) /
         (5.0 * static_cast<double>(inst.num_items()) * static_cast<double>(inst.dimension()) *
          p.alpha_h);
}

}  // namespace

double enforce_contraction(Instance& inst, double spread, double rescale_fraction) {
  if (!(spread > 0.0 && spread < 1.0)) throw ConfigError("spread must lie in (0, 1)");
  if (inst.params.alpha_h == 0.0) return 1.0;
  double factor = 1.0;
  const double delta = inst.catalog.items.colwise().norm().maxCoeff();
  const double product = delta * inst.u0.norm();
  const double limit = spread * contraction_ratio(inst) / 12.0;
  if (product > limit) {
    factor = limit / product;
    inst.u0 *= factor;
  }
  inst = rescale_to_contraction(inst, rescale_fraction).instance;
  return factor;
}

std::vector<Instance> generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n < 1 || cfg.d < 1 || cfg.users < 1) throw ConfigError("n, d and users must be positive");
  if (cfg.h < 0 || cfg.h >= cfg.n) throw ConfigError("need 0 <= h < n");
  if (!(cfg.item_std > 0.0) || !(cfg.user_std > 0.0)) throw ConfigError("std devs must be positive");
  validate(cfg.params);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix items(cfg.d, cfg.n);
  for (Index j = 0; j < items.cols(); ++j) {
    for (Index i = 0; i < items.rows(); ++i) items(i, j) = cfg.item_std * gauss(rng);
  }
  std::vector<int> order(static_cast<std::size_t>(cfg.n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> harmful(order.begin(), order.begin() + cfg.h);
  std::sort(harmful.begin(), harmful.end());
  ItemCatalog catalog(items, harmful);

  CandidateCollection candidates;
  if (cfg.candidate_sets == 0) {
    candidates = full_catalog_candidates(catalog);
  } else {
    ItemSet safe;
    for (int v = 0; v < cfg.n; ++v) {
      if (!catalog.is_harmful[static_cast<std::size_t>(v)]) safe.push_back(v);
    }
    if (cfg.candidate_sets < 0 || cfg.candidate_size < 1 ||
        cfg.candidate_size > static_cast<int>(safe.size())) {
      throw ConfigError("candidate_size must lie in [1, n - h]");
    }
    for (int m = 0; m < cfg.candidate_sets; ++m) {
      ItemSet pool = safe;
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(static_cast<std::size_t>(cfg.candidate_size));
      std::sort(pool.begin(), pool.end());
      candidates.sets.push_back(pool);
      candidates.probs.push_back(1.0 / cfg.candidate_sets);
    }
  }

  std::vector<Instance> out;
  for (int user = 0; user < cfg.users; ++user) {
    Instance inst;
    inst.catalog = catalog;
    inst.candidates = candidates;
    inst.params = cfg.params;
    inst.u0 = Vector(cfg.d);
    for (Index i = 0; i < cfg.d; ++i) inst.u0(i) = cfg.user_std * gauss(rng);
    enforce_contraction(inst, cfg.spread, cfg.rescale_fraction);
    validate(inst);
    out.push_back(std::move(inst));
  }
  return out;
}

// ---- ratings ----

void RatingsTable::add(const std::string& user_id, const std::string& item_id, double rating) {
  if (!std::isfinite(rating)) throw ConfigError("rating for (" + user_id + ", " + item_id + ") is not finite");
  auto [uit, unew] = user_index_.try_emplace(user_id, static_cast<int>(user_ids_.size()));
  if (unew) user_ids_.push_back(user_id);
  auto [iit, inew] = item_index_.try_emplace(item_id, static_cast<int>(item_ids_.size()));
  if (inew) item_ids_.push_back(item_id);
  const auto key = std::make_pair(uit->second, iit->second);
  if (!seen_.emplace(key, ratings_.size()).second) {
    throw ConfigError("duplicate rating for user " + user_id + ", item " + item_id);
  }
  ratings_.push_back({uit->second, iit->second, rating});
}

std::vector<std::string> RatingsTable::top_items(std::size_t count) const {
  std::vector<std::size_t> counts(item_ids_.size(), 0);
  for (const auto& r : ratings_) ++counts[static_cast<std::size_t>(r.item)];
  std::vector<std::size_t> order(item_ids_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  order.resize(std::min(count, order.size()));
  std::vector<std::string> out;
  for (auto i : order) out.push_back(item_ids_[i]);
  return out;
}

std::vector<std::string> RatingsTable::top_users(const std::vector<std::string>& items,
                                                 std::size_t count) const {
  std::vector<bool> chosen(item_ids_.size(), false);
  for (const auto& id : items) {
    const auto it = item_index_.find(id);
    if (it != item_index_.end()) chosen[static_cast<std::size_t>(it->second)] = true;
  }
  std::vector<std::size_t> counts(user_ids_.size(), 0);
  for (const auto& r : ratings_) {
    if (chosen[static_cast<std::size_t>(r.item)]) ++counts[static_cast<std::size_t>(r.user)];
  }
  std::vector<std::size_t> order(user_ids_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  std::vector<std::string> out;
  for (auto u : order) {
    if (out.size() == count || counts[u] == 0) break;
    out.push_back(user_ids_[u]);
  }
  return out;
}

RatingsTable RatingsTable::subset(const std::vector<std::string>& users,
                                  const std::vector<std::string>& items) const {
  std::vector<bool> keep_user(user_ids_.size(), false);
  std::vector<bool> keep_item(item_ids_.size(), false);
  for (const auto& id : users) {
    const auto it = user_index_.find(id);
    if (it != user_index_.end()) keep_user[static_cast<std::size_t>(it->second)] = true;
  }
  for (const auto& id : items) {
    const auto it = item_index_.find(id);
    if (it != item_index_.end()) keep_item[static_cast<std::size_t>(it->second)] = true;
  }
  RatingsTable out;
  for (const auto& r : ratings_) {
    if (keep_user[static_cast<std::size_t>(r.user)] && keep_item[static_cast<std::size_t>(r.item)]) {
      out.add(user_ids_[static_cast<std::size_t>(r.user)], item_ids_[static_cast<std::size_t>(r.item)],
              r.value);
    }
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// Reads a CSV with the expected header and calls `row` for every non-empty data line.
template <class RowFn>
void read_csv(std::istream& in, const std::vector<std::string>& header, RowFn&& row) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV input");
  if (split_csv_line(line) != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw ConfigError("CSV header must be '" + expected + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    try {
      row(fields);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::out_of_range& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

}  // namespace

RatingsTable read_ratings_csv(std::istream& in) {
  RatingsTable table;
  read_csv(in, {"user_id", "item_id", "rating"}, [&](const std::vector<std::string>& f) {
    std::size_t used = 0;
    const double value = std::stod(f[2], &used);
    if (used != f[2].size()) throw ConfigError("malformed rating '" + f[2] + "'");
    table.add(f[0], f[1], value);
  });
  return table;
}

RatingsTable read_ratings_csv(const std::string& path) {
  auto in = open_input(path);
  return read_ratings_csv(in);
}

std::unordered_map<std::string, bool> read_harm_labels_csv(std::istream& in) {
  std::unordered_map<std::string, bool> labels;
  read_csv(in, {"item_id", "harmful"}, [&](const std::vector<std::string>& f) {
    if (f[1] != "0" && f[1] != "1") throw ConfigError("harmful must be 0 or 1");
    if (!labels.emplace(f[0], f[1] == "1").second) {
      throw ConfigError("duplicate label for item " + f[0]);
    }
  });
  return labels;
}

std::unordered_map<std::string, bool> read_harm_labels_csv(const std::string& path) {
  auto in = open_input(path);
  return read_harm_labels_csv(in);
}

// ---- matrix factorization ----

double MfModel::predict(int user, int item) const {
  return global_mean + user_bias(user) + item_bias(item) +
         user_factors.row(user).dot(item_factors.row(item));
}

Vector MfModel::item_embedding(int item) const {
  Vector e(latent() + 2);
  e.head(latent()) = item_factors.row(item).transpose();
  e(latent()) = item_bias(item);
  e(latent() + 1) = 1.0;
  return e;
}

Vector MfModel::user_embedding(int user) const {
  Vector e(latent() + 2);
  e.head(latent()) = user_factors.row(user).transpose();
  e(latent()) = 1.0;
  e(latent() + 1) = user_bias(user) + global_mean;
  return e;
}

MfModel fit_mf(const RatingsTable& table, const MfConfig& cfg) {
  if (table.size() == 0) throw ConfigError("cannot fit a model to an empty ratings table");
  if (cfg.epochs < 0 || cfg.latent < 1) throw ConfigError("epochs >= 0 and latent >= 1 required");
  if (!(cfg.lr > 0.0) || !(cfg.reg >= 0.0)) throw ConfigError("lr > 0 and reg >= 0 required");
  const auto n_users = static_cast<Index>(table.user_ids().size());
  const auto n_items = static_cast<Index>(table.item_ids().size());
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, cfg.init_std);

  MfModel m;
  m.user_ids = table.user_ids();
  m.item_ids = table.item_ids();
  m.user_factors.resize(n_users, cfg.latent);
  m.item_factors.resize(n_items, cfg.latent);
  for (Index i = 0; i < m.user_factors.size(); ++i) m.user_factors.data()[i] = gauss(rng);
  for (Index i = 0; i < m.item_factors.size(); ++i) m.item_factors.data()[i] = gauss(rng);
  m.user_bias = Vector::Zero(n_users);
  m.item_bias = Vector::Zero(n_items);
  const auto& ratings = table.ratings();
  for (const auto& r : ratings) m.global_mean += r.value;
  m.global_mean /= static_cast<double>(ratings.size());

  auto rmse = [&] {
    double sse = 0.0;
    for (const auto& r : ratings) {
      const double e = r.value - m.predict(r.user, r.item);
      sse += e * e;
    }
    return std::sqrt(sse / static_cast<double>(ratings.size()));
  };

  std::vector<std::size_t> order(ratings.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto idx : order) {
      const auto& r = ratings[idx];
      const double e = r.value - m.predict(r.user, r.item);
      m.user_bias(r.user) += cfg.lr * (e - cfg.reg * m.user_bias(r.user));
      m.item_bias(r.item) += cfg.lr * (e - cfg.reg * m.item_bias(r.item));
      const Eigen::RowVectorXd p = m.user_factors.row(r.user);
      m.user_factors.row(r.user) += cfg.lr * (e * m.item_factors.row(r.item) - cfg.reg * p);
      m.item_factors.row(r.item) += cfg.lr * (e * p - cfg.reg * m.item_factors.row(r.item));
    }
    m.rmse_history.push_back(rmse());
  }
  m.rmse = rmse();
  return m;
}

// ---- assembly ----

ContractionMode parse_contraction_mode(const std::string& name) {
  if (name == "shrink") return ContractionMode::shrink;
  if (name == "rescale") return ContractionMode::rescale;
  throw ConfigError("unknown contraction mode '" + name + "'");
}

AssembleResult assemble_instances(const MfModel& model,
                                  const std::unordered_map<std::string, bool>& labels,
                                  const std::vector<std::string>& users,
                                  const DynamicsParams& params, ContractionMode mode,
                                  double spread) {
  validate(params);
  std::string missing;
  std::vector<int> harmful;
  for (std::size_t i = 0; i < model.item_ids.size(); ++i) {
    const auto it = labels.find(model.item_ids[i]);
    if (it == labels.end()) {
      missing += (missing.empty() ? "" : ", ") + model.item_ids[i];
    } else if (it->second) {
      harmful.push_back(static_cast<int>(i));
    }
  }
  if (!missing.empty()) throw ConfigError("harm labels missing for items: " + missing);

  std::unordered_map<std::string, int> user_index;
  for (std::size_t u = 0; u < model.user_ids.size(); ++u) {
    user_index.emplace(model.user_ids[u], static_cast<int>(u));
  }
  Matrix items(model.latent() + 2, static_cast<Index>(model.item_ids.size()));
  for (Index i = 0; i < items.cols(); ++i) items.col(i) = model.item_embedding(static_cast<int>(i));
  ItemCatalog catalog(items, harmful);
  const auto candidates = full_catalog_candidates(catalog);

  AssembleResult out;
  for (const auto& id : users) {
    const auto it = user_index.find(id);
    if (it == user_index.end()) throw ConfigError("unknown user " + id);
    Instance inst;
    inst.catalog = catalog;
    inst.candidates = candidates;
    inst.params = params;
    inst.u0 = model.user_embedding(it->second);
    double temperature = 1.0;
    if (mode == ContractionMode::shrink) {
      temperature = enforce_contraction(inst, spread);
    } else if (contraction_attainable(inst)) {
      inst = rescale_to_contraction(inst).instance;
    } else {
      out.skipped.push_back(id);
      continue;
    }
    validate(inst);
    out.users.push_back({id, std::move(inst), temperature});
  }
  return out;
}

std::vector<std::string> sample_users(const MfModel& model, std::size_t count, std::uint64_t seed) {
  if (count > model.user_ids.size()) throw ConfigError("more users requested than the model has");
  std::vector<std::size_t> order(model.user_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(model.user_ids[order[i]]);
  return out;
}

// ---- c calibration ----

namespace {

// Order-independent mean: sum the sorted values.
double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

CalibrationReport calibrate_c_on(const std::vector<const Instance*>& sample,
                                 const std::vector<double>& cs, const CalibrationOptions& opts) {
  if (cs.empty()) throw ConfigError("candidate c grid is empty");
  if (sample.empty()) throw ConfigError("calibration sample is empty");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!(cs[i] > 0.0)) throw ConfigError("candidate c values must be positive");
    if (i > 0 && !(cs[i] > cs[i - 1])) throw ConfigError("candidate c values must be ascending");
  }
  AlternatingOptions alt_opts;
  alt_opts.solver = opts.solver;
  alt_opts.sampling = opts.sampling;

  CalibrationReport report;
  bool found = false;
  for (double c : cs) {
    std::vector<double> clk_alt, h_alt, clk_unif, h_unif;
    for (const Instance* base : sample) {
      Instance inst = *base;
      inst.params.c = c;
      const auto alt = alternating_optimization(inst, opts.cls, alt_opts);
      const auto& last = alt.trace.steps.back();
      const auto ch_alt = click_and_harm_probs(inst, alt.policy, last.profile, opts.sampling);
      const Policy unif = uniform_policy(inst, opts.cls);
      const auto st = solve_stationary(inst, unif, std::nullopt, opts.solver, opts.sampling);
      const auto ch_unif = click_and_harm_probs(inst, unif, st.u_bar, opts.sampling);
      clk_alt.push_back(ch_alt.p_clk);
      h_alt.push_back(ch_alt.p_h);
      clk_unif.push_back(ch_unif.p_clk);
      h_unif.push_back(ch_unif.p_h);
    }
    CalibrationRow row{c, sorted_mean(clk_alt), sorted_mean(h_alt), sorted_mean(clk_unif),
                       sorted_mean(h_unif)};
    if (row.p_clk_alt > 0.5) {
      report.chosen_c = c;
      found = true;
    }
    report.rows.push_back(row);
  }
  if (!found) {
    throw ConfigError("no candidate c keeps the alternating click probability above 0.5; "
                      "extend the grid towards smaller c");
  }
  return report;
}

CalibrationReport calibrate_c(const std::vector<Instance>& instances, const std::vector<double>& cs,
                              const CalibrationOptions& opts) {
  if (instances.empty()) throw ConfigError("no instances to calibrate on");
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opts.seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(opts.sample_size, order.size()));
  std::sort(order.begin(), order.end());
  std::vector<const Instance*> sample;
  for (auto i : order) sample.push_back(&instances[i]);
  auto report = calibrate_c_on(sample, cs, opts);
  report.sample = order;
  return report;
}

}  // namespace harmrec
