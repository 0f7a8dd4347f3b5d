#include "harmrec/io.hpp"

#include <algorithm>
#include <fstream>

namespace harmrec {

namespace {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
void maybe(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = field<T>(j, key);
}

}  // namespace

Json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers");
  std::vector<double> values;
  try {
    values = j.get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("expected an array of numbers: ") + e.what());
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Json to_json(const DynamicsParams& p) {
  return {{"alpha_h", p.alpha_h}, {"alpha_nh", p.alpha_nh}, {"beta", p.beta},
          {"c", p.c},             {"lambda", p.lambda},     {"k", p.k}};
}

DynamicsParams params_from_json(const Json& j, DynamicsParams p) {
  if (!j.is_object()) throw ConfigError("params must be an object");
  maybe(j, "alpha_h", p.alpha_h);
  maybe(j, "alpha_nh", p.alpha_nh);
  maybe(j, "beta", p.beta);
  maybe(j, "c", p.c);
  maybe(j, "lambda", p.lambda);
  maybe(j, "k", p.k);
  return p;
}

Json to_json(const Instance& inst) {
  Json items = Json::array();
  for (Index v = 0; v < inst.num_items(); ++v) items.push_back(to_json(Vector(inst.catalog.items.col(v))));
  Json sets = Json::array();
  for (std::size_t i = 0; i < inst.candidates.size(); ++i) {
    sets.push_back({{"items", inst.candidates.sets[i]}, {"prob", inst.candidates.probs[i]}});
  }
  return {{"dimension", inst.dimension()},
          {"items", items},
          {"harmful", inst.catalog.harmful},
          {"candidate_sets", sets},
          {"params", to_json(inst.params)},
          {"u0", to_json(inst.u0)}};
}

Instance instance_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("instance must be an object");
  const auto d = field<Index>(j, "dimension");
  if (d < 1) throw ConfigError("dimension must be positive");
  const Json& items = j.at("items");
  if (!items.is_array() || items.empty()) throw ConfigError("items must be a non-empty array");
  Matrix profiles(d, static_cast<Index>(items.size()));
  for (std::size_t v = 0; v < items.size(); ++v) {
    const Vector col = vector_from_json(items[v]);
    if (col.size() != d) throw ConfigError("item " + std::to_string(v) + " has the wrong dimension");
    profiles.col(static_cast<Index>(v)) = col;
  }
  Instance inst;
  inst.catalog = ItemCatalog(profiles, field<std::vector<int>>(j, "harmful"));
  if (j.contains("candidate_sets")) {
    for (const auto& set : j.at("candidate_sets")) {
      inst.candidates.sets.push_back(field<ItemSet>(set, "items"));
      inst.candidates.probs.push_back(field<double>(set, "prob"));
    }
  } else {
    inst.candidates = full_catalog_candidates(inst.catalog);
  }
  inst.params = j.contains("params") ? params_from_json(j.at("params")) : DynamicsParams{};
  inst.u0 = vector_from_json(j.at("u0"));
  validate(inst);
  return inst;
}

std::vector<Instance> instances_from_json(const Json& j) {
  std::vector<Instance> out;
  if (j.is_object() && j.contains("instances")) {
    std::size_t i = 0;
    for (const auto& inst : j.at("instances")) {
      try {
        out.push_back(instance_from_json(inst));
      } catch (const ConfigError& e) {
        throw ConfigError("instance " + std::to_string(i) + ": " + e.what());
      }
      ++i;
    }
  } else {
    out.push_back(instance_from_json(j));
  }
  if (out.empty()) throw ConfigError("no instances");
  return out;
}

Json instances_to_json(const std::vector<Instance>& instances) {
  Json list = Json::array();
  for (const auto& inst : instances) list.push_back(to_json(inst));
  return {{"instances", list}};
}

Json to_json(const Instance& inst, const Policy& policy) {
  const PolicySpace space(inst, policy.cls);
  space.check(policy.params, 1e-6);
  Json blocks = Json::object();
  for (std::size_t b = 0; b < space.num_blocks(); ++b) {
    Json entries = Json::array();
    for (Index i = 0; i < space.block_size(b); ++i) {
      const double value = policy.params(space.offset(b) + i);
      if (policy.cls == PolicyClass::bounded) {
        entries.push_back({{"items", space.subsets(b)[static_cast<std::size_t>(i)]}, {"prob", value}});
      } else {
        entries.push_back({{"item", space.candidates(b)[static_cast<std::size_t>(i)]}, {"rho", value}});
      }
    }
    blocks[std::to_string(b)] = entries;
  }
  return {{"class", to_string(policy.cls)}, {"k", space.budget()}, {"blocks", blocks}};
}

Policy policy_from_json(const Instance& inst, const Json& j) {
  Policy policy;
  policy.cls = parse_policy_class(field<std::string>(j, "class"));
  const PolicySpace space(inst, policy.cls);
  policy.params = Vector::Zero(space.dimension());
  const Json& blocks = j.at("blocks");
  for (std::size_t b = 0; b < space.num_blocks(); ++b) {
    const auto key = std::to_string(b);
    if (!blocks.contains(key)) continue;
    for (const auto& entry : blocks.at(key)) {
      if (policy.cls == PolicyClass::bounded) {
        const auto items = field<ItemSet>(entry, "items");
        const auto& subsets = space.subsets(b);
        const auto it = std::find(subsets.begin(), subsets.end(), items);
        if (it == subsets.end()) throw ConfigError("block " + key + ": set is not in D_C");
        policy.params(space.offset(b) + std::distance(subsets.begin(), it)) = field<double>(entry, "prob");
      } else {
        const int item = field<int>(entry, "item");
        const auto& cand = space.candidates(b);
        const auto it = std::find(cand.begin(), cand.end(), item);
        if (it == cand.end()) throw ConfigError("block " + key + ": item is not a candidate");
        policy.params(space.offset(b) + std::distance(cand.begin(), it)) = field<double>(entry, "rho");
      }
    }
  }
  space.check(policy.params, 1e-6);
  return policy;
}

Json to_json(const StationaryResult& r) {
  Json iterates = Json::array();
  for (const auto& u : r.iterates) iterates.push_back(to_json(u));
  Json j = {{"u_bar", to_json(r.u_bar)},     {"residual", r.residual},
            {"iterations", r.iterations},    {"converged", r.converged},
            {"condition_holds", r.condition_holds}, {"iterates", iterates}};
  j["lipschitz_bound"] = r.lipschitz_bound ? Json(*r.lipschitz_bound) : Json(nullptr);
  return j;
}

Json to_json(const Trajectory& t) {
  Json profiles = Json::array();
  for (const auto& u : t.profiles) profiles.push_back(to_json(u));
  return {{"profiles", profiles},
          {"converged_at", t.converged_at ? Json(*t.converged_at) : Json(nullptr)}};
}

namespace {

Json matrix_rows(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
  return rows;
}

Matrix matrix_from_rows(const Json& j, Index cols) {
  Matrix m(static_cast<Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector row = vector_from_json(j[i]);
    if (row.size() != cols) throw ConfigError("ragged matrix");
    m.row(static_cast<Index>(i)) = row.transpose();
  }
  return m;
}

}  // namespace

Json to_json(const GradientReport& r) {
  Json j = {{"u_bar", to_json(r.u_bar)},   {"objective", r.objective},
            {"p_clk", r.p_clk},            {"p_h", r.p_h},
            {"grad_f", to_json(r.grad_f)}, {"jac_ubar", matrix_rows(r.jac_ubar)},
            {"grad_u_F", matrix_rows(r.grad_u_F)}, {"grad_pi_F", matrix_rows(r.grad_pi_F)},
            {"rcond", r.rcond}};
  j["fd_max_rel_err"] = r.fd_max_rel_err ? Json(*r.fd_max_rel_err) : Json(nullptr);
  return j;
}

Json to_json(const Instance& inst, const StartOutcome& o) {
  Json trace = Json::array();
  for (const auto& t : o.trace) {
    trace.push_back({{"iteration", t.iteration}, {"objective", t.objective}, {"step", t.step},
                     {"proj_grad_norm", t.proj_grad_norm}});
  }
  Json j = {{"label", o.label}, {"failed", o.failed}, {"diagnostic", o.diagnostic},
            {"objective", o.objective}, {"trace", trace}};
  j["policy"] = o.failed ? Json(nullptr) : to_json(inst, o.policy);
  j["u_bar"] = o.failed ? Json(nullptr) : to_json(o.u_bar);
  return j;
}

Json to_json(const Instance& inst, const OptimizeResult& r) {
  Json starts = Json::array();
  for (const auto& s : r.starts) starts.push_back(to_json(inst, s));
  return {{"objective", r.objective}, {"best_start", r.starts[r.best_start].label},
          {"policy", to_json(inst, r.policy)}, {"u_bar", to_json(r.u_bar)}, {"starts", starts}};
}

Json to_json(const MfModel& m) {
  return {{"user_ids", m.user_ids},
          {"item_ids", m.item_ids},
          {"user_factors", matrix_rows(m.user_factors)},
          {"item_factors", matrix_rows(m.item_factors)},
          {"user_bias", to_json(m.user_bias)},
          {"item_bias", to_json(m.item_bias)},
          {"global_mean", m.global_mean},
          {"rmse", m.rmse},
          {"rmse_history", m.rmse_history}};
}

MfModel mf_model_from_json(const Json& j) {
  MfModel m;
  m.user_ids = field<std::vector<std::string>>(j, "user_ids");
  m.item_ids = field<std::vector<std::string>>(j, "item_ids");
  const Json& uf = j.at("user_factors");
  const Json& itf = j.at("item_factors");
  if (uf.empty() || itf.empty()) throw ConfigError("model has no factors");
  const auto latent = static_cast<Index>(uf[0].size());
  m.user_factors = matrix_from_rows(uf, latent);
  m.item_factors = matrix_from_rows(itf, latent);
  m.user_bias = vector_from_json(j.at("user_bias"));
  m.item_bias = vector_from_json(j.at("item_bias"));
  m.global_mean = field<double>(j, "global_mean");
  maybe(j, "rmse", m.rmse);
  maybe(j, "rmse_history", m.rmse_history);
  if (m.user_factors.rows() != static_cast<Index>(m.user_ids.size()) ||
      m.item_factors.rows() != static_cast<Index>(m.item_ids.size()) ||
      m.user_bias.size() != m.user_factors.rows() || m.item_bias.size() != m.item_factors.rows()) {
    throw ConfigError("model arrays disagree in size");
  }
  return m;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace harmrec
