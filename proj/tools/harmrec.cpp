#include "harmrec/baselines.hpp"
#include "harmrec/data.hpp"
#include "harmrec/experiment.hpp"
#include "harmrec/gradient.hpp"
#include "harmrec/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace harmrec;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPartial = 2;

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << csv_field(fields[i]);
    out_ << '\n';
  }
  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

 private:
  std::ofstream out_;
};

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  unsigned workers = std::max(1U, std::thread::hardware_concurrency());
  std::string policy_class = "bounded";
  std::optional<std::size_t> samples;
};

// Everything a subcommand may read from the config file, after flag overrides.
struct Settings {
  DynamicsParams params;
  SyntheticConfig synthetic;
  MfConfig mf;
  ExperimentConfig experiment;
  CalibrationOptions calibration;
  std::uint64_t seed = 0;
  ContractionMode contraction = ContractionMode::shrink;
  double spread = 0.2;
};

template <class T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void read_solver(const Json& j, SolverOptions& s) {
  read_field(j, "tol", s.tol);
  read_field(j, "max_iter", s.max_iter);
}

Settings load_settings(const Globals& g) {
  Settings s;
  Json cfg = Json::object();
  if (!g.config_path.empty()) cfg = read_json_file(g.config_path);
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  read_field(cfg, "seed", s.seed);
  if (g.seed) s.seed = *g.seed;
  if (cfg.contains("params")) s.params = params_from_json(cfg.at("params"));
  validate(s.params);

  auto& syn = s.synthetic;
  syn.params = s.params;
  if (cfg.contains("synthetic")) {
    const Json& j = cfg.at("synthetic");
    read_field(j, "n", syn.n);
    read_field(j, "h", syn.h);
    read_field(j, "d", syn.d);
    read_field(j, "users", syn.users);
    read_field(j, "item_std", syn.item_std);
    read_field(j, "user_std", syn.user_std);
    read_field(j, "spread", syn.spread);
    read_field(j, "rescale_fraction", syn.rescale_fraction);
    read_field(j, "candidate_sets", syn.candidate_sets);
    read_field(j, "candidate_size", syn.candidate_size);
  }
  syn.seed = s.seed;

  if (cfg.contains("mf")) {
    const Json& j = cfg.at("mf");
    read_field(j, "epochs", s.mf.epochs);
    read_field(j, "lr", s.mf.lr);
    read_field(j, "reg", s.mf.reg);
    read_field(j, "latent", s.mf.latent);
    read_field(j, "init_std", s.mf.init_std);
  }
  s.mf.seed = s.seed;

  auto& ex = s.experiment;
  ex.cls = parse_policy_class(g.policy_class);
  ex.workers = g.workers;
  if (cfg.contains("optimize")) {
    const Json& j = cfg.at("optimize");
    read_field(j, "max_iters", ex.optimize.max_iters);
    read_field(j, "step_init", ex.optimize.step_init);
    read_field(j, "backtrack", ex.optimize.backtrack);
    read_field(j, "max_backtracks", ex.optimize.max_backtracks);
    read_field(j, "armijo", ex.optimize.armijo);
    read_field(j, "ftol", ex.optimize.ftol);
    read_field(j, "random_starts", ex.optimize.random_starts);
  }
  ex.optimize.seed = s.seed;
  if (cfg.contains("alternating")) {
    read_field(cfg.at("alternating"), "max_steps", ex.alternating.max_steps);
    read_field(cfg.at("alternating"), "profile_tol", ex.alternating.profile_tol);
  }
  if (cfg.contains("solver")) read_solver(cfg.at("solver"), ex.eval_solver);
  if (cfg.contains("sampling")) {
    read_field(cfg.at("sampling"), "exact_cap", ex.sampling.exact_cap);
    read_field(cfg.at("sampling"), "samples", ex.sampling.samples);
  }
  if (g.samples) ex.sampling.samples = *g.samples;
  ex.sampling.seed = s.seed;
  if (cfg.contains("trajectory")) {
    read_field(cfg.at("trajectory"), "tol", ex.trajectory_tol);
    read_field(cfg.at("trajectory"), "max_steps", ex.trajectory_max_steps);
  }
  if (cfg.contains("policies")) read_field(cfg, "policies", ex.policies);
  check(ex);

  if (cfg.contains("assemble")) {
    std::string mode;
    read_field(cfg.at("assemble"), "contraction", mode);
    if (!mode.empty()) s.contraction = parse_contraction_mode(mode);
    read_field(cfg.at("assemble"), "spread", s.spread);
  }

  s.calibration.seed = s.seed;
  s.calibration.cls = ex.cls;
  s.calibration.solver = ex.eval_solver;
  s.calibration.sampling = ex.sampling;
  return s;
}

std::filesystem::path out_path(const Globals& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return std::filesystem::path(g.out_dir) / name;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("malformed grid value '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("grid is empty");
  return out;
}

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void write_compare_rows(Csv& csv, const ExperimentReport& report, const std::string& prefix_value,
                        bool with_prefix) {
  for (const auto& r : report.rows) {
    std::vector<std::string> fields;
    if (with_prefix) fields.push_back(prefix_value);
    fields.insert(fields.end(),
                  {std::to_string(r.user), r.policy, r.ok ? "ok" : "failed",
                   r.ok ? num(r.f) : "", r.ok ? num(r.p_clk) : "", r.ok ? num(r.p_h) : "",
                   r.ok ? num(r.residual) : "", r.distance ? num(*r.distance) : "", r.error});
    csv.row(fields);
  }
}

void write_summary_rows(Csv& csv, const ExperimentReport& report, const std::string& prefix_value,
                        bool with_prefix) {
  for (const auto& s : report.summaries) {
    std::vector<std::string> fields;
    if (with_prefix) fields.push_back(prefix_value);
    fields.insert(fields.end(),
                  {s.policy, std::to_string(s.count), std::to_string(s.failures), num(s.f_mean),
                   num(s.f_std), num(s.p_clk_mean), num(s.p_clk_std), num(s.p_h_mean),
                   num(s.p_h_std), s.distance_mean ? num(*s.distance_mean) : "",
                   s.distance_std ? num(*s.distance_std) : ""});
    csv.row(fields);
  }
}

const std::vector<std::string> kRowHeader{"user", "policy", "status", "f", "p_clk", "p_h",
                                          "residual", "distance", "error"};
const std::vector<std::string> kSummaryHeader{"policy", "users", "failures", "f_mean", "f_std",
                                              "p_clk_mean", "p_clk_std", "p_h_mean", "p_h_std",
                                              "distance_mean", "distance_std"};

std::vector<std::string> with_first(const std::string& first, std::vector<std::string> rest) {
  rest.insert(rest.begin(), first);
  return rest;
}

Json report_json(const std::vector<Instance>& instances, const ExperimentReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row = {{"user", r.user}, {"policy", r.policy}, {"ok", r.ok}, {"error", r.error}};
    if (r.ok) {
      row["f"] = r.f;
      row["p_clk"] = r.p_clk;
      row["p_h"] = r.p_h;
      row["u_bar"] = to_json(r.u_bar);
      row["chosen"] = to_json(instances[r.user], r.chosen);
      if (r.distance) row["distance"] = *r.distance;
    }
    rows.push_back(row);
  }
  return {{"rows", rows}, {"failures", report.failures}};
}

int finish(std::size_t failures, const std::string& what) {
  if (failures == 0) return kOk;
  std::cerr << what << ": " << failures << " failed cell(s)\n";
  return kPartial;
}

// ---- subcommands ----

int cmd_generate(const Globals& g, int users, int n, int h, int d, int k) {
  auto s = load_settings(g);
  if (users > 0) s.synthetic.users = users;
  if (n > 0) s.synthetic.n = n;
  if (h >= 0) s.synthetic.h = h;
  if (d > 0) s.synthetic.d = d;
  if (k > 0) s.synthetic.params.k = k;
  const auto instances = generate_synthetic(s.synthetic);
  const auto path = out_path(g, "instances.json");
  write_json_file(path.string(), instances_to_json(instances));
  std::cout << "wrote " << instances.size() << " instances to " << path.string() << '\n';
  return kOk;
}

int cmd_fit_mf(const Globals& g, const std::string& ratings_path, std::size_t top_items,
               std::size_t top_users) {
  const auto s = load_settings(g);
  auto table = read_ratings_csv(ratings_path);
  if (top_items > 0 || top_users > 0) {
    const auto items = table.top_items(top_items > 0 ? top_items : table.item_ids().size());
    const auto users = table.top_users(items, top_users > 0 ? top_users : table.user_ids().size());
    table = table.subset(users, items);
  }
  const auto model = fit_mf(table, s.mf);
  write_json_file(out_path(g, "mf_model.json").string(), to_json(model));
  Csv csv(out_path(g, "mf_history.csv"), {"epoch", "rmse"});
  for (std::size_t e = 0; e < model.rmse_history.size(); ++e) {
    csv.row({std::to_string(e + 1), num(model.rmse_history[e])});
  }
  std::cout << "users " << model.user_ids.size() << " items " << model.item_ids.size()
            << " ratings " << table.size() << " train rmse " << num(model.rmse) << '\n';
  return kOk;
}

int cmd_assemble(const Globals& g, const std::string& model_path, const std::string& labels_path,
                 std::size_t users, const std::string& mode) {
  auto s = load_settings(g);
  if (!mode.empty()) s.contraction = parse_contraction_mode(mode);
  const auto model = mf_model_from_json(read_json_file(model_path));
  const auto labels = read_harm_labels_csv(labels_path);
  const auto ids = users > 0 ? sample_users(model, users, s.seed) : model.user_ids;
  const auto result = assemble_instances(model, labels, ids, s.params, s.contraction, s.spread);
  std::vector<Instance> instances;
  Csv csv(out_path(g, "assemble.csv"), {"index", "user_id", "score_temperature", "condition_holds"});
  for (std::size_t i = 0; i < result.users.size(); ++i) {
    const auto& u = result.users[i];
    instances.push_back(u.instance);
    csv.row({std::to_string(i), u.user_id, num(u.score_temperature),
             contraction_condition(u.instance).holds ? "1" : "0"});
  }
  for (const auto& id : result.skipped) csv.row({"", id, "", "0"});
  if (!instances.empty()) write_json_file(out_path(g, "instances.json").string(), instances_to_json(instances));
  std::cout << "assembled " << instances.size() << " instances, skipped " << result.skipped.size() << '\n';
  return finish(result.skipped.size(), "assemble");
}

int cmd_calibrate(const Globals& g, const std::string& instances_path, const std::string& grid,
                  std::size_t sample_size) {
  auto s = load_settings(g);
  s.calibration.sample_size = sample_size;
  const auto instances = instances_from_json(read_json_file(instances_path));
  const auto report = calibrate_c(instances, parse_grid(grid), s.calibration);
  Csv csv(out_path(g, "calibration.csv"), {"c", "p_clk_alt", "p_h_alt", "p_clk_unif", "p_h_unif"});
  for (const auto& r : report.rows) {
    csv.row({num(r.c), num(r.p_clk_alt), num(r.p_h_alt), num(r.p_clk_unif), num(r.p_h_unif)});
  }
  write_json_file(out_path(g, "calibration.json").string(),
                  {{"chosen_c", report.chosen_c}, {"sample", report.sample}});
  std::cout << "chosen c = " << num(report.chosen_c) << '\n';
  return kOk;
}

int cmd_compare(const Globals& g, const std::string& instances_path, const std::string& policies,
                bool trajectories) {
  auto s = load_settings(g);
  if (!policies.empty()) s.experiment.policies = parse_list(policies);
  s.experiment.trajectories = trajectories;
  check(s.experiment);
  const auto instances = instances_from_json(read_json_file(instances_path));
  const auto report = run_compare(instances, s.experiment);
  {
    Csv rows(out_path(g, "compare.csv"), kRowHeader);
    write_compare_rows(rows, report, "", false);
    rows.comment("failures " + std::to_string(report.failures));
  }
  {
    Csv summary(out_path(g, "compare_summary.csv"), kSummaryHeader);
    write_summary_rows(summary, report, "", false);
    summary.comment("failures " + std::to_string(report.failures));
  }
  {
    Csv diffs(out_path(g, "compare_diffs.csv"), {"other", "user_rank", "f_grad_minus_other"});
    for (const auto& d : grad_differences(report)) {
      for (std::size_t i = 0; i < d.values.size(); ++i) diffs.row({d.other, std::to_string(i), num(d.values[i])});
    }
  }
  write_json_file(out_path(g, "compare.json").string(), report_json(instances, report));
  for (const auto& sm : report.summaries) {
    std::cout << sm.policy << ": f " << num(sm.f_mean) << " +- " << num(sm.f_std) << ", p_clk "
              << num(sm.p_clk_mean) << ", p_h " << num(sm.p_h_mean) << '\n';
  }
  return finish(report.failures, "compare");
}

int cmd_sweep(const Globals& g, const std::string& instances_path, const std::string& axis_name,
              const std::string& grid, const std::string& k_mode, const std::string& policies) {
  auto s = load_settings(g);
  if (!policies.empty()) s.experiment.policies = parse_list(policies);
  check(s.experiment);
  const auto axis = parse_sweep_axis(axis_name);
  const auto mode = parse_k_mode(k_mode);
  const auto instances = instances_from_json(read_json_file(instances_path));
  const auto points = run_sweep(instances, axis, parse_grid(grid), s.experiment, mode);
  std::size_t failures = 0;
  Csv rows(out_path(g, "sweep.csv"), with_first(to_string(axis), kRowHeader));
  Csv summary(out_path(g, "sweep_summary.csv"), with_first(to_string(axis), kSummaryHeader));
  for (const auto& p : points) {
    write_compare_rows(rows, p.report, num(p.value), true);
    write_summary_rows(summary, p.report, num(p.value), true);
    failures += p.report.failures;
  }
  rows.comment("failures " + std::to_string(failures));
  summary.comment("failures " + std::to_string(failures));
  return finish(failures, "sweep");
}

int cmd_convergence(const Globals& g, const std::string& instances_path, const std::string& policies) {
  auto s = load_settings(g);
  if (!policies.empty()) s.experiment.policies = parse_list(policies);
  s.experiment.trajectories = true;
  check(s.experiment);
  const auto instances = instances_from_json(read_json_file(instances_path));
  const auto report = run_compare(instances, s.experiment);
  Csv csv(out_path(g, "convergence.csv"), {"user", "policy", "status", "distance", "steps", "error"});
  for (const auto& r : report.rows) {
    csv.row({std::to_string(r.user), r.policy, r.ok ? "ok" : "failed",
             r.distance ? num(*r.distance) : "",
             r.trajectory_steps ? std::to_string(*r.trajectory_steps) : "", r.error});
  }
  csv.comment("failures " + std::to_string(report.failures));
  for (const auto& sm : report.summaries) {
    if (sm.distance_mean) {
      std::cout << sm.policy << ": distance " << num(*sm.distance_mean) << " +- "
                << num(*sm.distance_std) << '\n';
    }
  }
  return finish(report.failures, "convergence");
}

int cmd_counterexample(const Globals& g, CounterexampleParams params, const std::string& lambdas) {
  const auto s = load_settings(g);
  const auto report = run_counterexample(params, parse_grid(lambdas), s.experiment);
  Csv csv(out_path(g, "counterexample.csv"),
          {"lambda", "f_alt", "p_clk_alt", "p_h_alt", "f_grad", "p_clk_grad", "p_h_grad", "gap"});
  Json rows = Json::array();
  const Instance inst = alternating_counterexample(params);
  for (const auto& r : report.rows) {
    csv.row({num(r.lambda), num(r.f_alt), num(r.p_clk_alt), num(r.p_h_alt), num(r.f_grad),
             num(r.p_clk_grad), num(r.p_h_grad), num(r.gap)});
    rows.push_back({{"lambda", r.lambda},
                    {"alt_policy", to_json(inst, r.alt_policy)},
                    {"grad_policy", to_json(inst, r.grad_policy)}});
  }
  write_json_file(out_path(g, "counterexample.json").string(),
                  {{"instance", to_json(inst)},
                   {"slope", report.slope},
                   {"intercept", report.intercept},
                   {"r2", report.r2},
                   {"alt_policy_constant", report.alt_policy_constant},
                   {"rows", rows}});
  std::cout << "gap slope " << num(report.slope) << " r2 " << num(report.r2)
            << " alt policy constant " << (report.alt_policy_constant ? "yes" : "no") << '\n';
  return kOk;
}

int cmd_grad_check(const Globals& g, const std::string& instances_path, const std::string& which,
                   double rel_step, double tolerance) {
  const auto s = load_settings(g);
  const auto instances = instances_from_json(read_json_file(instances_path));
  const auto cls = s.experiment.cls;
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Csv csv(out_path(g, "grad_check.csv"), {"user", "status", "fd_max_rel_err", "objective", "rcond", "error"});
  Json reports = Json::array();
  std::size_t failures = 0;
  for (std::size_t u = 0; u < instances.size(); ++u) {
    const auto& inst = instances[u];
    Policy policy;
    if (which == "uniform") {
      policy = uniform_policy(inst, cls);
    } else if (which == "u0") {
      policy = static_optimal_policy(inst, cls);
    } else if (which == "random") {
      const PolicySpace space(inst, cls);
      Vector x(space.dimension());
      for (Index i = 0; i < x.size(); ++i) x(i) = unif(rng);
      policy = Policy{cls, space.project(x)};
    } else {
      throw ConfigError("unknown policy '" + which + "' (uniform, u0 or random)");
    }
    try {
      const auto report = gradient_check(inst, policy, s.experiment.eval_solver, s.experiment.sampling, rel_step);
      const bool pass = *report.fd_max_rel_err <= tolerance;
      if (!pass) ++failures;
      csv.row({std::to_string(u), pass ? "ok" : "exceeds", num(*report.fd_max_rel_err),
               num(report.objective), num(report.rcond), ""});
      Json j = to_json(report);
      j["user"] = u;
      j["policy"] = to_json(inst, policy);
      reports.push_back(j);
    } catch (const NumericError& e) {
      ++failures;
      csv.row({std::to_string(u), "failed", "", "", "", e.what()});
    }
  }
  csv.comment("failures " + std::to_string(failures));
  write_json_file(out_path(g, "grad_check.json").string(), {{"tolerance", tolerance}, {"reports", reports}});
  return finish(failures, "grad-check");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harm-aware recommendation under preference dynamics"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--out-dir", g.out_dir, "Directory for outputs");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--policy-class", g.policy_class, "bounded or independent")
      ->check(CLI::IsMember({"bounded", "independent"}));
  app.add_option("--samples", g.samples, "Monte-Carlo samples for independent sampling")
      ->check(CLI::PositiveNumber);

  int users = 0, n = 0, h = -1, d = 0, k = 0;
  auto* generate = app.add_subcommand("generate", "Generate synthetic instances");
  generate->add_option("--users", users);
  generate->add_option("--items", n);
  generate->add_option("--harmful", h);
  generate->add_option("--dim", d);
  generate->add_option("--k", k);

  std::string ratings;
  std::size_t top_items = 0, top_users = 0;
  auto* fit = app.add_subcommand("fit-mf", "Fit matrix factorization to a ratings CSV");
  fit->add_option("--ratings", ratings)->required()->check(CLI::ExistingFile);
  fit->add_option("--top-items", top_items, "Keep the most rated items (0 = all)");
  fit->add_option("--top-users", top_users, "Keep the most active users on those items (0 = all)");

  std::string model, labels, contraction;
  std::size_t assemble_users = 0;
  auto* assemble = app.add_subcommand("assemble", "Build per-user instances from a fitted model");
  assemble->add_option("--model", model)->required()->check(CLI::ExistingFile);
  assemble->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
  assemble->add_option("--users", assemble_users, "Users sampled by seed (0 = all)");
  assemble->add_option("--contraction", contraction, "shrink or rescale");

  std::string instances, grid = "1,2,3,5,10,20";
  std::size_t sample_size = 10;
  auto* calibrate = app.add_subcommand("calibrate-c", "Pick c from a grid");
  calibrate->add_option("--instances", instances)->required()->check(CLI::ExistingFile);
  calibrate->add_option("--grid", grid, "Ascending comma-separated c values");
  calibrate->add_option("--sample", sample_size, "Users in the calibration sample");

  std::string policies;
  bool trajectories = false;
  auto* compare = app.add_subcommand("compare", "Compare grad, alt, u0 and unif policies");
  compare->add_option("--instances", instances)->required()->check(CLI::ExistingFile);
  compare->add_option("--policies", policies, "Comma-separated subset of grad,alt,u0,unif");
  compare->add_flag("--trajectories", trajectories, "Also simulate the dynamics from u0");

  std::string axis, sweep_grid, k_mode = "fixed-c";
  auto* sweep = app.add_subcommand("sweep", "Re-run the comparison over a parameter grid");
  sweep->add_option("--instances", instances)->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis)->required()->check(
      CLI::IsMember({"lambda", "beta", "c", "alpha_ratio", "k"}));
  sweep->add_option("--grid", sweep_grid)->required();
  sweep->add_option("--k-mode", k_mode, "fixed-c or fixed-ratio");
  sweep->add_option("--policies", policies);

  auto* convergence = app.add_subcommand("convergence", "Distance between simulated limit and fixed point");
  convergence->add_option("--instances", instances)->required()->check(CLI::ExistingFile);
  convergence->add_option("--policies", policies);

  CounterexampleParams cx;
  std::optional<double> cx_c;
  std::string lambdas = "10,100,1000,10000";
  auto* counter = app.add_subcommand("counterexample", "Alternating optimization versus grad on the three-item construction");
  counter->add_option("--b1", cx.b1);
  counter->add_option("--b2", cx.b2);
  counter->add_option("--c", cx_c, "Default: g(s_v1) = 0.8 at u0");
  counter->add_option("--alpha", cx.alpha);
  counter->add_option("--lambdas", lambdas);

  std::string which = "uniform";
  double rel_step = 1e-5, tolerance = 1e-4;
  auto* gcheck = app.add_subcommand("grad-check", "Analytic gradient versus finite differences");
  gcheck->add_option("--instances", instances)->required()->check(CLI::ExistingFile);
  gcheck->add_option("--policy", which, "uniform, u0 or random");
  gcheck->add_option("--rel-step", rel_step);
  gcheck->add_option("--tolerance", tolerance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*generate) return cmd_generate(g, users, n, h, d, k);
    if (*fit) return cmd_fit_mf(g, ratings, top_items, top_users);
    if (*assemble) return cmd_assemble(g, model, labels, assemble_users, contraction);
    if (*calibrate) return cmd_calibrate(g, instances, grid, sample_size);
    if (*compare) return cmd_compare(g, instances, policies, trajectories);
    if (*sweep) return cmd_sweep(g, instances, axis, sweep_grid, k_mode, policies);
    if (*convergence) return cmd_convergence(g, instances, policies);
    if (*counter) {
      cx.c = cx_c;
      return cmd_counterexample(g, cx, lambdas);
    }
    if (*gcheck) return cmd_grad_check(g, instances, which, rel_step, tolerance);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPartial;
  }
  return kOk;
}
