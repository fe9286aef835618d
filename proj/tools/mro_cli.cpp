// Command line front end: clustering, solving, sweeps, oracle queries, and
// guarantee checks over the experiment generators or user-supplied JSON files.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mro/dataset_io.hpp"
#include "mro/experiments.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// timing fields are kept out of the JSON so repeated runs emit identical bytes
nlohmann::json solution_json(const mro::Solution& sol) {
  nlohmann::json j;
  j["status"] = mro::solve_status_name(sol.status);
  j["objective"] = sol.objective;
  j["x"] = vec_json(sol.x);
  j["backend"] = sol.backend;
  return j;
}

mro::ExperimentConfig config_from_flags(const std::string& config_path,
                                        const std::string& experiment,
                                        std::vector<Eigen::Index>& K_list,
                                        std::vector<double>& eps_grid, double p, uint64_t seed,
                                        const std::string& backend) {
  mro::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = mro::ExperimentConfig::from_json(slurp(config_path));
  if (!experiment.empty()) cfg.experiment = experiment;
  if (!K_list.empty()) cfg.K_list = K_list;
  if (!eps_grid.empty()) cfg.eps_grid = eps_grid;
  if (p != 0.0) cfg.p = p;
  if (seed != static_cast<uint64_t>(-1)) cfg.seed = seed;
  if (!backend.empty()) cfg.backend = backend;
  return cfg;
}

struct CellResult {
  mro::Solution solution;
  mro::MroProblem problem;
};

CellResult solve_one(const mro::ExperimentContext& ctx, Eigen::Index K, double eps,
                     const mro::SolverBackend& backend) {
  CellResult res;
  const auto cl = mro::kmeans(ctx.train, K);
  res.problem = ctx.make_problem(cl, eps);
  if (res.problem.families[0].kind() == mro::FamilyKind::LogSumExp) {
    res.solution = mro::cutting_plane_solve(res.problem, {}, backend).solution;
  } else {
    const auto program = mro::emit_dual(res.problem);
    if (program.binary_vars.empty()) {
      res.solution = backend.solve(program, {});
    } else {
      res.solution = mro::solve_mixed_binary(program, backend);
    }
  }
  return res;
}

int run_cluster(const std::string& data_path, const std::string& experiment, Eigen::Index K,
                uint64_t seed, const std::string& out) {
  mro::Dataset data;
  if (!data_path.empty()) {
    data = mro::load_dataset(data_path);
  } else if (!experiment.empty()) {
    mro::ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.seed = seed == static_cast<uint64_t>(-1) ? 0 : seed;
    data = mro::make_experiment(cfg).train;
  } else {
    std::cerr << "cluster: need --data or --experiment\n";
    return 2;
  }
  mro::KMeansConfig kc;
  if (seed != static_cast<uint64_t>(-1)) kc.seed = seed;
  emit(mro::kmeans(data, K, kc).to_json(), out);
  return 0;
}

int run_solve(const std::string& problem_path, const std::string& clustering_path,
              const std::string& method, double eps, double p, const std::string& backend_id,
              const std::string& out, const std::string& history_path) {
  auto prob = mro::mro_problem_from_json(slurp(problem_path));
  if (!clustering_path.empty()) prob.clustered = mro::ClusteredSet::from_json(slurp(clustering_path));
  if (eps >= 0.0) prob.spec.epsilon = eps;
  if (p != 0.0) prob.spec.p = p;
  prob.validate();
  const auto backend = mro::make_backend(backend_id);

  mro::Solution sol;
  if (method == "cutting-plane" || prob.families[0].kind() == mro::FamilyKind::LogSumExp) {
    const auto res = mro::cutting_plane_solve(prob, {}, *backend);
    sol = res.solution;
    if (!history_path.empty()) {
      std::ostringstream hs;
      hs << "iter,master_obj,oracle_val,time\n";
      hs.precision(12);
      for (const auto& h : res.history) {
        hs << h.iteration << ',' << h.master_objective << ',' << h.oracle_value << ','
           << h.time_s << '\n';
      }
      emit(hs.str(), history_path);
    }
  } else {
    const auto program = mro::emit_dual(prob);
    sol = program.binary_vars.empty() ? backend->solve(program, {})
                                      : mro::solve_mixed_binary(program, *backend);
  }
  emit(solution_json(sol).dump(2), out);
  return sol.status == mro::SolveStatus::Optimal ? 0 : 1;
}

int run_sweep_cmd(const mro::ExperimentConfig& cfg, const std::string& out) {
  const auto records = mro::run_sweep(cfg);
  std::ostringstream os;
  mro::write_records_csv(records, os);
  emit(os.str(), out.empty() ? cfg.out : out);
  for (const auto& r : records) {
    if (r.status != "optimal") return 1;
  }
  return 0;
}

int run_validate(mro::ExperimentConfig cfg, double target_beta, const std::string& out) {
  if (cfg.K_list.size() != 1) {
    std::cerr << "validate: exactly one --K required\n";
    return 2;
  }
  if (cfg.beta_R <= 0) cfg.beta_R = 20;
  const auto records = mro::run_sweep(cfg);
  std::ostringstream os;
  os.precision(12);
  os << "eps,beta_hat,objective\n";
  bool all_ok = true;
  for (const auto& r : records) {
    os << r.eps << ',';
    if (r.beta_hat) os << *r.beta_hat;
    os << ',' << r.objective << '\n';
    all_ok = all_ok && r.status == "optimal" && r.beta_hat.has_value();
  }
  if (all_ok && !records.empty()) {
    auto lookup = [&records](double eps) {
      for (const auto& r : records) {
        if (r.eps == eps) return std::make_pair(*r.beta_hat, r.objective);
      }
      throw std::logic_error("validate: eps not in records");
    };
    auto grid = cfg.eps_grid;
    std::sort(grid.begin(), grid.end());
    const auto sel = mro::cross_validate_epsilon(grid, target_beta, lookup);
    os << "# eps_star=" << sel.eps_star << (sel.warning ? " (no grid point met the target)" : "")
       << '\n';
  }
  emit(os.str(), out);
  return all_ok ? 0 : 1;
}

int run_oracle(const std::string& problem_path, const std::string& x_csv, size_t family_index,
               const std::string& out) {
  const auto prob = mro::mro_problem_from_json(slurp(problem_path));
  if (family_index >= prob.families.size()) {
    std::cerr << "oracle: family index out of range\n";
    return 2;
  }
  std::vector<double> xs;
  std::stringstream ss(x_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) xs.push_back(std::stod(tok));
  const auto& fam = prob.families[family_index];
  if (static_cast<Eigen::Index>(xs.size()) != fam.n()) {
    std::cerr << "oracle: expected " << fam.n() << " decision values\n";
    return 2;
  }
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xs.data(), fam.n());
  const auto res = mro::max_oracle(fam, x, prob.clustered, prob.spec);

  nlohmann::json j;
  j["value"] = res.value;
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  auto pts = nlohmann::json::array();
  for (Eigen::Index k = 0; k < res.points.rows(); ++k) {
    pts.push_back(vec_json(res.points.row(k).transpose()));
  }
  j["points"] = pts;
  emit(j.dump(2), out);
  return res.converged ? 0 : 1;
}

int run_check_sandwich(const mro::ExperimentConfig& cfg, const std::string& out) {
  if (cfg.K_list.size() != 1 || cfg.eps_grid.size() != 1) {
    std::cerr << "check-sandwich: exactly one --K and one --eps required\n";
    return 2;
  }
  const auto ctx = mro::make_experiment(cfg);
  const auto backend = mro::make_backend(cfg.backend);
  const auto cell = solve_one(ctx, cfg.K_list[0], cfg.eps_grid[0], *backend);
  if (cell.solution.status != mro::SolveStatus::Optimal) {
    std::cerr << "check-sandwich: solve " << mro::solve_status_name(cell.solution.status) << '\n';
    return 1;
  }
  const Eigen::VectorXd x_hat = cell.solution.x.head(cell.problem.n());
  const auto cl = mro::kmeans(ctx.train, cfg.K_list[0]);

  auto reports = nlohmann::json::array();
  bool all_hold = true;
  for (const auto& fam : cell.problem.families) {
    const auto rep =
        mro::sandwich_check(fam, x_hat, ctx.train, cl, cell.problem.spec, *backend);
    nlohmann::json j;
    j["g_N"] = rep.g_N;
    j["g_K"] = rep.g_K;
    j["g_N_star"] = rep.g_N_star;
    j["L"] = rep.L;
    j["D"] = rep.D;
    j["bound"] = rep.bound;
    j["delta_estimate"] = rep.delta_estimate;
    j["holds_lower"] = rep.holds_lower;
    j["holds_upper"] = rep.holds_upper;
    reports.push_back(j);
    all_hold = all_hold && rep.holds_lower && rep.holds_upper;
  }
  nlohmann::json j;
  j["objective"] = cell.solution.objective;
  j["reports"] = reports;
  emit(j.dump(2), out);
  return all_hold ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean robust optimization toolkit"};
  app.require_subcommand(1);

  std::string experiment, backend_id, out, config_path, data_path, problem_path, clustering_path;
  std::string method = "direct", x_csv, history_path;
  std::vector<Eigen::Index> K_list;
  std::vector<double> eps_grid;
  double p = 0.0, target_beta = 0.2, eps_override = -1.0;
  uint64_t seed = static_cast<uint64_t>(-1);
  size_t family_index = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--experiment", experiment, "facility | capital | quadratic | logsumexp");
    cmd->add_option("--K", K_list, "cluster counts");
    cmd->add_option("--eps", eps_grid, "uncertainty radii");
    cmd->add_option("--p", p, "ball exponent (0 = experiment default)");
    cmd->add_option("--seed", seed, "rng seed");
    cmd->add_option("--backend", backend_id, "conic solver id");
    cmd->add_option("--out", out, "output path (default stdout)");
    cmd->add_option("--config", config_path, "experiment config JSON");
  };

  auto* cluster = app.add_subcommand("cluster", "cluster a dataset and emit the result as JSON");
  add_common(cluster);
  cluster->add_option("--data", data_path, "dataset CSV or JSON path");

  auto* solve = app.add_subcommand("solve", "solve a robust problem JSON");
  solve->add_option("--problem", problem_path, "problem JSON path")->required();
  solve->add_option("--clustering", clustering_path, "replacement clustering JSON");
  solve->add_option("--method", method, "direct | cutting-plane");
  solve->add_option("--eps", eps_override, "override the uncertainty radius");
  solve->add_option("--p", p, "override the ball exponent");
  solve->add_option("--backend", backend_id, "conic solver id");
  solve->add_option("--out", out, "output path (default stdout)");
  solve->add_option("--history", history_path, "cutting-plane history CSV path");

  auto* sweep = app.add_subcommand("sweep", "run a (K, eps) sweep and emit CSV");
  add_common(sweep);

  auto* validate = app.add_subcommand("validate", "out-of-sample beta table over an eps grid");
  add_common(validate);
  validate->add_option("--target-beta", target_beta, "violation-probability target");

  auto* oracle = app.add_subcommand("oracle", "worst-case maximization at a fixed decision");
  oracle->add_option("--problem", problem_path, "problem JSON path")->required();
  oracle->add_option("--x", x_csv, "decision vector, comma separated")->required();
  oracle->add_option("--family", family_index, "constraint family index");
  oracle->add_option("--out", out, "output path (default stdout)");

  auto* sandwich = app.add_subcommand("check-sandwich", "solve one cell and verify the bounds");
  add_common(sandwich);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(cluster)) {
      if (K_list.size() != 1) {
        std::cerr << "cluster: exactly one --K required\n";
        return 2;
      }
      return run_cluster(data_path, experiment, K_list[0], seed, out);
    }
    if (app.got_subcommand(solve)) {
      return run_solve(problem_path, clustering_path, method, eps_override, p, backend_id, out,
                       history_path);
    }
    if (app.got_subcommand(sweep)) {
      return run_sweep_cmd(
          config_from_flags(config_path, experiment, K_list, eps_grid, p, seed, backend_id), out);
    }
    if (app.got_subcommand(validate)) {
      return run_validate(
          config_from_flags(config_path, experiment, K_list, eps_grid, p, seed, backend_id),
          target_beta, out);
    }
    if (app.got_subcommand(oracle)) {
      return run_oracle(problem_path, x_csv, family_index, out);
    }
    if (app.got_subcommand(sandwich)) {
      return run_check_sandwich(
          config_from_flags(config_path, experiment, K_list, eps_grid, p, seed, backend_id), out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
