#include "mro/experiments.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace mro {
namespace {

Dataset draw_facility_demands(Eigen::Index m, Eigen::Index N, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> demand(1.0, 6.0);
  Eigen::MatrixXd d(N, m);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) d(i, j) = demand(rng);
  }
  return Dataset(d);
}

Dataset draw_capital_rates(Eigen::Index n, Eigen::Index N, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd r(N, n);
  // two halves with slightly different rate predictions, scaled by project id
  for (Eigen::Index i = 0; i < N; ++i) {
    const bool first_half = i < N / 2;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double scale = static_cast<double>(j + 1);
      std::uniform_real_distribution<double> rate(first_half ? 0.005 : 0.01,
                                                  first_half ? 0.02 : 0.025);
      r(i, j) = scale * rate(rng);
    }
  }
  return Dataset(r);
}

Dataset draw_quadratic_data(Eigen::Index m, Eigen::Index N, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const std::vector<double> gamma{1, 5, 15, 25, 40};
  const auto modes = static_cast<Eigen::Index>(gamma.size());
  Eigen::MatrixXd d(N, m);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto mode = std::min(i / std::max<Eigen::Index>(1, N / modes), modes - 1);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double mu = gamma[static_cast<size_t>(mode)] * 0.03 * static_cast<double>(j + 1);
      const double var = 0.02 * 0.02 + std::pow(0.025 * static_cast<double>(j + 1), 2);
      d(i, j) = mu + std::sqrt(var) * gauss(rng);
    }
  }
  return Dataset(d);
}

Dataset draw_logsumexp_data(Eigen::Index n, Eigen::Index N, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<double> gamma{1, 3, 7};
  const auto sets = static_cast<Eigen::Index>(gamma.size());
  Eigen::MatrixXd d(N, n);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto set = std::min(i / std::max<Eigen::Index>(1, N / sets), sets - 1);
    const double g = gamma[static_cast<size_t>(set)];
    for (Eigen::Index j = 0; j < n; ++j) {
      std::uniform_real_distribution<double> unif(0.01 * g * static_cast<double>(j + 1),
                                                  0.01 * g * static_cast<double>(j + 2));
      d(i, j) = unif(rng);
    }
  }
  return Dataset(d);
}

}  // namespace

FacilityInstance gen_facility(Eigen::Index n, Eigen::Index m, Eigen::Index N, uint64_t seed) {
  if (n < 1 || m < n || N < 1) throw std::invalid_argument("gen_facility: need 1 <= n <= m, N >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cost(30.0, 70.0);
  std::uniform_real_distribution<double> coord(0.0, 15.0);
  std::uniform_real_distribution<double> cap(10.0, 50.0);

  FacilityInstance inst;
  inst.build_cost.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.build_cost[i] = cost(rng);

  // facilities sit at the first n customer locations
  Eigen::MatrixXd loc(m, 2);
  for (Eigen::Index j = 0; j < m; ++j) {
    loc(j, 0) = coord(rng);
    loc(j, 1) = coord(rng);
  }
  inst.ship_cost.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      inst.ship_cost(i, j) = (loc.row(i) - loc.row(j)).norm();
    }
  }
  inst.capacity.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.capacity[i] = cap(rng);
  inst.demands = draw_facility_demands(m, N, seed + 0x9e3779b97f4a7c15ull);
  return inst;
}

MroProblem facility_problem(const FacilityInstance& inst, ClusteredSet clustered, double eps,
                            double p) {
  const Eigen::Index n = inst.build_cost.size();
  const Eigen::Index m = inst.ship_cost.cols();
  const Eigen::Index dim = n + n * m;
  const auto xvar = [&](Eigen::Index i) { return i; };
  const auto Xvar = [&](Eigen::Index i, Eigen::Index j) { return n + i * m + j; };

  MroProblem prob;
  prob.cost = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index i = 0; i < n; ++i) prob.cost[xvar(i)] = inst.build_cost[i];
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) prob.cost[Xvar(i, j)] = inst.ship_cost(i, j);
  }

  // one uncertain capacity constraint per facility: (X^T)_i u - r_i x_i <= 0
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a[xvar(i)] = -inst.capacity[i];
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dim, m);
    for (Eigen::Index j = 0; j < m; ++j) P(Xvar(i, j), j) = 1.0;
    prob.families.push_back(ConstraintFamily::affine(a, P, 0.0));
  }

  prob.xcons.Aeq = Eigen::MatrixXd::Zero(m, dim);
  prob.xcons.beq = Eigen::VectorXd::Ones(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) prob.xcons.Aeq(j, Xvar(i, j)) = 1.0;
  }
  prob.xcons.lb = Eigen::VectorXd::Zero(dim);
  prob.xcons.ub = Eigen::VectorXd::Constant(dim, kInf);
  for (Eigen::Index i = 0; i < n; ++i) {
    prob.xcons.ub[xvar(i)] = 1.0;
    prob.xcons.binary.push_back(xvar(i));
  }

  prob.clustered = std::move(clustered);
  prob.spec = UncertaintySpec(p, NormSpec(2), eps, SupportSet::nonnegative_orthant(m));
  return prob;
}

CapitalInstance gen_capital(Eigen::Index n, Eigen::Index T, Eigen::Index N, double theta,
                            uint64_t seed) {
  if (n < 1 || T < 0 || N < 1) throw std::invalid_argument("gen_capital: bad sizes");
  std::mt19937_64 rng(seed);
  CapitalInstance inst;
  inst.theta = theta;
  inst.F.resize(n, T + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index t = 0; t <= T; ++t) {
      std::uniform_real_distribution<double> flow(0.1, 0.5 + 0.004 * static_cast<double>(t));
      inst.F(j, t) = flow(rng);
    }
  }
  inst.h.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // the nominal interval [1, 3 - 0.5 j] is empty beyond small j; clamp it
    const double hi = std::max(1.0, 3.0 - 0.5 * static_cast<double>(j + 1));
    std::uniform_real_distribution<double> weight(1.0, hi);
    inst.h[j] = hi == 1.0 ? 1.0 : weight(rng);
  }
  inst.rates = draw_capital_rates(n, N, seed + 0x9e3779b97f4a7c15ull);
  return inst;
}

MroProblem capital_problem(const CapitalInstance& inst, ClusteredSet clustered, double eps,
                           double p) {
  const Eigen::Index n = inst.F.rows();
  MroProblem prob;
  prob.families.push_back(ConstraintFamily::capital_npv(inst.F));
  prob.cost = Eigen::VectorXd::Zero(n);
  prob.epigraph = true;
  prob.xcons.G = inst.h.transpose();
  prob.xcons.h = Eigen::VectorXd::Constant(1, inst.theta);
  prob.xcons.lb = Eigen::VectorXd::Zero(n);
  prob.xcons.ub = Eigen::VectorXd::Ones(n);
  for (Eigen::Index j = 0; j < n; ++j) prob.xcons.binary.push_back(j);
  prob.clustered = std::move(clustered);
  prob.spec = UncertaintySpec(p, NormSpec(2), eps,
                              SupportSet::box(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)));
  return prob;
}

QuadraticInstance gen_quadratic(Eigen::Index n, Eigen::Index m, Eigen::Index N, uint64_t seed) {
  if (n < 1 || m < 1 || N < 1) throw std::invalid_argument("gen_quadratic: bad sizes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  QuadraticInstance inst;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd G(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) G(r, c) = gauss(rng);
    }
    inst.A.push_back(G.transpose() * G + 1e-3 * Eigen::MatrixXd::Identity(m, m));
  }
  inst.data = draw_quadratic_data(m, N, seed + 0x9e3779b97f4a7c15ull);
  return inst;
}

MroProblem quadratic_problem(const QuadraticInstance& inst, ClusteredSet clustered, double eps,
                             double p) {
  const auto n = static_cast<Eigen::Index>(inst.A.size());
  const Eigen::Index m = inst.A[0].rows();
  MroProblem prob;
  prob.families.push_back(ConstraintFamily::concave_quadratic(inst.A));
  prob.cost = Eigen::VectorXd::Zero(n);
  prob.epigraph = true;
  prob.xcons.Aeq = Eigen::MatrixXd::Ones(1, n);
  prob.xcons.beq = Eigen::VectorXd::Ones(1);
  prob.xcons.lb = Eigen::VectorXd::Zero(n);
  prob.xcons.ub = Eigen::VectorXd::Constant(n, kInf);
  prob.clustered = std::move(clustered);
  prob.spec = UncertaintySpec(p, NormSpec(2), eps, SupportSet::full_space(m));
  return prob;
}

LogSumExpInstance gen_logsumexp(Eigen::Index n, Eigen::Index N, uint64_t seed) {
  if (n < 1 || N < 1) throw std::invalid_argument("gen_logsumexp: bad sizes");
  LogSumExpInstance inst;
  inst.n = n;
  inst.data = draw_logsumexp_data(n, N, seed + 0x9e3779b97f4a7c15ull);
  return inst;
}

MroProblem logsumexp_problem(const LogSumExpInstance& inst, ClusteredSet clustered, double eps,
                             double p) {
  MroProblem prob;
  prob.families.push_back(ConstraintFamily::log_sum_exp(inst.n));
  prob.cost = Eigen::VectorXd::Zero(inst.n);
  prob.epigraph = true;
  prob.xcons.G = -Eigen::MatrixXd::Ones(1, inst.n);  // 1'x >= 10
  prob.xcons.h = Eigen::VectorXd::Constant(1, -10.0);
  prob.xcons.lb = Eigen::VectorXd::Zero(inst.n);
  prob.xcons.ub = Eigen::VectorXd::Constant(inst.n, 10.0);
  prob.clustered = std::move(clustered);
  prob.spec = UncertaintySpec(p, NormSpec(2), eps,
                              SupportSet::box(Eigen::VectorXd::Constant(inst.n, 0.01),
                                              Eigen::VectorXd::Constant(inst.n, kInf)));
  return prob;
}

ExperimentContext make_experiment(const ExperimentConfig& cfg) {
  ExperimentContext ctx;
  ctx.experiment = cfg.experiment;
  if (cfg.experiment == "facility") {
    const Eigen::Index n = cfg.n < 0 ? 5 : cfg.n;
    const Eigen::Index m = cfg.m < 0 ? 25 : cfg.m;
    ctx.N_train = cfg.N < 0 ? 50 : cfg.N;
    ctx.p = cfg.p == 0.0 ? kInf : cfg.p;
    auto inst = std::make_shared<FacilityInstance>(gen_facility(n, m, ctx.N_train, cfg.seed));
    ctx.make_problem = [inst, p = ctx.p](ClusteredSet cl, double eps) {
      return facility_problem(*inst, std::move(cl), eps, p);
    };
    ctx.draw = [m](uint64_t seed, Eigen::Index count) {
      return draw_facility_demands(m, count, seed);
    };
    ctx.train = inst->demands;
  } else if (cfg.experiment == "capital") {
    const Eigen::Index n = cfg.n < 0 ? 20 : cfg.n;
    const Eigen::Index T = cfg.T < 0 ? 5 : cfg.T;
    ctx.N_train = cfg.N < 0 ? 120 : cfg.N;
    ctx.p = cfg.p == 0.0 ? 2.0 : cfg.p;
    auto inst =
        std::make_shared<CapitalInstance>(gen_capital(n, T, ctx.N_train, cfg.theta, cfg.seed));
    ctx.make_problem = [inst, p = ctx.p](ClusteredSet cl, double eps) {
      return capital_problem(*inst, std::move(cl), eps, p);
    };
    ctx.draw = [n](uint64_t seed, Eigen::Index count) {
      return draw_capital_rates(n, count, seed);
    };
    ctx.train = inst->rates;
  } else if (cfg.experiment == "quadratic") {
    const Eigen::Index n = cfg.n < 0 ? 10 : cfg.n;
    const Eigen::Index m = cfg.m < 0 ? 10 : cfg.m;
    ctx.N_train = cfg.N < 0 ? 90 : cfg.N;
    ctx.p = cfg.p == 0.0 ? 2.0 : cfg.p;
    auto inst = std::make_shared<QuadraticInstance>(gen_quadratic(n, m, ctx.N_train, cfg.seed));
    ctx.make_problem = [inst, p = ctx.p](ClusteredSet cl, double eps) {
      return quadratic_problem(*inst, std::move(cl), eps, p);
    };
    ctx.draw = [m](uint64_t seed, Eigen::Index count) {
      return draw_quadratic_data(m, count, seed);
    };
    ctx.train = inst->data;
  } else if (cfg.experiment == "logsumexp") {
    const Eigen::Index n = cfg.n < 0 ? 30 : cfg.n;
    ctx.N_train = cfg.N < 0 ? 90 : cfg.N;
    ctx.p = cfg.p == 0.0 ? 2.0 : cfg.p;
    auto inst = std::make_shared<LogSumExpInstance>(gen_logsumexp(n, ctx.N_train, cfg.seed));
    ctx.make_problem = [inst, p = ctx.p](ClusteredSet cl, double eps) {
      return logsumexp_problem(*inst, std::move(cl), eps, p);
    };
    ctx.draw = [n](uint64_t seed, Eigen::Index count) {
      return draw_logsumexp_data(n, count, seed);
    };
    ctx.train = inst->data;
  } else {
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
  }
  return ctx;
}

namespace {

struct CellOutcome {
  Solution solution;
  double backend_time = 0.0;
};

CellOutcome solve_cell(const MroProblem& prob, const SolverBackend& backend) {
  CellOutcome out;
  if (prob.families[0].kind() == FamilyKind::LogSumExp) {
    auto res = cutting_plane_solve(prob, {}, backend);
    out.solution = std::move(res.solution);
    out.backend_time = res.history.empty() ? 0.0 : res.history.back().time_s;
    if (!res.converged && out.solution.status == SolveStatus::Optimal) {
      out.solution.status = SolveStatus::IterationLimit;
    }
    return out;
  }
  const auto program = emit_dual(prob);
  if (program.binary_vars.empty()) {
    out.solution = backend.solve(program, {});
    out.backend_time = out.solution.solve_time;
  } else {
    out.solution = solve_mixed_binary(program, backend, {}, 22, &out.backend_time);
  }
  return out;
}

// mean of g (max over families) minus the epigraph level, as a closure over
// the solved decision
std::function<double(const Eigen::VectorXd&)> make_evaluator(const MroProblem& prob,
                                                             const Solution& sol) {
  const Eigen::VectorXd x_hat = sol.x.head(prob.n());
  double tau_hat = 0.0;
  if (prob.epigraph) tau_hat = sol.objective - prob.cost.dot(x_hat);
  auto families = prob.families;
  return [families, x_hat, tau_hat](const Eigen::VectorXd& u) {
    double worst = -kInf;
    for (const auto& f : families) worst = std::max(worst, eval_g(f, u, x_hat));
    return worst - tau_hat;
  };
}

}  // namespace

std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg) {
  std::vector<ResultRecord> records;
  if (cfg.eps_grid.empty()) return records;
  const auto ctx = make_experiment(cfg);
  const auto backend = make_backend(cfg.backend);
  const Dataset& train = ctx.train;

  for (Eigen::Index K : cfg.K_list) {
    const auto clustered = kmeans(train, K, {.seed = cfg.seed});
    for (double eps : cfg.eps_grid) {
      ResultRecord rec;
      rec.experiment = cfg.experiment;
      rec.K = K;
      rec.eps = eps;
      rec.seed = cfg.seed;
      rec.D = clustered.D;
      rec.eta = clustered.eta;
      try {
        const auto prob = ctx.make_problem(clustered, eps);
        const auto out = solve_cell(prob, *backend);
        rec.status = solve_status_name(out.solution.status);
        rec.objective = out.solution.objective;
        rec.solve_time_s = out.backend_time;

        if (cfg.beta_R > 0 && out.solution.status == SolveStatus::Optimal) {
          const Eigen::Index n_eval = cfg.N_eval > 0 ? cfg.N_eval : 10 * ctx.N_train;
          auto solve_fn = [&](const Dataset& rep_train, int)
              -> std::optional<std::function<double(const Eigen::VectorXd&)>> {
            const auto rep_cl = kmeans(rep_train, K, {.seed = cfg.seed});
            const auto rep_prob = ctx.make_problem(rep_cl, eps);
            const auto rep_out = solve_cell(rep_prob, *backend);
            if (rep_out.solution.status != SolveStatus::Optimal) return std::nullopt;
            return make_evaluator(rep_prob, rep_out.solution);
          };
          rec.beta_hat = out_of_sample_beta(ctx.draw, solve_fn, cfg.beta_R, ctx.N_train, n_eval,
                                            cfg.seed + 7919)
                             .beta_hat;
        }
      } catch (const std::exception&) {
        rec.status = "error";
      }
      records.push_back(std::move(rec));
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.K != b.K ? a.K < b.K : a.eps < b.eps;
  });
  return records;
}

void write_records_csv(const std::vector<ResultRecord>& records, std::ostream& os) {
  os << "experiment,K,eps,objective,solve_time_s,beta_hat,D,eta,status,seed\n";
  os.precision(12);
  for (const auto& r : records) {
    os << r.experiment << ',' << r.K << ',' << r.eps << ',' << r.objective << ','
       << r.solve_time_s << ',';
    if (r.beta_hat) os << *r.beta_hat;
    os << ',' << r.D << ',' << r.eta << ',' << r.status << ',' << r.seed << '\n';
  }
}

namespace {

nlohmann::json num_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double num_from(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("bad numeric literal: " + s);
  }
  return j.get<double>();
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["n"] = n;
  j["m"] = m;
  j["N"] = N;
  j["T"] = T;
  j["theta"] = theta;
  j["K_list"] = K_list;
  j["eps_grid"] = eps_grid;
  j["p"] = num_json(p);
  j["seed"] = seed;
  j["backend"] = backend;
  j["out"] = out;
  j["beta_R"] = beta_R;
  j["N_eval"] = N_eval;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentConfig c;
  c.experiment = j.at("experiment").get<std::string>();
  c.n = j.value("n", static_cast<Eigen::Index>(-1));
  c.m = j.value("m", static_cast<Eigen::Index>(-1));
  c.N = j.value("N", static_cast<Eigen::Index>(-1));
  c.T = j.value("T", static_cast<Eigen::Index>(-1));
  c.theta = j.value("theta", 12.0);
  c.K_list = j.value("K_list", std::vector<Eigen::Index>{});
  c.eps_grid = j.value("eps_grid", std::vector<double>{});
  if (j.contains("p")) c.p = num_from(j.at("p"));
  c.seed = j.value("seed", static_cast<uint64_t>(0));
  c.backend = j.value("backend", std::string("clarabel"));
  c.out = j.value("out", std::string());
  c.beta_R = j.value("beta_R", 0);
  c.N_eval = j.value("N_eval", static_cast<Eigen::Index>(0));
  return c;
}

}  // namespace mro
