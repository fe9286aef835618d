#include "mro/experiments.hpp"

#include <doctest.h>

#include <sstream>

TEST_CASE("facility generator shapes, ranges, and determinism") {
  const auto a = mro::gen_facility(3, 8, 10, 42);
  CHECK(a.build_cost.size() == 3);
  CHECK(a.ship_cost.rows() == 3);
  CHECK(a.ship_cost.cols() == 8);
  CHECK(a.capacity.size() == 3);
  CHECK(a.demands.n() == 10);
  CHECK(a.demands.m() == 8);
  CHECK(a.build_cost.minCoeff() >= 30.0);
  CHECK(a.build_cost.maxCoeff() <= 70.0);
  CHECK(a.capacity.minCoeff() >= 10.0);
  CHECK(a.capacity.maxCoeff() <= 50.0);
  CHECK(a.demands.samples.minCoeff() >= 1.0);
  CHECK(a.demands.samples.maxCoeff() <= 6.0);
  // facility i sits at customer i, so shipping there is free
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(a.ship_cost(i, i) == doctest::Approx(0.0));

  const auto b = mro::gen_facility(3, 8, 10, 42);
  CHECK((a.demands.samples - b.demands.samples).cwiseAbs().maxCoeff() == 0.0);
  const auto c = mro::gen_facility(3, 8, 10, 43);
  CHECK((a.demands.samples - c.demands.samples).cwiseAbs().maxCoeff() > 0.0);
  CHECK_THROWS_AS(mro::gen_facility(9, 8, 10, 0), std::invalid_argument);
}

TEST_CASE("facility problem wiring") {
  const auto inst = mro::gen_facility(3, 8, 10, 1);
  const auto cl = mro::kmeans(inst.demands, 2);
  const auto prob = mro::facility_problem(inst, cl, 0.5);
  prob.validate();
  CHECK(prob.n() == 3 + 3 * 8);
  CHECK(prob.families.size() == 3);
  CHECK_FALSE(prob.epigraph);
  CHECK(prob.xcons.Aeq.rows() == 8);
  CHECK(prob.xcons.binary.size() == 3);
  CHECK(prob.spec.p == mro::kInf);
  // the capacity row for facility 0 reads X_0. u - r_0 x_0
  CHECK(prob.families[0].a()[0] == doctest::Approx(-inst.capacity[0]));
  CHECK(prob.families[0].P()(3, 0) == doctest::Approx(1.0));
  CHECK(prob.cost[0] == doctest::Approx(inst.build_cost[0]));
  CHECK(prob.cost[3] == doctest::Approx(inst.ship_cost(0, 0)));
}

TEST_CASE("capital generator and problem wiring") {
  const auto inst = mro::gen_capital(6, 4, 20, 9.0, 7);
  CHECK(inst.F.rows() == 6);
  CHECK(inst.F.cols() == 5);
  CHECK(inst.F.minCoeff() >= 0.1);
  CHECK(inst.h.minCoeff() >= 1.0);
  CHECK(inst.h.maxCoeff() <= 2.5);
  CHECK(inst.rates.n() == 20);
  CHECK(inst.rates.m() == 6);
  CHECK(inst.rates.samples.minCoeff() > 0.0);
  CHECK(inst.rates.samples.maxCoeff() <= 0.025 * 6);

  const auto cl = mro::kmeans(inst.rates, 2);
  const auto prob = mro::capital_problem(inst, cl, 0.1);
  prob.validate();
  CHECK(prob.epigraph);
  CHECK(prob.n() == 6);
  CHECK(prob.xcons.binary.size() == 6);
  CHECK(prob.xcons.G(0, 2) == doctest::Approx(inst.h[2]));
  CHECK(prob.xcons.h[0] == doctest::Approx(9.0));
  CHECK(prob.spec.p == 2.0);
}

TEST_CASE("quadratic generator and problem wiring") {
  const auto inst = mro::gen_quadratic(4, 3, 15, 2);
  CHECK(inst.A.size() == 4);
  for (const auto& Ai : inst.A) {
    CHECK(Ai.rows() == 3);
    CHECK((Ai - Ai.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ai);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  CHECK(inst.data.n() == 15);
  CHECK(inst.data.m() == 3);

  const auto cl = mro::kmeans(inst.data, 3);
  const auto prob = mro::quadratic_problem(inst, cl, 0.2);
  prob.validate();
  CHECK(prob.epigraph);
  CHECK(prob.xcons.Aeq.rows() == 1);
  CHECK(prob.xcons.beq[0] == doctest::Approx(1.0));
  CHECK(prob.xcons.binary.empty());
}

TEST_CASE("log-sum-exp generator and problem wiring") {
  const auto inst = mro::gen_logsumexp(5, 12, 3);
  CHECK(inst.data.n() == 12);
  CHECK(inst.data.m() == 5);
  CHECK(inst.data.samples.minCoeff() > 0.0);
  // entries scale with coordinate index and regime strength
  CHECK(inst.data.samples.maxCoeff() <= 0.01 * 7 * 6);

  const auto cl = mro::kmeans(inst.data, 2);
  const auto prob = mro::logsumexp_problem(inst, cl, 0.05);
  prob.validate();
  CHECK(prob.epigraph);
  CHECK(prob.xcons.G(0, 0) == doctest::Approx(-1.0));
  CHECK(prob.xcons.ub[0] == doctest::Approx(10.0));
  CHECK(prob.spec.support.lb()[0] == doctest::Approx(0.01));
}

TEST_CASE("config json round trip") {
  mro::ExperimentConfig cfg;
  cfg.experiment = "quadratic";
  cfg.n = 3;
  cfg.m = 2;
  cfg.N = 12;
  cfg.K_list = {1, 2};
  cfg.eps_grid = {0.1, 0.3};
  cfg.p = mro::kInf;
  cfg.seed = 99;
  cfg.beta_R = 4;
  const auto back = mro::ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.experiment == "quadratic");
  CHECK(back.n == 3);
  CHECK(back.N == 12);
  CHECK(back.K_list == cfg.K_list);
  CHECK(back.eps_grid == cfg.eps_grid);
  CHECK(back.p == mro::kInf);
  CHECK(back.seed == 99);
  CHECK(back.beta_R == 4);

  const auto sparse = mro::ExperimentConfig::from_json(R"({"experiment":"facility"})");
  CHECK(sparse.n == -1);
  CHECK(sparse.p == 0.0);
  CHECK(sparse.backend == "clarabel");
}

TEST_CASE("quadratic sweep produces sorted optimal records") {
  mro::ExperimentConfig cfg;
  cfg.experiment = "quadratic";
  cfg.n = 3;
  cfg.m = 2;
  cfg.N = 12;
  cfg.K_list = {2, 1};
  cfg.eps_grid = {0.5, 0.1};
  cfg.seed = 5;
  const auto records = mro::run_sweep(cfg);
  REQUIRE(records.size() == 4);
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    CHECK(r.status == "optimal");
    CHECK(std::isfinite(r.objective));
    CHECK(r.solve_time_s >= 0.0);
    CHECK_FALSE(r.beta_hat.has_value());
    if (i > 0) {
      const auto& q = records[i - 1];
      CHECK((q.K < r.K || (q.K == r.K && q.eps < r.eps)));
    }
  }
  // a larger ball cannot help the worst case
  CHECK(records[0].objective <= records[1].objective + 1e-7);
  CHECK(records[0].D >= records[2].D - 1e-12);

  const auto again = mro::run_sweep(cfg);
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].objective == doctest::Approx(again[i].objective).epsilon(1e-12));
  }
}

TEST_CASE("sweep records an error status instead of aborting") {
  mro::ExperimentConfig cfg;
  cfg.experiment = "quadratic";
  cfg.n = 3;
  cfg.m = 2;
  cfg.N = 12;
  cfg.K_list = {1};
  cfg.eps_grid = {0.1};
  cfg.p = 5.0;  // no conic reformulation for this exponent
  const auto records = mro::run_sweep(cfg);
  REQUIRE(records.size() == 1);
  CHECK(records[0].status == "error");
}

TEST_CASE("sweep with beta repetitions fills the beta column") {
  mro::ExperimentConfig cfg;
  cfg.experiment = "quadratic";
  cfg.n = 2;
  cfg.m = 2;
  cfg.N = 10;
  cfg.K_list = {1};
  cfg.eps_grid = {0.5};
  cfg.beta_R = 2;
  cfg.N_eval = 20;
  const auto records = mro::run_sweep(cfg);
  REQUIRE(records.size() == 1);
  REQUIRE(records[0].beta_hat.has_value());
  CHECK(*records[0].beta_hat >= 0.0);
  CHECK(*records[0].beta_hat <= 1.0);
}

TEST_CASE("csv writer emits one line per record") {
  std::vector<mro::ResultRecord> records(2);
  records[0].experiment = "quadratic";
  records[0].K = 1;
  records[0].eps = 0.1;
  records[0].objective = -1.25;
  records[0].status = "optimal";
  records[1] = records[0];
  records[1].K = 2;
  records[1].beta_hat = 0.125;
  std::ostringstream os;
  mro::write_records_csv(records, os);
  const auto text = os.str();
  CHECK(text.rfind("experiment,K,eps,objective,solve_time_s,beta_hat,D,eta,status,seed\n", 0) ==
        0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find(",0.125,") != std::string::npos);
  CHECK(text.find("quadratic,1,0.1,-1.25,") != std::string::npos);
}
