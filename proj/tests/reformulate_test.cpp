#include "mro/reformulate.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

namespace {

mro::ClusteredSet cluster_of(const Eigen::MatrixXd& rows, Eigen::Index K) {
  mro::Dataset data(rows);
  return mro::kmeans(data, K, {.restarts = 16});
}

mro::ClusteredSet single_cluster(const Eigen::VectorXd& center) {
  Eigen::MatrixXd rows(1, center.size());
  rows.row(0) = center.transpose();
  return cluster_of(rows, 1);
}

const mro::SolverBackend& backend() {
  static auto b = mro::make_backend("clarabel");
  return *b;
}

// affine worst case with an L2 inner norm has the closed form
// a'x + sum_k w_k (P'x)' dbar_k + eps ||P'x||_2 for every p
double affine_closed_form(const mro::ConstraintFamily& fam, const Eigen::VectorXd& x,
                          const mro::ClusteredSet& cl, double eps) {
  const Eigen::VectorXd z = fam.P().transpose() * x;
  double mean_term = 0.0;
  for (Eigen::Index k = 0; k < cl.K; ++k) {
    mean_term += cl.weights[k] * z.dot(cl.centroids.row(k).transpose());
  }
  return fam.a().dot(x) - fam.b() + mean_term + eps * z.norm();
}

}  // namespace

TEST_CASE("affine worst case matches closed form at fixed points") {
  const auto fam = mro::ConstraintFamily::affine(Eigen::VectorXd::Zero(2),
                                                 Eigen::MatrixXd::Identity(2, 2), 0.0);
  Eigen::VectorXd x(2);
  x << 1.0, 0.0;

  auto cl = single_cluster(Eigen::VectorXd::Zero(2));
  const mro::UncertaintySpec spec_inf(mro::kInf, mro::NormSpec(2), 1.0,
                                      mro::SupportSet::full_space(2));
  CHECK(mro::worst_case_value(fam, x, cl, spec_inf, backend()) == doctest::Approx(1.0).epsilon(1e-6));

  Eigen::VectorXd center(2);
  center << 2.0, 3.0;
  cl = single_cluster(center);
  CHECK(mro::worst_case_value(fam, x, cl, spec_inf, backend()) == doctest::Approx(3.0).epsilon(1e-6));

  const mro::UncertaintySpec spec_2(2.0, mro::NormSpec(2), 1.0, mro::SupportSet::full_space(2));
  CHECK(mro::worst_case_value(fam, x, cl, spec_2, backend()) == doctest::Approx(3.0).epsilon(1e-6));
  const mro::UncertaintySpec spec_1(1.0, mro::NormSpec(2), 1.0, mro::SupportSet::full_space(2));
  CHECK(mro::worst_case_value(fam, x, cl, spec_1, backend()) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("affine worst case is invariant to the cluster count") {
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd rows(12, 3);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) rows(i, j) = gauss(rng);
  }
  Eigen::VectorXd a(2);
  a << 0.3, -0.7;
  Eigen::MatrixXd P(2, 3);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) P(i, j) = gauss(rng);
  }
  const auto fam = mro::ConstraintFamily::affine(a, P, 0.4);
  Eigen::VectorXd x(2);
  x << 1.2, 0.5;

  for (double p : {1.0, 2.0, mro::kInf}) {
    const mro::UncertaintySpec spec(p, mro::NormSpec(2), 0.8, mro::SupportSet::full_space(3));
    double ref = 0.0;
    for (Eigen::Index K : {Eigen::Index(1), Eigen::Index(3), Eigen::Index(12)}) {
      const auto cl = cluster_of(rows, K);
      const double val = mro::worst_case_value(fam, x, cl, spec, backend());
      CHECK(val == doctest::Approx(affine_closed_form(fam, x, cl, 0.8)).epsilon(1e-6));
      if (K == 1) {
        ref = val;
      } else {
        CHECK(val == doctest::Approx(ref).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("quadratic worst case matches the scalar analytic optimum") {
  // g = -1/2 h u^2; over |u - dbar| <= eps the max is -1/2 h (max(0, |dbar|-eps))^2
  std::vector<Eigen::MatrixXd> A{Eigen::MatrixXd::Constant(1, 1, 2.0)};
  const auto fam = mro::ConstraintFamily::concave_quadratic(A);
  Eigen::VectorXd x(1);
  x << 1.0;

  auto cl = single_cluster(Eigen::VectorXd::Zero(1));
  const mro::UncertaintySpec unit(mro::kInf, mro::NormSpec(2), 1.0, mro::SupportSet::full_space(1));
  CHECK(mro::worst_case_value(fam, x, cl, unit, backend()) == doctest::Approx(0.0).epsilon(1e-6));

  cl = single_cluster(Eigen::VectorXd::Constant(1, 3.0));
  for (double p : {2.0, mro::kInf}) {
    const mro::UncertaintySpec spec(p, mro::NormSpec(2), 1.0, mro::SupportSet::full_space(1));
    CHECK(mro::worst_case_value(fam, x, cl, spec, backend()) ==
          doctest::Approx(-0.5 * 2.0 * 4.0).epsilon(1e-6));
  }
}

TEST_CASE("quadratic worst case agrees with a dense grid in 2-D") {
  std::vector<Eigen::MatrixXd> A(1);
  A[0].resize(2, 2);
  A[0] << 2.0, 0.0, 0.0, 1.0;
  const auto fam = mro::ConstraintFamily::concave_quadratic(A);
  Eigen::VectorXd x(1);
  x << 1.0;
  Eigen::VectorXd center(2);
  center << 1.0, 1.0;
  const auto cl = single_cluster(center);
  const double eps = 0.5;
  const mro::UncertaintySpec spec(mro::kInf, mro::NormSpec(2), eps, mro::SupportSet::full_space(2));

  double grid_best = -mro::kInf;
  for (int ia = 0; ia < 400; ++ia) {
    const double ang = 2.0 * M_PI * ia / 400.0;
    for (int ir = 0; ir <= 100; ++ir) {
      Eigen::VectorXd u = center;
      u[0] += eps * ir / 100.0 * std::cos(ang);
      u[1] += eps * ir / 100.0 * std::sin(ang);
      grid_best = std::max(grid_best, mro::eval_g(fam, u, x));
    }
  }
  CHECK(mro::worst_case_value(fam, x, cl, spec, backend()) ==
        doctest::Approx(grid_best).epsilon(5e-3));
}

TEST_CASE("npv worst case matches the monotone analytic optimum") {
  // one project, flows (1, 1): g(u) = -x - x / (1 + u), increasing in u,
  // so the worst point is the largest feasible rate
  Eigen::MatrixXd F(1, 2);
  F << 1.0, 1.0;
  const auto fam = mro::ConstraintFamily::capital_npv(F);
  Eigen::VectorXd x(1);
  x << 1.0;
  const auto cl = single_cluster(Eigen::VectorXd::Constant(1, 0.2));
  const auto box = mro::SupportSet::box(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  const double expected = -1.0 - 1.0 / 1.5;  // u* = 0.2 + 0.3
  for (double p : {1.0, 2.0, mro::kInf}) {
    const mro::UncertaintySpec spec(p, mro::NormSpec(2), 0.3, box);
    CHECK(mro::worst_case_value(fam, x, cl, spec, backend()) ==
          doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("support rows tighten the worst case and relax_support removes them") {
  const auto fam = mro::ConstraintFamily::affine(Eigen::VectorXd::Zero(1),
                                                 -Eigen::MatrixXd::Identity(1, 1), 0.0);
  Eigen::VectorXd x(1);
  x << 1.0;  // g = -u, maximized by pushing u down
  const auto cl = single_cluster(Eigen::VectorXd::Constant(1, 0.5));
  const mro::UncertaintySpec spec(mro::kInf, mro::NormSpec(2), 2.0,
                                  mro::SupportSet::nonnegative_orthant(1));
  // support clips u at 0; without it the ball reaches u = -1.5
  CHECK(mro::worst_case_value(fam, x, cl, spec, backend()) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(mro::worst_case_value(fam, x, cl, spec, backend(), /*relax_support=*/true) ==
        doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("epigraph dual program solves a tiny robust quadratic to the analytic optimum") {
  // h(x) = 2 x1 + 4 x2 on the simplex, worst case -1/2 h (3 - 1)^2 = -2 h,
  // minimized at x = (0, 1) with value -8
  std::vector<Eigen::MatrixXd> A{Eigen::MatrixXd::Constant(1, 1, 2.0),
                                 Eigen::MatrixXd::Constant(1, 1, 4.0)};
  mro::MroProblem prob;
  prob.families.push_back(mro::ConstraintFamily::concave_quadratic(A));
  prob.cost = Eigen::VectorXd::Zero(2);
  prob.epigraph = true;
  prob.xcons.Aeq = Eigen::MatrixXd::Ones(1, 2);
  prob.xcons.beq = Eigen::VectorXd::Ones(1);
  prob.xcons.lb = Eigen::VectorXd::Zero(2);
  prob.xcons.ub = Eigen::VectorXd::Constant(2, mro::kInf);
  prob.clustered = single_cluster(Eigen::VectorXd::Constant(1, 3.0));
  prob.spec = mro::UncertaintySpec(2.0, mro::NormSpec(2), 1.0, mro::SupportSet::full_space(1));
  prob.validate();

  const auto program = mro::emit_dual(prob);
  const auto sol = backend().solve(program, {});
  REQUIRE(sol.status == mro::SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-8.0).epsilon(1e-5));
  CHECK(sol.x[0] == doctest::Approx(0.0).epsilon(1e-4));
  CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("emit_dual rejects unsupported exponents and log-sum-exp") {
  mro::MroProblem prob;
  prob.families.push_back(mro::ConstraintFamily::log_sum_exp(2));
  prob.cost = Eigen::VectorXd::Zero(2);
  prob.epigraph = true;
  Eigen::MatrixXd rows = Eigen::MatrixXd::Ones(2, 2);
  rows(1, 0) = 2.0;
  prob.clustered = cluster_of(rows, 1);
  prob.spec = mro::UncertaintySpec(2.0, mro::NormSpec(2), 0.1,
                                   mro::SupportSet::box(Eigen::VectorXd::Constant(2, 0.01),
                                                        Eigen::VectorXd::Constant(2, mro::kInf)));
  CHECK_THROWS_AS(mro::emit_dual(prob), std::invalid_argument);

  std::vector<Eigen::MatrixXd> A{Eigen::MatrixXd::Identity(2, 2)};
  prob.families[0] = mro::ConstraintFamily::concave_quadratic(A);
  prob.cost = Eigen::VectorXd::Zero(1);
  prob.spec = mro::UncertaintySpec(3.0, mro::NormSpec(2), 0.1, mro::SupportSet::full_space(2));
  CHECK_THROWS_AS(mro::emit_dual(prob), std::invalid_argument);
}

TEST_CASE("problem json round trip preserves the solved objective") {
  std::vector<Eigen::MatrixXd> A{Eigen::MatrixXd::Constant(1, 1, 2.0),
                                 Eigen::MatrixXd::Constant(1, 1, 4.0)};
  mro::MroProblem prob;
  prob.families.push_back(mro::ConstraintFamily::concave_quadratic(A));
  prob.cost = Eigen::VectorXd::Zero(2);
  prob.epigraph = true;
  prob.xcons.Aeq = Eigen::MatrixXd::Ones(1, 2);
  prob.xcons.beq = Eigen::VectorXd::Ones(1);
  prob.xcons.lb = Eigen::VectorXd::Zero(2);
  prob.xcons.ub = Eigen::VectorXd::Constant(2, mro::kInf);
  prob.clustered = single_cluster(Eigen::VectorXd::Constant(1, 3.0));
  prob.spec = mro::UncertaintySpec(2.0, mro::NormSpec(2), 1.0, mro::SupportSet::full_space(1));

  const auto text = mro::mro_problem_to_json(prob);
  const auto back = mro::mro_problem_from_json(text);
  back.validate();
  CHECK(back.epigraph == prob.epigraph);
  CHECK(back.spec.p == prob.spec.p);
  CHECK(back.xcons.ub[0] == mro::kInf);

  const auto sol_a = backend().solve(mro::emit_dual(prob), {});
  const auto sol_b = backend().solve(mro::emit_dual(back), {});
  REQUIRE(sol_a.status == mro::SolveStatus::Optimal);
  REQUIRE(sol_b.status == mro::SolveStatus::Optimal);
  CHECK(sol_a.objective == doctest::Approx(sol_b.objective).epsilon(1e-9));
}
