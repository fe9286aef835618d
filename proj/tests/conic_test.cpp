#include <doctest.h>

#include "mro/conic.hpp"

#include <cmath>

using mro::ConeKind;
using mro::LinExpr;
using mro::ProgramBuilder;
using mro::SolveStatus;

TEST_CASE("1-D LP: min x s.t. x - 1 >= 0") {
  ProgramBuilder pb;
  auto x = pb.add_var("x");
  pb.add_nonneg(LinExpr::var(x) - 1.0);
  pb.set_objective(LinExpr::var(x));
  auto backend = mro::make_backend("clarabel");
  auto sol = backend->solve(pb.build(), {});
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.x[x] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("3-4-5 second-order cone") {
  ProgramBuilder pb;
  auto t = pb.add_var("t");
  pb.add_block(ConeKind::SecondOrder, {LinExpr::var(t), 3.0, 4.0});
  pb.set_objective(LinExpr::var(t));
  auto sol = mro::make_backend("clarabel")->solve(pb.build(), {});
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("rotated cone rewrite: min t s.t. 2 * t * 1 >= 3^2") {
  ProgramBuilder pb;
  auto t = pb.add_var("t");
  pb.add_block(ConeKind::RotatedSecondOrder, {LinExpr::var(t), 1.0, 3.0});
  pb.set_objective(LinExpr::var(t));
  auto sol = mro::make_backend("clarabel")->solve(pb.build(), {});
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(4.5).epsilon(1e-6));
}

TEST_CASE("power cone: max z s.t. (1, 1, z) in pow(0.5)") {
  ProgramBuilder pb;
  auto z = pb.add_var("z");
  pb.add_block(ConeKind::Power3D, {1.0, 1.0, LinExpr::var(z)}, 0.5);
  pb.set_objective(-LinExpr::var(z));
  auto sol = mro::make_backend("clarabel")->solve(pb.build(), {});
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[z] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("exponential cone: min z s.t. 1 * e^(1/1) <= z") {
  ProgramBuilder pb;
  auto z = pb.add_var("z");
  pb.add_block(ConeKind::Exponential, {1.0, 1.0, LinExpr::var(z)});
  pb.set_objective(LinExpr::var(z));
  auto sol = mro::make_backend("clarabel")->solve(pb.build(), {});
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
}

TEST_CASE("infeasible and unbounded statuses") {
  {
    ProgramBuilder pb;
    auto x = pb.add_var("x");
    pb.add_nonneg(LinExpr::var(x) - 1.0);
    pb.add_nonneg(-LinExpr::var(x));
    pb.set_objective(LinExpr::var(x));
    CHECK(mro::make_backend("clarabel")->solve(pb.build(), {}).status ==
          SolveStatus::Infeasible);
  }
  {
    ProgramBuilder pb;
    auto x = pb.add_var("x");
    pb.add_nonneg(LinExpr::var(x));
    pb.set_objective(-LinExpr::var(x));
    CHECK(mro::make_backend("clarabel")->solve(pb.build(), {}).status ==
          SolveStatus::Unbounded);
  }
}

TEST_CASE("json round trip is bit-exact") {
  ProgramBuilder pb;
  auto x = pb.add_var("x");
  auto y = pb.add_var("y");
  pb.add_block(ConeKind::SecondOrder, {LinExpr::var(x), 0.1 + 0.2, LinExpr::var(y, -1.0 / 3.0)});
  pb.add_block(ConeKind::Power3D, {LinExpr::var(x), 1.0, LinExpr::var(y)}, 2.0 / 3.0);
  pb.mark_binary(y);
  pb.set_objective(LinExpr::var(x, std::sqrt(2.0)) + 0.7);
  const auto p = pb.build();
  const auto q = mro::ConicProgram::load_json(p.dump_json());
  CHECK(q.num_vars == p.num_vars);
  CHECK(q.objective_offset == p.objective_offset);
  CHECK(q.objective == p.objective);
  CHECK(q.binary_vars == p.binary_vars);
  CHECK(q.var_names == p.var_names);
  REQUIRE(q.blocks.size() == p.blocks.size());
  for (size_t i = 0; i < p.blocks.size(); ++i) {
    CHECK(q.blocks[i].kind == p.blocks[i].kind);
    CHECK(q.blocks[i].alpha == p.blocks[i].alpha);
    CHECK(q.blocks[i].c == p.blocks[i].c);
    CHECK(Eigen::MatrixXd(q.blocks[i].A) == Eigen::MatrixXd(p.blocks[i].A));
  }
}

TEST_CASE("binary enumeration") {
  auto backend = mro::make_backend("clarabel");

  // min x1 + x2, x binary, x1 + x2 >= 1 -> objective 1
  {
    ProgramBuilder pb;
    auto x1 = pb.add_var("x1");
    auto x2 = pb.add_var("x2");
    pb.mark_binary(x1);
    pb.mark_binary(x2);
    pb.add_nonneg(LinExpr::var(x1) + LinExpr::var(x2) - 1.0);
    pb.set_objective(LinExpr::var(x1) + LinExpr::var(x2));
    auto sol = mro::solve_mixed_binary(pb.build(), *backend);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
    // tie between (0,1) and (1,0) breaks toward the lexicographically smallest
    CHECK(sol.x[x1] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.x[x2] == doctest::Approx(1.0).epsilon(1e-6));
  }

  // all assignments infeasible
  {
    ProgramBuilder pb;
    auto x1 = pb.add_var("x1");
    pb.mark_binary(x1);
    pb.add_nonneg(LinExpr::var(x1) - 2.0);
    pb.set_objective(LinExpr::var(x1));
    CHECK(mro::solve_mixed_binary(pb.build(), *backend).status == SolveStatus::Infeasible);
  }

  // empty integrality set equals plain solve
  {
    ProgramBuilder pb;
    auto x = pb.add_var("x");
    pb.add_nonneg(LinExpr::var(x) - 1.0);
    pb.set_objective(LinExpr::var(x));
    const auto p = pb.build();
    CHECK(mro::solve_mixed_binary(p, *backend).objective ==
          doctest::Approx(backend->solve(p, {}).objective));
  }

  // enumeration cap error
  {
    ProgramBuilder pb;
    auto xs = pb.add_vars("x", 3);
    for (auto i : xs) pb.mark_binary(i);
    pb.set_objective(LinExpr::var(xs[0]));
    CHECK_THROWS_AS(mro::solve_mixed_binary(pb.build(), *backend, {}, 2), std::invalid_argument);
  }
}

TEST_CASE("validation rejects malformed programs") {
  mro::ConicProgram p;
  p.num_vars = 1;
  p.objective = Eigen::VectorXd::Zero(1);
  mro::ConeBlock blk;
  blk.kind = ConeKind::Power3D;
  blk.alpha = 1.5;
  blk.A.resize(3, 1);
  blk.c = Eigen::VectorXd::Zero(3);
  p.blocks.push_back(blk);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.blocks[0].alpha = 0.5;
  CHECK_NOTHROW(p.validate());
  p.binary_vars.push_back(7);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
