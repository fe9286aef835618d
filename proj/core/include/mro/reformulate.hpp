#pragma once

#include "mro/clustering.hpp"
#include "mro/conic.hpp"
#include "mro/families.hpp"
#include "mro/types.hpp"

#include <string>
#include <vector>

namespace mro {

/// Deterministic linear side constraints on the decision x.
struct XConstraints {
  Eigen::MatrixXd G;    // G x <= h
  Eigen::VectorXd h;
  Eigen::MatrixXd Aeq;  // Aeq x = beq
  Eigen::VectorXd beq;
  Eigen::VectorXd lb, ub;  // elementwise bounds, +-inf allowed; empty = free
  std::vector<Eigen::Index> binary;

  void validate(Eigen::Index n) const;
};

/// A robust problem instance: minimize cost'x subject to every family's
/// worst case over the clustered ball being <= 0. With epigraph set, the
/// single family's worst case moves into the objective instead:
/// minimize cost'x + max_u gbar(u, x).
struct MroProblem {
  std::vector<ConstraintFamily> families;  // one robust constraint each
  Eigen::VectorXd cost;
  bool epigraph = false;       // requires exactly one family
  bool relax_support = false;  // drop the support rows from the dual
  XConstraints xcons;
  ClusteredSet clustered;
  UncertaintySpec spec;

  Eigen::Index n() const { return cost.size(); }
  void validate() const;
};

/// Dual reformulation for finite p (1 or 2): variables lambda >= 0, s_k,
/// zeta_k, support multipliers gamma_k >= 0, plus family conjugate variables;
/// the norm-power term enters as a rotated second-order cone for p = 2 and as
/// the dual-norm bound ||zeta_k||_* <= lambda for p = 1.
ConicProgram emit_dual_finite_p(const MroProblem& prob);

/// Dual reformulation for p = inf: per-cluster eps * ||zeta_k||_* terms and
/// no lambda variable.
ConicProgram emit_dual_inf(const MroProblem& prob);

/// Dispatches on prob.spec.p; rejects p not in {1, 2, inf} and LogSumExp.
ConicProgram emit_dual(const MroProblem& prob);

/// Worst-case constraint value at a fixed decision: the optimal value of the
/// inner maximization over the clustered ball, computed through the dual with
/// x frozen. relax_support drops the support rows (the N* variant). LogSumExp
/// routes through the primal ascent oracle instead of a dual.
double worst_case_value(const ConstraintFamily& family, const Eigen::VectorXd& x,
                        const ClusteredSet& clustered, const UncertaintySpec& spec,
                        const SolverBackend& backend, bool relax_support = false,
                        const SolveOptions& opts = {});

std::string mro_problem_to_json(const MroProblem& prob);
MroProblem mro_problem_from_json(const std::string& text);

}  // namespace mro
