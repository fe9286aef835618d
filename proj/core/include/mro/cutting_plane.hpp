#pragma once

#include "mro/reformulate.hpp"

#include <vector>

namespace mro {

struct OracleConfig {
  int max_ascent_iters = 500;
  double grad_tol = 1e-8;
  double projection_tol = 1e-10;
  int max_dykstra_sweeps = 200;
  double fallback_step = 1e-2;  // initial step when no smoothness bound helps
};

struct OracleResult {
  Eigen::MatrixXd points;  // K x m, feasible for ball and support
  double value = 0.0;      // gbar at the points
  bool converged = false;
  int iterations = 0;
};

/// Worst-case maximization of gbar(., x) over the clustered ball intersected
/// with the support, by projected gradient ascent with backtracking. Inner
/// norm must be L2; box-like supports only.
OracleResult max_oracle(const ConstraintFamily& family, const Eigen::VectorXd& x,
                        const ClusteredSet& clustered, const UncertaintySpec& spec,
                        const OracleConfig& cfg = {});

struct CuttingPlaneConfig {
  int max_iter = 100;
  double violation_tol = 1e-6;
  double dedup_tol = 1e-9;  // max-norm distance under which a cut is a repeat
  OracleConfig oracle;
};

struct CutHistoryEntry {
  int iteration = 0;
  double master_objective = 0.0;
  double oracle_value = 0.0;  // violation: gbar (constraint mode) or gbar - tau
  double time_s = 0.0;
};

/// Master problem over x with one constraint per (scenario set, family).
/// Solution layout: x[0..n-1] is the decision; x[n] is tau in epigraph mode.
Solution master_solve(const MroProblem& prob, const std::vector<Eigen::MatrixXd>& scenarios,
                      const SolverBackend& backend, const SolveOptions& opts = {});

struct CuttingPlaneResult {
  Solution solution;
  int iterations = 0;
  bool converged = false;
  std::vector<CutHistoryEntry> history;
};

CuttingPlaneResult cutting_plane_solve(const MroProblem& prob, const CuttingPlaneConfig& cfg,
                                       const SolverBackend& backend,
                                       const SolveOptions& opts = {});

}  // namespace mro
