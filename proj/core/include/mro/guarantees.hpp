#pragma once

#include "mro/reformulate.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace mro {

/// Radius inflation that transfers the K=N guarantee to K clusters:
/// eps_base plus the maximum point-to-centroid distance.
double adjusted_epsilon(double eps_base, const ClusteredSet& clustered);

struct SandwichReport {
  double g_N = 0.0;       // worst case with every point its own cluster
  double g_K = 0.0;       // worst case with the given clustering
  double g_N_star = 0.0;  // g_N with the support rows dropped
  double L = 0.0;
  double D = 0.0;
  double bound = 0.0;           // L / 2 * D
  double delta_estimate = 0.0;  // g_N_star - g_N
  bool holds_lower = false;     // g_N <= g_K + tol
  bool holds_upper = false;     // g_K <= g_N_star + bound + tol
};

SandwichReport sandwich_check(const ConstraintFamily& family, const Eigen::VectorXd& x,
                              const Dataset& data, const ClusteredSet& clustered,
                              const UncertaintySpec& spec, const SolverBackend& backend,
                              double tol = 1e-6, const SolveOptions& opts = {});

struct BetaEstimate {
  double beta_hat = 0.0;
  int repetitions = 0;
  std::vector<double> means;  // per successful repetition, empirical mean of g
  int failures = 0;           // solves excluded from the ratio
};

/// Per repetition r: draw a training set, hand it to solve_fn; on success,
/// average the returned evaluator over a fresh evaluation set. A repetition
/// counts as violated when that mean is strictly positive.
using TrainFn = std::function<std::optional<std::function<double(const Eigen::VectorXd&)>>(
    const Dataset& train, int repetition)>;
using GenFn = std::function<Dataset(uint64_t seed, Eigen::Index count)>;

BetaEstimate out_of_sample_beta(const GenFn& generator, const TrainFn& solve_fn, int R,
                                Eigen::Index N_train, Eigen::Index N_eval, uint64_t seed);

struct EpsTableRow {
  double eps = 0.0;
  double beta_hat = 0.0;
  double mean_objective = 0.0;
};

struct EpsSelection {
  double eps_star = 0.0;
  bool warning = false;  // no grid point met the target; largest returned
  std::vector<EpsTableRow> table;
};

/// run(eps) -> (beta_hat, mean objective). Picks the smallest eps whose
/// beta_hat meets the target.
EpsSelection cross_validate_epsilon(const std::vector<double>& eps_grid, double target_beta,
                                    const std::function<std::pair<double, double>(double)>& run);

}  // namespace mro
