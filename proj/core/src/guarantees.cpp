#include "mro/guarantees.hpp"

#include <algorithm>
#include <cmath>

namespace mro {

double adjusted_epsilon(double eps_base, const ClusteredSet& clustered) {
  if (eps_base < 0) throw std::invalid_argument("adjusted_epsilon: eps_base < 0");
  return eps_base + clustered.eta;
}

SandwichReport sandwich_check(const ConstraintFamily& family, const Eigen::VectorXd& x,
                              const Dataset& data, const ClusteredSet& clustered,
                              const UncertaintySpec& spec, const SolverBackend& backend,
                              double tol, const SolveOptions& opts) {
  SandwichReport rep;
  std::vector<Eigen::Index> trivial(static_cast<size_t>(data.n()));
  for (Eigen::Index i = 0; i < data.n(); ++i) trivial[static_cast<size_t>(i)] = i;
  const auto singleton = clustered_from_assignments(data, trivial, data.n(), spec.norm);

  rep.g_N = worst_case_value(family, x, singleton, spec, backend, false, opts);
  rep.g_K = worst_case_value(family, x, clustered, spec, backend, false, opts);
  rep.g_N_star =
      worst_case_value(family, x, singleton, spec, backend, /*relax_support=*/true, opts);
  rep.L = smoothness_bound(family, x, &data);
  rep.D = clustered.D;
  rep.bound = 0.5 * rep.L * rep.D;
  rep.delta_estimate = rep.g_N_star - rep.g_N;
  rep.holds_lower = rep.g_N <= rep.g_K + tol;
  rep.holds_upper = rep.g_K <= rep.g_N_star + rep.bound + tol;
  return rep;
}

BetaEstimate out_of_sample_beta(const GenFn& generator, const TrainFn& solve_fn, int R,
                                Eigen::Index N_train, Eigen::Index N_eval, uint64_t seed) {
  if (R < 1) throw std::invalid_argument("out_of_sample_beta: R < 1");
  BetaEstimate est;
  est.repetitions = R;
  int violated = 0;
  for (int r = 0; r < R; ++r) {
    // separate seed streams for training and evaluation draws
    const uint64_t base = seed + 1000003ull * static_cast<uint64_t>(r);
    const Dataset train = generator(base * 2, N_train);
    auto evaluator = solve_fn(train, r);
    if (!evaluator) {
      ++est.failures;
      continue;
    }
    const Dataset eval = generator(base * 2 + 1, N_eval);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < eval.n(); ++i) {
      mean += (*evaluator)(eval.samples.row(i).transpose());
    }
    mean /= static_cast<double>(eval.n());
    est.means.push_back(mean);
    if (mean > 0.0) ++violated;
  }
  const int counted = R - est.failures;
  est.beta_hat = counted > 0 ? static_cast<double>(violated) / counted : 0.0;
  return est;
}

EpsSelection cross_validate_epsilon(const std::vector<double>& eps_grid, double target_beta,
                                    const std::function<std::pair<double, double>(double)>& run) {
  if (eps_grid.empty()) throw std::invalid_argument("cross_validate_epsilon: empty grid");
  if (!(target_beta > 0.0 && target_beta < 1.0)) {
    throw std::invalid_argument("cross_validate_epsilon: target_beta must be in (0,1)");
  }
  if (!std::is_sorted(eps_grid.begin(), eps_grid.end())) {
    throw std::invalid_argument("cross_validate_epsilon: grid must be sorted");
  }
  EpsSelection sel;
  for (double eps : eps_grid) {
    const auto [beta, obj] = run(eps);
    sel.table.push_back({eps, beta, obj});
  }
  for (const auto& row : sel.table) {
    if (row.beta_hat <= target_beta) {
      sel.eps_star = row.eps;
      return sel;
    }
  }
  sel.eps_star = eps_grid.back();
  sel.warning = true;
  return sel;
}

}  // namespace mro
