#pragma once

#include "mro/cutting_plane.hpp"
#include "mro/guarantees.hpp"
#include "mro/reformulate.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mro {

/// Capacitated facility location: binary build decisions x, shipping shares
/// X (n x m), one uncertain capacity constraint per facility. Decision vector
/// layout: [x_0..x_{n-1}, X_00..X_0{m-1}, ..., X_{n-1}{m-1}].
struct FacilityInstance {
  Eigen::VectorXd build_cost;   // c, length n
  Eigen::MatrixXd ship_cost;    // C, n x m
  Eigen::VectorXd capacity;     // r, length n
  Dataset demands;              // N x m
};

FacilityInstance gen_facility(Eigen::Index n = 5, Eigen::Index m = 25, Eigen::Index N = 50,
                              uint64_t seed = 0);
MroProblem facility_problem(const FacilityInstance& inst, ClusteredSet clustered, double eps,
                            double p = kInf);

struct CapitalInstance {
  Eigen::MatrixXd F;  // n x (T+1) cash flows
  Eigen::VectorXd h;  // project weights
  double theta = 0.0;
  Dataset rates;      // N x n discount-rate samples
};

CapitalInstance gen_capital(Eigen::Index n = 20, Eigen::Index T = 5, Eigen::Index N = 120,
                            double theta = 12.0, uint64_t seed = 0);
MroProblem capital_problem(const CapitalInstance& inst, ClusteredSet clustered, double eps,
                           double p = 2.0);

struct QuadraticInstance {
  std::vector<Eigen::MatrixXd> A;
  Dataset data;
};

QuadraticInstance gen_quadratic(Eigen::Index n = 10, Eigen::Index m = 10, Eigen::Index N = 90,
                                uint64_t seed = 0);
MroProblem quadratic_problem(const QuadraticInstance& inst, ClusteredSet clustered, double eps,
                             double p = 2.0);

struct LogSumExpInstance {
  Eigen::Index n = 0;
  Dataset data;
};

LogSumExpInstance gen_logsumexp(Eigen::Index n = 30, Eigen::Index N = 90, uint64_t seed = 0);
MroProblem logsumexp_problem(const LogSumExpInstance& inst, ClusteredSet clustered, double eps,
                             double p = 2.0);

struct ExperimentConfig {
  std::string experiment;  // facility | capital | quadratic | logsumexp
  Eigen::Index n = -1, m = -1, N = -1, T = -1;  // -1 keeps the per-experiment default
  double theta = 12.0;
  std::vector<Eigen::Index> K_list;
  std::vector<double> eps_grid;
  double p = 0.0;  // 0 keeps the per-experiment default
  uint64_t seed = 0;
  std::string backend = "clarabel";
  std::string out;
  int beta_R = 0;           // repetitions for the beta_hat column; 0 skips it
  Eigen::Index N_eval = 0;  // 0 means 10 * N_train

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
};

/// A fully prepared experiment: training data plus a builder that turns a
/// clustering and a radius into the robust problem.
struct ExperimentContext {
  std::string experiment;
  Eigen::Index N_train = 0;
  double p = 0.0;
  Dataset train;
  std::function<MroProblem(ClusteredSet, double eps)> make_problem;
  GenFn draw;  // fresh datasets from the same distribution
};

ExperimentContext make_experiment(const ExperimentConfig& config);

struct ResultRecord {
  std::string experiment;
  Eigen::Index K = 0;
  double eps = 0.0;
  double objective = 0.0;
  double solve_time_s = 0.0;  // backend time only
  std::optional<double> beta_hat;
  double D = 0.0;
  double eta = 0.0;
  std::string status;
  uint64_t seed = 0;
};

std::vector<ResultRecord> run_sweep(const ExperimentConfig& config);

/// Columns: experiment,K,eps,objective,solve_time_s,beta_hat,D,eta,status,seed
void write_records_csv(const std::vector<ResultRecord>& records, std::ostream& os);

}  // namespace mro
