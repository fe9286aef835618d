#pragma once

#include "mro/types.hpp"

#include <string>
#include <vector>

namespace mro {

enum class FamilyKind { Affine, ConcaveQuadratic, CapitalBudgetingNPV, LogSumExp };

std::string family_kind_name(FamilyKind kind);
FamilyKind family_kind_from_name(const std::string& name);

/// Closed set of supported constraint functions g(u, x), concave in u:
///   Affine               g = (a + P u)^T x - b
///   ConcaveQuadratic     g = -1/2 sum_i x_i u^T A_i u,  A_i symmetric PD
///   CapitalBudgetingNPV  g = -sum_j sum_t F_jt x_j (1+u_j)^{-t},  m = n
///   LogSumExp            g = log(sum_i u_i e^{x_i}),  m = n, u >= 0.01
class ConstraintFamily {
 public:
  static ConstraintFamily affine(Eigen::VectorXd a, Eigen::MatrixXd P, double b);
  static ConstraintFamily concave_quadratic(std::vector<Eigen::MatrixXd> A);
  static ConstraintFamily capital_npv(Eigen::MatrixXd F);  // n x (T+1)
  static ConstraintFamily log_sum_exp(Eigen::Index n);

  FamilyKind kind() const { return kind_; }
  Eigen::Index n() const { return n_; }  // decision dimension
  Eigen::Index m() const { return m_; }  // uncertainty dimension

  const Eigen::VectorXd& a() const { return a_; }
  const Eigen::MatrixXd& P() const { return P_; }
  double b() const { return b_; }
  const std::vector<Eigen::MatrixXd>& A() const { return A_; }
  /// Lower-triangular Cholesky factor of A_i.
  const std::vector<Eigen::MatrixXd>& chol() const { return chol_; }
  const Eigen::MatrixXd& F() const { return F_; }
  Eigen::Index horizon() const { return F_.cols() - 1; }

  /// Elementwise lower bound of the family's own domain (-inf when free).
  Eigen::VectorXd domain_lb() const;
  bool in_domain(const Eigen::VectorXd& u, double tol = 0.0) const;

  std::string to_json() const;
  static ConstraintFamily from_json(const std::string& text);

 private:
  ConstraintFamily() = default;

  FamilyKind kind_ = FamilyKind::Affine;
  Eigen::Index n_ = 0, m_ = 0;
  Eigen::VectorXd a_;
  Eigen::MatrixXd P_;
  double b_ = 0.0;
  std::vector<Eigen::MatrixXd> A_, chol_;
  Eigen::MatrixXd F_;
};

enum class Monotonicity { Increasing, Decreasing, NoneNeeded };

struct AssumptionReport {
  bool domain_ok = true;
  Monotonicity monotonicity = Monotonicity::NoneNeeded;
  bool concave_in_u = true;
};

double eval_g(const ConstraintFamily& family, const Eigen::VectorXd& u, const Eigen::VectorXd& x);

Eigen::VectorXd grad_g_u(const ConstraintFamily& family, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& x);

/// Weighted mean of g over scenario points (one point per cluster row).
double gbar(const ConstraintFamily& family, const Eigen::MatrixXd& scenario_points,
            const Eigen::VectorXd& weights, const Eigen::VectorXd& x);

/// Upper bound on the Lipschitz constant of the u-gradient at this x; the
/// dataset enters only for LogSumExp (minimum of d_k' e^x over rows).
double smoothness_bound(const ConstraintFamily& family, const Eigen::VectorXd& x,
                        const Dataset* dataset = nullptr);

AssumptionReport check_assumptions(const ConstraintFamily& family, const SupportSet& support);

}  // namespace mro
