#include "mro/types.hpp"

#include <cmath>

namespace mro {

std::pair<Eigen::MatrixXd, Eigen::VectorXd> box_to_polyhedron(const Eigen::VectorXd& lb,
                                                              const Eigen::VectorXd& ub) {
  if (lb.size() != ub.size()) throw std::invalid_argument("box_to_polyhedron: size mismatch");
  const Eigen::Index m = lb.size();
  Eigen::Index rows = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lb[i] > ub[i]) throw std::invalid_argument("box_to_polyhedron: lb > ub");
    if (std::isfinite(ub[i])) ++rows;
    if (std::isfinite(lb[i])) ++rows;
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(rows, m);
  Eigen::VectorXd b(rows);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isfinite(ub[i])) {
      C(r, i) = 1.0;
      b[r++] = ub[i];
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isfinite(lb[i])) {
      C(r, i) = -1.0;
      b[r++] = -lb[i];
    }
  }
  return {C, b};
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> SupportSet::halfspaces() const {
  switch (kind_) {
    case SupportKind::FullSpace:
      return {Eigen::MatrixXd::Zero(0, dim_), Eigen::VectorXd(0)};
    case SupportKind::Box:
      return box_to_polyhedron(lb_, ub_);
    case SupportKind::Polyhedron:
      return {C_, b_};
  }
  throw std::logic_error("SupportSet::halfspaces: bad kind");
}

double support_function_box(const Eigen::VectorXd& y, const Eigen::VectorXd& lb,
                            const Eigen::VectorXd& ub) {
  if (y.size() != lb.size() || y.size() != ub.size()) {
    throw std::invalid_argument("support_function_box: size mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;  // 0 * inf = 0
    const double bound = y[i] > 0 ? ub[i] : lb[i];
    const double term = y[i] * bound;
    if (term == kInf) return kInf;
    total += term;
  }
  return total;
}

bool ball_membership(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                     const Eigen::VectorXd& weights, const UncertaintySpec& spec, double tol) {
  const Eigen::Index K = points.rows();
  if (centroids.rows() != K || centroids.cols() != points.cols() || weights.size() != K) {
    throw std::invalid_argument("ball_membership: dimension mismatch");
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    if (!spec.support.contains(points.row(k).transpose(), tol)) return false;
  }
  if (spec.finite_p()) {
    double power_sum = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const double d = spec.norm.value((points.row(k) - centroids.row(k)).transpose());
      power_sum += weights[k] * std::pow(d, spec.p);
    }
    return power_sum <= std::pow(spec.epsilon, spec.p) + tol;
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    const double d = spec.norm.value((points.row(k) - centroids.row(k)).transpose());
    if (d > spec.epsilon + tol) return false;
  }
  return true;
}

}  // namespace mro
