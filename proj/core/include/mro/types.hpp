#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace mro {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// N samples of the uncertain vector, one observation per row.
struct Dataset {
  Eigen::MatrixXd samples;  // N x m

  Dataset() = default;
  explicit Dataset(Eigen::MatrixXd s) : samples(std::move(s)) {
    if (samples.rows() < 1 || samples.cols() < 1) {
      throw std::invalid_argument("Dataset: need at least one sample and one dimension");
    }
    if (!samples.allFinite()) {
      throw std::invalid_argument("Dataset: entries must be finite");
    }
  }

  Eigen::Index n() const { return samples.rows(); }
  Eigen::Index m() const { return samples.cols(); }
};

enum class SupportKind { FullSpace, Box, Polyhedron };

/// Support set of the uncertainty: full space, a box (infinite bounds
/// allowed), or an explicit polyhedron {u | Cu <= b}.
class SupportSet {
 public:
  static SupportSet full_space(Eigen::Index m) {
    SupportSet s;
    s.kind_ = SupportKind::FullSpace;
    s.dim_ = m;
    return s;
  }

  static SupportSet box(Eigen::VectorXd lb, Eigen::VectorXd ub) {
    if (lb.size() != ub.size()) throw std::invalid_argument("SupportSet: lb/ub size mismatch");
    for (Eigen::Index i = 0; i < lb.size(); ++i) {
      if (lb[i] > ub[i]) throw std::invalid_argument("SupportSet: lb > ub");
    }
    SupportSet s;
    s.kind_ = SupportKind::Box;
    s.dim_ = lb.size();
    s.lb_ = std::move(lb);
    s.ub_ = std::move(ub);
    return s;
  }

  static SupportSet nonnegative_orthant(Eigen::Index m) {
    return box(Eigen::VectorXd::Zero(m), Eigen::VectorXd::Constant(m, kInf));
  }

  // Requires a witness point to certify nonemptiness.
  static SupportSet polyhedron(Eigen::MatrixXd C, Eigen::VectorXd b, Eigen::VectorXd witness) {
    if (C.rows() != b.size()) throw std::invalid_argument("SupportSet: C/b row mismatch");
    if (C.cols() != witness.size()) throw std::invalid_argument("SupportSet: witness dimension");
    if (((C * witness - b).array() > 1e-9).any()) {
      throw std::invalid_argument("SupportSet: witness violates Cu <= b");
    }
    SupportSet s;
    s.kind_ = SupportKind::Polyhedron;
    s.dim_ = C.cols();
    s.C_ = std::move(C);
    s.b_ = std::move(b);
    s.witness_ = std::move(witness);
    return s;
  }

  SupportKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  const Eigen::VectorXd& lb() const { return lb_; }
  const Eigen::VectorXd& ub() const { return ub_; }

  bool is_box_like() const { return kind_ != SupportKind::Polyhedron; }

  bool contains(const Eigen::VectorXd& u, double tol = 1e-9) const {
    if (u.size() != dim_) throw std::invalid_argument("SupportSet::contains: dimension mismatch");
    switch (kind_) {
      case SupportKind::FullSpace:
        return true;
      case SupportKind::Box:
        return (u.array() >= lb_.array() - tol).all() && (u.array() <= ub_.array() + tol).all();
      case SupportKind::Polyhedron:
        return ((C_ * u - b_).array() <= tol).all();
    }
    return false;
  }

  /// Rows of the Cu <= b representation. Full space yields zero rows.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> halfspaces() const;

 private:
  SupportKind kind_ = SupportKind::FullSpace;
  Eigen::Index dim_ = 0;
  Eigen::VectorXd lb_, ub_;
  Eigen::MatrixXd C_;
  Eigen::VectorXd b_, witness_;
};

/// Inner norm of the uncertainty set, with its Holder conjugate.
struct NormSpec {
  double order = 2.0;  // 1, 2, or inf

  NormSpec() = default;
  explicit NormSpec(double o) : order(o) {
    if (o != 1.0 && o != 2.0 && o != kInf) {
      throw std::invalid_argument("NormSpec: order must be 1, 2, or inf");
    }
  }

  double dual_order() const {
    if (order == 1.0) return kInf;
    if (order == kInf) return 1.0;
    return 2.0;
  }

  double value(const Eigen::VectorXd& v) const {
    if (order == 1.0) return v.lpNorm<1>();
    if (order == kInf) return v.lpNorm<Eigen::Infinity>();
    return v.norm();
  }

  double dual_value(const Eigen::VectorXd& v) const {
    if (order == 1.0) return v.lpNorm<Eigen::Infinity>();
    if (order == kInf) return v.lpNorm<1>();
    return v.norm();
  }
};

/// Parameters of the uncertainty set: exponent p, inner norm, radius, support.
struct UncertaintySpec {
  double p = 2.0;  // integer >= 1, or inf
  NormSpec norm;
  double epsilon = 0.0;
  SupportSet support;

  UncertaintySpec() = default;
  UncertaintySpec(double p_, NormSpec norm_, double eps, SupportSet sup)
      : p(p_), norm(norm_), epsilon(eps), support(std::move(sup)) {
    if (epsilon < 0) throw std::invalid_argument("UncertaintySpec: epsilon < 0");
    if (p != kInf && (p < 1.0 || p != std::floor(p))) {
      throw std::invalid_argument("UncertaintySpec: p must be an integer >= 1 or inf");
    }
  }

  bool finite_p() const { return p != kInf; }

  /// Holder conjugate q = p/(p-1).
  double q() const {
    if (p == kInf) return 1.0;
    if (p == 1.0) return kInf;
    return p / (p - 1.0);
  }
};

/// Canonicalizes a box into Cu <= b rows; rows exist only for finite bounds.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> box_to_polyhedron(const Eigen::VectorXd& lb,
                                                              const Eigen::VectorXd& ub);

/// sup_{u in box} y'u, with the convention 0 * inf = 0.
double support_function_box(const Eigen::VectorXd& y, const Eigen::VectorXd& lb,
                            const Eigen::VectorXd& ub);

/// True iff the K points lie in the uncertainty ball around the centroids
/// (weighted power sum for finite p, per-cluster distances for p = inf)
/// within additive tol, and every point satisfies the support.
bool ball_membership(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                     const Eigen::VectorXd& weights, const UncertaintySpec& spec,
                     double tol = 1e-9);

}  // namespace mro
