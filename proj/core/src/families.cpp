#include "mro/families.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace mro {
namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    rows.push_back(std::vector<double>(M.row(r).begin(), M.row(r).end()));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto nr = static_cast<Eigen::Index>(j.size());
  if (nr == 0) return {};
  const auto nc = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd M(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      M(r, c) = j[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
    }
  }
  return M;
}

double spectral_norm(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

std::string family_kind_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Affine: return "affine";
    case FamilyKind::ConcaveQuadratic: return "concave-quadratic";
    case FamilyKind::CapitalBudgetingNPV: return "capital-npv";
    case FamilyKind::LogSumExp: return "log-sum-exp";
  }
  throw std::logic_error("bad FamilyKind");
}

FamilyKind family_kind_from_name(const std::string& name) {
  if (name == "affine") return FamilyKind::Affine;
  if (name == "concave-quadratic") return FamilyKind::ConcaveQuadratic;
  if (name == "capital-npv") return FamilyKind::CapitalBudgetingNPV;
  if (name == "log-sum-exp") return FamilyKind::LogSumExp;
  throw std::invalid_argument("unknown family kind: " + name);
}

ConstraintFamily ConstraintFamily::affine(Eigen::VectorXd a, Eigen::MatrixXd P, double b) {
  if (a.size() != P.rows()) throw std::invalid_argument("affine: a/P row mismatch");
  ConstraintFamily f;
  f.kind_ = FamilyKind::Affine;
  f.n_ = a.size();
  f.m_ = P.cols();
  f.a_ = std::move(a);
  f.P_ = std::move(P);
  f.b_ = b;
  return f;
}

ConstraintFamily ConstraintFamily::concave_quadratic(std::vector<Eigen::MatrixXd> A) {
  if (A.empty()) throw std::invalid_argument("concave_quadratic: empty A list");
  ConstraintFamily f;
  f.kind_ = FamilyKind::ConcaveQuadratic;
  f.n_ = static_cast<Eigen::Index>(A.size());
  f.m_ = A[0].rows();
  for (const auto& Ai : A) {
    if (Ai.rows() != f.m_ || Ai.cols() != f.m_) {
      throw std::invalid_argument("concave_quadratic: A_i must be square of equal size");
    }
    if (!Ai.isApprox(Ai.transpose(), 1e-10)) {
      throw std::invalid_argument("concave_quadratic: A_i must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Ai);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("concave_quadratic: A_i must be positive definite");
    }
    f.chol_.push_back(llt.matrixL());
  }
  f.A_ = std::move(A);
  return f;
}

ConstraintFamily ConstraintFamily::capital_npv(Eigen::MatrixXd F) {
  if (F.rows() < 1 || F.cols() < 1) throw std::invalid_argument("capital_npv: empty F");
  if (!F.allFinite()) throw std::invalid_argument("capital_npv: F must be finite");
  ConstraintFamily f;
  f.kind_ = FamilyKind::CapitalBudgetingNPV;
  f.n_ = F.rows();
  f.m_ = F.rows();
  f.F_ = std::move(F);
  return f;
}

ConstraintFamily ConstraintFamily::log_sum_exp(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("log_sum_exp: n < 1");
  ConstraintFamily f;
  f.kind_ = FamilyKind::LogSumExp;
  f.n_ = n;
  f.m_ = n;
  return f;
}

Eigen::VectorXd ConstraintFamily::domain_lb() const {
  switch (kind_) {
    case FamilyKind::Affine:
    case FamilyKind::ConcaveQuadratic:
      return Eigen::VectorXd::Constant(m_, -kInf);
    case FamilyKind::CapitalBudgetingNPV:
      return Eigen::VectorXd::Zero(m_);
    case FamilyKind::LogSumExp:
      return Eigen::VectorXd::Constant(m_, 0.01);
  }
  throw std::logic_error("bad FamilyKind");
}

bool ConstraintFamily::in_domain(const Eigen::VectorXd& u, double tol) const {
  if (u.size() != m_) throw std::invalid_argument("in_domain: dimension mismatch");
  return (u.array() >= domain_lb().array() - tol).all();
}

namespace {

// Where g itself is finite; wider than domain_lb, which is the region where
// the monotonicity assumption is certified.
void check_evaluable(const ConstraintFamily& f, const Eigen::VectorXd& u, const char* who) {
  bool ok = true;
  switch (f.kind()) {
    case FamilyKind::Affine:
    case FamilyKind::ConcaveQuadratic:
      break;
    case FamilyKind::CapitalBudgetingNPV:
      ok = (u.array() > -1.0).all();
      break;
    case FamilyKind::LogSumExp:
      ok = (u.array() > 0.0).all();
      break;
  }
  if (!ok) throw std::domain_error(std::string(who) + ": u outside the family domain");
}

}  // namespace

double eval_g(const ConstraintFamily& f, const Eigen::VectorXd& u, const Eigen::VectorXd& x) {
  if (u.size() != f.m() || x.size() != f.n()) throw std::invalid_argument("eval_g: dimensions");
  check_evaluable(f, u, "eval_g");
  switch (f.kind()) {
    case FamilyKind::Affine:
      return (f.a() + f.P() * u).dot(x) - f.b();
    case FamilyKind::ConcaveQuadratic: {
      double v = 0.0;
      for (Eigen::Index i = 0; i < f.n(); ++i) v += x[i] * u.dot(f.A()[static_cast<size_t>(i)] * u);
      return -0.5 * v;
    }
    case FamilyKind::CapitalBudgetingNPV: {
      double v = 0.0;
      for (Eigen::Index j = 0; j < f.n(); ++j) {
        for (Eigen::Index t = 0; t <= f.horizon(); ++t) {
          v += f.F()(j, t) * x[j] * std::pow(1.0 + u[j], -static_cast<double>(t));
        }
      }
      return -v;
    }
    case FamilyKind::LogSumExp:
      return std::log(u.dot(x.array().exp().matrix()));
  }
  throw std::logic_error("bad FamilyKind");
}

Eigen::VectorXd grad_g_u(const ConstraintFamily& f, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& x) {
  if (u.size() != f.m() || x.size() != f.n()) throw std::invalid_argument("grad_g_u: dimensions");
  check_evaluable(f, u, "grad_g_u");
  switch (f.kind()) {
    case FamilyKind::Affine:
      return f.P().transpose() * x;
    case FamilyKind::ConcaveQuadratic: {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(f.m());
      for (Eigen::Index i = 0; i < f.n(); ++i) g -= x[i] * (f.A()[static_cast<size_t>(i)] * u);
      return g;
    }
    case FamilyKind::CapitalBudgetingNPV: {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(f.m());
      for (Eigen::Index j = 0; j < f.n(); ++j) {
        for (Eigen::Index t = 1; t <= f.horizon(); ++t) {
          g[j] += f.F()(j, t) * x[j] * static_cast<double>(t) *
                  std::pow(1.0 + u[j], -static_cast<double>(t) - 1.0);
        }
      }
      return g;
    }
    case FamilyKind::LogSumExp: {
      const Eigen::VectorXd e = x.array().exp();
      return e / u.dot(e);
    }
  }
  throw std::logic_error("bad FamilyKind");
}

double gbar(const ConstraintFamily& f, const Eigen::MatrixXd& scenario_points,
            const Eigen::VectorXd& weights, const Eigen::VectorXd& x) {
  if (scenario_points.rows() != weights.size()) throw std::invalid_argument("gbar: K mismatch");
  if (std::abs(weights.sum() - 1.0) > 1e-8 || (weights.array() <= 0).any()) {
    throw std::invalid_argument("gbar: weights must be positive and sum to 1");
  }
  double v = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    v += weights[k] * eval_g(f, scenario_points.row(k).transpose(), x);
  }
  return v;
}

double smoothness_bound(const ConstraintFamily& f, const Eigen::VectorXd& x,
                        const Dataset* dataset) {
  if (x.size() != f.n()) throw std::invalid_argument("smoothness_bound: x dimension");
  switch (f.kind()) {
    case FamilyKind::Affine:
      return 0.0;
    case FamilyKind::ConcaveQuadratic: {
      Eigen::MatrixXd S = Eigen::MatrixXd::Zero(f.m(), f.m());
      for (Eigen::Index i = 0; i < f.n(); ++i) S += x[i] * f.A()[static_cast<size_t>(i)];
      return spectral_norm(S);
    }
    case FamilyKind::CapitalBudgetingNPV: {
      // Diagonal Hessian; on u >= 0 each entry is bounded by t(t+1)F_jt x_j.
      double L = 0.0;
      for (Eigen::Index j = 0; j < f.n(); ++j) {
        for (Eigen::Index t = 0; t <= f.horizon(); ++t) {
          L += static_cast<double>(t) * static_cast<double>(t + 1) * f.F()(j, t) * x[j];
        }
      }
      return L;
    }
    case FamilyKind::LogSumExp: {
      if (dataset == nullptr) {
        throw std::invalid_argument("smoothness_bound: log-sum-exp needs a dataset");
      }
      const Eigen::VectorXd e = x.array().exp();
      const double min_inner = (dataset->samples * e).minCoeff();
      if (min_inner <= 0) throw std::domain_error("smoothness_bound: nonpositive d_k' e^x");
      return e.dot(e) / (min_inner * min_inner);
    }
  }
  throw std::logic_error("bad FamilyKind");
}

AssumptionReport check_assumptions(const ConstraintFamily& f, const SupportSet& support) {
  AssumptionReport rep;
  rep.concave_in_u = true;
  switch (f.kind()) {
    case FamilyKind::Affine:
    case FamilyKind::ConcaveQuadratic:
      rep.monotonicity = Monotonicity::NoneNeeded;
      rep.domain_ok = true;
      return rep;
    case FamilyKind::CapitalBudgetingNPV:
    case FamilyKind::LogSumExp:
      break;
  }
  rep.monotonicity = Monotonicity::Increasing;
  const Eigen::VectorXd lb = f.domain_lb();
  switch (support.kind()) {
    case SupportKind::FullSpace:
      rep.domain_ok = false;
      break;
    case SupportKind::Box:
      rep.domain_ok = (support.lb().array() >= lb.array() - 1e-12).all();
      break;
    case SupportKind::Polyhedron: {
      // No cheap exactness test; accept only when every generator row of the
      // domain bound is implied by an identical halfspace.
      const auto [C, b] = support.halfspaces();
      rep.domain_ok = true;
      for (Eigen::Index i = 0; i < f.m(); ++i) {
        if (lb[i] == -kInf) continue;
        bool covered = false;
        for (Eigen::Index r = 0; r < C.rows() && !covered; ++r) {
          Eigen::VectorXd row = C.row(r).transpose();
          if ((row + Eigen::VectorXd::Unit(f.m(), i)).norm() < 1e-12 && -b[r] >= lb[i] - 1e-12) {
            covered = true;
          }
        }
        if (!covered) rep.domain_ok = false;
      }
      break;
    }
  }
  return rep;
}

std::string ConstraintFamily::to_json() const {
  nlohmann::json j;
  j["kind"] = family_kind_name(kind_);
  switch (kind_) {
    case FamilyKind::Affine:
      j["a"] = std::vector<double>(a_.begin(), a_.end());
      j["P"] = matrix_json(P_);
      j["b"] = b_;
      break;
    case FamilyKind::ConcaveQuadratic: {
      auto list = nlohmann::json::array();
      for (const auto& Ai : A_) list.push_back(matrix_json(Ai));
      j["A"] = std::move(list);
      break;
    }
    case FamilyKind::CapitalBudgetingNPV:
      j["F"] = matrix_json(F_);
      break;
    case FamilyKind::LogSumExp:
      j["n"] = n_;
      break;
  }
  return j.dump(2);
}

ConstraintFamily ConstraintFamily::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  switch (family_kind_from_name(j.at("kind").get<std::string>())) {
    case FamilyKind::Affine: {
      const auto av = j.at("a").get<std::vector<double>>();
      Eigen::VectorXd a =
          Eigen::Map<const Eigen::VectorXd>(av.data(), static_cast<Eigen::Index>(av.size()));
      return affine(std::move(a), matrix_from_json(j.at("P")), j.at("b").get<double>());
    }
    case FamilyKind::ConcaveQuadratic: {
      std::vector<Eigen::MatrixXd> A;
      for (const auto& Aj : j.at("A")) A.push_back(matrix_from_json(Aj));
      return concave_quadratic(std::move(A));
    }
    case FamilyKind::CapitalBudgetingNPV:
      return capital_npv(matrix_from_json(j.at("F")));
    case FamilyKind::LogSumExp:
      return log_sum_exp(j.at("n").get<Eigen::Index>());
  }
  throw std::logic_error("bad FamilyKind");
}

}  // namespace mro
