#include "mro/reformulate.hpp"

#include "mro/cutting_plane.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace mro {
namespace {

LinExpr dot(const Eigen::VectorXd& coeffs, const std::vector<Eigen::Index>& vars) {
  LinExpr e;
  for (size_t i = 0; i < vars.size(); ++i) e += LinExpr::var(vars[i], coeffs[static_cast<Eigen::Index>(i)]);
  return e;
}

/// Rows enforcing t >= ||zeta||_*, where * is the dual of the inner norm.
void dual_norm_epi(ProgramBuilder& pb, const LinExpr& t, const std::vector<LinExpr>& zeta,
                   const NormSpec& norm, const std::string& tag) {
  if (norm.order == 2.0) {
    std::vector<LinExpr> rows{t};
    rows.insert(rows.end(), zeta.begin(), zeta.end());
    pb.add_block(ConeKind::SecondOrder, rows);
    return;
  }
  if (norm.order == 1.0) {  // dual norm is l-infinity
    for (const auto& z : zeta) {
      pb.add_nonneg(t - z);
      pb.add_nonneg(t + z);
    }
    return;
  }
  // inner l-infinity, dual norm l1
  LinExpr sum;
  for (size_t j = 0; j < zeta.size(); ++j) {
    const auto a = pb.add_var(tag + ".abs[" + std::to_string(j) + "]");
    pb.add_nonneg(LinExpr::var(a) - zeta[j]);
    pb.add_nonneg(LinExpr::var(a) + zeta[j]);
    sum += LinExpr::var(a);
  }
  pb.add_nonneg(t - sum);
}

/// Adds the variables and cones of [-g]*(w, x) and returns its value as an
/// expression. w is the conjugate argument (zeta_k minus the support part).
LinExpr emit_conjugate(ProgramBuilder& pb, const ConstraintFamily& f,
                       const std::vector<LinExpr>& w, const std::vector<LinExpr>& x,
                       const std::string& tag) {
  const auto m = static_cast<size_t>(f.m());
  switch (f.kind()) {
    case FamilyKind::Affine: {
      // finite only on w + P'x = 0, where the value is a'x - b
      LinExpr val = -f.b();
      for (Eigen::Index i = 0; i < f.n(); ++i) {
        if (f.a()[i] != 0.0) val += f.a()[i] * x[static_cast<size_t>(i)];
      }
      for (size_t j = 0; j < m; ++j) {
        LinExpr row = w[j];
        for (Eigen::Index i = 0; i < f.n(); ++i) {
          if (f.P()(i, j) != 0.0) row += f.P()(i, j) * x[static_cast<size_t>(i)];
        }
        pb.add_eq_zero(row);
      }
      return val;
    }
    case FamilyKind::ConcaveQuadratic: {
      // inf over Y_1 + ... + Y_n = w of sum_i ||L_i^{-1} Y_i||^2 / (2 x_i)
      LinExpr val;
      std::vector<std::vector<Eigen::Index>> Y;
      for (Eigen::Index i = 0; i < f.n(); ++i) {
        Y.push_back(pb.add_vars(tag + ".Y" + std::to_string(i), f.m()));
        const auto r = pb.add_var(tag + ".r" + std::to_string(i));
        const Eigen::MatrixXd Linv = f.chol()[static_cast<size_t>(i)]
                                         .triangularView<Eigen::Lower>()
                                         .solve(Eigen::MatrixXd::Identity(f.m(), f.m()));
        std::vector<LinExpr> rows{x[static_cast<size_t>(i)], LinExpr::var(r)};
        for (Eigen::Index j = 0; j < f.m(); ++j) rows.push_back(dot(Linv.row(j), Y.back()));
        pb.add_block(ConeKind::RotatedSecondOrder, rows);
        val += LinExpr::var(r);
      }
      for (size_t j = 0; j < m; ++j) {
        LinExpr row = -w[j];
        for (const auto& Yi : Y) row += LinExpr::var(Yi[j]);
        pb.add_eq_zero(row);
      }
      return val;
    }
    case FamilyKind::CapitalBudgetingNPV: {
      // separable in j; per summand the conjugate closes as a power cone
      // (s_jt, F_jt x_j, delta_jt) in K^{t/(t+1)} with coefficient
      // a_t = t^{1/(t+1)} + t^{-t/(t+1)}
      const Eigen::Index T = f.horizon();
      LinExpr val;
      for (Eigen::Index j = 0; j < f.n(); ++j) {
        val += -f.F()(j, 0) * x[static_cast<size_t>(j)];
        val -= w[static_cast<size_t>(j)];
        LinExpr split = w[static_cast<size_t>(j)];
        for (Eigen::Index t = 1; t <= T; ++t) {
          const auto s = pb.add_var(tag + ".s[" + std::to_string(j) + "," + std::to_string(t) + "]");
          const auto d = pb.add_var(tag + ".d[" + std::to_string(j) + "," + std::to_string(t) + "]");
          const double td = static_cast<double>(t);
          const double a_t = std::pow(td, 1.0 / (td + 1.0)) + std::pow(td, -td / (td + 1.0));
          pb.add_block(ConeKind::Power3D,
                       {LinExpr::var(s), f.F()(j, t) * x[static_cast<size_t>(j)], LinExpr::var(d)},
                       td / (td + 1.0));
          val += -a_t * LinExpr::var(d);
          split += LinExpr::var(s);
        }
        pb.add_eq_zero(split);  // sum_t s_jt = -w_j
      }
      return val;
    }
    case FamilyKind::LogSumExp:
      throw std::invalid_argument("no direct dual for log-sum-exp; use the cutting-plane path");
  }
  throw std::logic_error("bad FamilyKind");
}

/// Appends the dualized worst-case constraint
///   sup over the clustered ball of gbar(u, x) <= rhs
/// for one family. x entries may be variables or constants.
void add_robust_dual(ProgramBuilder& pb, const ConstraintFamily& f,
                     const std::vector<LinExpr>& x, const LinExpr& rhs,
                     const ClusteredSet& cl, const UncertaintySpec& spec, bool relax,
                     const std::string& tag) {
  const Eigen::Index K = cl.K;
  const Eigen::Index m = f.m();
  if (cl.centroids.cols() != m) throw std::invalid_argument("centroid/family dimension mismatch");

  Eigen::MatrixXd C(0, m);
  Eigen::VectorXd b(0);
  if (!relax && spec.support.kind() != SupportKind::FullSpace) {
    std::tie(C, b) = spec.support.halfspaces();
  }

  const bool finite = spec.finite_p();
  LinExpr lambda;
  if (finite) {
    lambda = LinExpr::var(pb.add_var(tag + ".lambda"));
    pb.add_nonneg(lambda);
  }

  LinExpr coupling = -rhs;
  if (finite) coupling += std::pow(spec.epsilon, spec.p) * lambda;

  for (Eigen::Index k = 0; k < K; ++k) {
    const std::string kt = tag + ".k" + std::to_string(k);
    const auto zeta = pb.add_vars(kt + ".zeta", m);
    const auto gamma = pb.add_vars(kt + ".gamma", C.rows());
    for (auto g : gamma) pb.add_nonneg(LinExpr::var(g));

    std::vector<LinExpr> zeta_e, w_e;
    for (Eigen::Index j = 0; j < m; ++j) {
      zeta_e.push_back(LinExpr::var(zeta[static_cast<size_t>(j)]));
      LinExpr wj = zeta_e.back();
      for (Eigen::Index r = 0; r < C.rows(); ++r) {
        wj -= C(r, j) * LinExpr::var(gamma[static_cast<size_t>(r)]);
      }
      w_e.push_back(wj);
    }

    LinExpr bracket;
    for (Eigen::Index j = 0; j < m; ++j) bracket += -cl.centroids(k, j) * zeta_e[static_cast<size_t>(j)];
    for (Eigen::Index r = 0; r < C.rows(); ++r) bracket += b[r] * LinExpr::var(gamma[static_cast<size_t>(r)]);

    if (finite && spec.p == 2.0) {
      // ||zeta||_*^2 / (4 lambda) <= r via (lambda, 2r, .) rotated cone
      const auto r = pb.add_var(kt + ".pow");
      if (spec.norm.order == 2.0) {
        std::vector<LinExpr> rows{lambda, 2.0 * LinExpr::var(r)};
        rows.insert(rows.end(), zeta_e.begin(), zeta_e.end());
        pb.add_block(ConeKind::RotatedSecondOrder, rows);
      } else {
        const auto t = pb.add_var(kt + ".dualnorm");
        dual_norm_epi(pb, LinExpr::var(t), zeta_e, spec.norm, kt);
        pb.add_block(ConeKind::RotatedSecondOrder,
                     {lambda, 2.0 * LinExpr::var(r), LinExpr::var(t)});
      }
      bracket += LinExpr::var(r);
    } else if (finite) {  // p == 1: the norm-power term degenerates to a cap
      dual_norm_epi(pb, lambda, zeta_e, spec.norm, kt);
    } else {  // p == inf
      const auto t = pb.add_var(kt + ".dualnorm");
      dual_norm_epi(pb, LinExpr::var(t), zeta_e, spec.norm, kt);
      bracket += spec.epsilon * LinExpr::var(t);
    }

    bracket += emit_conjugate(pb, f, w_e, x, kt);

    const auto s = pb.add_var(kt + ".s");
    pb.add_nonneg(LinExpr::var(s) - bracket);
    coupling += cl.weights[k] * LinExpr::var(s);
  }
  pb.add_nonneg(-coupling);
}

std::vector<LinExpr> as_exprs(const std::vector<Eigen::Index>& vars) {
  std::vector<LinExpr> e;
  for (auto v : vars) e.push_back(LinExpr::var(v));
  return e;
}

ConicProgram emit_impl(const MroProblem& prob) {
  prob.validate();
  for (const auto& f : prob.families) {
    if (f.kind() == FamilyKind::LogSumExp) {
      throw std::invalid_argument("no direct dual for log-sum-exp; use the cutting-plane path");
    }
  }

  ProgramBuilder pb;
  const auto x = pb.add_vars("x", prob.n());
  const auto x_e = as_exprs(x);

  const auto& xc = prob.xcons;
  for (Eigen::Index r = 0; r < xc.G.rows(); ++r) {
    LinExpr row = xc.h[r];
    for (Eigen::Index i = 0; i < prob.n(); ++i) row -= xc.G(r, i) * x_e[static_cast<size_t>(i)];
    pb.add_nonneg(row);
  }
  for (Eigen::Index r = 0; r < xc.Aeq.rows(); ++r) {
    LinExpr row = -xc.beq[r];
    for (Eigen::Index i = 0; i < prob.n(); ++i) row += xc.Aeq(r, i) * x_e[static_cast<size_t>(i)];
    pb.add_eq_zero(row);
  }
  for (Eigen::Index i = 0; i < xc.lb.size(); ++i) {
    if (xc.lb[i] != -kInf) pb.add_nonneg(x_e[static_cast<size_t>(i)] - xc.lb[i]);
    if (xc.ub[i] != kInf) pb.add_nonneg(xc.ub[i] - x_e[static_cast<size_t>(i)]);
  }
  for (auto i : xc.binary) pb.mark_binary(x[static_cast<size_t>(i)]);

  LinExpr obj;
  for (Eigen::Index i = 0; i < prob.n(); ++i) obj += prob.cost[i] * x_e[static_cast<size_t>(i)];

  if (prob.epigraph) {
    const auto tau = pb.add_var("tau");
    obj += LinExpr::var(tau);
    add_robust_dual(pb, prob.families[0], x_e, LinExpr::var(tau), prob.clustered, prob.spec,
                    prob.relax_support, "g0");
  } else {
    for (size_t l = 0; l < prob.families.size(); ++l) {
      add_robust_dual(pb, prob.families[l], x_e, LinExpr(0.0), prob.clustered, prob.spec,
                      prob.relax_support, "g" + std::to_string(l));
    }
  }
  pb.set_objective(obj);
  return pb.build();
}

}  // namespace

void XConstraints::validate(Eigen::Index n) const {
  if (G.rows() != h.size() || (G.rows() > 0 && G.cols() != n)) {
    throw std::invalid_argument("XConstraints: G/h shape");
  }
  if (Aeq.rows() != beq.size() || (Aeq.rows() > 0 && Aeq.cols() != n)) {
    throw std::invalid_argument("XConstraints: Aeq/beq shape");
  }
  if (lb.size() != ub.size() || (lb.size() > 0 && lb.size() != n)) {
    throw std::invalid_argument("XConstraints: bound shape");
  }
  for (auto i : binary) {
    if (i < 0 || i >= n) throw std::invalid_argument("XConstraints: binary index");
  }
}

void MroProblem::validate() const {
  if (families.empty()) throw std::invalid_argument("MroProblem: no families");
  if (epigraph && families.size() != 1) {
    throw std::invalid_argument("MroProblem: epigraph mode needs exactly one family");
  }
  const Eigen::Index m = families[0].m();
  for (const auto& f : families) {
    if (f.m() != m) throw std::invalid_argument("MroProblem: families must share m");
    if (f.n() != n()) throw std::invalid_argument("MroProblem: family n mismatch");
  }
  if (spec.support.dim() != m) throw std::invalid_argument("MroProblem: support dimension");
  if (clustered.K < 1 || clustered.centroids.cols() != m) {
    throw std::invalid_argument("MroProblem: clustering missing or wrong dimension");
  }
  xcons.validate(n());
}

ConicProgram emit_dual_finite_p(const MroProblem& prob) {
  if (prob.spec.p != 1.0 && prob.spec.p != 2.0) {
    throw std::invalid_argument("direct duals cover p in {1, 2}; use the cutting-plane path");
  }
  return emit_impl(prob);
}

ConicProgram emit_dual_inf(const MroProblem& prob) {
  if (prob.spec.p != kInf) throw std::invalid_argument("emit_dual_inf: p must be inf");
  return emit_impl(prob);
}

ConicProgram emit_dual(const MroProblem& prob) {
  return prob.spec.finite_p() ? emit_dual_finite_p(prob) : emit_dual_inf(prob);
}

double worst_case_value(const ConstraintFamily& family, const Eigen::VectorXd& x,
                        const ClusteredSet& clustered, const UncertaintySpec& spec,
                        const SolverBackend& backend, bool relax_support,
                        const SolveOptions& opts) {
  if (x.size() != family.n()) throw std::invalid_argument("worst_case_value: x dimension");
  if (family.kind() == FamilyKind::LogSumExp ||
      (spec.finite_p() && spec.p != 1.0 && spec.p != 2.0)) {
    UncertaintySpec used = spec;
    if (relax_support) used.support = SupportSet::full_space(family.m());
    const auto res = max_oracle(family, x, clustered, used, {});
    return res.value;
  }
  ProgramBuilder pb;
  const auto tau = pb.add_var("tau");
  std::vector<LinExpr> x_e;
  for (Eigen::Index i = 0; i < x.size(); ++i) x_e.push_back(LinExpr(x[i]));
  add_robust_dual(pb, family, x_e, LinExpr::var(tau), clustered, spec, relax_support, "g0");
  pb.set_objective(LinExpr::var(tau));
  const auto sol = backend.solve(pb.build(), opts);
  if (sol.status != SolveStatus::Optimal) {
    throw std::runtime_error("worst_case_value: backend returned " +
                             solve_status_name(sol.status));
  }
  return sol.objective;
}

namespace {

nlohmann::json num_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double num_from(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("bad numeric literal: " + s);
  }
  return j.get<double>();
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num_json(v[i]));
  return a;
}

Eigen::VectorXd vec_from(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = num_from(j[static_cast<size_t>(i)]);
  return v;
}

nlohmann::json mat_json(const Eigen::MatrixXd& M) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) rows.push_back(vec_json(M.row(r)));
  return rows;
}

Eigen::MatrixXd mat_from(const nlohmann::json& j, Eigen::Index cols) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index r = 0; r < M.rows(); ++r) M.row(r) = vec_from(j[static_cast<size_t>(r)]);
  return M;
}

nlohmann::json support_json(const SupportSet& s) {
  nlohmann::json j;
  switch (s.kind()) {
    case SupportKind::FullSpace:
      j["kind"] = "full-space";
      j["dim"] = s.dim();
      break;
    case SupportKind::Box:
      j["kind"] = "box";
      j["lb"] = vec_json(s.lb());
      j["ub"] = vec_json(s.ub());
      break;
    case SupportKind::Polyhedron: {
      j["kind"] = "polyhedron";
      const auto [C, b] = s.halfspaces();
      j["C"] = mat_json(C);
      j["b"] = vec_json(b);
      // reuse any box-like interior point; callers must re-supply a witness
      throw std::invalid_argument("polyhedron supports are not serializable yet");
    }
  }
  return j;
}

SupportSet support_from(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "full-space") return SupportSet::full_space(j.at("dim").get<Eigen::Index>());
  if (kind == "box") return SupportSet::box(vec_from(j.at("lb")), vec_from(j.at("ub")));
  throw std::invalid_argument("unknown support kind: " + kind);
}

}  // namespace

std::string mro_problem_to_json(const MroProblem& prob) {
  nlohmann::json j;
  auto fams = nlohmann::json::array();
  for (const auto& f : prob.families) fams.push_back(nlohmann::json::parse(f.to_json()));
  j["families"] = std::move(fams);
  j["cost"] = vec_json(prob.cost);
  j["epigraph"] = prob.epigraph;
  j["relax_support"] = prob.relax_support;
  j["xcons"] = {{"G", mat_json(prob.xcons.G)},   {"h", vec_json(prob.xcons.h)},
                {"Aeq", mat_json(prob.xcons.Aeq)}, {"beq", vec_json(prob.xcons.beq)},
                {"lb", vec_json(prob.xcons.lb)},   {"ub", vec_json(prob.xcons.ub)},
                {"binary", prob.xcons.binary}};
  j["spec"] = {{"p", num_json(prob.spec.p)},
               {"norm", num_json(prob.spec.norm.order)},
               {"epsilon", prob.spec.epsilon},
               {"support", support_json(prob.spec.support)}};
  if (prob.clustered.K > 0) j["clustered"] = nlohmann::json::parse(prob.clustered.to_json());
  return j.dump(2);
}

MroProblem mro_problem_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MroProblem p;
  for (const auto& fj : j.at("families")) p.families.push_back(ConstraintFamily::from_json(fj.dump()));
  p.cost = vec_from(j.at("cost"));
  p.epigraph = j.value("epigraph", false);
  p.relax_support = j.value("relax_support", false);
  if (j.contains("xcons")) {
    const auto& xc = j.at("xcons");
    p.xcons.h = vec_from(xc.at("h"));
    p.xcons.G = mat_from(xc.at("G"), p.cost.size());
    p.xcons.beq = vec_from(xc.at("beq"));
    p.xcons.Aeq = mat_from(xc.at("Aeq"), p.cost.size());
    p.xcons.lb = vec_from(xc.at("lb"));
    p.xcons.ub = vec_from(xc.at("ub"));
    p.xcons.binary = xc.at("binary").get<std::vector<Eigen::Index>>();
  }
  const auto& sj = j.at("spec");
  p.spec = UncertaintySpec(num_from(sj.at("p")), NormSpec(num_from(sj.at("norm"))),
                           sj.at("epsilon").get<double>(), support_from(sj.at("support")));
  if (j.contains("clustered")) p.clustered = ClusteredSet::from_json(j.at("clustered").dump());
  return p;
}

}  // namespace mro
