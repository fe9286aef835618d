#include "mro/cutting_plane.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mro {
namespace {

struct FeasibleRegion {
  Eigen::MatrixXd centroids;
  Eigen::VectorXd weights;
  double p;
  double eps;
  Eigen::VectorXd lb, ub;  // effective box per coordinate; empty when free
  double tol;
  int max_sweeps;

  bool has_box() const { return lb.size() > 0; }
};

// Scalar solve of t + c t^(p-1) = 1 on [0, 1]; the shrink factor of one
// cluster displacement inside the Euclidean projection onto the ball.
double shrink_factor(double c, double p) {
  if (c <= 0) return 1.0;
  if (p == 2.0) return 1.0 / (1.0 + c);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid + c * std::pow(mid, p - 1.0) > 1.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd project_ball(const Eigen::MatrixXd& Z, const FeasibleRegion& fr) {
  const Eigen::Index K = Z.rows();
  Eigen::MatrixXd V = Z;
  if (fr.p == kInf) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const Eigen::VectorXd d = (Z.row(k) - fr.centroids.row(k)).transpose();
      const double s = d.norm();
      if (s > fr.eps) V.row(k) = fr.centroids.row(k) + (fr.eps / s) * d.transpose();
    }
    return V;
  }

  Eigen::VectorXd s(K);
  double lhs = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    s[k] = (Z.row(k) - fr.centroids.row(k)).norm();
    lhs += fr.weights[k] * std::pow(s[k], fr.p);
  }
  const double rhs = std::pow(fr.eps, fr.p);
  if (lhs <= rhs) return V;
  if (fr.eps == 0.0) return fr.centroids;

  const auto constraint_at = [&](double mu, Eigen::VectorXd* t_out) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const double c = 0.5 * mu * fr.weights[k] * fr.p * std::pow(s[k], fr.p - 2.0);
      const double t = s[k] == 0.0 ? 1.0 : shrink_factor(c, fr.p);
      if (t_out) (*t_out)[k] = t;
      total += fr.weights[k] * std::pow(t * s[k], fr.p);
    }
    return total - rhs;
  };

  double mu_hi = 1.0;
  for (int it = 0; it < 200 && constraint_at(mu_hi, nullptr) > 0; ++it) mu_hi *= 2.0;
  double mu_lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    (constraint_at(mid, nullptr) > 0 ? mu_lo : mu_hi) = mid;
  }
  Eigen::VectorXd t(K);
  constraint_at(mu_hi, &t);
  for (Eigen::Index k = 0; k < K; ++k) {
    V.row(k) = fr.centroids.row(k) + t[k] * (Z.row(k) - fr.centroids.row(k));
  }
  return V;
}

Eigen::MatrixXd project_box(const Eigen::MatrixXd& Z, const FeasibleRegion& fr) {
  if (!fr.has_box()) return Z;
  Eigen::MatrixXd V = Z;
  for (Eigen::Index k = 0; k < Z.rows(); ++k) {
    V.row(k) = V.row(k).cwiseMax(fr.lb.transpose()).cwiseMin(fr.ub.transpose());
  }
  return V;
}

// Dykstra alternating projections onto ball and box.
Eigen::MatrixXd project_feasible(const Eigen::MatrixXd& Z, const FeasibleRegion& fr) {
  if (!fr.has_box()) return project_ball(Z, fr);
  Eigen::MatrixXd x = Z;
  Eigen::MatrixXd p_inc = Eigen::MatrixXd::Zero(Z.rows(), Z.cols());
  Eigen::MatrixXd q_inc = p_inc;
  for (int sweep = 0; sweep < fr.max_sweeps; ++sweep) {
    const Eigen::MatrixXd y = project_ball(x + p_inc, fr);
    p_inc = x + p_inc - y;
    const Eigen::MatrixXd x_next = project_box(y + q_inc, fr);
    q_inc = y + q_inc - x_next;
    const double move = (x_next - x).cwiseAbs().maxCoeff();
    x = x_next;
    if (move <= fr.tol) break;
  }
  return x;
}

double objective(const ConstraintFamily& f, const Eigen::MatrixXd& V,
                 const Eigen::VectorXd& w, const Eigen::VectorXd& x) {
  return gbar(f, V, w, x);
}

Eigen::MatrixXd ascent_grad(const ConstraintFamily& f, const Eigen::MatrixXd& V,
                            const Eigen::VectorXd& w, const Eigen::VectorXd& x) {
  Eigen::MatrixXd G(V.rows(), V.cols());
  for (Eigen::Index k = 0; k < V.rows(); ++k) {
    G.row(k) = w[k] * grad_g_u(f, V.row(k).transpose(), x).transpose();
  }
  return G;
}

}  // namespace

OracleResult max_oracle(const ConstraintFamily& family, const Eigen::VectorXd& x,
                        const ClusteredSet& clustered, const UncertaintySpec& spec,
                        const OracleConfig& cfg) {
  if (x.size() != family.n()) throw std::invalid_argument("max_oracle: x dimension");
  if (clustered.centroids.cols() != family.m()) {
    throw std::invalid_argument("max_oracle: clustering dimension");
  }
  if (spec.norm.order != 2.0) {
    throw std::invalid_argument("max_oracle: only the L2 inner norm is supported");
  }
  if (spec.support.kind() == SupportKind::Polyhedron) {
    throw std::invalid_argument("max_oracle: polyhedral supports are not supported");
  }

  FeasibleRegion fr;
  fr.centroids = clustered.centroids;
  fr.weights = clustered.weights;
  fr.p = spec.p;
  fr.eps = spec.epsilon;
  fr.tol = cfg.projection_tol;
  fr.max_sweeps = cfg.max_dykstra_sweeps;

  // effective box: support bounds tightened by the family's own domain
  Eigen::VectorXd lb = family.domain_lb();
  Eigen::VectorXd ub = Eigen::VectorXd::Constant(family.m(), kInf);
  if (spec.support.kind() == SupportKind::Box) {
    lb = lb.cwiseMax(spec.support.lb());
    ub = spec.support.ub();
  }
  if ((lb.array() > -kInf).any() || (ub.array() < kInf).any()) {
    fr.lb = lb;
    fr.ub = ub;
  }

  OracleResult res;
  Eigen::MatrixXd V = project_feasible(clustered.centroids, fr);
  if (spec.epsilon == 0.0) {
    res.points = V;
    res.value = objective(family, V, fr.weights, x);
    res.converged = true;
    return res;
  }

  // kick-start from a long gradient step at the centroids; exact for affine g
  {
    const Eigen::MatrixXd G0 = ascent_grad(family, V, fr.weights, x);
    const double gn = G0.norm();
    if (gn > 0) {
      const Eigen::MatrixXd W = project_feasible(V + (1e6 / gn) * G0, fr);
      if (objective(family, W, fr.weights, x) > objective(family, V, fr.weights, x)) V = W;
    }
  }

  double fV = objective(family, V, fr.weights, x);
  double step = 1.0;
  const double L = family.kind() == FamilyKind::LogSumExp
                       ? 0.0
                       : smoothness_bound(family, x, nullptr);
  if (L > 0) step = 1.0 / L;
  if (family.kind() == FamilyKind::LogSumExp) step = cfg.fallback_step;

  for (res.iterations = 0; res.iterations < cfg.max_ascent_iters; ++res.iterations) {
    const Eigen::MatrixXd G = ascent_grad(family, V, fr.weights, x);
    Eigen::MatrixXd W;
    double fW = -kInf;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      W = project_feasible(V + step * G, fr);
      fW = objective(family, W, fr.weights, x);
      if (fW >= fV) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;  // no ascent direction left at this scale
      break;
    }
    const double move = (W - V).cwiseAbs().maxCoeff();
    V = W;
    fV = fW;
    step *= 1.3;
    if (move <= cfg.grad_tol * (1.0 + V.cwiseAbs().maxCoeff())) {
      res.converged = true;
      break;
    }
  }
  res.points = V;
  res.value = fV;
  return res;
}

namespace {

void add_scenario_cut(ProgramBuilder& pb, const ConstraintFamily& f, const Eigen::MatrixXd& pts,
                      const Eigen::VectorXd& w, const std::vector<LinExpr>& x_e,
                      const LinExpr& rhs, const std::string& tag) {
  const Eigen::Index n = f.n();
  switch (f.kind()) {
    case FamilyKind::Affine: {
      const Eigen::VectorXd u_mean = pts.transpose() * w;
      const Eigen::VectorXd coeff = f.a() + f.P() * u_mean;
      LinExpr row = rhs + f.b();
      for (Eigen::Index i = 0; i < n; ++i) row -= coeff[i] * x_e[static_cast<size_t>(i)];
      pb.add_nonneg(row);
      return;
    }
    case FamilyKind::ConcaveQuadratic: {
      LinExpr row = rhs;
      for (Eigen::Index i = 0; i < n; ++i) {
        double coeff = 0.0;
        for (Eigen::Index k = 0; k < pts.rows(); ++k) {
          coeff += -0.5 * w[k] * pts.row(k).dot((f.A()[static_cast<size_t>(i)] * pts.row(k).transpose()));
        }
        row -= coeff * x_e[static_cast<size_t>(i)];
      }
      pb.add_nonneg(row);
      return;
    }
    case FamilyKind::CapitalBudgetingNPV: {
      LinExpr row = rhs;
      for (Eigen::Index j = 0; j < n; ++j) {
        double coeff = 0.0;
        for (Eigen::Index k = 0; k < pts.rows(); ++k) {
          for (Eigen::Index t = 0; t <= f.horizon(); ++t) {
            coeff -= w[k] * f.F()(j, t) * std::pow(1.0 + pts(k, j), -static_cast<double>(t));
          }
        }
        row -= coeff * x_e[static_cast<size_t>(j)];
      }
      pb.add_nonneg(row);
      return;
    }
    case FamilyKind::LogSumExp: {
      // log(u_k' e^x) <= tau_k via sum_i q_ki <= 1 with
      // (u_ki (x_i - tau_k), u_ki, q_ki) in the exponential cone
      LinExpr coupling = rhs;
      for (Eigen::Index k = 0; k < pts.rows(); ++k) {
        const auto tau_k = pb.add_var(tag + ".tau[" + std::to_string(k) + "]");
        coupling -= w[k] * LinExpr::var(tau_k);
        LinExpr qsum = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto q = pb.add_var(tag + ".q[" + std::to_string(k) + "," + std::to_string(i) + "]");
          const double u = pts(k, i);
          pb.add_block(ConeKind::Exponential,
                       {u * x_e[static_cast<size_t>(i)] - u * LinExpr::var(tau_k), LinExpr(u),
                        LinExpr::var(q)});
          qsum -= LinExpr::var(q);
        }
        pb.add_nonneg(qsum);
      }
      pb.add_nonneg(coupling);
      return;
    }
  }
  throw std::logic_error("bad FamilyKind");
}

}  // namespace

Solution master_solve(const MroProblem& prob, const std::vector<Eigen::MatrixXd>& scenarios,
                      const SolverBackend& backend, const SolveOptions& opts) {
  prob.validate();
  ProgramBuilder pb;
  const auto x = pb.add_vars("x", prob.n());
  std::vector<LinExpr> x_e;
  for (auto v : x) x_e.push_back(LinExpr::var(v));

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
  LinExpr rhs(0.0);
  if (prob.epigraph) {
    const auto tau = pb.add_var("tau");
    obj += LinExpr::var(tau);
    rhs = LinExpr::var(tau);
  }

  for (size_t s = 0; s < scenarios.size(); ++s) {
    if (scenarios[s].rows() != prob.clustered.K || scenarios[s].cols() != prob.families[0].m()) {
      throw std::invalid_argument("master_solve: scenario shape");
    }
    for (size_t l = 0; l < prob.families.size(); ++l) {
      add_scenario_cut(pb, prob.families[l], scenarios[s], prob.clustered.weights, x_e, rhs,
                       "cut" + std::to_string(s) + "." + std::to_string(l));
    }
  }
  pb.set_objective(obj);
  const auto program = pb.build();
  return program.binary_vars.empty() ? backend.solve(program, opts)
                                     : solve_mixed_binary(program, backend, opts);
}

CuttingPlaneResult cutting_plane_solve(const MroProblem& prob, const CuttingPlaneConfig& cfg,
                                       const SolverBackend& backend, const SolveOptions& opts) {
  prob.validate();
  for (const auto& f : prob.families) {
    if (!check_assumptions(f, prob.spec.support).domain_ok) {
      throw std::invalid_argument("cutting_plane_solve: support violates the family domain");
    }
  }

  CuttingPlaneResult result;
  std::vector<Eigen::MatrixXd> scenarios{prob.clustered.centroids};
  const auto t_start = std::chrono::steady_clock::now();

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    result.iterations = iter;
    auto sol = master_solve(prob, scenarios, backend, opts);
    if (sol.status != SolveStatus::Optimal) {
      result.solution = std::move(sol);
      return result;
    }
    const Eigen::VectorXd x_hat = sol.x.head(prob.n());
    const double tau_hat = prob.epigraph ? sol.x[prob.n()] : 0.0;

    double worst = -kInf;
    std::vector<Eigen::MatrixXd> new_cuts;
    for (const auto& f : prob.families) {
      const auto ores = max_oracle(f, x_hat, prob.clustered, prob.spec, cfg.oracle);
      const double viol = ores.value - tau_hat;
      worst = std::max(worst, viol);
      if (viol > cfg.violation_tol) new_cuts.push_back(ores.points);
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    result.history.push_back({iter, sol.objective, worst, elapsed});
    result.solution = std::move(sol);

    if (worst <= cfg.violation_tol) {
      result.converged = true;
      return result;
    }

    bool added = false;
    for (const auto& cut : new_cuts) {
      bool dup = false;
      for (const auto& s : scenarios) {
        if ((s - cut).cwiseAbs().maxCoeff() <= cfg.dedup_tol) {
          dup = true;
          break;
        }
      }
      if (!dup) {
        scenarios.push_back(cut);
        added = true;
      }
    }
    if (!added) return result;  // oracle is repeating itself; stop here
  }
  return result;
}

}  // namespace mro
