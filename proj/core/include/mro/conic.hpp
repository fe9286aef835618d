#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace mro {

enum class ConeKind {
  Zero,
  Nonneg,
  SecondOrder,         // t >= ||v||_2, entries (t, v)
  RotatedSecondOrder,  // 2ab >= ||v||^2, a,b >= 0, entries (a, b, v)
  Power3D,             // x^alpha y^(1-alpha) >= |z|, x,y >= 0, entries (x, y, z)
  Exponential          // y e^(x/y) <= z, y > 0, entries (x, y, z)
};

std::string cone_kind_name(ConeKind kind);
ConeKind cone_kind_from_name(const std::string& name);

/// One cone block: the affine image A v + c must lie in the cone.
struct ConeBlock {
  ConeKind kind = ConeKind::Zero;
  double alpha = 0.0;  // Power3D only, in (0, 1)
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd c;

  Eigen::Index rows() const { return c.size(); }
};

/// Solver-agnostic conic program: minimize objective'v over the cone blocks,
/// optionally with some variables restricted to {0,1}.
struct ConicProgram {
  Eigen::Index num_vars = 0;
  Eigen::VectorXd objective;
  double objective_offset = 0.0;
  std::vector<ConeBlock> blocks;
  std::vector<Eigen::Index> binary_vars;
  std::vector<std::string> var_names;

  void validate() const;
  std::string dump_json() const;
  static ConicProgram load_json(const std::string& text);
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure, IterationLimit };

std::string solve_status_name(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double solve_time = 0.0;  // seconds inside the backend
  std::string backend;
};

struct SolveOptions {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iter = 200;
  bool verbose = false;
};

/// Backend contract. Zero / Nonneg / SecondOrder / RotatedSecondOrder support
/// is mandatory; Power3D and Exponential are optional capabilities.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string id() const = 0;
  virtual bool supports(ConeKind kind) const = 0;
  virtual Solution solve(const ConicProgram& program, const SolveOptions& opts) const = 0;
};

/// Thrown when a program uses a cone the backend does not implement.
class UnsupportedConeError : public std::runtime_error {
 public:
  explicit UnsupportedConeError(const std::string& what) : std::runtime_error(what) {}
};

std::shared_ptr<const SolverBackend> make_backend(const std::string& id);

/// Enumerates all assignments of the binary variables, solves each continuous
/// remainder, and returns the best feasible solution. Ties break toward the
/// lexicographically smallest assignment. total_backend_time, when given,
/// accumulates backend solve seconds across subproblems.
Solution solve_mixed_binary(const ConicProgram& program, const SolverBackend& backend,
                            const SolveOptions& opts = {}, int enumeration_cap = 22,
                            double* total_backend_time = nullptr);

/// Small expression helper used when assembling programs.
struct LinExpr {
  double constant = 0.0;
  std::vector<std::pair<Eigen::Index, double>> terms;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)

  static LinExpr var(Eigen::Index idx, double coeff = 1.0) {
    LinExpr e;
    e.terms.emplace_back(idx, coeff);
    return e;
  }

  LinExpr& operator+=(const LinExpr& o) {
    constant += o.constant;
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) {
    constant -= o.constant;
    for (const auto& [i, c] : o.terms) terms.emplace_back(i, -c);
    return *this;
  }
  LinExpr& operator*=(double s) {
    constant *= s;
    for (auto& [i, c] : terms) c *= s;
    return *this;
  }

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }
};

/// Accumulates variables and cone blocks, then produces a ConicProgram.
class ProgramBuilder {
 public:
  Eigen::Index add_var(const std::string& name) {
    names_.push_back(name);
    return static_cast<Eigen::Index>(names_.size()) - 1;
  }
  std::vector<Eigen::Index> add_vars(const std::string& prefix, Eigen::Index count);

  void add_block(ConeKind kind, const std::vector<LinExpr>& rows, double alpha = 0.0);

  // expr == 0 / expr >= 0 conveniences.
  void add_eq_zero(const LinExpr& e) { add_block(ConeKind::Zero, {e}); }
  void add_nonneg(const LinExpr& e) { add_block(ConeKind::Nonneg, {e}); }

  void set_objective(const LinExpr& e);
  void mark_binary(Eigen::Index idx) { binary_.push_back(idx); }

  Eigen::Index num_vars() const { return static_cast<Eigen::Index>(names_.size()); }

  ConicProgram build() const;

 private:
  struct PendingBlock {
    ConeKind kind;
    double alpha;
    std::vector<LinExpr> rows;
  };
  std::vector<std::string> names_;
  std::vector<PendingBlock> pending_;
  std::vector<Eigen::Index> binary_;
  LinExpr objective_;
};

}  // namespace mro
