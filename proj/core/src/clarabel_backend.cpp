#include "mro/clarabel_backend.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

extern "C" int clarabel_ffi_solve(
    size_t n_vars, size_t n_rows, const double* q, const size_t* colptr, const size_t* rowval,
    const double* nzval, size_t nnz, const double* b, size_t n_cones, const int* kinds,
    const size_t* dims, const double* params, double tol_feas, double tol_gap, unsigned max_iter,
    int verbose, double* x, double* obj, double* t, int* status);

namespace mro {
namespace {

constexpr int kFfiZero = 0;
constexpr int kFfiNonneg = 1;
constexpr int kFfiSoc = 2;
constexpr int kFfiPower = 3;
constexpr int kFfiExp = 4;

}  // namespace

bool ClarabelBackend::supports(ConeKind) const { return true; }

Solution ClarabelBackend::solve(const ConicProgram& program, const SolveOptions& opts) const {
  program.validate();
  if (!program.binary_vars.empty()) {
    throw std::invalid_argument("ClarabelBackend: program has integrality; use solve_mixed_binary");
  }

  // Stack blocks into Ax + s = b, s in K. A block "M v + c in cone" becomes
  // rows -M with right-hand side c. Rotated cones are rewritten:
  // 2ab >= ||v||^2  <=>  (a+b, a-b, sqrt(2) v) in SOC.
  Eigen::Index total_rows = 0;
  for (const auto& blk : program.blocks) total_rows += blk.rows();

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(total_rows);
  std::vector<int> kinds;
  std::vector<size_t> dims;
  std::vector<double> params;

  Eigen::Index row0 = 0;
  for (const auto& blk : program.blocks) {
    const Eigen::SparseMatrix<double, Eigen::RowMajor> by_row = blk.A;
    const auto push_row = [&](Eigen::Index out_row, Eigen::Index in_row, double scale) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(by_row, in_row); it;
           ++it) {
        trip.emplace_back(out_row, it.col(), -scale * it.value());
      }
      b[out_row] += scale * blk.c[in_row];
    };
    switch (blk.kind) {
      case ConeKind::Zero:
      case ConeKind::Nonneg:
      case ConeKind::SecondOrder:
      case ConeKind::Power3D:
      case ConeKind::Exponential: {
        for (Eigen::Index r = 0; r < blk.rows(); ++r) push_row(row0 + r, r, 1.0);
        kinds.push_back(blk.kind == ConeKind::Zero         ? kFfiZero
                        : blk.kind == ConeKind::Nonneg     ? kFfiNonneg
                        : blk.kind == ConeKind::SecondOrder ? kFfiSoc
                        : blk.kind == ConeKind::Power3D     ? kFfiPower
                                                            : kFfiExp);
        dims.push_back(static_cast<size_t>(blk.rows()));
        params.push_back(blk.alpha);
        row0 += blk.rows();
        break;
      }
      case ConeKind::RotatedSecondOrder: {
        const Eigen::Index n = blk.rows();
        push_row(row0, 0, 1.0);
        push_row(row0, 1, 1.0);
        push_row(row0 + 1, 0, 1.0);
        push_row(row0 + 1, 1, -1.0);
        const double s2 = std::sqrt(2.0);
        for (Eigen::Index r = 2; r < n; ++r) push_row(row0 + r, r, s2);
        kinds.push_back(kFfiSoc);
        dims.push_back(static_cast<size_t>(n));
        params.push_back(0.0);
        row0 += n;
        break;
      }
    }
  }

  Eigen::SparseMatrix<double> A(total_rows, program.num_vars);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  std::vector<size_t> colptr(static_cast<size_t>(program.num_vars) + 1);
  std::vector<size_t> rowval(static_cast<size_t>(A.nonZeros()));
  for (Eigen::Index i = 0; i <= program.num_vars; ++i) {
    colptr[static_cast<size_t>(i)] = static_cast<size_t>(A.outerIndexPtr()[i]);
  }
  for (Eigen::Index i = 0; i < A.nonZeros(); ++i) {
    rowval[static_cast<size_t>(i)] = static_cast<size_t>(A.innerIndexPtr()[i]);
  }

  Solution sol;
  sol.backend = id();
  sol.x.resize(program.num_vars);
  int status = 0;
  double obj = 0.0;
  const int rc = clarabel_ffi_solve(
      static_cast<size_t>(program.num_vars), static_cast<size_t>(total_rows),
      program.objective.data(), colptr.data(), rowval.data(), A.valuePtr(),
      static_cast<size_t>(A.nonZeros()), b.data(), kinds.size(), kinds.data(), dims.data(),
      params.data(), opts.tol_feas, opts.tol_gap, static_cast<unsigned>(opts.max_iter),
      opts.verbose ? 1 : 0, sol.x.data(), &obj, &sol.solve_time, &status);
  if (rc != 0) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }
  switch (status) {
    case 0: sol.status = SolveStatus::Optimal; break;
    case 1: sol.status = SolveStatus::Infeasible; break;
    case 2: sol.status = SolveStatus::Unbounded; break;
    case 3: sol.status = SolveStatus::IterationLimit; break;
    default: sol.status = SolveStatus::NumericalFailure; break;
  }
  sol.objective = obj + program.objective_offset;
  return sol;
}

std::shared_ptr<const SolverBackend> make_backend(const std::string& id) {
  if (id == "clarabel" || id.empty()) return std::make_shared<ClarabelBackend>();
  throw std::invalid_argument("unknown backend: " + id);
}

}  // namespace mro
