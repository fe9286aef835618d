//! C ABI around the Clarabel interior-point solver.
//!
//! The conic core passes problems in the standard form
//!   minimize    q'x
//!   subject to  Ax + s = b,  s in K,
//! with A in compressed sparse column layout and K described by an
//! ordered list of cone tags.

use clarabel::algebra::*;
use clarabel::solver::*;
use std::slice;

pub const CONE_ZERO: i32 = 0;
pub const CONE_NONNEG: i32 = 1;
pub const CONE_SOC: i32 = 2;
pub const CONE_POWER3D: i32 = 3;
pub const CONE_EXP: i32 = 4;

pub const STATUS_OPTIMAL: i32 = 0;
pub const STATUS_INFEASIBLE: i32 = 1;
pub const STATUS_UNBOUNDED: i32 = 2;
pub const STATUS_ITERATION_LIMIT: i32 = 3;
pub const STATUS_NUMERICAL_FAILURE: i32 = 4;

/// Solves one conic program. Returns 0 on success (including solver-reported
/// infeasibility), nonzero only on malformed input.
///
/// # Safety
/// All pointers must reference buffers of the documented lengths.
#[no_mangle]
pub unsafe extern "C" fn clarabel_ffi_solve(
    n_vars: usize,
    n_rows: usize,
    q: *const f64,
    a_colptr: *const usize,
    a_rowval: *const usize,
    a_nzval: *const f64,
    a_nnz: usize,
    b: *const f64,
    n_cones: usize,
    cone_kinds: *const i32,
    cone_dims: *const usize,
    cone_params: *const f64,
    tol_feas: f64,
    tol_gap: f64,
    max_iter: u32,
    verbose: i32,
    x_out: *mut f64,
    obj_out: *mut f64,
    solve_time_out: *mut f64,
    status_out: *mut i32,
) -> i32 {
    let q = slice::from_raw_parts(q, n_vars);
    let colptr = slice::from_raw_parts(a_colptr, n_vars + 1);
    let rowval = slice::from_raw_parts(a_rowval, a_nnz);
    let nzval = slice::from_raw_parts(a_nzval, a_nnz);
    let b = slice::from_raw_parts(b, n_rows);
    let kinds = slice::from_raw_parts(cone_kinds, n_cones);
    let dims = slice::from_raw_parts(cone_dims, n_cones);
    let params = slice::from_raw_parts(cone_params, n_cones);

    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(n_cones);
    for i in 0..n_cones {
        match kinds[i] {
            CONE_ZERO => cones.push(ZeroConeT(dims[i])),
            CONE_NONNEG => cones.push(NonnegativeConeT(dims[i])),
            CONE_SOC => cones.push(SecondOrderConeT(dims[i])),
            CONE_POWER3D => cones.push(PowerConeT(params[i])),
            CONE_EXP => cones.push(ExponentialConeT()),
            _ => return 1,
        }
    }

    let p_mat = CscMatrix::<f64>::zeros((n_vars, n_vars));
    let a_mat = CscMatrix::new(
        n_rows,
        n_vars,
        colptr.to_vec(),
        rowval.to_vec(),
        nzval.to_vec(),
    );

    let settings = DefaultSettingsBuilder::default()
        .verbose(verbose != 0)
        .max_iter(max_iter)
        .tol_feas(tol_feas)
        .tol_gap_abs(tol_gap)
        .tol_gap_rel(tol_gap)
        .build()
        .unwrap();

    let mut solver = DefaultSolver::new(&p_mat, q, &a_mat, b, &cones, settings);
    solver.solve();

    let status = match solver.solution.status {
        SolverStatus::Solved => STATUS_OPTIMAL,
        SolverStatus::AlmostSolved => STATUS_OPTIMAL,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            STATUS_INFEASIBLE
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => STATUS_UNBOUNDED,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => STATUS_ITERATION_LIMIT,
        _ => STATUS_NUMERICAL_FAILURE,
    };

    let x_out = slice::from_raw_parts_mut(x_out, n_vars);
    x_out.copy_from_slice(&solver.solution.x);
    *obj_out = solver.solution.obj_val;
    *solve_time_out = solver.solution.solve_time;
    *status_out = status;
    0
}
