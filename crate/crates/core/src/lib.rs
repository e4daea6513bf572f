//! Spectral solvers and verification tools for 2π-periodic equations driven
//! by the fractional Laplacian `(−Δ)^s`, `s ∈ (0, 1)`.

// `!(x > 0.0)` is how NaN gets rejected; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod branch;
pub mod error;
pub mod frac_op;
pub mod identity;
pub mod iterate;
pub mod lienard;
pub mod linear;
pub mod nonlinearity;
pub mod quad;
pub mod report;
mod semilinear;
pub mod singular;
pub mod trig;

pub use branch::{
    fold_mus, solutions_at, trace_branch, BifurcationProblem, Branch, BranchConfig, BranchPoint,
};
pub use error::{Error, Result};
pub use frac_op::{
    apply_kernel, apply_spectral, kernel_k, normalization_c1s, FracOrder, KernelQuadrature, KernelValue,
    NumericalConvention, OperatorSign,
};
pub use identity::{
    check_orthogonality, check_poincare, check_zero_mean, check_zero_mean_kernel, energy_identity,
    EnergyBreakdown,
};
pub use iterate::IterationConfig;
pub use lienard::{
    check_solvability, solve_lienard, solve_lienard_from, solve_system, LienardProblem, Monomial, Polynomial,
    SystemConditions, SystemProblem,
};
pub use linear::solve_linear;
pub use nonlinearity::{Nonlinearity, PowerTerm};
pub use report::{Checks, ContinuationStep, SolveReport};
pub use singular::{
    bound_monitor, find_sub_super, solve_attractive, solve_repulsive, solve_repulsive_with,
    AttractiveProblem, BoundEstimates, ConditionCheck, ContinuationConfig, RepulsiveProblem, SubSuper,
};
pub use trig::{PeriodicFunction, QuadratureConfig};
