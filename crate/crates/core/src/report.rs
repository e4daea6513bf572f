//! Solver output records.

use serde::{Deserialize, Serialize};

use crate::singular::BoundEstimates;
use crate::trig::PeriodicFunction;

/// Diagnostics evaluated on a converged solution, independent of the
/// iteration that produced it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    /// Residual of the equation integrated over one period.
    pub mean_identity: Option<f64>,
    /// `|∫ f(C+u) u′ u dt|` (or its vector analogue).
    pub drift_neutrality: Option<f64>,
    /// Share of spectral energy in the upper half of the modes.
    pub high_mode_fraction: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// Iterates whose clamped solve left the sub/super bracket.
    pub ordering_violations: Option<usize>,
    /// Largest excursion outside the bracket on the final solution.
    pub ordering_excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub min_value: f64,
    /// `‖u_k − u_{k−1}‖_{L²} / (1 + ‖u_{k−1}‖_{L²})`.
    pub jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// The solved problem as it was resolved by the solver.
    pub problem_echo: serde_json::Value,
    pub converged: bool,
    pub iterations: usize,
    pub newton_steps: usize,
    pub picard_steps: usize,
    /// Coefficient-space l2 norm of the final residual.
    pub residual: f64,
    /// Residual recomputed pointwise on a finer grid from the operator and
    /// nonlinearity, sharing no code path with the iteration.
    pub verified_residual: f64,
    pub residual_history: Vec<f64>,
    /// Full solution of each component, mean included.
    pub solution: Vec<PeriodicFunction>,
    /// Prescribed or computed mean level of each component.
    pub mean_levels: Vec<f64>,
    pub checks: Checks,
    pub bounds: Option<BoundEstimates>,
    /// Accepted steps of a parameter continuation, if one was run.
    #[serde(default)]
    pub continuation: Vec<ContinuationStep>,
    pub notes: Vec<String>,
}

impl SolveReport {
    /// The first (for scalar problems, the only) component.
    pub fn u(&self) -> &PeriodicFunction {
        &self.solution[0]
    }

    pub fn mean_zero_part(&self, component: usize) -> PeriodicFunction {
        self.solution[component].without_mean()
    }
}
