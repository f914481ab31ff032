//! Solve paths for `Δu = ω`: patch-local solves, the coarse solve on `H^⊥`,
//! raising steps, the Neumann series, the Hodge decomposition and the
//! domain solve through the double.

mod coarse;
mod decompose;
mod direct;
mod domain;
mod local;
mod neumann;
mod raising;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

pub use coarse::{coarse_solve, CoarseSolution};
pub use decompose::{hodge_decompose, DecompositionDefects, HodgeDecomposition};
pub use direct::{direct_solve, DirectSolver};
pub use domain::{extend_orthogonal, solve_on_domain, DomainMetrics, DomainSolution};
pub use local::{local_solve, LocalSolvers};
pub use neumann::{neumann_perturbation_solve, NeumannSolution};
pub use raising::{raising_steps, solve_with_threshold, RaisingSteps, Solver, ThresholdSolution};

/// Largest harmonic leak `‖H(ω)‖/‖ω‖` accepted as compatible.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_steps: usize,
    pub residual_tol: f64,
    pub coarse_tol: f64,
    pub coarse_max_iters: usize,
    pub tikhonov_eps: f64,
    pub rng_seed: u64,
    pub radius_hops: u32,
    pub overlap_hops: u32,
    /// Project the threshold solution onto `H^⊥`.
    pub post_project: bool,
    pub neumann_max_terms: usize,
    /// A single step growing `‖ωₖ‖` by more than this factor aborts the run.
    pub divergence_ratio: f64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_steps: 20,
            residual_tol: 1e-10,
            coarse_tol: 1e-12,
            coarse_max_iters: 20_000,
            tikhonov_eps: 1e-10,
            rng_seed: 0,
            radius_hops: crate::cover::DEFAULT_RADIUS_HOPS,
            overlap_hops: crate::cover::DEFAULT_OVERLAP_HOPS,
            post_project: true,
            neumann_max_terms: 200,
            divergence_ratio: 10.0,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("residual_tol", self.residual_tol),
            ("coarse_tol", self.coarse_tol),
            ("tikhonov_eps", self.tikhonov_eps),
            ("divergence_ratio", self.divergence_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidParameter(
                "max_steps must be at least 1".into(),
            ));
        }
        if self.coarse_max_iters < 1 || self.neumann_max_terms < 1 {
            return Err(Error::InvalidParameter(
                "iteration caps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    /// `‖ωₖ‖`.
    pub residual_norm: f64,
    /// `‖Δuₖ − ω − ω̃ₖ‖` with `uₖ = Σ_{j<k} (−1)ʲvⱼ` and `ω̃ₖ = (−1)^{k−1} ωₖ`.
    pub telescoping_defect: f64,
    /// `‖H(ωₖ)‖ / ‖ωₖ‖`.
    pub harmonic_leak: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RaisingStepsReport {
    pub rhs_norm: f64,
    pub patches: usize,
    pub steps: Vec<StepRecord>,
    /// Largest measured `‖ωₖ₊₁‖ / ‖ωₖ‖`.
    pub contraction: Option<f64>,
    pub converged: bool,
    pub coarse_iters: usize,
    /// `‖Δv − ω‖ / ‖ω‖` of the returned solution.
    pub final_residual: f64,
    pub wall_ms: f64,
    pub wall_ms_factor: f64,
    pub wall_ms_steps: f64,
    pub wall_ms_coarse: f64,
}

impl RaisingStepsReport {
    /// Worst `telescoping_defect / (‖ω‖ + ‖ωₖ‖)` over the recorded steps.
    pub fn max_relative_defect(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| {
                let scale = self.rhs_norm + s.residual_norm;
                if scale == 0.0 {
                    s.telescoping_defect
                } else {
                    s.telescoping_defect / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn elapsed_ms(t: std::time::Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
