use serde::Serialize;

use crate::dec::Cochain;
use crate::error::Result;

use super::{RaisingStepsReport, Solver};

#[derive(Clone, Debug)]
pub struct HodgeDecomposition {
    pub harmonic: Cochain,
    /// `d(d*u)`.
    pub exact: Cochain,
    /// `d*(du)`.
    pub coexact: Cochain,
    /// The potential `u ⊥ H` with `Δu = ω − h`.
    pub potential: Cochain,
    pub defects: DecompositionDefects,
    pub report: RaisingStepsReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionDefects {
    /// `‖h + α + β − ω‖ / ‖ω‖`.
    pub reconstruction: f64,
    /// `|⟨h, α⟩|, |⟨h, β⟩|, |⟨α, β⟩|`, each divided by `‖ω‖²`.
    pub harmonic_exact: f64,
    pub harmonic_coexact: f64,
    pub exact_coexact: f64,
}

impl DecompositionDefects {
    pub fn max_orthogonality(&self) -> f64 {
        self.harmonic_exact
            .max(self.harmonic_coexact)
            .max(self.exact_coexact)
    }
}

/// A remainder this small relative to `ω` is rounding noise from the projection.
const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// `ω = h + d(d*u) + d*(du)` with `h = H(ω)` and `u` the threshold solution
/// of `Δu = ω − h`.
pub fn hodge_decompose(solver: &Solver, omega: &Cochain) -> Result<HodgeDecomposition> {
    let ops = solver.ops();
    let basis = solver.basis();
    let p = omega.degree();
    let harmonic = basis.project(ops, omega)?;
    // Reprojected so the leak is small relative to ‖rest‖, not just to ‖ω‖.
    let mut rest = basis.remove_harmonic(ops, &(omega - &harmonic))?;
    if ops.norm(&rest) <= ROUNDING_FLOOR * ops.norm(omega) {
        rest = omega.zeros_like();
    }
    let sol = solver.solve_with_threshold(&rest)?;
    let u = sol.v;
    let exact = if p >= 1 {
        ops.exterior_derivative(&ops.codifferential(&u)?)?
    } else {
        omega.zeros_like()
    };
    let coexact = if p < ops.dim() {
        ops.codifferential(&ops.exterior_derivative(&u)?)?
    } else {
        omega.zeros_like()
    };

    let n = ops.norm(omega);
    let (lin, quad) = if n == 0.0 { (1.0, 1.0) } else { (n, n * n) };
    let recon = &(&(&harmonic + &exact) + &coexact) - omega;
    let defects = DecompositionDefects {
        reconstruction: ops.norm(&recon) / lin,
        harmonic_exact: ops.inner_product(&harmonic, &exact)?.abs() / quad,
        harmonic_coexact: ops.inner_product(&harmonic, &coexact)?.abs() / quad,
        exact_coexact: ops.inner_product(&exact, &coexact)?.abs() / quad,
    };
    Ok(HodgeDecomposition {
        harmonic,
        exact,
        coexact,
        potential: u,
        defects,
        report: sol.report,
    })
}
