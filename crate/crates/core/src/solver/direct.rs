use crate::dec::{Cochain, Operators};
use crate::error::{Error, Result};
use crate::harmonic::HarmonicBasis;
use crate::linalg::RefinedSpdSolver;

use super::COMPATIBILITY_TOL;

const ORACLE_SHIFT: f64 = 1e-8;

/// Sparse Cholesky of `★Δ` (shifted by `★` when singular) with refinement
/// projected onto `H^⊥`: the reference solve on the complement of the kernel.
#[derive(Clone, Debug)]
pub struct DirectSolver<'a> {
    ops: &'a Operators,
    basis: &'a HarmonicBasis,
    solver: RefinedSpdSolver,
}

impl<'a> DirectSolver<'a> {
    pub fn new(ops: &'a Operators, basis: &'a HarmonicBasis) -> Result<Self> {
        let p = basis.degree();
        let k = ops.stiffness(p)?;
        let star = ops.star().weights(p);
        let solver = if basis.dim() == 0 {
            RefinedSpdSolver::new(k, star, ORACLE_SHIFT)?
        } else {
            RefinedSpdSolver::shifted(k, star, ORACLE_SHIFT)?
        };
        Ok(Self { ops, basis, solver })
    }

    /// `w ∈ H^⊥` with `Δw = ω`; `ω` must be compatible.
    pub fn solve(&self, omega: &Cochain) -> Result<Cochain> {
        let p = self.basis.degree();
        if omega.degree() != p {
            return Err(Error::DegreeMismatch {
                expected: p,
                found: omega.degree(),
            });
        }
        let leak = self.basis.relative_leak(self.ops, omega)?;
        if leak > COMPATIBILITY_TOL {
            return Err(Error::CompatibilityViolation {
                relative_leak: leak,
            });
        }
        let star = self.ops.star().weights(p);
        let mut b = omega.values().to_vec();
        self.basis.remove_harmonic_in_place(star, &mut b);
        let rhs: Vec<f64> = b.iter().zip(star).map(|(x, s)| x * s).collect();
        let x = self
            .solver
            .solve_projected(&rhs, |x| self.basis.remove_harmonic_in_place(star, x));
        Ok(omega.with_values(x))
    }
}

pub fn direct_solve(ops: &Operators, basis: &HarmonicBasis, omega: &Cochain) -> Result<Cochain> {
    DirectSolver::new(ops, basis)?.solve(omega)
}
