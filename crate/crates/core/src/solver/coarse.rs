use crate::dec::{Cochain, Operators};
use crate::error::{Error, Result};
use crate::harmonic::HarmonicBasis;
use crate::linalg::{axpy, weighted_dot};

use super::{SolverConfig, COMPATIBILITY_TOL};

#[derive(Clone, Debug)]
pub struct CoarseSolution {
    pub w: Cochain,
    pub iterations: usize,
    /// `‖Δw − P ω‖ / ‖P ω‖` with `P` the projector onto `H^⊥`.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for `Δw = ω` in the star inner
/// product, with every iterate, residual and search direction kept in `H^⊥`.
pub fn coarse_solve(
    ops: &Operators,
    basis: &HarmonicBasis,
    omega: &Cochain,
    cfg: &SolverConfig,
) -> Result<CoarseSolution> {
    let p = omega.degree();
    if basis.degree() != p {
        return Err(Error::DegreeMismatch {
            expected: basis.degree(),
            found: p,
        });
    }
    let leak = basis.relative_leak(ops, omega)?;
    if leak > COMPATIBILITY_TOL {
        return Err(Error::CompatibilityViolation {
            relative_leak: leak,
        });
    }
    let lap = ops.laplacian(p)?;
    let star = ops.star().weights(p);
    let project = |x: &mut [f64]| basis.remove_harmonic_in_place(star, x);
    let norm = |x: &[f64]| weighted_dot(star, x, x).max(0.0).sqrt();

    let mut b = omega.values().to_vec();
    project(&mut b);
    let b_norm = norm(&b);
    let n = b.len();
    if b_norm == 0.0 {
        return Ok(CoarseSolution {
            w: omega.zeros_like(),
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let target = cfg.coarse_tol * b_norm;
    let inv_diag: Vec<f64> = lap
        .diagonal_values()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let precondition = |r: &[f64]| -> Vec<f64> {
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
        project(&mut z);
        z
    };
    let true_residual = |x: &[f64]| -> Vec<f64> {
        let ax = lap.mul_vec(x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        project(&mut r);
        r
    };

    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; n];
    let mut iterations = 0;
    let mut r = b.clone();
    // Restart from the true residual whenever the recurrence claims convergence.
    for _restart in 0..8 {
        let mut z = precondition(&r);
        let mut d = z.clone();
        let mut rz = weighted_dot(star, &r, &z);
        while iterations < cfg.coarse_max_iters && norm(&r) > target {
            lap.mul_vec_into(&d, &mut ax);
            project(&mut ax);
            let dad = weighted_dot(star, &d, &ax);
            if !(dad > 0.0) {
                break;
            }
            let alpha = rz / dad;
            axpy(alpha, &d, &mut x);
            axpy(-alpha, &ax, &mut r);
            z = precondition(&r);
            let rz_new = weighted_dot(star, &r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (di, zi) in d.iter_mut().zip(&z) {
                *di = zi + beta * *di;
            }
            iterations += 1;
        }
        project(&mut x);
        r = true_residual(&x);
        if norm(&r) <= target || iterations >= cfg.coarse_max_iters {
            break;
        }
    }
    let relative_residual = norm(&r) / b_norm;
    if relative_residual > cfg.coarse_tol {
        return Err(Error::NoConvergence {
            iterations,
            residual: relative_residual,
        });
    }
    Ok(CoarseSolution {
        w: omega.with_values(x),
        iterations,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generate_torus;
    use crate::harmonic::{harmonic_basis, DEFAULT_NULL_TOL};

    fn setup(p: usize) -> (Operators, HarmonicBasis) {
        let k = generate_torus(8, 8).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let basis = harmonic_basis(&ops, p, DEFAULT_NULL_TOL).unwrap();
        (ops, basis)
    }

    #[test]
    fn recovers_projected_preimage() {
        let (ops, basis) = setup(1);
        let v = ops.random(1, 9);
        let omega = ops.apply_laplacian(&v).unwrap();
        let sol = coarse_solve(&ops, &basis, &omega, &SolverConfig::default()).unwrap();
        let expect = basis.remove_harmonic(&ops, &v).unwrap();
        let err = ops.norm(&(&sol.w - &expect)) / ops.norm(&expect);
        assert!(err < 1e-9, "{err}");
        assert!(basis.relative_leak(&ops, &sol.w).unwrap() < 1e-10);
        let res = &ops.apply_laplacian(&sol.w).unwrap() - &omega;
        assert!(ops.norm(&res) <= 1e-12 * ops.norm(&omega) * 1.01);
    }

    #[test]
    fn harmonic_rhs_is_incompatible() {
        let (ops, basis) = setup(1);
        let e = basis.vectors()[0].clone();
        assert!(matches!(
            coarse_solve(&ops, &basis, &e, &SolverConfig::default()),
            Err(Error::CompatibilityViolation { .. })
        ));
    }

    #[test]
    fn zero_rhs() {
        let (ops, basis) = setup(0);
        let sol = coarse_solve(&ops, &basis, &ops.zeros(0), &SolverConfig::default()).unwrap();
        assert!(sol.w.is_zero());
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let (ops, basis) = setup(0);
        let omega = ops.apply_laplacian(&ops.random(0, 1)).unwrap();
        let cfg = SolverConfig {
            coarse_max_iters: 2,
            ..Default::default()
        };
        assert!(matches!(
            coarse_solve(&ops, &basis, &omega, &cfg),
            Err(Error::NoConvergence { .. })
        ));
    }
}
