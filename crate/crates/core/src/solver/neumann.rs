use crate::error::{Error, Result};
use crate::linalg::dot;

use super::SolverConfig;

/// Ratios at or above the cap for this many consecutive terms abort the series.
const FAILURE_STREAK: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct NeumannSolution {
    pub v: Vec<f64>,
    /// `‖γₖ‖` for every evaluated term, starting with `‖γ‖`.
    pub residual_norms: Vec<f64>,
    pub converged: bool,
}

/// Solves `(L₀ + A)v = γ` by the alternating series `vₖ = L₀⁻¹γₖ`,
/// `γₖ₊₁ = A vₖ`, `v = Σ (−1)ᵏ vₖ`.
pub fn neumann_perturbation_solve<L, A>(
    l0_solve: L,
    a_apply: A,
    gamma: &[f64],
    contraction_cap: f64,
    cfg: &SolverConfig,
) -> Result<NeumannSolution>
where
    L: Fn(&[f64]) -> Result<Vec<f64>>,
    A: Fn(&[f64]) -> Vec<f64>,
{
    if !(contraction_cap > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "contraction cap must be positive, got {contraction_cap}"
        )));
    }
    let norm = |x: &[f64]| dot(x, x).sqrt();
    let g0 = norm(gamma);
    let mut v = vec![0.0; gamma.len()];
    let mut residual_norms = vec![g0];
    if g0 == 0.0 {
        return Ok(NeumannSolution {
            v,
            residual_norms,
            converged: true,
        });
    }
    let mut g = gamma.to_vec();
    let mut gn = g0;
    let mut sign = 1.0;
    let mut streak = 0;
    for step in 1..=cfg.neumann_max_terms {
        let vk = l0_solve(&g)?;
        for (acc, x) in v.iter_mut().zip(&vk) {
            *acc += sign * x;
        }
        sign = -sign;
        g = a_apply(&vk);
        let next = norm(&g);
        residual_norms.push(next);
        let ratio = next / gn;
        gn = next;
        if next <= cfg.residual_tol * g0 {
            return Ok(NeumannSolution {
                v,
                residual_norms,
                converged: true,
            });
        }
        streak = if ratio >= contraction_cap {
            streak + 1
        } else {
            0
        };
        if streak >= FAILURE_STREAK {
            return Err(Error::ContractionFailure { step, ratio });
        }
    }
    Ok(NeumannSolution {
        v,
        residual_norms,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_perturbation_is_one_term() {
        let l0 = |x: &[f64]| Ok(x.iter().map(|v| v / 2.0).collect());
        let a = |x: &[f64]| vec![0.0; x.len()];
        let sol =
            neumann_perturbation_solve(l0, a, &[2.0, 4.0], 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(sol.v, vec![1.0, 2.0]);
        assert_eq!(sol.residual_norms.len(), 2);
    }

    #[test]
    fn zero_input() {
        let l0 = |x: &[f64]| Ok(x.to_vec());
        let sol = neumann_perturbation_solve(
            l0,
            |x: &[f64]| x.to_vec(),
            &[0.0; 3],
            1.0,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(sol.v, vec![0.0; 3]);
    }

    #[test]
    fn expanding_perturbation_fails() {
        let l0 = |x: &[f64]| Ok(x.to_vec());
        let a = |x: &[f64]| x.iter().map(|v| 1.2 * v).collect();
        let err = neumann_perturbation_solve(l0, a, &[1.0, 1.0], 1.0, &SolverConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::ContractionFailure { step: 3, .. }));
    }

    #[test]
    fn term_cap_without_convergence() {
        let l0 = |x: &[f64]| Ok(x.to_vec());
        let a = |x: &[f64]| x.iter().map(|v| 0.9 * v).collect();
        let cfg = SolverConfig {
            neumann_max_terms: 5,
            ..Default::default()
        };
        let sol = neumann_perturbation_solve(l0, a, &[1.0], 1.0, &cfg).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.residual_norms.len(), 6);
    }
}
