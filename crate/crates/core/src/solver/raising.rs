use std::time::Instant;

use crate::cover::Cover;
use crate::dec::{Cochain, Operators};
use crate::error::{Error, Result};
use crate::harmonic::HarmonicBasis;

use super::{
    coarse_solve, elapsed_ms, LocalSolvers, RaisingStepsReport, SolverConfig, StepRecord,
    COMPATIBILITY_TOL,
};

#[derive(Clone, Debug)]
pub struct RaisingSteps {
    /// `u = Σₖ (−1)ᵏ vₖ`.
    pub u: Cochain,
    /// `ω̃` with `Δu = ω + ω̃`.
    pub residual: Cochain,
    pub report: RaisingStepsReport,
}

#[derive(Clone, Debug)]
pub struct ThresholdSolution {
    pub v: Cochain,
    pub report: RaisingStepsReport,
}

/// Raising steps on a fixed cover, with the patch factorizations done once.
#[derive(Debug)]
pub struct Solver<'a> {
    ops: &'a Operators,
    cover: &'a Cover,
    basis: &'a HarmonicBasis,
    locals: LocalSolvers,
    cfg: SolverConfig,
    factor_ms: f64,
}

impl<'a> Solver<'a> {
    pub fn new(
        ops: &'a Operators,
        cover: &'a Cover,
        basis: &'a HarmonicBasis,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if let Some(chi) = cover.chi.first() {
            if chi.complex_id() != ops.complex_id() {
                return Err(Error::ComplexMismatch);
            }
        }
        let t = Instant::now();
        let locals = LocalSolvers::prepare(ops, cover, basis.degree(), cfg)?;
        Ok(Self {
            ops,
            cover,
            basis,
            locals,
            cfg: cfg.clone(),
            factor_ms: elapsed_ms(t),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn ops(&self) -> &'a Operators {
        self.ops
    }

    pub fn basis(&self) -> &'a HarmonicBasis {
        self.basis
    }

    pub fn cover(&self) -> &'a Cover {
        self.cover
    }

    pub fn locals(&self) -> &LocalSolvers {
        &self.locals
    }

    fn check_input(&self, omega: &Cochain) -> Result<()> {
        self.locals.check(omega)?;
        let leak = self.basis.relative_leak(self.ops, omega)?;
        if leak > COMPATIBILITY_TOL {
            return Err(Error::CompatibilityViolation {
                relative_leak: leak,
            });
        }
        Ok(())
    }

    /// One step: `vₖ = Σⱼ χⱼuⱼ` and `ωₖ₊₁ = Σⱼ B(χⱼ, uⱼ)`, both summed in patch order.
    fn step(&self, omega_k: &Cochain) -> (Cochain, Cochain) {
        let mut v = omega_k.zeros_like();
        let mut next = omega_k.zeros_like();
        for part in self
            .locals
            .step_parts(self.cfg.execution, omega_k)
            .into_iter()
            .flatten()
        {
            let vv = v.values_mut();
            for (&i, x) in part.index.iter().zip(&part.chi_u) {
                vv[i] += x;
            }
            let nv = next.values_mut();
            for (&i, x) in part.halo.iter().zip(&part.commutator) {
                nv[i] += x;
            }
        }
        (v, next)
    }

    pub fn raising_steps(&self, omega: &Cochain) -> Result<RaisingSteps> {
        self.check_input(omega)?;
        let start = Instant::now();
        let ops = self.ops;
        let rhs_norm = ops.norm(omega);
        let mut report = RaisingStepsReport {
            rhs_norm,
            patches: self.cover.len(),
            wall_ms_factor: self.factor_ms,
            ..Default::default()
        };
        let mut u = omega.zeros_like();
        let mut omega_k = omega.clone();
        let mut residual = omega.zeros_like();
        if rhs_norm == 0.0 {
            report.converged = true;
            report.steps.push(StepRecord {
                k: 0,
                residual_norm: 0.0,
                telescoping_defect: 0.0,
                harmonic_leak: 0.0,
            });
            report.wall_ms_steps = elapsed_ms(start);
            report.wall_ms = report.wall_ms_steps;
            return Ok(RaisingSteps {
                u,
                residual,
                report,
            });
        }
        report.steps.push(StepRecord {
            k: 0,
            residual_norm: rhs_norm,
            telescoping_defect: 0.0,
            harmonic_leak: self.basis.relative_leak(ops, omega)?,
        });

        let mut sign = 1.0;
        let mut norm_k = rhs_norm;
        for k in 0..self.cfg.max_steps {
            let (v, next) = self.step(&omega_k);
            u.axpy(sign, &v);
            // Δ(Σ_{j≤k} (−1)ʲvⱼ) = ω + (−1)ᵏ ωₖ₊₁
            residual = next.scaled(sign);
            sign = -sign;

            let lap_u = ops.apply_laplacian(&u)?;
            let defect = &(&lap_u - omega) - &residual;
            let norm_next = ops.norm(&next);
            let ratio = norm_next / norm_k;
            report.steps.push(StepRecord {
                k: k + 1,
                residual_norm: norm_next,
                telescoping_defect: ops.norm(&defect),
                harmonic_leak: self.basis.relative_leak(ops, &next)?,
            });
            report.contraction = Some(report.contraction.map_or(ratio, |c: f64| c.max(ratio)));
            omega_k = next;
            norm_k = norm_next;
            if ratio > self.cfg.divergence_ratio {
                report.wall_ms_steps = elapsed_ms(start);
                report.wall_ms = report.wall_ms_steps;
                return Err(Error::ResidualDivergence {
                    step: k + 1,
                    ratio,
                    report: Box::new(report),
                });
            }
            if norm_next <= self.cfg.residual_tol * rhs_norm {
                report.converged = true;
                break;
            }
        }
        report.wall_ms_steps = elapsed_ms(start);
        report.wall_ms = report.wall_ms_steps;
        Ok(RaisingSteps {
            u,
            residual,
            report,
        })
    }

    /// `v = u − ṽ` with `Δṽ = ω̃` solved on `H^⊥` by the coarse solver.
    pub fn solve_with_threshold(&self, omega: &Cochain) -> Result<ThresholdSolution> {
        let start = Instant::now();
        let RaisingSteps {
            u,
            residual,
            mut report,
        } = self.raising_steps(omega)?;
        let ops = self.ops;
        let t = Instant::now();
        // ω̃ ⊥ H up to the input's own admissible leak, which Δ cannot reach.
        let residual = self.basis.remove_harmonic(ops, &residual)?;
        let coarse = coarse_solve(ops, self.basis, &residual, &self.cfg)?;
        report.wall_ms_coarse = elapsed_ms(t);
        report.coarse_iters = coarse.iterations;
        let mut v = &u - &coarse.w;
        if self.cfg.post_project {
            v = self.basis.remove_harmonic(ops, &v)?;
        }
        let target = self.basis.remove_harmonic(ops, omega)?;
        let res = &ops.apply_laplacian(&v)? - &target;
        report.final_residual = if report.rhs_norm == 0.0 {
            ops.norm(&res)
        } else {
            ops.norm(&res) / report.rhs_norm
        };
        report.wall_ms = elapsed_ms(start);
        Ok(ThresholdSolution { v, report })
    }
}

pub fn raising_steps(
    ops: &Operators,
    cover: &Cover,
    basis: &HarmonicBasis,
    omega: &Cochain,
    cfg: &SolverConfig,
) -> Result<RaisingSteps> {
    Solver::new(ops, cover, basis, cfg)?.raising_steps(omega)
}

pub fn solve_with_threshold(
    ops: &Operators,
    cover: &Cover,
    basis: &HarmonicBasis,
    omega: &Cochain,
    cfg: &SolverConfig,
) -> Result<ThresholdSolution> {
    Solver::new(ops, cover, basis, cfg)?.solve_with_threshold(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generate_torus;
    use crate::cover::build_cover;
    use crate::harmonic::{harmonic_basis, DEFAULT_NULL_TOL};
    use crate::solver::direct_solve;

    #[test]
    fn single_patch_converges_in_one_step() {
        let k = generate_torus(8, 8).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let basis = harmonic_basis(&ops, 1, DEFAULT_NULL_TOL).unwrap();
        let cover = build_cover(&k, 100, 1, 0).unwrap();
        let omega = basis.remove_harmonic(&ops, &ops.random(1, 3)).unwrap();
        let rs = raising_steps(&ops, &cover, &basis, &omega, &SolverConfig::default()).unwrap();
        assert_eq!(rs.report.steps.len(), 2);
        assert!(rs.report.converged);
        assert!(rs.residual.is_zero());
        let u = basis.remove_harmonic(&ops, &rs.u).unwrap();
        let res = &ops.apply_laplacian(&u).unwrap() - &omega;
        assert!(ops.norm(&res) <= 1e-12 * ops.norm(&omega));
    }

    #[test]
    fn zero_input_takes_no_steps() {
        let k = generate_torus(6, 6).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let basis = harmonic_basis(&ops, 0, DEFAULT_NULL_TOL).unwrap();
        let cover = build_cover(&k, 2, 1, 0).unwrap();
        let rs = raising_steps(
            &ops,
            &cover,
            &basis,
            &ops.zeros(0),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(rs.u.is_zero());
        assert_eq!(rs.report.steps.len(), 1);
    }

    #[test]
    fn threshold_solution_matches_direct() {
        let k = generate_torus(12, 12).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let basis = harmonic_basis(&ops, 1, DEFAULT_NULL_TOL).unwrap();
        let cover = build_cover(&k, 4, 1, 0).unwrap();
        let omega = basis.remove_harmonic(&ops, &ops.random(1, 7)).unwrap();
        let sol =
            solve_with_threshold(&ops, &cover, &basis, &omega, &SolverConfig::default()).unwrap();
        let direct = direct_solve(&ops, &basis, &omega).unwrap();
        let err = ops.norm(&(&sol.v - &direct)) / ops.norm(&direct);
        assert!(err <= 1e-6, "{err}");
        assert!(
            sol.report.max_relative_defect() <= 1e-10,
            "{:?}",
            sol.report
        );
        assert!(sol.report.final_residual <= 1e-10);
    }

    #[test]
    fn incompatible_input_is_rejected() {
        let k = generate_torus(6, 6).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let basis = harmonic_basis(&ops, 1, DEFAULT_NULL_TOL).unwrap();
        let cover = build_cover(&k, 4, 1, 0).unwrap();
        let omega = basis.vectors()[1].clone();
        assert!(matches!(
            raising_steps(&ops, &cover, &basis, &omega, &SolverConfig::default()),
            Err(Error::CompatibilityViolation { .. })
        ));
    }
}
