use crate::cover::{Cover, Patch};
use crate::dec::{Cochain, Operators};
use crate::error::{Error, Result};
use crate::linalg::RefinedSpdSolver;
use crate::par::{map_indexed, Execution};
use crate::sparse::CsrMatrix;

use super::SolverConfig;

/// One factored principal submatrix of `★Δ` per patch, for a fixed degree.
#[derive(Clone, Debug)]
pub struct LocalSolvers {
    degree: usize,
    complex_id: u64,
    n: usize,
    patches: Vec<Option<PatchFactor>>,
}

#[derive(Clone, Debug)]
struct PatchFactor {
    index: Vec<usize>,
    star: Vec<f64>,
    solver: RefinedSpdSolver,
    stencil: Option<Stencil>,
}

/// What one patch needs to form `χu` and `B(χ, u)` for `u` supported in the patch.
#[derive(Clone, Debug)]
struct Stencil {
    /// Rows of `Δ` reachable from the patch simplices (a superset of them).
    halo: Vec<usize>,
    /// `Δ[halo, index]`.
    lap: CsrMatrix,
    mean_index: Vec<f64>,
    mean_halo: Vec<f64>,
}

/// Patch contributions to one raising step, in patch-local coordinates.
pub(crate) struct StepPart<'a> {
    pub index: &'a [usize],
    pub chi_u: Vec<f64>,
    pub halo: &'a [usize],
    pub commutator: Vec<f64>,
}

impl Stencil {
    fn build(ops: &Operators, index: &[usize], chi: &Cochain, p: usize) -> Result<Self> {
        let lap = ops.laplacian(p)?;
        let mut halo: Vec<usize> = index
            .iter()
            .flat_map(|&i| lap.row(i).map(|(c, _)| c))
            .collect();
        halo.sort_unstable();
        halo.dedup();
        let mut triplets = Vec::new();
        for (r, &h) in halo.iter().enumerate() {
            for (c, v) in lap.row(h) {
                if let Ok(local) = index.binary_search(&c) {
                    triplets.push((r, local, v));
                }
            }
        }
        let mean = ops.vertex_mean(p, chi.values());
        Ok(Self {
            lap: CsrMatrix::from_triplets(halo.len(), index.len(), &triplets),
            mean_index: index.iter().map(|&i| mean[i]).collect(),
            mean_halo: halo.iter().map(|&h| mean[h]).collect(),
            halo,
        })
    }

    /// `χx` on the patch and `Δ(χx) − χΔx` on the halo.
    fn apply(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let chi_u: Vec<f64> = self.mean_index.iter().zip(x).map(|(m, v)| m * v).collect();
        let lap_chi_u = self.lap.mul_vec(&chi_u);
        let lap_u = self.lap.mul_vec(x);
        let b = lap_chi_u
            .iter()
            .zip(&lap_u)
            .zip(&self.mean_halo)
            .map(|((a, l), m)| a - m * l)
            .collect();
        (chi_u, b)
    }
}

impl PatchFactor {
    fn build(
        ops: &Operators,
        patch: &Patch,
        chi: Option<&Cochain>,
        p: usize,
        eps: f64,
    ) -> Result<Option<Self>> {
        let index = patch.simplices[p].clone();
        if index.is_empty() {
            return Ok(None);
        }
        let k = ops.stiffness(p)?.principal_submatrix(&index);
        let all_star = ops.star().weights(p);
        let star: Vec<f64> = index.iter().map(|&i| all_star[i]).collect();
        let solver = RefinedSpdSolver::new(&k, &star, eps)?;
        let stencil = chi.map(|c| Stencil::build(ops, &index, c, p)).transpose()?;
        Ok(Some(Self {
            index,
            star,
            solver,
            stencil,
        }))
    }

    /// `Δ_UU x = ω_U` as `(★Δ)_UU x = ★_U ω_U`, in patch coordinates.
    fn solve_local(&self, omega: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = self
            .index
            .iter()
            .zip(&self.star)
            .map(|(&i, s)| s * omega[i])
            .collect();
        self.solver.solve(&rhs)
    }
}

impl LocalSolvers {
    pub fn prepare(ops: &Operators, cover: &Cover, p: usize, cfg: &SolverConfig) -> Result<Self> {
        ops.check_degree(p)?;
        let built = map_indexed(cfg.execution, cover.len(), |j| {
            PatchFactor::build(
                ops,
                &cover.patches[j],
                Some(&cover.chi[j]),
                p,
                cfg.tikhonov_eps,
            )
        });
        Ok(Self {
            degree: p,
            complex_id: ops.complex_id(),
            n: ops.n(p),
            patches: built.into_iter().collect::<Result<_>>()?,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Patches whose principal submatrix needed the Tikhonov shift.
    pub fn shifted_patches(&self) -> usize {
        self.patches
            .iter()
            .flatten()
            .filter(|f| f.solver.is_shifted())
            .count()
    }

    pub(crate) fn check(&self, omega: &Cochain) -> Result<()> {
        if omega.complex_id() != self.complex_id {
            return Err(Error::ComplexMismatch);
        }
        if omega.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: omega.degree(),
            });
        }
        Ok(())
    }

    /// `uⱼ` for patch `j`, zero-extended outside `Uⱼ`.
    pub fn solve(&self, j: usize, omega: &Cochain) -> Result<Cochain> {
        self.check(omega)?;
        let mut out = vec![0.0; self.n];
        if let Some(f) = &self.patches[j] {
            for (&i, v) in f.index.iter().zip(f.solve_local(omega.values())) {
                out[i] = v;
            }
        }
        Ok(omega.with_values(out))
    }

    /// Local solve, `χⱼuⱼ` and `B(χⱼ, uⱼ)` for every patch, in patch order.
    /// Patches without simplices of this degree contribute nothing.
    pub(crate) fn step_parts(&self, exec: Execution, omega: &Cochain) -> Vec<Option<StepPart<'_>>> {
        map_indexed(exec, self.patches.len(), |j| {
            let f = self.patches[j].as_ref()?;
            let stencil = f.stencil.as_ref().expect("prepared solvers carry stencils");
            let (chi_u, commutator) = stencil.apply(&f.solve_local(omega.values()));
            Some(StepPart {
                index: &f.index,
                chi_u,
                halo: &stencil.halo,
                commutator,
            })
        })
    }
}

/// Single-shot local solve on patch `j` (factors the patch system each call).
pub fn local_solve(
    ops: &Operators,
    cover: &Cover,
    j: usize,
    omega: &Cochain,
    cfg: &SolverConfig,
) -> Result<Cochain> {
    let patch = cover.patches.get(j).ok_or_else(|| {
        Error::InvalidParameter(format!("patch {j} out of range ({} patches)", cover.len()))
    })?;
    let p = omega.degree();
    let solvers = LocalSolvers {
        degree: p,
        complex_id: ops.complex_id(),
        n: ops.n(p),
        patches: vec![PatchFactor::build(ops, patch, None, p, cfg.tikhonov_eps)?],
    };
    solvers.solve(0, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generate_torus;
    use crate::cover::{build_cover, commutator};

    #[test]
    fn stencil_matches_global_commutator() {
        let k = generate_torus(10, 9).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let cover = build_cover(&k, 3, 1, 2).unwrap();
        for p in 0..=2 {
            let locals = LocalSolvers::prepare(&ops, &cover, p, &SolverConfig::default()).unwrap();
            let omega = ops.random(p, 4);
            for (j, part) in locals
                .step_parts(Execution::Sequential, &omega)
                .into_iter()
                .enumerate()
            {
                let part = part.unwrap();
                let u = locals.solve(j, &omega).unwrap();
                let chi_u = ops.scalar_multiply(&cover.chi[j], &u).unwrap();
                let b = commutator(&ops, &cover.chi[j], &u).unwrap();
                let mut local_chi_u = vec![0.0; ops.n(p)];
                for (&i, v) in part.index.iter().zip(&part.chi_u) {
                    local_chi_u[i] = *v;
                }
                let mut local_b = vec![0.0; ops.n(p)];
                for (&i, v) in part.halo.iter().zip(&part.commutator) {
                    local_b[i] = *v;
                }
                assert_eq!(local_chi_u, chi_u.values());
                let scale = ops.norm(&b).max(1.0);
                for (x, y) in local_b.iter().zip(b.values()) {
                    assert!((x - y).abs() <= 1e-14 * scale, "p={p} patch {j}");
                }
            }
        }
    }
}
