use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::complex::{riemannian_double, DomainEmbedding, SimplicialComplex};
use crate::cover::build_cover;
use crate::dec::{Cochain, Operators};
use crate::error::{Error, Result};
use crate::harmonic::{harmonic_basis, HarmonicBasis, DEFAULT_NULL_TOL};
use crate::linalg::weighted_dot;

use super::{RaisingStepsReport, Solver, SolverConfig};

/// Below this reciprocal condition number the Gram system is treated as singular.
const GRAM_RCOND: f64 = 1e-12;

/// `ω′ = ω·1_Ω − Σⱼ μⱼ eⱼ·1_{D∖Ω}` with `Gμ = λ`, `Gⱼₖ = ⟨eⱼ·1_{D∖Ω}, eₖ⟩`,
/// `λⱼ = ⟨ω·1_Ω, eⱼ⟩`, so that `ω′ ⊥ H(D)`.
pub fn extend_orthogonal(
    ops_d: &Operators,
    embedding: &DomainEmbedding,
    basis_d: &HarmonicBasis,
    omega: &Cochain,
) -> Result<Cochain> {
    let p = omega.degree();
    if basis_d.degree() != p {
        return Err(Error::DegreeMismatch {
            expected: basis_d.degree(),
            found: p,
        });
    }
    let expected =
        embedding
            .domain_simplices
            .get(p)
            .map(|d| d.len())
            .ok_or(Error::DegreeOutOfRange {
                degree: p,
                min: 0,
                max: embedding.domain_simplices.len().saturating_sub(1),
            })?;
    if omega.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: omega.len(),
        });
    }
    let zero_ext = ops_d.cochain(p, embedding.extend_by_zero(p, omega.values()))?;
    let kp = basis_d.dim();
    if kp == 0 {
        return Ok(zero_ext);
    }
    let star = ops_d.star().weights(p);
    let outside = embedding.complement_mask(p);
    let masked: Vec<Vec<f64>> = basis_d
        .vectors()
        .iter()
        .map(|e| {
            e.values()
                .iter()
                .zip(&outside)
                .map(|(&x, &o)| if o { x } else { 0.0 })
                .collect()
        })
        .collect();
    let gram = DMatrix::from_fn(kp, kp, |j, k| {
        weighted_dot(star, &masked[j], basis_d.vectors()[k].values())
    });
    let gram = 0.5 * (&gram + gram.transpose());
    let lambda = DVector::from_iterator(kp, basis_d.coefficients(ops_d, &zero_ext)?);

    let eig = gram.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
        (lo.min(x), hi.max(x.abs()))
    });
    let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(rcond > GRAM_RCOND) {
        return Err(Error::SingularGram { rcond });
    }
    let mu = gram
        .cholesky()
        .ok_or(Error::SingularGram { rcond })?
        .solve(&lambda);

    let mut out = zero_ext.into_values();
    for (j, m) in masked.iter().enumerate() {
        crate::linalg::axpy(-mu[j], m, &mut out);
    }
    ops_d.cochain(p, out)
}

#[derive(Clone, Debug)]
pub struct DomainSolution {
    /// Solution restricted to the original domain.
    pub u: Cochain,
    pub double: SimplicialComplex,
    pub embedding: DomainEmbedding,
    /// `ω′` on the double.
    pub extended: Cochain,
    /// `u′` on the double.
    pub u_double: Cochain,
    pub metrics: DomainMetrics,
    pub report: RaisingStepsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainMetrics {
    pub harmonic_dim: usize,
    pub max_extension_leak: f64,
    /// `‖Δ_D u′ − ω′‖ / ‖ω′‖`.
    pub double_residual: f64,
    /// `‖(Δu − ω)|_int‖ / ‖ω‖` over simplices with no vertex on `∂Ω`.
    pub interior_residual: f64,
    pub interior_simplices: usize,
}

/// Double the domain, extend `ω` orthogonally to `H(D)`, solve on the
/// double, restrict back.
pub fn solve_on_domain(
    k: &SimplicialComplex,
    omega: &Cochain,
    cfg: &SolverConfig,
) -> Result<DomainSolution> {
    cfg.validate()?;
    let ops = Operators::assemble(k)?;
    let p = omega.degree();
    ops.check_degree(p)?;
    if omega.complex_id() != k.id() {
        return Err(Error::ComplexMismatch);
    }
    let (double, embedding) = riemannian_double(k)?;
    let ops_d = Operators::assemble(&double)?;
    let basis_d = harmonic_basis(&ops_d, p, DEFAULT_NULL_TOL)?;
    let extended = extend_orthogonal(&ops_d, &embedding, &basis_d, omega)?;
    let coeffs = basis_d.coefficients(&ops_d, &extended)?;
    let ext_norm = ops_d.norm(&extended);
    let max_extension_leak =
        coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())) / ext_norm.max(f64::MIN_POSITIVE);

    let cover = build_cover(&double, cfg.radius_hops, cfg.overlap_hops, cfg.rng_seed)?;
    let solver = Solver::new(&ops_d, &cover, &basis_d, cfg)?;
    let sol = solver.solve_with_threshold(&extended)?;
    let u_double = sol.v;
    let double_res = &ops_d.apply_laplacian(&u_double)? - &extended;
    let double_residual = ops_d.norm(&double_res) / ext_norm.max(f64::MIN_POSITIVE);

    let u = ops.cochain(p, embedding.restrict(p, u_double.values()))?;
    let on_boundary = k.boundary_mask(0);
    let interior: Vec<bool> = k
        .simplices(p)
        .iter()
        .map(|s| s.vertices().iter().all(|&v| !on_boundary[v]))
        .collect();
    let lap_u = ops.apply_laplacian(&u)?;
    let star = ops.star().weights(p);
    let mut sq = 0.0;
    for i in 0..interior.len() {
        if interior[i] {
            let r = lap_u.values()[i] - omega.values()[i];
            sq += star[i] * r * r;
        }
    }
    let n = ops.norm(omega);
    let interior_residual = if n == 0.0 { sq.sqrt() } else { sq.sqrt() / n };

    Ok(DomainSolution {
        u,
        metrics: DomainMetrics {
            harmonic_dim: basis_d.dim(),
            max_extension_leak,
            double_residual,
            interior_residual,
            interior_simplices: interior.iter().filter(|&&b| b).count(),
        },
        double,
        embedding,
        extended,
        u_double,
        report: sol.report,
    })
}
