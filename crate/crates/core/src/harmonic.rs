//! Harmonic p-forms: the numerical kernel of `Δ_p`, an orthonormal basis for
//! it, and the orthogonal projector `H` onto it.
//!
//! The kernel is read off the generalized symmetric eigenproblem
//! `K x = λ ★ x` with `K = ★Δ`. Small systems go through a dense
//! eigensolve; larger ones through shift-invert subspace iteration on a
//! sparse Cholesky factor of `K + τ★`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dec::{Cochain, Operators};
use crate::error::{Error, Result};
use crate::linalg::{weighted_dot, EnvelopeCholesky};
use crate::sparse::CsrMatrix;

pub const DEFAULT_NULL_TOL: f64 = 1e-8;
/// Minimum ratio between the smallest kept nonzero eigenvalue and the largest kernel eigenvalue.
pub const REQUIRED_GAP: f64 = 1e3;
/// Largest system handled by the dense eigensolver under [`KernelMethod::Auto`].
pub const DENSE_LIMIT: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub degree: usize,
    pub method: KernelMethod,
    pub lambda_max: f64,
    pub kernel_dim: usize,
    pub largest_kernel: Option<f64>,
    pub smallest_nonzero: Option<f64>,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    degree: usize,
    basis: Vec<Cochain>,
    null_tol: f64,
    spectrum: SpectrumSummary,
}

impl HarmonicBasis {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `K_p`, the Betti number.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn vectors(&self) -> &[Cochain] {
        &self.basis
    }

    pub fn null_tol(&self) -> f64 {
        self.null_tol
    }

    pub fn spectrum(&self) -> &SpectrumSummary {
        &self.spectrum
    }

    fn check(&self, v: &Cochain) -> Result<()> {
        if v.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: v.degree(),
            });
        }
        if let Some(e) = self.basis.first() {
            e.check_compatible(v)?;
        }
        Ok(())
    }

    /// `⟨v, eⱼ⟩` for every basis vector.
    pub fn coefficients(&self, ops: &Operators, v: &Cochain) -> Result<Vec<f64>> {
        self.check(v)?;
        self.basis.iter().map(|e| ops.inner_product(v, e)).collect()
    }

    /// `H(v) = Σ ⟨v, eⱼ⟩ eⱼ`.
    pub fn project(&self, ops: &Operators, v: &Cochain) -> Result<Cochain> {
        let coeffs = self.coefficients(ops, v)?;
        let mut out = v.zeros_like();
        for (c, e) in coeffs.iter().zip(&self.basis) {
            out.axpy(*c, e);
        }
        Ok(out)
    }

    /// `v − H(v)`.
    pub fn remove_harmonic(&self, ops: &Operators, v: &Cochain) -> Result<Cochain> {
        Ok(v - &self.project(ops, v)?)
    }

    /// In-place `x ← x − H(x)` on raw values.
    pub(crate) fn remove_harmonic_in_place(&self, weights: &[f64], x: &mut [f64]) {
        for e in &self.basis {
            let c = weighted_dot(weights, x, e.values());
            crate::linalg::axpy(-c, e.values(), x);
        }
    }

    /// `‖H(v)‖ / ‖v‖` (zero for `v = 0`).
    pub fn relative_leak(&self, ops: &Operators, v: &Cochain) -> Result<f64> {
        let coeffs = self.coefficients(ops, v)?;
        let h = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        let n = ops.norm(v);
        Ok(if n == 0.0 { 0.0 } else { h / n })
    }
}

pub fn harmonic_basis(ops: &Operators, p: usize, null_tol: f64) -> Result<HarmonicBasis> {
    harmonic_basis_with(ops, p, null_tol, KernelMethod::Auto)
}

pub fn harmonic_basis_with(
    ops: &Operators,
    p: usize,
    null_tol: f64,
    method: KernelMethod,
) -> Result<HarmonicBasis> {
    if !(null_tol > 0.0 && null_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "null_tol must lie in (0, 1), got {null_tol}"
        )));
    }
    ops.check_degree(p)?;
    let n = ops.n(p);
    let method = match method {
        KernelMethod::Auto if n <= DENSE_LIMIT => KernelMethod::Dense,
        KernelMethod::Auto => KernelMethod::ShiftInvert,
        m => m,
    };
    let weights = ops.star().weights(p).to_vec();
    let stiffness = ops.stiffness(p)?;

    let (eigs, vectors, lambda_max) = match method {
        KernelMethod::Dense => dense_spectrum(stiffness, &weights),
        _ => shift_invert_spectrum(ops, p, stiffness, &weights, null_tol)?,
    };

    let threshold = null_tol * lambda_max;
    let kernel_dim = eigs.iter().take_while(|&&l| l <= threshold).count();
    let largest_kernel = kernel_dim.checked_sub(1).map(|i| eigs[i]);
    let smallest_nonzero = eigs.get(kernel_dim).copied();
    let gap = match (largest_kernel, smallest_nonzero) {
        (_, None) => f64::INFINITY,
        (None, Some(s)) => s / threshold,
        (Some(k), Some(s)) => s / k.max(f64::EPSILON * lambda_max),
    };
    if gap < REQUIRED_GAP {
        return Err(Error::SpectralGapAmbiguity {
            degree: p,
            largest_kernel: largest_kernel.unwrap_or(0.0),
            smallest_nonzero: smallest_nonzero.unwrap_or(f64::INFINITY),
            gap,
        });
    }

    let mut kernel: Vec<Vec<f64>> = vectors.into_iter().take(kernel_dim).collect();
    gram_schmidt(&weights, &mut kernel);
    gram_schmidt(&weights, &mut kernel);
    for v in &mut kernel {
        // fix the sign so runs are reproducible regardless of solver path
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let basis = kernel
        .into_iter()
        .map(|v| ops.cochain(p, v))
        .collect::<Result<Vec<_>>>()?;

    Ok(HarmonicBasis {
        degree: p,
        basis,
        null_tol,
        spectrum: SpectrumSummary {
            degree: p,
            method,
            lambda_max,
            kernel_dim,
            largest_kernel,
            smallest_nonzero,
            gap,
        },
    })
}

/// Modified Gram–Schmidt in the `w`-weighted inner product.
fn gram_schmidt(w: &[f64], vs: &mut [Vec<f64>]) {
    for i in 0..vs.len() {
        let (done, rest) = vs.split_at_mut(i);
        let v = &mut rest[0];
        for u in done.iter() {
            let c = weighted_dot(w, v, u);
            crate::linalg::axpy(-c, u, v);
        }
        let norm = weighted_dot(w, v, v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn dense_spectrum(stiffness: &CsrMatrix, w: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let n = w.len();
    if n == 0 {
        return (Vec::new(), Vec::new(), 0.0);
    }
    let isq: Vec<f64> = w.iter().map(|x| 1.0 / x.sqrt()).collect();
    let k = stiffness.to_dense();
    let a = DMatrix::from_fn(n, n, |i, j| isq[i] * k[(i, j)] * isq[j]);
    let a = 0.5 * (&a + a.transpose());
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigs: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|r| eig.eigenvectors[(r, i)] * isq[r]).collect())
        .collect();
    let lambda_max = eigs.last().copied().unwrap_or(0.0).max(0.0);
    (eigs, vectors, lambda_max)
}

/// Largest eigenvalue of `Δ_p` by power iteration in the star inner product.
pub(crate) fn estimate_lambda_max(ops: &Operators, p: usize) -> f64 {
    let lap = &ops.laplacian(p).expect("degree checked");
    let w = ops.star().weights(p);
    let n = w.len();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a3b);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut rayleigh = 0.0;
    for _ in 0..200 {
        let norm = weighted_dot(w, &x, &x).sqrt();
        if norm == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        let y = lap.mul_vec(&x);
        let next = weighted_dot(w, &x, &y);
        let settled = (next - rayleigh).abs() <= 1e-6 * next.abs();
        rayleigh = next;
        x = y;
        if settled {
            break;
        }
    }
    rayleigh
}

fn shift_invert_spectrum(
    ops: &Operators,
    p: usize,
    stiffness: &CsrMatrix,
    w: &[f64],
    null_tol: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let n = w.len();
    // power iteration undershoots; pad so the kernel threshold stays conservative
    let lambda_max = estimate_lambda_max(ops, p) * 1.05;
    let mut shift = 1e-6 * lambda_max;
    let factor = loop {
        let shifted = stiffness.add(&CsrMatrix::diagonal(
            &w.iter().map(|x| shift * x).collect::<Vec<_>>(),
        ));
        match EnvelopeCholesky::factor(&shifted) {
            Ok(f) => break f,
            Err(_) if shift < 1e-2 * lambda_max => shift *= 100.0,
            Err(e) => return Err(e),
        }
    };

    let mut block = 8.min(n);
    loop {
        let (theta, vecs) = subspace_iteration(&factor, stiffness, w, block, lambda_max, null_tol);
        let kernel = theta
            .iter()
            .filter(|&&t| t <= null_tol * lambda_max)
            .count();
        if kernel + 3 <= block || block == n {
            return Ok((theta, vecs, lambda_max));
        }
        block = (2 * block).min(n);
    }
}

fn subspace_iteration(
    factor: &EnvelopeCholesky,
    stiffness: &CsrMatrix,
    w: &[f64],
    m: usize,
    lambda_max: f64,
    null_tol: f64,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = w.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut prev: Vec<f64> = vec![f64::INFINITY; m];
    let mut theta = Vec::new();
    for iter in 0..500 {
        let mut y: Vec<Vec<f64>> = x
            .iter()
            .map(|col| factor.solve(&col.iter().zip(w).map(|(a, b)| a * b).collect::<Vec<_>>()))
            .collect();
        gram_schmidt(w, &mut y);
        gram_schmidt(w, &mut y);
        let ky: Vec<Vec<f64>> = y.iter().map(|col| stiffness.mul_vec(col)).collect();
        let h = DMatrix::from_fn(m, m, |i, j| {
            0.5 * (crate::linalg::dot(&y[i], &ky[j]) + crate::linalg::dot(&y[j], &ky[i]))
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        x = order
            .iter()
            .map(|&c| {
                let coeffs = DVector::from_fn(m, |r, _| eig.eigenvectors[(r, c)]);
                (0..n)
                    .map(|row| (0..m).map(|k| y[k][row] * coeffs[k]).sum())
                    .collect()
            })
            .collect();

        let kernel = theta
            .iter()
            .filter(|&&t| t <= null_tol * lambda_max)
            .count();
        let watch = (kernel + 1).min(m);
        let settled = (0..watch)
            .all(|i| (theta[i] - prev[i]).abs() <= 1e-13 * lambda_max + 1e-10 * theta[i].abs());
        prev.clone_from(&theta);
        if iter >= 3 && settled {
            break;
        }
    }
    (theta, x)
}
