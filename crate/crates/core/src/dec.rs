//! Discrete exterior calculus: cochains, the diagonal Hodge star, exterior
//! derivative, codifferential and Hodge laplacian.
//!
//! Sign convention: `d_p = ∂_{p+1}ᵀ`. The codifferential is the adjoint of
//! `d` in the star-weighted inner product,
//! `d*_p = ★_{p−1}⁻¹ d_{p−1}ᵀ ★_p`, and `Δ_p = d_{p−1} d*_p + d*_{p+1} d_p`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{subsets, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg::weighted_dot;
use crate::sparse::CsrMatrix;

/// A real value per oriented p-simplex of one specific complex.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    degree: usize,
    values: Vec<f64>,
    complex_id: u64,
}

impl Cochain {
    pub fn zeros(complex: &SimplicialComplex, degree: usize) -> Self {
        Self {
            degree,
            values: vec![0.0; complex.n(degree)],
            complex_id: complex.id(),
        }
    }

    pub fn from_values(
        complex: &SimplicialComplex,
        degree: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::checked(complex.id(), complex.n(degree), degree, values)
    }

    pub(crate) fn checked(
        complex_id: u64,
        len: usize,
        degree: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            degree,
            values,
            complex_id,
        })
    }

    pub(crate) fn raw(complex_id: u64, degree: usize, values: Vec<f64>) -> Self {
        Self {
            degree,
            values,
            complex_id,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn complex_id(&self) -> u64 {
        self.complex_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn zeros_like(&self) -> Self {
        Self::raw(self.complex_id, self.degree, vec![0.0; self.values.len()])
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len(), "cochain length");
        Self::raw(self.complex_id, self.degree, values)
    }

    pub fn check_compatible(&self, other: &Cochain) -> Result<()> {
        if self.complex_id != other.complex_id {
            return Err(Error::ComplexMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    /// `self += alpha · x`
    pub fn axpy(&mut self, alpha: f64, x: &Cochain) {
        self.assert_compatible(x);
        crate::linalg::axpy(alpha, &x.values, &mut self.values);
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.with_values(self.values.iter().map(|v| alpha * v).collect())
    }

    fn assert_compatible(&self, other: &Cochain) {
        if let Err(e) = self.check_compatible(other) {
            panic!("incompatible cochains: {e}");
        }
    }
}

impl Add for &Cochain {
    type Output = Cochain;
    fn add(self, rhs: &Cochain) -> Cochain {
        self.assert_compatible(rhs);
        self.with_values(
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &Cochain {
    type Output = Cochain;
    fn sub(self, rhs: &Cochain) -> Cochain {
        self.assert_compatible(rhs);
        self.with_values(
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Neg for &Cochain {
    type Output = Cochain;
    fn neg(self) -> Cochain {
        self.scaled(-1.0)
    }
}

impl Mul<&Cochain> for f64 {
    type Output = Cochain;
    fn mul(self, rhs: &Cochain) -> Cochain {
        rhs.scaled(self)
    }
}

/// Diagonal Hodge star: ratio of barycentric dual-cell volume to primal volume.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricStar {
    star: Vec<Vec<f64>>,
}

impl MetricStar {
    /// Barycentric dual volumes computed intrinsically from edge lengths.
    pub fn build(k: &SimplicialComplex) -> Result<Self> {
        if !k.is_orientable() {
            return Err(Error::NonOrientable(
                "metric construction needs an oriented complex".into(),
            ));
        }
        let n = k.dim();
        let mut dual: Vec<Vec<f64>> = (0..=n).map(|p| vec![0.0; k.n(p)]).collect();
        let mut primal: Vec<Vec<f64>> = (0..=n).map(|p| vec![0.0; k.n(p)]).collect();
        primal[0].iter_mut().for_each(|v| *v = 1.0);

        for (t, top) in k.simplices(n).iter().enumerate() {
            let verts = top.vertices();
            let local = local_coordinates(k, verts).ok_or(Error::DegenerateSimplex {
                degree: n,
                index: t,
            })?;
            let bary = |set: &[usize]| -> Vec<f64> {
                let mut c = vec![0.0; n];
                for &i in set {
                    for (a, x) in c.iter_mut().zip(&local[i]) {
                        *a += x;
                    }
                }
                c.iter_mut().for_each(|a| *a /= set.len() as f64);
                c
            };
            let all: Vec<usize> = (0..=n).collect();
            for p in 0..=n {
                for face_local in subsets(&all, p + 1) {
                    let face: Vec<usize> = face_local.iter().map(|&i| verts[i]).collect();
                    let idx = k
                        .index_of(&face)
                        .expect("face of a top simplex is in the complex");
                    if p > 0 && primal[p][idx] == 0.0 {
                        let pts: Vec<Vec<f64>> =
                            face_local.iter().map(|&i| local[i].clone()).collect();
                        primal[p][idx] = simplex_volume(&pts);
                    }
                    let rest: Vec<usize> = all
                        .iter()
                        .copied()
                        .filter(|i| !face_local.contains(i))
                        .collect();
                    let mut vol = 0.0;
                    for order in permutations(&rest) {
                        let mut chain = face_local.clone();
                        let mut pts = vec![bary(&chain)];
                        for &v in &order {
                            chain.push(v);
                            pts.push(bary(&chain));
                        }
                        vol += simplex_volume(&pts);
                    }
                    dual[p][idx] += vol;
                }
            }
        }

        let mut star = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let mut s = Vec::with_capacity(k.n(p));
            for i in 0..k.n(p) {
                let (dv, pv) = (dual[p][i], primal[p][i]);
                if !(pv > 0.0 && dv > 0.0 && (dv / pv).is_finite()) {
                    return Err(Error::DegenerateSimplex {
                        degree: p,
                        index: i,
                    });
                }
                s.push(dv / pv);
            }
            star.push(s);
        }
        Ok(Self { star })
    }

    /// Unit weights in every degree (useful for combinatorial checks).
    pub fn unit(k: &SimplicialComplex) -> Self {
        Self {
            star: (0..=k.dim()).map(|p| vec![1.0; k.n(p)]).collect(),
        }
    }

    pub fn from_weights(star: Vec<Vec<f64>>) -> Result<Self> {
        for (p, w) in star.iter().enumerate() {
            if let Some(i) = w.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::DegenerateSimplex {
                    degree: p,
                    index: i,
                });
            }
        }
        Ok(Self { star })
    }

    pub fn weights(&self, p: usize) -> &[f64] {
        &self.star[p]
    }

    pub fn dim(&self) -> usize {
        self.star.len() - 1
    }
}

/// Vertex positions of a simplex in `R^n`, reconstructed from its edge lengths.
fn local_coordinates(k: &SimplicialComplex, verts: &[usize]) -> Option<Vec<Vec<f64>>> {
    let n = verts.len() - 1;
    let len = |a: usize, b: usize| {
        if a == b {
            0.0
        } else {
            k.edge_length(verts[a].min(verts[b]), verts[a].max(verts[b]))
                .expect("edge of simplex present")
        }
    };
    let mut g = DMatrix::zeros(n, n);
    for i in 1..=n {
        for j in 1..=n {
            g[(i - 1, j - 1)] = 0.5 * (len(0, i).powi(2) + len(0, j).powi(2) - len(i, j).powi(2));
        }
    }
    let scale = (1..=n).map(|i| g[(i - 1, i - 1)]).fold(0.0f64, f64::max);
    let chol = nalgebra::Cholesky::new(g)?;
    let l = chol.l();
    if (0..n).any(|i| l[(i, i)] <= 1e-9 * scale.sqrt()) {
        return None;
    }
    let mut pts = vec![vec![0.0; n]];
    for i in 0..n {
        pts.push((0..n).map(|c| l[(i, c)]).collect());
    }
    Some(pts)
}

/// k-volume of the simplex spanned by `k + 1` points.
fn simplex_volume(pts: &[Vec<f64>]) -> f64 {
    let k = pts.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let edges: Vec<DVector<f64>> = pts[1..]
        .iter()
        .map(|p| DVector::from_iterator(p.len(), p.iter().zip(&pts[0]).map(|(a, b)| a - b)))
        .collect();
    let gram = DMatrix::from_fn(k, k, |i, j| edges[i].dot(&edges[j]));
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    gram.determinant().max(0.0).sqrt() / factorial
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Assembled operators for one complex and metric. Immutable after assembly.
#[derive(Clone, Debug)]
pub struct Operators {
    complex_id: u64,
    counts: Vec<usize>,
    star: MetricStar,
    d: Vec<CsrMatrix>,
    delta: Vec<CsrMatrix>,
    laplacian: Vec<CsrMatrix>,
    stiffness: Vec<CsrMatrix>,
    vertex_mean: Vec<CsrMatrix>,
}

impl Operators {
    pub fn assemble(k: &SimplicialComplex) -> Result<Self> {
        let star = MetricStar::build(k)?;
        Self::with_star(k, star)
    }

    pub fn with_star(k: &SimplicialComplex, star: MetricStar) -> Result<Self> {
        let dim = k.dim();
        if star.dim() != dim || (0..=dim).any(|p| star.weights(p).len() != k.n(p)) {
            return Err(Error::InvalidParameter(
                "metric star does not match complex".into(),
            ));
        }
        let d: Vec<CsrMatrix> = (0..dim)
            .map(|p| k.boundary_operator(p + 1).map(|b| b.transpose_csr()))
            .collect::<Result<_>>()?;
        let inv_star: Vec<Vec<f64>> = (0..=dim)
            .map(|p| star.weights(p).iter().map(|w| 1.0 / w).collect())
            .collect();
        let mut delta = vec![CsrMatrix::zeros(0, k.n(0))];
        for p in 1..=dim {
            delta.push(
                d[p - 1]
                    .transpose()
                    .scale_rows_cols(Some(&inv_star[p - 1]), Some(star.weights(p))),
            );
        }
        let mut laplacian = Vec::with_capacity(dim + 1);
        let mut stiffness = Vec::with_capacity(dim + 1);
        for p in 0..=dim {
            let mut lap = CsrMatrix::zeros(k.n(p), k.n(p));
            if p >= 1 {
                lap = lap.add(&d[p - 1].matmul(&delta[p]));
            }
            if p < dim {
                lap = lap.add(&delta[p + 1].matmul(&d[p]));
            }
            stiffness.push(
                lap.scale_rows_cols(Some(star.weights(p)), None)
                    .symmetrized(),
            );
            laplacian.push(lap);
        }
        let vertex_mean = (0..=dim)
            .map(|p| {
                let w = 1.0 / (p + 1) as f64;
                let triplets: Vec<_> = k
                    .simplices(p)
                    .iter()
                    .enumerate()
                    .flat_map(|(i, s)| s.vertices().iter().map(move |&v| (i, v, w)))
                    .collect();
                CsrMatrix::from_triplets(k.n(p), k.n(0), &triplets)
            })
            .collect();
        Ok(Self {
            complex_id: k.id(),
            counts: k.counts(),
            star,
            d,
            delta,
            laplacian,
            stiffness,
            vertex_mean,
        })
    }

    pub fn complex_id(&self) -> u64 {
        self.complex_id
    }

    pub fn dim(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn n(&self, p: usize) -> usize {
        self.counts[p]
    }

    pub fn star(&self) -> &MetricStar {
        &self.star
    }

    pub fn check_degree(&self, p: usize) -> Result<()> {
        if p > self.dim() {
            return Err(Error::DegreeOutOfRange {
                degree: p,
                min: 0,
                max: self.dim(),
            });
        }
        Ok(())
    }

    fn check_cochain(&self, c: &Cochain) -> Result<()> {
        if c.complex_id != self.complex_id {
            return Err(Error::ComplexMismatch);
        }
        self.check_degree(c.degree)
    }

    pub fn zeros(&self, p: usize) -> Cochain {
        Cochain::raw(self.complex_id, p, vec![0.0; self.counts[p]])
    }

    pub fn cochain(&self, p: usize, values: Vec<f64>) -> Result<Cochain> {
        self.check_degree(p)?;
        Cochain::checked(self.complex_id, self.counts[p], p, values)
    }

    /// Uniform `[-1, 1)` entries from a seeded ChaCha stream.
    pub fn random(&self, p: usize, seed: u64) -> Cochain {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..self.counts[p])
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        Cochain::raw(self.complex_id, p, values)
    }

    /// `d_p` as a matrix `n_{p+1} × n_p`.
    pub fn d_matrix(&self, p: usize) -> Result<&CsrMatrix> {
        self.d.get(p).ok_or(Error::DegreeOutOfRange {
            degree: p,
            min: 0,
            max: self.dim().saturating_sub(1),
        })
    }

    /// `d*_p` as a matrix `n_{p−1} × n_p`.
    pub fn codifferential_matrix(&self, p: usize) -> Result<&CsrMatrix> {
        if p == 0 || p > self.dim() {
            return Err(Error::DegreeOutOfRange {
                degree: p,
                min: 1,
                max: self.dim(),
            });
        }
        Ok(&self.delta[p])
    }

    pub fn laplacian(&self, p: usize) -> Result<&CsrMatrix> {
        self.check_degree(p)?;
        Ok(&self.laplacian[p])
    }

    /// `★_p Δ_p`, symmetric positive semidefinite in the Euclidean sense.
    pub fn stiffness(&self, p: usize) -> Result<&CsrMatrix> {
        self.check_degree(p)?;
        Ok(&self.stiffness[p])
    }

    pub fn exterior_derivative(&self, w: &Cochain) -> Result<Cochain> {
        self.check_cochain(w)?;
        let d = self.d_matrix(w.degree)?;
        Ok(Cochain::raw(
            self.complex_id,
            w.degree + 1,
            d.mul_vec(&w.values),
        ))
    }

    pub fn codifferential(&self, w: &Cochain) -> Result<Cochain> {
        self.check_cochain(w)?;
        let m = self.codifferential_matrix(w.degree)?;
        Ok(Cochain::raw(
            self.complex_id,
            w.degree - 1,
            m.mul_vec(&w.values),
        ))
    }

    pub fn apply_laplacian(&self, u: &Cochain) -> Result<Cochain> {
        self.check_cochain(u)?;
        Ok(Cochain::raw(
            self.complex_id,
            u.degree,
            self.laplacian[u.degree].mul_vec(&u.values),
        ))
    }

    /// `⟨ω, φ⟩ = Σ ★(σ) ω(σ) φ(σ)`.
    pub fn inner_product(&self, a: &Cochain, b: &Cochain) -> Result<f64> {
        self.check_cochain(a)?;
        a.check_compatible(b)?;
        Ok(weighted_dot(
            self.star.weights(a.degree),
            &a.values,
            &b.values,
        ))
    }

    /// Star-weighted L² norm. Panics on a cochain from another complex.
    pub fn norm(&self, a: &Cochain) -> f64 {
        self.inner_product(a, a)
            .expect("cochain compatible with operators")
            .max(0.0)
            .sqrt()
    }

    /// Diagnostic `(Σ ★ |ω|ʳ)^{1/r}`; solver logic never uses it.
    pub fn weighted_r_norm(&self, a: &Cochain, r: f64) -> f64 {
        let w = self.star.weights(a.degree);
        w.iter()
            .zip(&a.values)
            .map(|(w, x)| w * x.abs().powf(r))
            .sum::<f64>()
            .powf(1.0 / r)
    }

    /// `(χu)(σ) = mean of χ over the vertices of σ, times u(σ)`.
    pub fn scalar_multiply(&self, chi: &Cochain, u: &Cochain) -> Result<Cochain> {
        if chi.complex_id != self.complex_id || u.complex_id != self.complex_id {
            return Err(Error::ComplexMismatch);
        }
        if chi.degree != 0 {
            return Err(Error::DegreeMismatch {
                expected: 0,
                found: chi.degree,
            });
        }
        self.check_degree(u.degree)?;
        let mean = self.vertex_mean[u.degree].mul_vec(&chi.values);
        Ok(u.with_values(mean.iter().zip(&u.values).map(|(m, x)| m * x).collect()))
    }

    /// Mean of a 0-cochain over the vertices of every p-simplex.
    pub fn vertex_mean(&self, p: usize, chi: &[f64]) -> Vec<f64> {
        self.vertex_mean[p].mul_vec(chi)
    }

    /// Dense reference assembly of `Δ_p` straight from the incidence matrices.
    pub fn dense_laplacian(
        k: &SimplicialComplex,
        star: &MetricStar,
        p: usize,
    ) -> Result<DMatrix<f64>> {
        let dim = k.dim();
        let diag = |q: usize, inv: bool| {
            DMatrix::from_diagonal(&DVector::from_iterator(
                k.n(q),
                star.weights(q)
                    .iter()
                    .map(|&w| if inv { 1.0 / w } else { w }),
            ))
        };
        let dense_d = |q: usize| -> Result<DMatrix<f64>> {
            let b = k.boundary_operator(q + 1)?.to_dense_i64();
            Ok(DMatrix::from_fn(k.n(q + 1), k.n(q), |i, j| b[j][i] as f64))
        };
        let mut lap = DMatrix::zeros(k.n(p), k.n(p));
        if p >= 1 {
            let dm = dense_d(p - 1)?;
            lap += &dm * diag(p - 1, true) * dm.transpose() * diag(p, false);
        }
        if p < dim {
            let dp = dense_d(p)?;
            lap += diag(p, true) * dp.transpose() * diag(p + 1, false) * &dp;
        }
        Ok(lap)
    }
}
