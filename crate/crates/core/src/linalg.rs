//! Envelope (skyline) Cholesky with reverse Cuthill–McKee ordering, plus a
//! shifted, iteratively refined SPD solve used for local patch systems and the
//! direct reference solver.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Pivots below this fraction of the largest diagonal entry mark the matrix singular.
pub const SINGULAR_PIVOT: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨a, b⟩_w = Σ wᵢ aᵢ bᵢ`.
pub fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, x), y)| w * (x * y)).sum()
}

pub fn weighted_norm(w: &[f64], a: &[f64]) -> f64 {
    weighted_dot(w, a, a).max(0.0).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// Reverse Cuthill–McKee permutation of a symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .expect("unvisited node exists");
        let start = pseudo_peripheral(adj, start, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            nbrs.dedup();
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(adj: &[Vec<usize>], start: usize, degree: &[usize]) -> usize {
    let mut node = start;
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(adj, node);
        let far = level
            .iter()
            .copied()
            .filter(|&l| l != usize::MAX)
            .max()
            .unwrap_or(0);
        if far <= ecc && node != start {
            break;
        }
        ecc = far;
        let candidate = (0..adj.len())
            .filter(|&i| level[i] == far)
            .min_by_key(|&i| (degree[i], i))
            .unwrap_or(node);
        if candidate == node {
            break;
        }
        node = candidate;
    }
    node
}

/// Row-envelope Cholesky factor `P A Pᵀ = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factor a symmetric positive definite matrix. Fails with
    /// `FactorizationFailure` when a pivot drops below
    /// `SINGULAR_PIVOT * max diag`.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::FactorizationFailure("matrix is not square".into()));
        }
        let perm = reverse_cuthill_mckee(&a.adjacency());
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                let jn = inv[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; offsets[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let jn = inv[j];
                if jn <= new {
                    data[offsets[new] + (jn - first[new])] += v;
                }
            }
        }

        let max_diag = a.diagonal_values().into_iter().fold(0.0f64, f64::max);
        if max_diag <= 0.0 {
            return Err(Error::FactorizationFailure("no positive diagonal".into()));
        }
        let tiny = SINGULAR_PIVOT * max_diag;

        for i in 0..n {
            let fi = first[i];
            let row_i = offsets[i];
            for j in fi..i {
                let fj = first[j];
                let row_j = offsets[j];
                let start = fi.max(fj);
                let mut s = data[row_i + (j - fi)];
                for k in start..j {
                    s -= data[row_i + (k - fi)] * data[row_j + (k - fj)];
                }
                let djj = data[row_j + (j - fj)];
                data[row_i + (j - fi)] = s / djj;
            }
            let mut d = data[row_i + (i - fi)];
            for k in fi..i {
                let l = data[row_i + (k - fi)];
                d -= l * l;
            }
            if !(d > tiny) {
                return Err(Error::FactorizationFailure(format!(
                    "pivot {d:e} at row {i} below {tiny:e}"
                )));
            }
            data[row_i + (i - fi)] = d.sqrt();
        }

        Ok(Self {
            n,
            perm,
            first,
            offsets,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        // L y = b
        for i in 0..self.n {
            let fi = self.first[i];
            let row = self.offsets[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.data[row + (k - fi)] * y[k];
            }
            y[i] = s / self.data[row + (i - fi)];
        }
        // Lᵀ x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = self.offsets[i];
            y[i] /= self.data[row + (i - fi)];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.data[row + (k - fi)] * yi;
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Solves `A x = b` for symmetric PSD `A` through a factorization of
/// `A + shift·W` (W diagonal positive) followed by iterative refinement
/// against the unshifted `A`.
#[derive(Clone, Debug)]
pub struct RefinedSpdSolver {
    matrix: CsrMatrix,
    factor: EnvelopeCholesky,
    shift: f64,
    max_refinements: usize,
}

impl RefinedSpdSolver {
    /// Tries the unshifted factorization first; on a singular pivot retries
    /// with `relative_shift · max diag(A) · W`.
    pub fn new(a: &CsrMatrix, weights: &[f64], relative_shift: f64) -> Result<Self> {
        match EnvelopeCholesky::factor(a) {
            Ok(factor) => Ok(Self {
                matrix: a.clone(),
                factor,
                shift: 0.0,
                max_refinements: 2,
            }),
            Err(_) => Self::shifted(a, weights, relative_shift),
        }
    }

    /// Always factors the shifted system.
    pub fn shifted(a: &CsrMatrix, weights: &[f64], relative_shift: f64) -> Result<Self> {
        let max_diag = a.diagonal_values().into_iter().fold(0.0f64, f64::max);
        let shift = relative_shift * max_diag;
        let max_w = weights.iter().copied().fold(0.0f64, f64::max);
        let reg: Vec<f64> = weights.iter().map(|w| shift * w / max_w).collect();
        let shifted = a.add(&CsrMatrix::diagonal(&reg));
        let factor = EnvelopeCholesky::factor(&shifted)
            .map_err(|e| Error::FactorizationFailure(format!("shifted system still fails: {e}")))?;
        Ok(Self {
            matrix: a.clone(),
            factor,
            shift,
            max_refinements: 8,
        })
    }

    pub fn is_shifted(&self) -> bool {
        self.shift > 0.0
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solve with refinement; `project` is applied after every correction
    /// (identity when the system is nonsingular).
    pub fn solve_projected(&self, b: &[f64], project: impl Fn(&mut [f64])) -> Vec<f64> {
        let b_norm = dot(b, b).sqrt();
        let mut x = self.factor.solve(b);
        project(&mut x);
        if b_norm == 0.0 {
            return x;
        }
        let mut best = f64::INFINITY;
        for _ in 0..self.max_refinements {
            let ax = self.matrix.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let rn = dot(&r, &r).sqrt();
            if rn <= 1e-15 * b_norm || rn >= 0.5 * best {
                break;
            }
            best = rn;
            let dx = self.factor.solve(&r);
            axpy(1.0, &dx, &mut x);
            project(&mut x);
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_projected(b, |_| {})
    }
}
