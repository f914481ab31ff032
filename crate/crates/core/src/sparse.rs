//! Compressed sparse row matrices, just enough for operator assembly and
//! application.

use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Duplicate entries are summed. Column indices within each row end up sorted.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let slot = next[r];
            cols[slot] = c;
            vals[slot] = v;
            next[r] += 1;
        }

        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row.clear();
            row.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut acc = 0.0;
                while k < row.len() && row[k].0 == c {
                    acc += row[k].1;
                    k += 1;
                }
                indices.push(c);
                values.push(acc);
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec: input length");
        assert_eq!(y.len(), self.nrows, "matvec: output length");
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v)))
            .collect();
        Self::from_triplets(self.ncols, self.nrows, &triplets)
    }

    /// Sparse product `self * rhs`.
    pub fn matmul(&self, rhs: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "matmul: inner dimension");
        let mut acc = vec![0.0; rhs.ncols];
        let mut mark = vec![usize::MAX; rhs.ncols];
        let mut touched = Vec::new();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in rhs.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                values.push(acc[j]);
            }
            indptr.push(indices.len());
        }
        Self {
            nrows: self.nrows,
            ncols: rhs.ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn add(&self, rhs: &CsrMatrix) -> Self {
        assert_eq!(
            (self.nrows, self.ncols),
            (rhs.nrows, rhs.ncols),
            "add: shape"
        );
        let triplets: Vec<_> = (0..self.nrows)
            .flat_map(|i| self.row(i).chain(rhs.row(i)).map(move |(j, v)| (i, j, v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, &triplets)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale_rows_cols(&self, left: Option<&[f64]>, right: Option<&[f64]>) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                let mut v = out.values[k];
                if let Some(l) = left {
                    v *= l[i];
                }
                if let Some(r) = right {
                    v *= r[j];
                }
                out.values[k] = v;
            }
        }
        out
    }

    /// `(A + Aᵀ) / 2`, bitwise symmetric.
    pub fn symmetrized(&self) -> Self {
        assert_eq!(self.nrows, self.ncols, "symmetrize: square");
        let t = self.transpose();
        let mut triplets = Vec::with_capacity(self.nnz() * 2);
        for i in 0..self.nrows {
            for (j, _) in self.row(i).chain(t.row(i)) {
                triplets.push((i, j, 0.0));
            }
        }
        let mut out = Self::from_triplets(self.nrows, self.ncols, &triplets);
        for i in 0..self.nrows {
            for k in out.indptr[i]..out.indptr[i + 1] {
                let j = out.indices[k];
                // IEEE addition commutes, so (i,j) and (j,i) get identical bits.
                out.values[k] = 0.5 * (self.get(i, j) + self.get(j, i));
            }
        }
        out
    }

    /// Rows and columns restricted to `idx` (in that order).
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.ncols];
        for (k, &g) in idx.iter().enumerate() {
            local[g] = k;
        }
        let mut triplets = Vec::new();
        for (li, &gi) in idx.iter().enumerate() {
            for (gj, v) in self.row(gi) {
                let lj = local[gj];
                if lj != usize::MAX {
                    triplets.push((li, lj, v));
                }
            }
        }
        Self::from_triplets(idx.len(), idx.len(), &triplets)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Structural neighbours of each row (excluding the diagonal).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
            .collect()
    }
}
