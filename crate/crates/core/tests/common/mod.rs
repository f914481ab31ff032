#![allow(dead_code)]

use nalgebra::DMatrix;
use raising_core::complex::IncidenceMatrix;
use raising_core::{build_cover, Cochain, Cover, SimplicialComplex};

/// Rank over ℚ of an integer matrix: exact integer elimination with each
/// updated row divided by the gcd of its entries.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..m).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                *x = pivot_row[col] * *x - f * pv;
            }
            let g = row.iter().fold(0, |g, &x| gcd(g, x));
            if g > 1 {
                row.iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
        if rank == m {
            break;
        }
    }
    rank
}

pub fn incidence_rank(b: &IncidenceMatrix) -> usize {
    integer_rank(&b.to_dense_i64())
}

/// `n_p − rank ∂_p − rank ∂_{p+1}`.
pub fn betti_by_rank(k: &SimplicialComplex) -> Vec<usize> {
    let dim = k.dim();
    let ranks: Vec<usize> = (1..=dim)
        .map(|p| incidence_rank(k.boundary_operator(p).unwrap()))
        .collect();
    (0..=dim)
        .map(|p| {
            let below = if p >= 1 { ranks[p - 1] } else { 0 };
            let above = if p < dim { ranks[p] } else { 0 };
            k.n(p) - below - above
        })
        .collect()
}

/// Dense `★_p⁻¹ (∂_p ★_{p−1}⁻¹ ∂_pᵀ ★_p)`-style Laplacian from the integer
/// incidence matrices and star weights.
pub fn dense_laplacian_oracle(k: &SimplicialComplex, star: &[Vec<f64>], p: usize) -> DMatrix<f64> {
    let n = k.n(p);
    let to_dense = |b: &IncidenceMatrix| {
        let d = b.to_dense_i64();
        DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| d[i][j] as f64)
    };
    let diag = |w: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(w));
    let inv = |w: &[f64]| w.iter().map(|x| 1.0 / x).collect::<Vec<_>>();
    let mut lap = DMatrix::zeros(n, n);
    if p >= 1 {
        let d_prev = to_dense(k.boundary_operator(p).unwrap()).transpose();
        let delta = diag(&inv(&star[p - 1])) * d_prev.transpose() * diag(&star[p]);
        lap += &d_prev * delta;
    }
    if p < k.dim() {
        let d = to_dense(k.boundary_operator(p + 1).unwrap()).transpose();
        let delta_up = diag(&inv(&star[p])) * d.transpose() * diag(&star[p + 1]);
        lap += delta_up * d;
    }
    lap
}

pub fn to_off(k: &SimplicialComplex) -> String {
    let mut s = format!("OFF\n{} {} 0\n", k.n(0), k.n(2));
    for c in k.coords() {
        s.push_str(&format!("{:.17} {:.17} {:.17}\n", c[0], c[1], c[2]));
    }
    for t in k.simplices(2) {
        let v = t.vertices();
        if t.orientation() > 0 {
            s.push_str(&format!("3 {} {} {}\n", v[0], v[1], v[2]));
        } else {
            s.push_str(&format!("3 {} {} {}\n", v[1], v[0], v[2]));
        }
    }
    s
}

/// Same patches as the planned cover, but each vertex's entire weight goes to
/// the active patch whose seed is farthest away. Still a partition of unity
/// with `supp χⱼ ⊂ Uⱼ`, yet concentrated where local solves are worst.
pub fn boundary_heavy_cover(k: &SimplicialComplex, radius: u32, overlap: u32, seed: u64) -> Cover {
    let mut cover = build_cover(k, radius, overlap, seed).unwrap();
    let n0 = k.n(0);
    let mut w = vec![vec![0.0; n0]; cover.len()];
    for x in 0..n0 {
        let pick = (0..cover.len())
            .filter(|&j| cover.chi[j].values()[x] > 0.0)
            .max_by_key(|&j| (cover.patches[j].hops[x], std::cmp::Reverse(j)))
            .unwrap();
        w[pick][x] = 1.0;
    }
    cover.chi = w
        .into_iter()
        .map(|v| Cochain::from_values(k, 0, v).unwrap())
        .collect();
    cover
}

pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a
    } else {
        a / b
    }
}
