//! Deterministic fixture meshes.

use std::f64::consts::PI;

use super::{euclid, SimplicialComplex};
use crate::error::{Error, Result};

/// Flat `m × n` torus. Vertex `(i, j)` has index `i·n + j`; each grid cell is
/// split along its `(i, j)–(i+1, j+1)` diagonal. Coordinates are the grid
/// positions in the plane; the intrinsic metric (unit sides, √2 diagonals)
/// is carried by the edge lengths, so the seam is metrically invisible.
pub fn generate_torus(m: usize, n: usize) -> Result<SimplicialComplex> {
    if m < 3 || n < 3 {
        return Err(Error::InvalidParameter(format!(
            "torus grid must be at least 3x3, got {m}x{n}"
        )));
    }
    let idx = |i: usize, j: usize| (i % m) * n + (j % n);
    let coords = (0..m)
        .flat_map(|i| (0..n).map(move |j| [i as f64, j as f64, 0.0]))
        .collect();
    let mut tops = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in 0..n {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            tops.push(vec![a, b, c]);
            tops.push(vec![a, c, d]);
        }
    }
    SimplicialComplex::from_top_simplices_with_lengths(coords, tops, move |a, b| {
        let (ia, ja) = (a / n, a % n);
        let (ib, jb) = (b / n, b % n);
        let di = ia.abs_diff(ib).min(m - ia.abs_diff(ib));
        let dj = ja.abs_diff(jb).min(n - ja.abs_diff(jb));
        ((di * di + dj * dj) as f64).sqrt()
    })
}

/// Regular icosahedron with circumradius ≈ 1.902 (edge length 2).
pub fn icosahedron() -> SimplicialComplex {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut coords = Vec::with_capacity(12);
    for &s1 in &[-1.0, 1.0] {
        for &s2 in &[-1.0, 1.0] {
            coords.push([0.0, s1, s2 * phi]);
            coords.push([s1, s2 * phi, 0.0]);
            coords.push([s2 * phi, 0.0, s1]);
        }
    }
    let adjacent = |a: usize, b: usize| (euclid(&coords[a], &coords[b]) - 2.0).abs() < 1e-9;
    let mut tops = Vec::with_capacity(20);
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                if adjacent(a, b) && adjacent(b, c) && adjacent(a, c) {
                    tops.push(outward(&coords, [a, b, c]));
                }
            }
        }
    }
    SimplicialComplex::from_top_simplices(coords, tops).expect("icosahedron is a valid complex")
}

fn outward(coords: &[[f64; 3]], [a, b, c]: [usize; 3]) -> Vec<usize> {
    let (pa, pb, pc) = (coords[a], coords[b], coords[c]);
    let u = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
    let v = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
    let n = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let centroid = [
        pa[0] + pb[0] + pc[0],
        pa[1] + pb[1] + pc[1],
        pa[2] + pb[2] + pc[2],
    ];
    if n[0] * centroid[0] + n[1] * centroid[1] + n[2] * centroid[2] >= 0.0 {
        vec![a, b, c]
    } else {
        vec![a, c, b]
    }
}

/// Unit disk: a center vertex and `rings` concentric rings of `sectors`
/// vertices each.
pub fn generate_disk(rings: usize, sectors: usize) -> Result<SimplicialComplex> {
    if rings < 1 || sectors < 3 {
        return Err(Error::InvalidParameter(format!(
            "disk needs rings >= 1 and sectors >= 3, got {rings}, {sectors}"
        )));
    }
    let mut coords = vec![[0.0, 0.0, 0.0]];
    coords.extend(ring_coords(rings, sectors, |r| r as f64 / rings as f64, 1));
    let ring = |r: usize, k: usize| 1 + (r - 1) * sectors + (k % sectors);
    let mut tops = Vec::new();
    for k in 0..sectors {
        tops.push(vec![0, ring(1, k), ring(1, k + 1)]);
    }
    for r in 1..rings {
        for k in 0..sectors {
            let (a, b, c, d) = (
                ring(r, k),
                ring(r + 1, k),
                ring(r + 1, k + 1),
                ring(r, k + 1),
            );
            tops.push(vec![a, b, c]);
            tops.push(vec![a, c, d]);
        }
    }
    SimplicialComplex::from_top_simplices(coords, tops)
}

/// Annulus between radii 1 and 2 with `rings + 1` circles of `sectors` vertices.
pub fn generate_annulus(rings: usize, sectors: usize) -> Result<SimplicialComplex> {
    if rings < 1 || sectors < 3 {
        return Err(Error::InvalidParameter(format!(
            "annulus needs rings >= 1 and sectors >= 3, got {rings}, {sectors}"
        )));
    }
    let coords = ring_coords(rings + 1, sectors, |r| 1.0 + r as f64 / rings as f64, 0);
    let ring = |r: usize, k: usize| r * sectors + (k % sectors);
    let mut tops = Vec::new();
    for r in 0..rings {
        for k in 0..sectors {
            let (a, b, c, d) = (
                ring(r, k),
                ring(r + 1, k),
                ring(r + 1, k + 1),
                ring(r, k + 1),
            );
            tops.push(vec![a, b, c]);
            tops.push(vec![a, c, d]);
        }
    }
    SimplicialComplex::from_top_simplices(coords, tops)
}

fn ring_coords(
    count: usize,
    sectors: usize,
    radius: impl Fn(usize) -> f64,
    first: usize,
) -> Vec<[f64; 3]> {
    (first..first + count)
        .flat_map(|r| {
            let rad = radius(r);
            (0..sectors).map(move |k| {
                // stagger alternate rings to avoid long thin triangles
                let theta = 2.0 * PI * (k as f64 + 0.5 * (r % 2) as f64) / sectors as f64;
                [rad * theta.cos(), rad * theta.sin(), 0.0]
            })
        })
        .collect()
}
