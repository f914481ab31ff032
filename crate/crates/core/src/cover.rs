//! Overlapping patch covers of the vertex graph, their partition of unity,
//! and the commutator `B(χ, u) = Δ(χu) − χΔu`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::SimplicialComplex;
use crate::dec::{Cochain, Operators};
use crate::error::{Error, Result};

pub const DEFAULT_RADIUS_HOPS: u32 = 4;
pub const DEFAULT_OVERLAP_HOPS: u32 = 1;

#[derive(Clone, Debug)]
pub struct Patch {
    pub seed: usize,
    /// Hop distance from the seed for every vertex (`u32::MAX` if unreachable).
    pub hops: Vec<u32>,
    /// `simplices[p]`: sorted indices of p-simplices whose vertices all lie
    /// within `radius_hops` of the seed.
    pub simplices: Vec<Vec<usize>>,
    /// Same, within `radius_hops − overlap_hops`.
    pub interior: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct Cover {
    pub patches: Vec<Patch>,
    /// `chi[j]` is the partition-of-unity weight of patch `j`, a 0-cochain.
    pub chi: Vec<Cochain>,
    pub seeds: Vec<usize>,
    pub radius_hops: u32,
    pub overlap_hops: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverSummary {
    pub patches: usize,
    pub radius_hops: u32,
    pub overlap_hops: u32,
    pub seeds: Vec<usize>,
    pub patch_vertices: Vec<usize>,
    pub patch_top_simplices: Vec<usize>,
    /// Star-weighted vertex volume where two or more weights are positive.
    pub overlap_volume: f64,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn summary(&self, ops: &Operators) -> CoverSummary {
        let star0 = ops.star().weights(0);
        let top = ops.dim();
        let overlap_volume = (0..star0.len())
            .filter(|&x| self.chi.iter().filter(|c| c.values()[x] > 0.0).count() >= 2)
            .map(|x| star0[x])
            .sum();
        CoverSummary {
            patches: self.patches.len(),
            radius_hops: self.radius_hops,
            overlap_hops: self.overlap_hops,
            seeds: self.seeds.clone(),
            patch_vertices: self.patches.iter().map(|p| p.simplices[0].len()).collect(),
            patch_top_simplices: self
                .patches
                .iter()
                .map(|p| p.simplices[top].len())
                .collect(),
            overlap_volume,
        }
    }
}

fn bfs_hops(nbrs: &[Vec<usize>], start: usize) -> Vec<u32> {
    let mut hops = vec![u32::MAX; nbrs.len()];
    hops[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &nbrs[v] {
            if hops[w] == u32::MAX {
                hops[w] = hops[v] + 1;
                queue.push_back(w);
            }
        }
    }
    hops
}

fn make_patch(
    k: &SimplicialComplex,
    seed: usize,
    hops: Vec<u32>,
    radius: u32,
    inner: u32,
) -> Patch {
    let within = |verts: &[usize], r: u32| verts.iter().all(|&v| hops[v] <= r);
    let collect = |r: u32| -> Vec<Vec<usize>> {
        (0..=k.dim())
            .map(|p| {
                k.simplices(p)
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| within(s.vertices(), r))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    };
    Patch {
        seed,
        simplices: collect(radius),
        interior: collect(inner),
        hops,
    }
}

/// Farthest-point seeds on the vertex graph, BFS balls of `radius_hops`, and
/// interior balls of `radius_hops − overlap_hops`. Seeds are added until every
/// vertex lies within the interior radius of some seed, and then until every
/// simplex is interior to some patch.
pub fn build_cover(
    k: &SimplicialComplex,
    radius_hops: u32,
    overlap_hops: u32,
    rng_seed: u64,
) -> Result<Cover> {
    if overlap_hops < 1 || radius_hops < 2 * overlap_hops {
        return Err(Error::InvalidParameter(format!(
            "need radius_hops >= 2·overlap_hops >= 2, got radius {radius_hops}, overlap {overlap_hops}"
        )));
    }
    let n0 = k.n(0);
    if n0 == 0 {
        return Err(Error::InvalidParameter("complex has no vertices".into()));
    }
    let inner = radius_hops - overlap_hops;
    let nbrs = k.vertex_neighbors();

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let first = rng.gen_range(0..n0);
    let mut seeds = vec![first];
    let mut all_hops = vec![bfs_hops(&nbrs, first)];
    let mut nearest = all_hops[0].clone();

    let add_seed =
        |s: usize, seeds: &mut Vec<usize>, all_hops: &mut Vec<Vec<u32>>, nearest: &mut Vec<u32>| {
            let h = bfs_hops(&nbrs, s);
            for (n, &x) in nearest.iter_mut().zip(&h) {
                *n = (*n).min(x);
            }
            seeds.push(s);
            all_hops.push(h);
        };

    loop {
        let (far, dist) =
            nearest.iter().enumerate().fold(
                (0, 0),
                |(bi, bd), (i, &d)| if d > bd { (i, d) } else { (bi, bd) },
            );
        if dist <= inner {
            break;
        }
        add_seed(far, &mut seeds, &mut all_hops, &mut nearest);
    }

    // A simplex straddling two interior balls may still be interior to none.
    loop {
        let uncovered = (0..=k.dim()).find_map(|p| {
            k.simplices(p).iter().find(|s| {
                !all_hops
                    .iter()
                    .any(|h| s.vertices().iter().all(|&v| h[v] <= inner))
            })
        });
        let Some(s) = uncovered else { break };
        let v = *s
            .vertices()
            .iter()
            .max_by_key(|&&v| (nearest[v], std::cmp::Reverse(v)))
            .expect("simplex has vertices");
        if seeds.contains(&v) {
            return Err(Error::CoverageFailure(format!(
                "simplex {:?} is interior to no patch",
                s.vertices()
            )));
        }
        add_seed(v, &mut seeds, &mut all_hops, &mut nearest);
    }

    let patches: Vec<Patch> = seeds
        .iter()
        .zip(all_hops)
        .map(|(&s, h)| make_patch(k, s, h, radius_hops, inner))
        .collect();

    for p in 0..=k.dim() {
        let mut covered = vec![false; k.n(p)];
        for patch in &patches {
            for &i in &patch.interior[p] {
                covered[i] = true;
            }
        }
        if let Some(i) = covered.iter().position(|&c| !c) {
            return Err(Error::CoverageFailure(format!(
                "{p}-simplex {i} is interior to no patch"
            )));
        }
    }

    let chi = partition_of_unity(k, &patches, radius_hops)?;
    Ok(Cover {
        patches,
        chi,
        seeds,
        radius_hops,
        overlap_hops,
    })
}

/// `wⱼ(x) = max(0, 1 − hops(x, seedⱼ)/radius)²`, normalized so that the
/// weights sum to exactly one at each vertex when added in patch order.
pub fn partition_of_unity(
    k: &SimplicialComplex,
    patches: &[Patch],
    radius_hops: u32,
) -> Result<Vec<Cochain>> {
    let n0 = k.n(0);
    let r = f64::from(radius_hops);
    let raw: Vec<Vec<f64>> = patches
        .iter()
        .map(|p| {
            p.hops
                .iter()
                .map(|&h| {
                    if h == u32::MAX {
                        0.0
                    } else {
                        (1.0 - f64::from(h) / r).max(0.0).powi(2)
                    }
                })
                .collect()
        })
        .collect();
    let mut chi = vec![vec![0.0; n0]; patches.len()];
    for x in 0..n0 {
        let total: f64 = raw.iter().map(|w| w[x]).sum();
        if !(total > 0.0) {
            return Err(Error::CoverageFailure(format!(
                "vertex {x} has zero total weight"
            )));
        }
        let mut last = None;
        for (j, w) in raw.iter().enumerate() {
            if w[x] > 0.0 {
                chi[j][x] = w[x] / total;
                last = Some(j);
            }
        }
        // Absorb rounding into the last active weight: (Σ_{j<last} χⱼ) + (1 − that) == 1.
        let last = last.expect("positive total implies an active weight");
        let partial = chi[..last].iter().fold(0.0, |acc, c| acc + c[x]);
        chi[last][x] = (1.0 - partial).clamp(0.0, 1.0);
    }
    chi.into_iter()
        .map(|values| Cochain::from_values(k, 0, values))
        .collect()
}

/// `B(χ, u) = Δ(χu) − χ·Δu`.
pub fn commutator(ops: &Operators, chi: &Cochain, u: &Cochain) -> Result<Cochain> {
    let chi_u = ops.scalar_multiply(chi, u)?;
    let lap_u = ops.apply_laplacian(u)?;
    Ok(&ops.apply_laplacian(&chi_u)? - &ops.scalar_multiply(chi, &lap_u)?)
}
