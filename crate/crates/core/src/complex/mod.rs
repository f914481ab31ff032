//! Oriented simplicial complexes with signed boundary operators.
//!
//! Every simplex is stored as its sorted vertex tuple. Lower-dimensional
//! simplices carry the orientation induced by that sort order; top simplices
//! additionally carry a sign so that the complex can be coherently oriented.

mod double;
mod generate;
mod io;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub use double::{riemannian_double, DomainEmbedding};
pub use generate::{generate_annulus, generate_disk, generate_torus, icosahedron};
pub use io::{load_mesh, load_mesh_file, MeshFormat};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Simplex {
    vertices: Vec<usize>,
    orientation: i8,
}

impl Simplex {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// +1 when the sorted vertex order is the positive orientation.
    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Signed incidence matrix stored by columns; every column of `∂_p` has
/// exactly `p + 1` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    nrows: usize,
    columns: Vec<Vec<(usize, i8)>>,
}

impl IncidenceMatrix {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.columns[j]
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.columns[j]
            .iter()
            .find(|&&(r, _)| r == i)
            .map_or(0, |&(_, s)| s)
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let triplets: Vec<_> = self
            .columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, s)| (i, j, f64::from(s))))
            .collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols(), &triplets)
    }

    /// Transposed as a real matrix: the coboundary `d = ∂ᵀ`.
    pub fn transpose_csr(&self) -> CsrMatrix {
        let triplets: Vec<_> = self
            .columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, s)| (j, i, f64::from(s))))
            .collect();
        CsrMatrix::from_triplets(self.ncols(), self.nrows, &triplets)
    }

    pub fn to_dense_i64(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.ncols()]; self.nrows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, s) in col {
                m[i][j] += i64::from(s);
            }
        }
        m
    }

    /// Exact integer check that `self ∘ upper` vanishes.
    pub fn composes_to_zero(&self, upper: &IncidenceMatrix) -> bool {
        assert_eq!(self.ncols(), upper.nrows, "incidence composition shape");
        let mut acc: HashMap<usize, i64> = HashMap::new();
        upper.columns.iter().all(|col| {
            acc.clear();
            for &(k, s) in col {
                for &(i, t) in &self.columns[k] {
                    *acc.entry(i).or_default() += i64::from(s) * i64::from(t);
                }
            }
            acc.values().all(|&v| v == 0)
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    id: u64,
    dim: usize,
    coords: Vec<[f64; 3]>,
    simplices: Vec<Vec<Simplex>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
    boundary: Vec<IncidenceMatrix>,
    edge_lengths: Vec<f64>,
    orientable: bool,
}

impl SimplicialComplex {
    /// Build from top simplices given as vertex lists; the list order fixes
    /// the initial orientation. Edge lengths come from the coordinates.
    pub fn from_top_simplices(coords: Vec<[f64; 3]>, tops: Vec<Vec<usize>>) -> Result<Self> {
        let c = coords.clone();
        Self::from_top_simplices_with_lengths(coords, tops, move |a, b| euclid(&c[a], &c[b]))
    }

    /// As [`Self::from_top_simplices`], with intrinsic edge lengths supplied
    /// by `length(a, b)` (`a < b`).
    pub fn from_top_simplices_with_lengths(
        coords: Vec<[f64; 3]>,
        tops: Vec<Vec<usize>>,
        length: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let n0 = coords.len();
        let Some(first) = tops.first() else {
            return Err(Error::InvalidParameter("complex has no simplices".into()));
        };
        let dim = first
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::InvalidParameter("empty simplex".into()))?;
        if dim > 3 {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} above 3 is not supported"
            )));
        }

        let mut top_simplices = Vec::with_capacity(tops.len());
        let mut seen = HashMap::new();
        for (t, verts) in tops.iter().enumerate() {
            if verts.len() != dim + 1 {
                return Err(Error::InvalidParameter(format!(
                    "simplex {t} has {} vertices, expected {}",
                    verts.len(),
                    dim + 1
                )));
            }
            if let Some(&v) = verts.iter().find(|&&v| v >= n0) {
                return Err(Error::InvalidParameter(format!(
                    "simplex {t} references vertex {v} of {n0}"
                )));
            }
            let (sorted, parity) = sort_with_parity(verts);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "simplex {t} repeats a vertex"
                )));
            }
            if seen.insert(sorted.clone(), t).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "simplex {t} is duplicated"
                )));
            }
            top_simplices.push(Simplex {
                vertices: sorted,
                orientation: parity,
            });
        }

        let mut simplices: Vec<Vec<Simplex>> = Vec::with_capacity(dim + 1);
        simplices.push(
            (0..n0)
                .map(|v| Simplex {
                    vertices: vec![v],
                    orientation: 1,
                })
                .collect(),
        );
        for p in 1..dim {
            let mut faces = BTreeSet::new();
            for s in &top_simplices {
                for face in subsets(&s.vertices, p + 1) {
                    faces.insert(face);
                }
            }
            simplices.push(
                faces
                    .into_iter()
                    .map(|vertices| Simplex {
                        vertices,
                        orientation: 1,
                    })
                    .collect(),
            );
        }
        if dim > 0 {
            simplices.push(top_simplices);
        }

        let lookup: Vec<HashMap<Vec<usize>, usize>> = simplices
            .iter()
            .map(|level| {
                level
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.vertices.clone(), i))
                    .collect()
            })
            .collect();

        let mut complex = Self {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            dim,
            coords,
            simplices,
            lookup,
            boundary: Vec::new(),
            edge_lengths: Vec::new(),
            orientable: true,
        };
        complex.check_manifold()?;
        complex.orientable = complex.orient_coherently();
        complex.boundary = (0..=dim).map(|p| complex.assemble_boundary(p)).collect();
        if dim >= 1 {
            complex.edge_lengths = complex.simplices[1]
                .iter()
                .map(|e| length(e.vertices[0], e.vertices[1]))
                .collect();
        }
        Ok(complex)
    }

    /// Identity tag; clones share it, independently constructed complexes never do.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self, p: usize) -> usize {
        self.simplices.get(p).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..=self.dim).map(|p| self.n(p)).collect()
    }

    pub fn simplices(&self, p: usize) -> &[Simplex] {
        &self.simplices[p]
    }

    pub fn simplex(&self, p: usize, i: usize) -> &Simplex {
        &self.simplices[p][i]
    }

    pub fn index_of(&self, vertices: &[usize]) -> Option<usize> {
        let p = vertices.len().checked_sub(1)?;
        let mut key = vertices.to_vec();
        key.sort_unstable();
        self.lookup.get(p)?.get(&key).copied()
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn edge_length(&self, a: usize, b: usize) -> Option<f64> {
        self.index_of(&[a, b]).map(|i| self.edge_lengths[i])
    }

    pub fn is_orientable(&self) -> bool {
        self.orientable
    }

    /// Signed incidence matrix `∂_p` mapping p-chains to (p−1)-chains.
    pub fn boundary_operator(&self, p: usize) -> Result<&IncidenceMatrix> {
        if p == 0 || p > self.dim {
            return Err(Error::DegreeOutOfRange {
                degree: p,
                min: 1,
                max: self.dim,
            });
        }
        Ok(&self.boundary[p])
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim)
            .map(|p| {
                if p % 2 == 0 {
                    self.n(p) as i64
                } else {
                    -(self.n(p) as i64)
                }
            })
            .sum()
    }

    /// Codimension-1 faces with exactly one incident top simplex.
    pub fn boundary_facets(&self) -> Vec<usize> {
        if self.dim == 0 {
            return Vec::new();
        }
        let mut count = vec![0usize; self.n(self.dim - 1)];
        for col in &self.boundary[self.dim].columns {
            for &(i, _) in col {
                count[i] += 1;
            }
        }
        (0..count.len()).filter(|&i| count[i] == 1).collect()
    }

    pub fn has_boundary(&self) -> bool {
        !self.boundary_facets().is_empty()
    }

    /// `mask[i]` is true when p-simplex `i` lies in the boundary subcomplex.
    pub fn boundary_mask(&self, p: usize) -> Vec<bool> {
        let mut mask = vec![false; self.n(p)];
        if self.dim == 0 || p >= self.dim {
            return mask;
        }
        for f in self.boundary_facets() {
            let verts = &self.simplices[self.dim - 1][f].vertices;
            for face in subsets(verts, p + 1) {
                mask[self.lookup[p][&face]] = true;
            }
        }
        mask
    }

    /// Vertex adjacency through edges, each list sorted.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.n(0)];
        if self.dim >= 1 {
            for e in &self.simplices[1] {
                let (a, b) = (e.vertices[0], e.vertices[1]);
                nbrs[a].push(b);
                nbrs[b].push(a);
            }
        }
        nbrs.iter_mut().for_each(|l| l.sort_unstable());
        nbrs
    }

    /// Top simplices containing each vertex.
    pub fn vertex_top_star(&self) -> Vec<Vec<usize>> {
        let mut star = vec![Vec::new(); self.n(0)];
        for (t, s) in self.simplices[self.dim].iter().enumerate() {
            for &v in &s.vertices {
                star[v].push(t);
            }
        }
        star
    }

    fn check_manifold(&self) -> Result<()> {
        if self.dim == 0 {
            return Ok(());
        }
        let mut cofaces: HashMap<&[usize], usize> = HashMap::new();
        for s in &self.simplices[self.dim] {
            for face in subsets(&s.vertices, self.dim) {
                let idx = self.lookup[self.dim - 1][&face];
                let key = self.simplices[self.dim - 1][idx].vertices.as_slice();
                let c = cofaces.entry(key).or_default();
                *c += 1;
                if *c > 2 {
                    return Err(Error::NonManifold { face, cofaces: *c });
                }
            }
        }
        Ok(())
    }

    /// Flip top-simplex signs so each interior facet receives opposite induced
    /// signs from its two cofaces. Returns false (leaving input signs) when no
    /// coherent orientation exists.
    fn orient_coherently(&mut self) -> bool {
        if self.dim == 0 {
            return true;
        }
        let top = self.dim;
        let nf = self.n(top - 1);
        let mut cofaces: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nf];
        for (t, s) in self.simplices[top].iter().enumerate() {
            for i in 0..=top {
                let face: Vec<usize> = omit(&s.vertices, i);
                cofaces[self.lookup[top - 1][&face]].push((t, i));
            }
        }
        let original: Vec<i8> = self.simplices[top].iter().map(|s| s.orientation).collect();
        let mut sign = original.clone();
        let nt = sign.len();
        let mut visited = vec![false; nt];
        let mut ok = true;
        let mut faces_of: Vec<Vec<usize>> = vec![Vec::new(); nt];
        for (f, cf) in cofaces.iter().enumerate() {
            for &(t, _) in cf {
                faces_of[t].push(f);
            }
        }
        for root in 0..nt {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(t) = queue.pop_front() {
                for &f in &faces_of[t] {
                    let cf = &cofaces[f];
                    if cf.len() != 2 {
                        continue;
                    }
                    let (me, other) = if cf[0].0 == t {
                        (cf[0], cf[1])
                    } else {
                        (cf[1], cf[0])
                    };
                    let induced = sign[t] * parity_sign(me.1);
                    let wanted = -induced * parity_sign(other.1);
                    if !visited[other.0] {
                        visited[other.0] = true;
                        sign[other.0] = wanted;
                        queue.push_back(other.0);
                    } else if sign[other.0] != wanted {
                        ok = false;
                    }
                }
            }
        }
        let chosen = if ok { sign } else { original };
        for (s, o) in self.simplices[top].iter_mut().zip(chosen) {
            s.orientation = o;
        }
        ok
    }

    fn assemble_boundary(&self, p: usize) -> IncidenceMatrix {
        if p == 0 {
            return IncidenceMatrix {
                nrows: 0,
                columns: vec![Vec::new(); self.n(0)],
            };
        }
        let columns = self.simplices[p]
            .iter()
            .map(|s| {
                (0..=p)
                    .map(|i| {
                        let face = omit(&s.vertices, i);
                        (self.lookup[p - 1][&face], s.orientation * parity_sign(i))
                    })
                    .collect()
            })
            .collect();
        IncidenceMatrix {
            nrows: self.n(p - 1),
            columns,
        }
    }
}

fn parity_sign(i: usize) -> i8 {
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

fn omit(v: &[usize], i: usize) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, &x)| x)
        .collect()
}

/// All `k`-element subsets of a sorted slice, each sorted.
pub(crate) fn subsets(v: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = v.len();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize == k {
            out.push(
                (0..n)
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| v[i])
                    .collect(),
            );
        }
    }
    out
}

/// Sorted copy and the sign of the sorting permutation.
pub(crate) fn sort_with_parity(v: &[usize]) -> (Vec<usize>, i8) {
    let mut s = v.to_vec();
    let mut sign = 1i8;
    for i in 1..s.len() {
        let mut j = i;
        while j > 0 && s[j - 1] > s[j] {
            s.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    (s, sign)
}

pub(crate) fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
