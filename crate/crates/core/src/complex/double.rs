//! Gluing two copies of a manifold-with-boundary along the boundary.

use super::{sort_with_parity, SimplicialComplex};
use crate::error::{Error, Result};

/// Where the original domain sits inside its double.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainEmbedding {
    /// `domain_simplices[p][i]` is the index in the double of p-simplex `i`
    /// of the original complex.
    pub domain_simplices: Vec<Vec<usize>>,
    /// Involution on the double's p-simplices exchanging the two copies;
    /// boundary simplices are fixed points.
    pub mirror_map: Vec<Vec<usize>>,
}

impl DomainEmbedding {
    /// Membership mask of the original copy (boundary included).
    pub fn domain_mask(&self, p: usize) -> Vec<bool> {
        let mut mask = vec![false; self.mirror_map[p].len()];
        for &i in &self.domain_simplices[p] {
            mask[i] = true;
        }
        mask
    }

    /// Mask of the mirror copy minus the shared boundary: `D ∖ Ω`.
    pub fn complement_mask(&self, p: usize) -> Vec<bool> {
        self.domain_mask(p).into_iter().map(|b| !b).collect()
    }

    /// Values on the double, restricted to the original copy.
    pub fn restrict(&self, p: usize, values: &[f64]) -> Vec<f64> {
        self.domain_simplices[p]
            .iter()
            .map(|&i| values[i])
            .collect()
    }

    /// Values on the original copy, extended by zero to the double.
    pub fn extend_by_zero(&self, p: usize, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mirror_map[p].len()];
        for (&i, &v) in self.domain_simplices[p].iter().zip(values) {
            out[i] = v;
        }
        out
    }
}

/// Closed double `D = K ∪_{∂K} K̄`. The first copy keeps the original vertex
/// indices; interior vertices of the mirror copy are appended in order.
/// Mirror top simplices have reversed orientation, so `D` is coherently
/// oriented whenever `K` is.
pub fn riemannian_double(k: &SimplicialComplex) -> Result<(SimplicialComplex, DomainEmbedding)> {
    if !k.has_boundary() {
        return Err(Error::ClosedInput);
    }
    if !k.is_orientable() {
        return Err(Error::NonOrientable(
            "cannot build an oriented double of a non-orientable domain".into(),
        ));
    }
    let dim = k.dim();
    let n0 = k.n(0);
    let on_boundary = k.boundary_mask(0);
    for p in 1..=dim {
        let bmask = k.boundary_mask(p);
        if let Some((i, s)) = k
            .simplices(p)
            .iter()
            .enumerate()
            .find(|(i, s)| !bmask[*i] && s.vertices().iter().all(|&v| on_boundary[v]))
        {
            return Err(Error::InvalidParameter(format!(
                "interior {p}-simplex {i} {:?} has all vertices on the boundary, so its mirror image \
                 would coincide with it; refine the mesh",
                s.vertices()
            )));
        }
    }

    let mut mirror_vertex = vec![0usize; n0];
    let mut origin = (0..n0).collect::<Vec<_>>();
    let mut coords = k.coords().to_vec();
    for v in 0..n0 {
        if on_boundary[v] {
            mirror_vertex[v] = v;
        } else {
            mirror_vertex[v] = coords.len();
            origin.push(v);
            let c = k.coords()[v];
            coords.push([c[0], c[1], -c[2]]);
        }
    }

    let mut tops = Vec::with_capacity(2 * k.n(dim));
    let oriented = |verts: &[usize], sign: i8| {
        let mut v = verts.to_vec();
        if sign < 0 {
            v.swap(0, 1);
        }
        v
    };
    for s in k.simplices(dim) {
        tops.push(oriented(s.vertices(), s.orientation()));
    }
    for s in k.simplices(dim) {
        let mapped: Vec<usize> = s.vertices().iter().map(|&v| mirror_vertex[v]).collect();
        tops.push(oriented(&mapped, -s.orientation()));
    }

    let lengths_src = k.clone();
    let origin_for_len = origin.clone();
    let double = SimplicialComplex::from_top_simplices_with_lengths(coords, tops, move |a, b| {
        lengths_src
            .edge_length(origin_for_len[a], origin_for_len[b])
            .expect("every edge of the double comes from an edge of the domain")
    })?;
    if !double.is_orientable() {
        return Err(Error::NonOrientable(
            "double is not coherently orientable".into(),
        ));
    }

    let mut domain_simplices = Vec::with_capacity(dim + 1);
    let mut mirror_map = Vec::with_capacity(dim + 1);
    for p in 0..=dim {
        let domain: Vec<usize> = k
            .simplices(p)
            .iter()
            .map(|s| {
                double
                    .index_of(s.vertices())
                    .expect("domain simplex present in double")
            })
            .collect();
        let mut mirror = vec![usize::MAX; double.n(p)];
        for s in k.simplices(p) {
            let a = double.index_of(s.vertices()).expect("domain simplex");
            let mapped: Vec<usize> = s.vertices().iter().map(|&v| mirror_vertex[v]).collect();
            let (sorted, _) = sort_with_parity(&mapped);
            let b = double
                .index_of(&sorted)
                .expect("mirror simplex present in double");
            mirror[a] = b;
            mirror[b] = a;
        }
        debug_assert!(mirror.iter().all(|&m| m != usize::MAX));
        domain_simplices.push(domain);
        mirror_map.push(mirror);
    }

    Ok((
        double,
        DomainEmbedding {
            domain_simplices,
            mirror_map,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{generate_annulus, generate_disk, generate_torus};

    #[test]
    fn closed_input_is_rejected() {
        let t = generate_torus(3, 4).unwrap();
        assert!(matches!(riemannian_double(&t), Err(Error::ClosedInput)));
    }

    #[test]
    fn thin_annulus_has_no_simplicial_double() {
        let k = generate_annulus(1, 6).unwrap();
        assert!(matches!(
            riemannian_double(&k),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn double_of_disk_is_a_sphere() {
        let k = generate_disk(3, 7).unwrap();
        let (d, e) = riemannian_double(&k).unwrap();
        assert_eq!(d.euler_characteristic(), 2);
        assert!(!d.has_boundary());
        assert!(d.is_orientable());
        for p in 0..=2 {
            let nb = k.boundary_mask(p).iter().filter(|&&b| b).count();
            assert_eq!(d.n(p), 2 * k.n(p) - nb);
            let m = &e.mirror_map[p];
            assert!((0..m.len()).all(|i| m[m[i]] == i));
        }
    }

    #[test]
    fn double_of_annulus_is_a_torus() {
        let k = generate_annulus(2, 9).unwrap();
        let (d, _) = riemannian_double(&k).unwrap();
        assert_eq!(d.euler_characteristic(), 0);
        assert!(!d.has_boundary());
        let d1 = d.boundary_operator(1).unwrap();
        assert!(d1.composes_to_zero(d.boundary_operator(2).unwrap()));
    }

    #[test]
    fn boundary_is_fixed_and_copies_partition() {
        let k = generate_annulus(2, 6).unwrap();
        let (d, e) = riemannian_double(&k).unwrap();
        for p in 0..=2 {
            let bmask = k.boundary_mask(p);
            let dom = e.domain_mask(p);
            let mut covered = vec![0; d.n(p)];
            for (i, &di) in e.domain_simplices[p].iter().enumerate() {
                covered[di] += 1;
                let mi = e.mirror_map[p][di];
                if bmask[i] {
                    assert_eq!(mi, di);
                } else {
                    assert!(!dom[mi]);
                    covered[mi] += 1;
                }
            }
            assert!(covered.iter().all(|&c| c == 1));
        }
    }
}
