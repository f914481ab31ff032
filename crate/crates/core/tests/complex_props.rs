mod common;

use proptest::prelude::*;
use raising_core::{
    generate_annulus, generate_disk, generate_torus, icosahedron, load_mesh, riemannian_double,
    Error, MeshFormat,
};

#[test]
fn icosahedron_through_off() {
    let text = common::to_off(&icosahedron());
    let k = load_mesh(text.as_bytes(), MeshFormat::Off).unwrap();
    assert_eq!(k.counts(), vec![12, 30, 20]);
    assert_eq!(k.euler_characteristic(), 2);
    assert!(k.is_orientable());
    assert!(!k.has_boundary());
}

#[test]
fn icosahedron_boundary_rank() {
    let k = icosahedron();
    assert_eq!(common::incidence_rank(k.boundary_operator(2).unwrap()), 19);
    assert_eq!(common::incidence_rank(k.boundary_operator(1).unwrap()), 11);
}

#[test]
fn torus_4x4_chain_identity() {
    let k = generate_torus(4, 4).unwrap();
    assert!(k
        .boundary_operator(1)
        .unwrap()
        .composes_to_zero(k.boundary_operator(2).unwrap()));
}

#[test]
fn torus_rejects_small_grids() {
    assert!(matches!(
        generate_torus(2, 5),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        generate_torus(5, 2),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn rank_nullity_betti_numbers() {
    assert_eq!(
        common::betti_by_rank(&generate_torus(5, 4).unwrap()),
        vec![1, 2, 1]
    );
    assert_eq!(common::betti_by_rank(&icosahedron()), vec![1, 0, 1]);
    let (disk_double, _) = riemannian_double(&generate_disk(2, 7).unwrap()).unwrap();
    assert_eq!(common::betti_by_rank(&disk_double), vec![1, 0, 1]);
    let (ann_double, _) = riemannian_double(&generate_annulus(2, 7).unwrap()).unwrap();
    assert_eq!(common::betti_by_rank(&ann_double), vec![1, 2, 1]);
}

#[test]
fn double_counts_follow_gluing() {
    for k in [
        generate_disk(3, 9).unwrap(),
        generate_annulus(3, 10).unwrap(),
    ] {
        let (d, e) = riemannian_double(&k).unwrap();
        assert_eq!(d.euler_characteristic(), 2 * k.euler_characteristic());
        for p in 0..=2 {
            let boundary = k.boundary_mask(p).iter().filter(|&&b| b).count();
            assert_eq!(d.n(p), 2 * k.n(p) - boundary);
            assert_eq!(e.domain_simplices[p].len(), k.n(p));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn torus_counts_and_exactness(m in 3usize..12, n in 3usize..12) {
        let k = generate_torus(m, n).unwrap();
        prop_assert_eq!(k.counts(), vec![m * n, 3 * m * n, 2 * m * n]);
        prop_assert_eq!(k.euler_characteristic(), 0);
        let b1 = k.boundary_operator(1).unwrap();
        let b2 = k.boundary_operator(2).unwrap();
        prop_assert!(b1.composes_to_zero(b2));
        for j in 0..b2.ncols() {
            prop_assert_eq!(b2.column(j).len(), 3);
        }
        for j in 0..b1.ncols() {
            prop_assert_eq!(b1.column(j).len(), 2);
        }
    }

    #[test]
    fn every_face_is_present(rings in 1usize..4, sectors in 5usize..12) {
        for k in [generate_disk(rings, sectors).unwrap(), generate_annulus(rings, sectors).unwrap()] {
            for p in 1..=k.dim() {
                for s in k.simplices(p) {
                    for skip in 0..=p {
                        let face: Vec<usize> = s.vertices().iter().enumerate()
                            .filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                        prop_assert!(k.index_of(&face).is_some());
                    }
                }
                let mut seen = std::collections::HashSet::new();
                for s in k.simplices(p) {
                    prop_assert!(seen.insert(s.vertices().to_vec()));
                }
            }
        }
    }

    #[test]
    fn mirror_map_is_an_involution(rings in 2usize..5, sectors in 5usize..12) {
        let k = generate_annulus(rings, sectors).unwrap();
        let (d, e) = riemannian_double(&k).unwrap();
        prop_assert!(!d.has_boundary());
        prop_assert!(d.boundary_operator(1).unwrap().composes_to_zero(d.boundary_operator(2).unwrap()));
        for p in 0..=2 {
            let m = &e.mirror_map[p];
            prop_assert!((0..m.len()).all(|i| m[m[i]] == i));
        }
    }
}
