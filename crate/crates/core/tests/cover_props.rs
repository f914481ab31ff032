mod common;

use proptest::prelude::*;
use raising_core::harmonic::DEFAULT_NULL_TOL;
use raising_core::{
    build_cover, commutator, generate_disk, generate_torus, harmonic_basis, Operators,
};

#[test]
fn commutator_sum_over_partition_vanishes() {
    let k = generate_torus(12, 12).unwrap();
    let ops = Operators::assemble(&k).unwrap();
    let cover = build_cover(&k, 4, 1, 0).unwrap();
    for p in 0..=2 {
        let u = ops.random(p, 5 + p as u64);
        let mut total = ops.zeros(p);
        for chi in &cover.chi {
            total.axpy(1.0, &commutator(&ops, chi, &u).unwrap());
        }
        let scale = ops.norm(&ops.apply_laplacian(&u).unwrap());
        assert!(
            ops.norm(&total) <= 1e-12 * scale,
            "p={p}: {:e}",
            ops.norm(&total) / scale
        );
    }
}

#[test]
fn commutator_vanishes_where_weight_is_locally_constant() {
    let k = generate_torus(16, 16).unwrap();
    let ops = Operators::assemble(&k).unwrap();
    let cover = build_cover(&k, 4, 1, 0).unwrap();
    let nbrs = k.vertex_neighbors();
    for p in 0..=2 {
        let u = ops.random(p, 9);
        for (j, chi) in cover.chi.iter().enumerate().take(4) {
            let b = commutator(&ops, chi, &u).unwrap();
            let w = chi.values();
            // χ is constant on the two-hop vertex neighbourhood of σ: the Laplacian
            // stencil of σ only reaches simplices sharing a vertex with it.
            for (i, s) in k.simplices(p).iter().enumerate() {
                let mut ball: Vec<usize> = s.vertices().to_vec();
                for &v in s.vertices() {
                    for &x in &nbrs[v] {
                        ball.push(x);
                        ball.extend(&nbrs[x]);
                    }
                }
                let c = w[ball[0]];
                if ball.iter().all(|&x| w[x] == c) {
                    assert_eq!(b.values()[i], 0.0, "patch {j} p={p} simplex {i}");
                }
            }
        }
    }
}

#[test]
fn harmonic_forms_have_nonzero_commutators() {
    let k = generate_torus(16, 16).unwrap();
    let ops = Operators::assemble(&k).unwrap();
    let basis = harmonic_basis(&ops, 1, DEFAULT_NULL_TOL).unwrap();
    let cover = build_cover(&k, 4, 1, 0).unwrap();
    let h = &basis.vectors()[0];
    assert!(ops.norm(&ops.apply_laplacian(h).unwrap()) <= 1e-8);
    let chi = cover
        .chi
        .iter()
        .find(|c| c.values().iter().any(|&x| x > 0.0 && x < 1.0))
        .unwrap();
    assert!(ops.norm(&commutator(&ops, chi, h).unwrap()) > 1e-3);
}

#[test]
fn disk_covers_work_with_boundary() {
    let k = generate_disk(5, 10).unwrap();
    let cover = build_cover(&k, 3, 1, 2).unwrap();
    for x in 0..k.n(0) {
        let s = cover.chi.iter().fold(0.0, |a, c| a + c.values()[x]);
        assert_eq!(s, 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cover_invariants(seed in any::<u64>(), radius in 2u32..7, m in 6usize..14) {
        let k = generate_torus(m, m + 1).unwrap();
        let overlap = 1 + (radius >= 4) as u32;
        let cover = build_cover(&k, radius, overlap, seed).unwrap();
        for x in 0..k.n(0) {
            let s = cover.chi.iter().fold(0.0, |a, c| a + c.values()[x]);
            prop_assert_eq!(s, 1.0);
            for (patch, chi) in cover.patches.iter().zip(&cover.chi) {
                let w = chi.values()[x];
                prop_assert!((0.0..=1.0).contains(&w));
                if w > 0.0 {
                    prop_assert!(patch.simplices[0].binary_search(&x).is_ok());
                }
            }
        }
        for p in 0..=2 {
            let mut hit = vec![false; k.n(p)];
            for patch in &cover.patches {
                for &i in &patch.interior[p] {
                    hit[i] = true;
                }
                prop_assert!(patch.interior[p].iter().all(|i| patch.simplices[p].binary_search(i).is_ok()));
            }
            prop_assert!(hit.into_iter().all(|h| h));
        }
        let again = build_cover(&k, radius, overlap, seed).unwrap();
        prop_assert_eq!(again.seeds, cover.seeds);
    }
}
