mod common;

use proptest::prelude::*;
use raising_core::{
    generate_annulus, generate_disk, generate_torus, icosahedron, riemannian_double, Operators,
    SimplicialComplex,
};

fn fixtures() -> Vec<(&'static str, SimplicialComplex)> {
    vec![
        ("torus", generate_torus(6, 5).unwrap()),
        ("icosahedron", icosahedron()),
        ("disk", generate_disk(2, 7).unwrap()),
        (
            "annulus double",
            riemannian_double(&generate_annulus(2, 8).unwrap())
                .unwrap()
                .0,
        ),
    ]
}

#[test]
fn sparse_laplacian_matches_dense_oracle() {
    for (name, k) in fixtures() {
        let ops = Operators::assemble(&k).unwrap();
        let star: Vec<Vec<f64>> = (0..=k.dim())
            .map(|p| ops.star().weights(p).to_vec())
            .collect();
        for p in 0..=k.dim() {
            if k.n(p) > 200 {
                continue;
            }
            let oracle = common::dense_laplacian_oracle(&k, &star, p);
            let sparse = ops.laplacian(p).unwrap().to_dense();
            let scale = oracle.amax().max(1.0);
            let diff = (&oracle - &sparse).amax();
            assert!(diff <= 1e-13 * scale, "{name} p={p}: {diff:e}");
        }
    }
}

#[test]
fn total_dual_area_equals_surface_area() {
    for (name, k) in fixtures() {
        let ops = Operators::assemble(&k).unwrap();
        let heron: f64 = k
            .simplices(2)
            .iter()
            .map(|t| {
                let v = t.vertices();
                let l = |a: usize, b: usize| k.edge_length(v[a], v[b]).unwrap();
                let (a, b, c) = (l(0, 1), l(1, 2), l(0, 2));
                let s = 0.5 * (a + b + c);
                (s * (s - a) * (s - b) * (s - c)).sqrt()
            })
            .sum();
        let dual: f64 = ops.star().weights(0).iter().sum();
        assert!(
            (dual - heron).abs() <= 1e-12 * heron,
            "{name}: {dual} vs {heron}"
        );
    }
}

#[test]
fn codifferential_of_exact_form_is_nonnegative() {
    let k = generate_torus(8, 8).unwrap();
    let ops = Operators::assemble(&k).unwrap();
    let phi = ops.random(0, 42);
    let dphi = ops.exterior_derivative(&phi).unwrap();
    let lhs = ops
        .inner_product(&ops.codifferential(&dphi).unwrap(), &phi)
        .unwrap();
    let rhs = ops.inner_product(&dphi, &dphi).unwrap();
    assert!(lhs >= 0.0);
    assert!((lhs - rhs).abs() <= 1e-12 * rhs);
}

#[test]
fn inner_product_is_exactly_symmetric() {
    let k = generate_torus(7, 7).unwrap();
    let ops = Operators::assemble(&k).unwrap();
    for p in 0..=2 {
        let (a, b) = (ops.random(p, 1), ops.random(p, 2));
        assert_eq!(
            ops.inner_product(&a, &b).unwrap(),
            ops.inner_product(&b, &a).unwrap()
        );
        assert!(ops.inner_product(&a, &a).unwrap() > 0.0);
        assert_eq!(
            ops.inner_product(&ops.zeros(p), &ops.zeros(p)).unwrap(),
            0.0
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn calculus_identities(seed in any::<u64>(), m in 3usize..9, n in 3usize..9) {
        let k = generate_torus(m, n).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        for p in 0..=2 {
            let u = ops.random(p, seed);
            let v = ops.random(p, seed ^ 0x9e37);
            let nu = ops.norm(&u);
            let nv = ops.norm(&v);
            if p + 2 <= 2 {
                let ddu = ops.exterior_derivative(&ops.exterior_derivative(&u).unwrap()).unwrap();
                prop_assert!(ddu.values().iter().all(|x| x.abs() <= 1e-14 * nu.max(1.0)));
            }
            if p == 2 {
                let dsds = ops.codifferential(&ops.codifferential(&u).unwrap()).unwrap();
                let scale = ops.norm(&ops.codifferential(&u).unwrap()).max(nu);
                prop_assert!(ops.norm(&dsds) <= 1e-14 * scale);
            }
            if p >= 1 {
                let phi = ops.random(p - 1, seed.wrapping_add(3));
                let lhs = ops.inner_product(&ops.codifferential(&u).unwrap(), &phi).unwrap();
                let rhs = ops.inner_product(&u, &ops.exterior_derivative(&phi).unwrap()).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * nu * ops.norm(&phi));
            }
            let lu = ops.apply_laplacian(&u).unwrap();
            let lv = ops.apply_laplacian(&v).unwrap();
            let sym = ops.inner_product(&lu, &v).unwrap() - ops.inner_product(&u, &lv).unwrap();
            prop_assert!(sym.abs() <= 1e-12 * nu * nv);
            let quad = ops.inner_product(&lu, &u).unwrap();
            prop_assert!(quad >= -1e-12 * nu * nu);
            let mut split = 0.0;
            if p < 2 {
                split += ops.norm(&ops.exterior_derivative(&u).unwrap()).powi(2);
            }
            if p > 0 {
                split += ops.norm(&ops.codifferential(&u).unwrap()).powi(2);
            }
            prop_assert!((quad - split).abs() <= 1e-12 * quad.abs().max(1.0));
        }
    }

    #[test]
    fn vertex_mean_product(seed in any::<u64>()) {
        let k = generate_torus(6, 6).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let u = ops.random(1, seed);
        let ones = ops.cochain(0, vec![1.0; k.n(0)]).unwrap();
        let same = ops.scalar_multiply(&ones, &u).unwrap();
        prop_assert_eq!(same.values(), u.values());
        prop_assert!(ops.scalar_multiply(&ops.zeros(0), &u).unwrap().is_zero());
        let chi = ops.random(0, seed ^ 1).values().iter().map(|x| 0.5 * (x + 1.0)).collect::<Vec<_>>();
        let rest: Vec<f64> = chi.iter().map(|c| 1.0 - c).collect();
        let a = ops.scalar_multiply(&ops.cochain(0, chi).unwrap(), &u).unwrap();
        let b = ops.scalar_multiply(&ops.cochain(0, rest).unwrap(), &u).unwrap();
        let sum = &a + &b;
        for (s, x) in sum.values().iter().zip(u.values()) {
            prop_assert!((s - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300));
        }
    }
}
