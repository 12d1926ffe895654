mod common;

use common::*;
use matryoshka::matrix::{ExpCache, InverseCache};
use matryoshka::processes::pascal_lower;
use matryoshka::{Error, MatryoshkanMatrix};
use proptest::prelude::*;
use rand::SeedableRng;

fn stable(seed: u64, n: usize) -> MatryoshkanMatrix {
    random_stable(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed), n)
}

fn invertible(seed: u64, n: usize) -> MatryoshkanMatrix {
    random_invertible(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed), n)
}

#[test]
fn exp_of_two_by_two() {
    let m = MatryoshkanMatrix::from_rows(&[vec![-1.0], vec![1.0, -2.0]]).unwrap();
    let e = m.exp_scaled(1.0).unwrap();
    let (a, b) = ((-1.0f64).exp(), (-2.0f64).exp());
    assert!((e.get(0, 0) - a).abs() < 1e-15);
    assert!((e.get(1, 0) - (a - b)).abs() < 1e-15);
    assert!((e.get(1, 1) - b).abs() < 1e-15);
    assert!(max_diff(&e.to_dense(), &taylor_exp(&m.to_dense(), 1.0, 60)) < 1e-15);
}

#[test]
fn eigenvectors_of_two_by_two() {
    let m = MatryoshkanMatrix::from_rows(&[vec![-1.0], vec![1.0, -2.0]]).unwrap();
    let eig = m.eigendecompose().unwrap();
    let u = eig.vectors.to_dense();
    let lhs = mat_mul(&m.to_dense(), &u);
    let rhs = mat_mul(&u, &MatryoshkanMatrix::diagonal(&eig.values).to_dense());
    assert_eq!(max_diff(&lhs, &rhs), 0.0);
    assert_eq!(u, vec![vec![1.0, 0.0], vec![1.0, 1.0]]);
}

#[test]
fn diagonal_eigendecomposition() {
    let eig = MatryoshkanMatrix::diagonal(&[1.0, 2.0, 3.0])
        .eigendecompose()
        .unwrap();
    assert_eq!(eig.vectors, MatryoshkanMatrix::identity(3));
    assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
}

#[test]
fn degenerate_spectra_are_rejected() {
    let m = MatryoshkanMatrix::from_rows(&[vec![-1.0], vec![1.0, -1.0]]).unwrap();
    assert!(matches!(
        m.exp_scaled(1.0),
        Err(Error::DegenerateSpectrum { .. })
    ));
    assert!(matches!(
        m.eigendecompose(),
        Err(Error::DegenerateSpectrum { .. })
    ));
    assert!(matches!(m.power(3), Err(Error::DegenerateSpectrum { .. })));
    // repeated multiplication still works
    assert_eq!(
        m.power_repeated(3).to_dense(),
        repeated_product(&m.to_dense(), 3)
    );
}

#[test]
fn singular_inverse_names_the_index() {
    let m = MatryoshkanMatrix::from_rows(&[vec![1.0], vec![2.0, 0.0]]).unwrap();
    assert_eq!(m.inverse().unwrap_err(), Error::SingularMatrix { index: 1 });
}

#[test]
fn shift_exponential_is_lower_pascal() {
    for &a in &[0.5, -1.3, 2.0] {
        for k in 1..=8 {
            let mut shift = MatryoshkanMatrix::empty();
            for i in 0..k {
                let mut row = vec![0.0; i];
                if i > 0 {
                    row[i - 1] = a * i as f64;
                }
                shift.push_row(&row, 0.0).unwrap();
            }
            // a diag(1:k-1, -1) is nilpotent, so the series terminates after k terms
            let series = taylor_exp(&shift.to_dense(), 1.0, k + 1);
            let pascal = pascal_lower(k, a).to_dense();
            assert!(max_diff(&series, &pascal) <= 1e-12 * max_abs(&pascal).max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leading_blocks_are_prefixes(seed in any::<u64>(), n in 1usize..16, k in 0usize..16) {
        let m = invertible(seed, n);
        let k = k.min(n);
        let lead = m.leading(k);
        prop_assert_eq!(lead.packed(), &m.packed()[..k * (k + 1) / 2]);
        let inv = m.inverse().unwrap();
        prop_assert_eq!(inv.leading(k), lead.inverse().unwrap());
    }

    #[test]
    fn sums_and_products_stay_nested(seed in any::<u64>(), n in 1usize..12) {
        let a = invertible(seed, n);
        let b = invertible(seed.wrapping_add(1), n);
        let prod = a.multiply(&b).unwrap();
        prop_assert_eq!(prod.to_dense(), mat_mul(&a.to_dense(), &b.to_dense()));
        for k in 0..=n {
            prop_assert_eq!(prod.leading(k), a.leading(k).multiply(&b.leading(k)).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().leading(k), a.leading(k).add(&b.leading(k)).unwrap());
        }
        prop_assert_eq!(a.multiply(&MatryoshkanMatrix::identity(n)).unwrap(), a.clone());
        prop_assert_eq!(a.add(&MatryoshkanMatrix::zeros(n)).unwrap(), a);
    }

    #[test]
    fn inverse_residual(seed in any::<u64>(), n in 1usize..20) {
        let m = invertible(seed, n);
        let inv = m.inverse().unwrap();
        let prod = mat_mul(&m.to_dense(), &inv.to_dense());
        let scale = max_abs(&m.to_dense()) * max_abs(&inv.to_dense());
        prop_assert!(max_diff(&prod, &identity(n)) <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn exp_matches_taylor(seed in any::<u64>(), n in 1usize..20, t in 0.0f64..1.0) {
        let m = stable(seed, n);
        let e = m.exp_scaled(t).unwrap().to_dense();
        let oracle = taylor_exp(&m.to_dense(), t, 60);
        prop_assert!(max_diff(&e, &oracle) <= 1e-10 * max_abs(&oracle).max(1.0));
    }

    #[test]
    fn exp_cache_extends_row_by_row(seed in any::<u64>(), n in 1usize..15) {
        let m = stable(seed, n);
        let mut cache = ExpCache::exp(0.7);
        for k in 0..n {
            cache.push_row(m.sub_row(k), m.diag_entry(k)).unwrap();
            prop_assert_eq!(cache.value(), &m.leading(k + 1).exp_scaled(0.7).unwrap());
        }
    }

    #[test]
    fn inverse_cache_matches_inverse(seed in any::<u64>(), n in 1usize..15) {
        let m = invertible(seed, n);
        let mut cache = InverseCache::new();
        for k in 0..n {
            cache.push_row(m.sub_row(k), m.diag_entry(k)).unwrap();
        }
        let inv = m.inverse().unwrap();
        prop_assert!(max_diff(&cache.value().to_dense(), &inv.to_dense()) <= 1e-12 * inv.max_abs().max(1.0));
    }

    #[test]
    fn power_matches_repeated_multiplication(seed in any::<u64>(), n in 1usize..20, k in 0u32..8) {
        let m = stable(seed, n);
        let p = m.power(k).unwrap().to_dense();
        let oracle = repeated_product(&m.to_dense(), k);
        prop_assert!(max_diff(&p, &oracle) <= 1e-11 * max_abs(&oracle).max(1.0));
        prop_assert!(max_diff(&m.power_repeated(k).to_dense(), &oracle) <= 1e-12 * max_abs(&oracle).max(1.0));
    }

    #[test]
    fn eigendecomposition_residual(seed in any::<u64>(), n in 1usize..20) {
        let m = stable(seed, n);
        let eig = m.eigendecompose().unwrap();
        let u = eig.vectors.to_dense();
        let lhs = mat_mul(&m.to_dense(), &u);
        let rhs = mat_mul(&u, &MatryoshkanMatrix::diagonal(&eig.values).to_dense());
        let scale = max_abs(&m.to_dense()) * max_abs(&u);
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-11 * scale.max(1.0));
        for i in 0..n {
            prop_assert_eq!(eig.vectors.get(i, i), 1.0);
        }
    }

    #[test]
    fn exp_reconstructs_from_eigenpairs(seed in any::<u64>(), n in 1usize..12, t in 0.0f64..2.0) {
        let m = stable(seed, n);
        let eig = m.eigendecompose().unwrap();
        let u = eig.vectors.to_dense();
        let u_inv = eig.vectors.inverse().unwrap().to_dense();
        let d: Vec<f64> = eig.values.iter().map(|v| (v * t).exp()).collect();
        let recon = mat_mul(&mat_mul(&u, &MatryoshkanMatrix::diagonal(&d).to_dense()), &u_inv);
        let e = m.exp_scaled(t).unwrap().to_dense();
        let scale = max_abs(&u) * max_abs(&u_inv);
        prop_assert!(max_diff(&recon, &e) <= 1e-11 * scale.max(1.0));
    }

    #[test]
    fn pascal_lower_is_additive(k in 1usize..15, a in 0.0f64..2.0, b in 0.0f64..2.0, negative in any::<bool>()) {
        // same-sign arguments keep every entry a sum of like-signed terms
        let (a, b) = if negative { (-a, -b) } else { (a, b) };
        let prod = pascal_lower(k, a).multiply(&pascal_lower(k, b)).unwrap().to_dense();
        let sum = pascal_lower(k, a + b).to_dense();
        for i in 0..k {
            for j in 0..=i {
                prop_assert!(rel_close(prod[i][j], sum[i][j], 1e-12), "{} vs {}", prod[i][j], sum[i][j]);
            }
        }
    }
}
