mod common;

use common::*;
use opdiv::hermitian::spectral_decompose;
use opdiv::lab::gen::gaussian_matrix;
use opdiv::norms::{ky_fan, ky_fan_dominates, singular_values, spectral_norm, trace_norm};
use opdiv::ToleranceConfig;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermitian_singular_values_are_absolute_eigenvalues(seed in any::<u64>(), dim in 1usize..=6) {
        let mut r = rng(seed);
        let a = herm(&mut r, dim);
        let mut want: Vec<f64> = spectral_decompose(&a).unwrap().eigenvalues.iter().map(|x| x.abs()).collect();
        want.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let got = singular_values(a.matrix()).unwrap().values;
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-9);
        }
    }

    #[test]
    fn ky_fan_is_unitarily_invariant(seed in any::<u64>(), dim in 2usize..=5) {
        let mut r = rng(seed);
        let m = gaussian_matrix(&mut r, dim, dim);
        let (u, v) = (unitary(&mut r, dim), unitary(&mut r, dim));
        let rotated = &u * &m * &v;
        for k in 1..=dim {
            prop_assert!((ky_fan(&m, k).unwrap() - ky_fan(&rotated, k).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn ky_fan_is_a_norm_family(seed in any::<u64>(), dim in 2usize..=5, t in -3.0f64..3.0) {
        let mut r = rng(seed);
        let a = gaussian_matrix(&mut r, dim, dim);
        let b = gaussian_matrix(&mut r, dim, dim);
        let sum = &a + &b;
        let mut prev = 0.0;
        for k in 1..=dim {
            let ka = ky_fan(&a, k).unwrap();
            prop_assert!(ky_fan(&sum, k).unwrap() <= ka + ky_fan(&b, k).unwrap() + 1e-10);
            prop_assert!((ky_fan(&(&a * c(t)), k).unwrap() - t.abs() * ka).abs() < 1e-10);
            prop_assert!(ka >= prev);
            prev = ka;
        }
        prop_assert!((ky_fan(&a, 1).unwrap() - spectral_norm(&a).unwrap()).abs() < 1e-12);
        prop_assert!((ky_fan(&a, dim).unwrap() - trace_norm(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn dominance_agrees_with_every_k(seed in any::<u64>(), dim in 2usize..=5) {
        let mut r = rng(seed);
        let tol = ToleranceConfig::default();
        let a = gaussian_matrix(&mut r, dim, dim);
        let b = gaussian_matrix(&mut r, dim, dim);
        let every_k = (1..=dim).all(|k| {
            let (ka, kb) = (ky_fan(&a, k).unwrap(), ky_fan(&b, k).unwrap());
            ka <= kb + tol.at_scale(ka.max(kb))
        });
        prop_assert_eq!(ky_fan_dominates(&a, &b, &tol).unwrap(), every_k);
        prop_assert!(ky_fan_dominates(&a, &a, &tol).unwrap());
        prop_assert!(ky_fan_dominates(&(&a * c(0.5)), &a, &tol).unwrap());
    }
}
