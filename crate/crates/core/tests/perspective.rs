mod common;

use common::*;
use opdiv::funcs::{builtin, Interval};
use opdiv::hermitian::{kronecker, loewner_compare, HermitianMatrix, PositiveDefiniteMatrix};
use opdiv::perspective::{
    bivariate_calculus, f_delta_h, f_nabla_h, perspective, theta_divergence, BivariateSpec,
    FieldEntry, WeightedOperatorField,
};
use opdiv::ToleranceConfig;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_match_lu_oracle(seed in any::<u64>(), dim in 2usize..=6) {
        let mut r = rng(seed);
        let l = pd(&mut r, dim);
        let rr = pd(&mut r, dim);
        let (lm, rm) = (l.as_hermitian().matrix(), rr.as_hermitian().matrix());

        let g = perspective(&builtin("square", &[]).unwrap(), l.as_hermitian(), &rr).unwrap();
        prop_assert!(rel_dev(g.matrix(), &(lm * lu_inverse(rm) * lm)) < 1e-9);

        let g = perspective(&builtin("power", &[-1.0]).unwrap(), l.as_hermitian(), &rr).unwrap();
        prop_assert!(rel_dev(g.matrix(), &(rm * lu_inverse(lm) * rm)) < 1e-9);
    }

    #[test]
    fn perspective_is_homogeneous(seed in any::<u64>(), dim in 2usize..=5, t in 0.1f64..10.0) {
        let mut r = rng(seed);
        let f = builtin("t_log_t", &[]).unwrap();
        let l = pd(&mut r, dim).into_hermitian();
        let rr = pd(&mut r, dim);
        let base = perspective(&f, &l, &rr).unwrap();
        let scaled = perspective(&f, &l.scale(t), &rr.scale(t).unwrap()).unwrap();
        prop_assert!(rel_dev(scaled.matrix(), base.scale(t).matrix()) < 1e-10);
    }

    #[test]
    fn affine_functions_are_linear(seed in any::<u64>(), dim in 2usize..=5, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = rng(seed);
        let l = herm(&mut r, dim);
        let rr = pd(&mut r, dim);
        let g = perspective(&builtin("affine", &[a, b]).unwrap(), &l, &rr).unwrap();
        let want = &l.scale(a) + &rr.as_hermitian().scale(b);
        prop_assert!(g.max_abs_diff(&want).unwrap() < 1e-10);
    }

    #[test]
    fn unitary_covariance(seed in any::<u64>(), dim in 2usize..=5) {
        let mut r = rng(seed);
        let f = builtin("power", &[1.5]).unwrap();
        let l = pd(&mut r, dim).into_hermitian();
        let rr = pd(&mut r, dim);
        let u = unitary(&mut r, dim);
        let lu = hermitian(conj(&u, l.matrix()));
        let ru = PositiveDefiniteMatrix::new(hermitian(conj(&u, rr.as_hermitian().matrix()))).unwrap();
        let lhs = perspective(&f, &lu, &ru).unwrap();
        let rhs = conj(&u, perspective(&f, &l, &rr).unwrap().matrix());
        prop_assert!(rel_dev(lhs.matrix(), &rhs) < 1e-10);
    }

    #[test]
    fn commuting_inputs_reduce_to_scalars(
        l in prop::collection::vec(0.1f64..4.0, 2..=5),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let dim = l.len();
        let rr: Vec<f64> = (0..dim).map(|i| 0.2 + 0.5 * (i as f64) + (seed % 7) as f64 * 0.1).collect();
        let u = unitary(&mut r, dim);
        let f = builtin("neg_log", &[]).unwrap();
        let lm = hermitian(conj(&u, &real_diag(&l)));
        let rm = PositiveDefiniteMatrix::new(hermitian(conj(&u, &real_diag(&rr)))).unwrap();
        let g = perspective(&f, &lm, &rm).unwrap();
        let scalars: Vec<f64> = l.iter().zip(&rr).map(|(x, y)| y * f.eval(x / y)).collect();
        prop_assert!(rel_dev(g.matrix(), &conj(&u, &real_diag(&scalars))) < 1e-10);
    }

    #[test]
    fn perspective_is_jointly_convex(seed in any::<u64>(), dim in 2usize..=4, lambda in 0.05f64..0.95) {
        let mut r = rng(seed);
        let tol = ToleranceConfig::default();
        for f in [builtin("square", &[]).unwrap(), builtin("power", &[-0.5]).unwrap(), builtin("t_log_t", &[]).unwrap()] {
            let (l1, l2) = (pd(&mut r, dim).into_hermitian(), pd(&mut r, dim).into_hermitian());
            let (r1, r2) = (pd(&mut r, dim), pd(&mut r, dim));
            let lm = &l1.scale(lambda) + &l2.scale(1.0 - lambda);
            let rm = PositiveDefiniteMatrix::new(
                &r1.as_hermitian().scale(lambda) + &r2.as_hermitian().scale(1.0 - lambda),
            ).unwrap();
            let lhs = perspective(&f, &lm, &rm).unwrap();
            let rhs = &perspective(&f, &l1, &r1).unwrap().scale(lambda)
                + &perspective(&f, &l2, &r2).unwrap().scale(1.0 - lambda);
            prop_assert!(loewner_compare(&lhs, &rhs, &tol).unwrap().is_less_or_equal());
        }
    }

    #[test]
    fn one_dimensional_theta_is_csiszar(
        pq in prop::collection::vec((0.05f64..5.0, 0.05f64..5.0), 1..=8),
    ) {
        for f in [builtin("square", &[]).unwrap(), builtin("neg_log", &[]).unwrap(), builtin("power", &[1.5]).unwrap()] {
            let entries = pq.iter().map(|&(p, q)| FieldEntry {
                w: 1.0,
                a: HermitianMatrix::from_diagonal(&[p]),
                b: PositiveDefiniteMatrix::from_diagonal(&[q]).unwrap(),
            }).collect();
            let field = WeightedOperatorField::new(entries, false).unwrap();
            let theta = theta_divergence(&f, &field).unwrap().entry(0, 0).re;
            let direct: f64 = pq.iter().map(|&(p, q)| q * f.eval(p / q)).sum();
            prop_assert!((theta - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn delta_with_identity_h_is_the_perspective(seed in any::<u64>(), dim in 2usize..=5) {
        let mut r = rng(seed);
        let f = builtin("square", &[]).unwrap();
        let h = builtin("identity", &[]).unwrap();
        let l = herm(&mut r, dim);
        let rr = pd(&mut r, dim);
        let d = f_delta_h(&f, &h, &l, rr.as_hermitian()).unwrap();
        prop_assert!(d.max_abs_diff(&perspective(&f, &l, &rr).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn bivariate_product_is_kronecker(seed in any::<u64>(), da in 1usize..=4, db in 1usize..=4) {
        let mut r = rng(seed);
        let a = herm(&mut r, da);
        let b = herm(&mut r, db);
        let phi = BivariateSpec::new("xy", Interval::real_line(), Interval::real_line(), |x, y| x * y);
        let got = bivariate_calculus(&phi, &a, &b).unwrap();
        prop_assert!(got.max_abs_diff(&kronecker(&a, &b).unwrap()).unwrap() < 1e-10);
        let first = BivariateSpec::new("x", Interval::real_line(), Interval::real_line(), |x, _| x);
        let got = bivariate_calculus(&first, &a, &b).unwrap();
        let want = kronecker(&a, &HermitianMatrix::identity(db)).unwrap();
        prop_assert!(got.max_abs_diff(&want).unwrap() < 1e-10);
    }
}

#[test]
fn nabla_with_point_mass_is_a_single_delta() {
    let mut r = rng(9);
    let f = builtin("t_log_t", &[]).unwrap();
    let h = builtin("power", &[0.5]).unwrap();
    let pairs: Vec<_> = (0..3)
        .map(|_| (pd(&mut r, 3).into_hermitian(), pd(&mut r, 3)))
        .collect();
    let field = WeightedOperatorField::from_pairs(pairs.clone()).unwrap();
    let got = f_nabla_h(&f, &h, &field, &[0.0, 1.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
    let want = f_delta_h(&f, &h, &pairs[1].0, pairs[1].1.as_hermitian()).unwrap();
    assert!(got.max_abs_diff(&want).unwrap() < 1e-12);
}

#[test]
fn relative_entropy_superadditivity_display_fails_in_one_dimension() {
    // r = (1, 1), l = (1, 2): the sum of the terms exceeds the term of the sums,
    // so only the joint-convexity direction can hold.
    let f = builtin("neg_log", &[]).unwrap();
    let field = WeightedOperatorField::from_pairs(vec![
        (
            HermitianMatrix::from_diagonal(&[1.0]),
            PositiveDefiniteMatrix::from_diagonal(&[1.0]).unwrap(),
        ),
        (
            HermitianMatrix::from_diagonal(&[2.0]),
            PositiveDefiniteMatrix::from_diagonal(&[1.0]).unwrap(),
        ),
    ])
    .unwrap();
    let sum_of_terms = theta_divergence(&f, &field).unwrap().entry(0, 0).re;
    let term_of_sums = perspective(&f, &field.sum_a(), &field.sum_b().unwrap())
        .unwrap()
        .entry(0, 0)
        .re;
    assert!((sum_of_terms - 0.5f64.ln()).abs() < 1e-14);
    assert!((term_of_sums - 2.0 * (2.0f64 / 3.0).ln()).abs() < 1e-14);
    assert!(sum_of_terms > term_of_sums);
}
