use nalgebra::DMatrix;
use proptest::prelude::*;

use soliton_core::symfun::*;
use soliton_core::SymMatrix;

// sigma_r by summing products over r-subsets
fn subset_sigma(k: &[f64], r: usize) -> f64 {
    let n = k.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == r {
            total += (0..n).filter(|i| mask & (1 << i) != 0).map(|i| k[i]).product::<f64>();
        }
    }
    total
}

fn sym_strategy() -> impl Strategy<Value = SymMatrix> {
    (2usize..=6).prop_flat_map(|n| {
        prop::collection::vec(-2.0..2.0f64, n * n).prop_map(move |d| {
            let m = DMatrix::from_row_slice(n, n, &d);
            SymMatrix::new((&m + m.transpose()) * 0.5).unwrap()
        })
    })
}

#[test]
fn sigma_examples() {
    assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0], 2).unwrap(), 11.0);
    assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0], 3).unwrap(), 6.0);
    assert_eq!(elementary_symmetric(&[1.0, 2.0], 0).unwrap(), 1.0);
    assert_eq!(elementary_symmetric(&[1.0, 2.0], 5).unwrap(), 0.0);
    assert!(elementary_symmetric(&[], 1).is_err());
    assert!(elementary_symmetric(&[f64::NAN], 1).is_err());
}

#[test]
fn newton_examples() {
    let a = SymMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap();
    let p1 = newton_transform(&a, 1).unwrap();
    let expected = [5.0, 4.0, 3.0];
    for i in 0..3 {
        assert!((p1.get(i, i) - expected[i]).abs() < 1e-14);
    }
    let p2 = newton_transform(&a, 2).unwrap();
    for (i, e) in [6.0, 3.0, 2.0].iter().enumerate() {
        assert!((p2.get(i, i) - e).abs() < 1e-13);
    }
    assert!(newton_transform(&a, 4).is_err());
    assert!(trace_identities(&a, 0).is_err());
    assert!((min_eigen_pr(&a, 2).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn umbilic_newton_is_scalar() {
    // A = c I: P_r = C(n-1, r) c^r I
    let (n, c) = (5usize, 0.7f64);
    let a = SymMatrix::diagonal(&vec![c; n]).unwrap();
    let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    for r in 0..n {
        let p = newton_transform(&a, r).unwrap();
        let expected = binom(n - 1, r) * c.powi(r as i32);
        assert!((p.matrix() - DMatrix::identity(n, n) * expected).amax() < 1e-12);
    }
}

proptest! {
    #[test]
    fn recurrence_matches_subset_sums(k in prop::collection::vec(-3.0..3.0f64, 1..=8), r in 0usize..=8) {
        let exact = subset_sigma(&k, r.min(k.len()));
        let got = elementary_symmetric(&k, r.min(k.len())).unwrap();
        prop_assert!((got - exact).abs() <= 1e-10 * (1.0 + exact.abs()).max(3f64.powi(k.len() as i32)));
    }

    #[test]
    fn characteristic_polynomial(a in sym_strategy(), t in -3.0..3.0f64) {
        let n = a.dim();
        let direct = (a.matrix() - DMatrix::identity(n, n) * t).determinant();
        prop_assert!((char_poly_eval(&a, t).unwrap() - direct).abs() < 1e-9 * 5f64.powi(n as i32));
    }

    #[test]
    fn recursion_equals_polynomial(a in sym_strategy()) {
        let n = a.dim();
        for r in 0..=n {
            let d = newton_transform(&a, r).unwrap().matrix() - newton_polynomial(&a, r).unwrap().matrix();
            prop_assert!(d.amax() < 1e-9 * 5f64.powi(n as i32));
        }
        prop_assert!(newton_transform(&a, n).unwrap().matrix().amax() < 1e-9 * 5f64.powi(n as i32));
    }

    #[test]
    fn traces(a in sym_strategy()) {
        let n = a.dim();
        let spec = a.spectrum().unwrap();
        for r in 1..=n {
            let (tp, tap) = trace_identities(&a, r).unwrap();
            prop_assert!((tp - (n - r + 1) as f64 * spec.sigma(r - 1)).abs() < 1e-9 * 5f64.powi(n as i32));
            prop_assert!((tap - r as f64 * spec.sigma(r)).abs() < 1e-9 * 5f64.powi(n as i32));
        }
    }

    #[test]
    fn newton_commutes_with_a(a in sym_strategy(), r in 0usize..6) {
        let r = r.min(a.dim());
        let p = newton_transform(&a, r).unwrap();
        let c = a.matrix() * p.matrix() - p.matrix() * a.matrix();
        prop_assert!(c.amax() < 1e-9 * 5f64.powi(a.dim() as i32));
    }

    #[test]
    fn flipping_sign(k in prop::collection::vec(-2.0..2.0f64, 1..=7)) {
        let spec = CurvatureSpectrum::new(k.clone()).unwrap();
        let neg = CurvatureSpectrum::new(k.iter().map(|x| -x).collect()).unwrap();
        let flipped = spec.flipped();
        for r in 0..=k.len() {
            prop_assert!((flipped.sigma(r) - neg.sigma(r)).abs() < 1e-12 * 3f64.powi(k.len() as i32));
        }
    }

    #[test]
    fn positive_curvatures_give_definite_newton(k in prop::collection::vec(0.01..3.0f64, 2..=6)) {
        // all k_i > 0: every P_r with r < n is positive definite
        let a = SymMatrix::diagonal(&k).unwrap();
        for r in 0..k.len() {
            prop_assert!(min_eigen_pr(&a, r).unwrap() > 0.0);
        }
    }
}

#[test]
fn asymmetric_input_rejected() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
    assert!(SymMatrix::new(m).is_err());
    assert!(SymMatrix::new(DMatrix::zeros(2, 3)).is_err());
}
