use proptest::prelude::*;
use sdwave::stats::*;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn qq_of_normal_scores_is_diagonal() {
    let norm = Normal::standard();
    let n = 40;
    let x: Vec<f64> = (1..=n)
        .rev()
        .map(|i| norm.inverse_cdf(blom_position(i, n)))
        .collect();
    for (t, e) in qq_points(&x).unwrap() {
        assert!((t - e).abs() < 1e-12);
    }
}

#[test]
fn qq_single_point_is_median() {
    let pts = qq_points(&[3.5]).unwrap();
    assert_eq!(pts.len(), 1);
    assert!(pts[0].0.abs() < 1e-12);
    assert_eq!(pts[0].1, 3.5);
    assert!(qq_points(&[]).is_err());
}

#[test]
fn moments_and_quantiles() {
    let x = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(mean(&x), Some(2.5));
    assert_eq!(sample_variance(&x), Some(5.0 / 3.0));
    assert_eq!(sample_variance(&[1.0]), None);
    assert_eq!(quantile(&x, 0.75), Some(3.25));
    assert_eq!(quantile(&x, 1.0), Some(4.0));
    assert_eq!(quantile(&[7.0], 0.75), Some(7.0));
    assert_eq!(quantile(&[], 0.5), None);
}

proptest! {
    #[test]
    fn qq_affine_equivariance(
        x in proptest::collection::vec(-100.0f64..100.0, 1..60),
        c in 0.1f64..10.0,
        d in -50.0f64..50.0,
    ) {
        let base = qq_points(&x).unwrap();
        let y: Vec<f64> = x.iter().map(|v| c * v + d).collect();
        let moved = qq_points(&y).unwrap();
        for ((t0, e0), (t1, e1)) in base.iter().zip(&moved) {
            prop_assert_eq!(t0, t1);
            prop_assert!((c * e0 + d - e1).abs() <= 1e-9 * (1.0 + e1.abs()));
        }
    }

    #[test]
    fn p75_never_exceeds_max(x in proptest::collection::vec(0.0f64..10.0, 1..80)) {
        let m = x.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!(quantile(&x, 0.75).unwrap() <= m);
    }
}
