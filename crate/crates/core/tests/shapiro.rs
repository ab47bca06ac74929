use sdwave::error::Error;
use sdwave::stats::*;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn rejects_tiny_and_constant_samples() {
    assert!(matches!(
        shapiro_wilk(&[1.0, 2.0]),
        Err(Error::InsufficientSample { min: 3, got: 2 })
    ));
    assert!(shapiro_wilk(&[4.0; 10]).is_err());
    assert!(shapiro_wilk(&vec![0.0; 5001]).is_err());
}

#[test]
fn coefficients_are_unit_norm() {
    for n in [4, 5, 6, 11, 12, 50, 500] {
        let a = shapiro_wilk_coefficients(n);
        let norm: f64 = 2.0 * a.iter().map(|x| x * x).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-3, "n={n}: {norm}");
        assert!(a.windows(2).all(|p| p[0] > p[1]));
    }
}

#[test]
fn normal_scores_look_normal() {
    let norm = Normal::standard();
    let n = 50;
    let x: Vec<f64> = (1..=n)
        .map(|i| norm.inverse_cdf((i as f64 - 0.375) / (n as f64 + 0.25)))
        .collect();
    let (w, p) = shapiro_wilk(&x).unwrap();
    // Royston's coefficients are not proportional to the normal scores,
    // so W stays just below 1; the value agrees with scipy.
    assert!((w - 0.998_474_069_80).abs() < 1e-9, "{w}");
    assert!(p > 0.999);
}

#[test]
fn invariant_under_affine_maps_and_order() {
    let x = [
        0.3, -1.2, 2.2, 0.9, 0.1, -0.4, 1.7, 3.3, -2.0, 0.0, 0.5, 1.1, -0.8,
    ];
    let (w, p) = shapiro_wilk(&x).unwrap();
    let y: Vec<f64> = x.iter().rev().map(|v| 4.0 - 2.5 * v).collect();
    let (w2, p2) = shapiro_wilk(&y).unwrap();
    assert!((w - w2).abs() < 1e-12);
    assert!((p - p2).abs() < 1e-10);
}
