use sdwave::linalg::Mat2;

#[test]
fn inverse_roundtrip() {
    let m = Mat2::new(0.0, 1.0, -3.0, -2.0);
    let p = m * m.inverse().unwrap();
    assert!((p - Mat2::IDENTITY).max_abs() < 1e-15);
    assert!(Mat2::ZERO.inverse().is_none());
}

#[test]
fn cholesky_reconstructs() {
    let s = Mat2::new(4.0, 1.0, 1.0, 3.0);
    let l = s.cholesky_psd();
    assert_eq!(l.get(0, 1), 0.0);
    assert!((l * l.transpose() - s).max_abs() < 1e-14);
}

#[test]
fn cholesky_clamps_tiny_negative_pivot() {
    let s = Mat2::new(1.0, 1.0, 1.0, 1.0 - 1e-17);
    let l = s.cholesky_psd();
    assert!(l.get(1, 1) >= 0.0 && l.get(1, 1).is_finite());
    let z = Mat2::new(-1e-30, 0.0, 0.0, 2.0).cholesky_psd();
    assert_eq!(z.get(0, 0), 0.0);
    assert!((z.get(1, 1) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn spectral_radius_cases() {
    assert!((Mat2::diag(0.5, -0.25).spectral_radius() - 0.5).abs() < 1e-15);
    // rotation by 90° scaled by 0.9
    let r = Mat2::new(0.0, -0.9, 0.9, 0.0);
    assert!((r.spectral_radius() - 0.9).abs() < 1e-15);
}
