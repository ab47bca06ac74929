use approx::assert_relative_eq;
use proptest::prelude::*;
use sdwave::linalg::Mat2;
use sdwave::model::*;
use std::f64::consts::PI;

fn params() -> ModelParams {
    ModelParams::new(1.0, 0.2).unwrap()
}

#[test]
fn params_must_be_positive() {
    assert!(ModelParams::new(0.0, 1.0).is_err());
    assert!(ModelParams::new(1.0, -0.1).is_err());
    assert!(ModelParams::new(f64::NAN, 1.0).is_err());
}

#[test]
fn dirichlet_values() {
    let a = dirichlet_eigenvalues(1).unwrap();
    assert_relative_eq!(a[0], 9.869_604_401_089_358, max_relative = 1e-15);
    let a = dirichlet_eigenvalues(3).unwrap();
    assert_eq!(a, vec![PI * PI, 4.0 * PI * PI, 9.0 * PI * PI]);
    assert!(dirichlet_eigenvalues(0).is_err());
}

#[test]
fn paper_lambda_values() {
    assert_eq!(paper_lambdas(1).unwrap(), vec![1000.0]);
    assert_eq!(paper_lambdas(2).unwrap(), vec![1000.0, 250.0]);
    assert_eq!(paper_lambdas(10).unwrap()[9], 10.0);
    assert!(paper_lambdas(0).is_err());
}

#[test]
fn spectral_config_validation() {
    assert!(SpectralConfig::new(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
    assert!(SpectralConfig::new(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
    assert!(SpectralConfig::new(vec![1.0], vec![1.0, 2.0]).is_err());
    assert!(SpectralConfig::new(vec![], vec![]).is_err());
    assert!(SpectralConfig::new(vec![-1.0, 2.0], vec![1.0, 1.0]).is_err());
}

#[test]
fn d_denominator_examples() {
    let p = ModelParams::new(1.0, 3.7).unwrap();
    assert_eq!(d_denominator(&p, 1.0, 1.0), 16.0);
    let p = params();
    let (a1, a2) = (PI * PI, 4.0 * PI * PI);
    let expected = 0.2 * (3.0 * PI * PI).powi(2) + 8.0 * 5.0 * PI * PI;
    assert_relative_eq!(d_denominator(&p, a1, a2), expected, max_relative = 1e-14);
    assert!((d_denominator(&p, a1, a2) - 570.12).abs() < 0.01);
}

#[test]
fn q_infinity_examples() {
    let p = params();
    let cfg = SpectralConfig::dirichlet_reference(1).unwrap();
    let w = Window::e_basis(1, 1).unwrap();
    assert_relative_eq!(q_infinity_quadratic_form(&p, &cfg, &w).unwrap(), 250.0);
    let w = Window::f_basis(1, 1).unwrap();
    assert_relative_eq!(
        q_infinity_quadratic_form(&p, &cfg, &w).unwrap(),
        1250.0,
        max_relative = 1e-14
    );
    assert_eq!(
        q_infinity_quadratic_form(&p, &cfg, &Window::zero(1)).unwrap(),
        0.0
    );
    let bad = Window::zero(2);
    assert!(q_infinity_quadratic_form(&p, &cfg, &bad).is_err());
}

#[test]
fn general_form_single_term() {
    let p = ModelParams::new(1.3, 0.7).unwrap();
    let cfg = SpectralConfig::new(vec![2.5], vec![40.0]).unwrap();
    let w = Window::e_basis(1, 1).unwrap();
    let v = q_infinity_general_quadratic_form(&p, &cfg, &[vec![40.0]], &w).unwrap();
    assert_relative_eq!(v, 40.0 / (4.0 * 1.3), max_relative = 1e-14);
    let z = q_infinity_general_quadratic_form(&p, &cfg, &[vec![40.0]], &Window::zero(1)).unwrap();
    assert_eq!(z, 0.0);
}

#[test]
fn general_form_rejects_asymmetric() {
    let p = params();
    let cfg = SpectralConfig::dirichlet_reference(2).unwrap();
    let q = vec![vec![1.0, 0.5], vec![0.4, 1.0]];
    assert!(q_infinity_general_quadratic_form(&p, &cfg, &q, &Window::zero(2)).is_err());
}

#[test]
fn window_basis_and_conversion() {
    let cfg = SpectralConfig::dirichlet_reference(3).unwrap();
    let w = Window::f_basis(3, 2).unwrap();
    let l2 = w.z1_l2_coords(&cfg).unwrap();
    assert_relative_eq!(l2[1], 1.0 / (2.0 * PI), max_relative = 1e-15);
    let back = Window::from_l2(&cfg, &l2, vec![0.0; 3]).unwrap();
    assert_relative_eq!(back.z1()[1], 1.0, max_relative = 1e-15);
    assert!(Window::f_basis(3, 4).is_err());
    assert!(Window::e_basis(3, 0).is_err());
    assert!(w.z1_nonzero() && !w.z2_nonzero());
    assert_eq!(Window::basis_pair(3, 1, 3).unwrap().support(), vec![0, 2]);
}

#[test]
fn stationary_covariance_example() {
    let c = stationary_mode_covariance(&params(), PI * PI, 1000.0);
    assert_relative_eq!(c.get(0, 0), 1000.0 / (0.8 * PI * PI), max_relative = 1e-15);
    assert!((c.get(0, 0) - 126.65).abs() < 0.01);
    assert_eq!(c.get(1, 1), 250.0);
    assert_eq!(c.get(0, 1), 0.0);
    assert_eq!(c.get(1, 0), 0.0);
}

fn window_strategy(n: usize) -> impl Strategy<Value = Window> {
    (
        proptest::collection::vec(-5.0f64..5.0, n),
        proptest::collection::vec(-5.0f64..5.0, n),
    )
        .prop_map(|(z1, z2)| Window::new(z1, z2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn general_form_matches_diagonal(w in window_strategy(10), a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let p = ModelParams::new(a, b).unwrap();
        let cfg = SpectralConfig::dirichlet_reference(10).unwrap();
        let q: Vec<Vec<f64>> = (0..10)
            .map(|i| (0..10).map(|j| if i == j { cfg.lambdas()[i] } else { 0.0 }).collect())
            .collect();
        let diag = q_infinity_quadratic_form(&p, &cfg, &w).unwrap();
        let general = q_infinity_general_quadratic_form(&p, &cfg, &q, &w).unwrap();
        prop_assert!((diag - general).abs() <= 1e-12 * diag.abs().max(1e-300));
    }

    #[test]
    fn quadratic_form_positive(w in window_strategy(6), a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let p = ModelParams::new(a, b).unwrap();
        let cfg = SpectralConfig::dirichlet_reference(6).unwrap();
        let v = q_infinity_quadratic_form(&p, &cfg, &w).unwrap();
        if w.is_zero() { prop_assert_eq!(v, 0.0); } else { prop_assert!(v > 0.0); }
    }

    #[test]
    fn lyapunov_residual(a in 0.1f64..10.0, b in 0.1f64..10.0, al in 0.1f64..10.0, la in 0.1f64..10.0) {
        let p = ModelParams::new(a, b).unwrap();
        let m = p.mode_drift(al);
        let cov = stationary_mode_covariance(&p, al, la);
        let r = m * cov + cov * m.transpose() + Mat2::diag(0.0, la);
        prop_assert!(r.max_abs() < 1e-10);
    }

    #[test]
    fn d_denominator_symmetry(a in 0.1f64..10.0, b in 0.1f64..10.0, x in 0.1f64..1e4, y in 0.1f64..1e4) {
        let p = ModelParams::new(a, b).unwrap();
        prop_assert_eq!(d_denominator(&p, x, y), d_denominator(&p, y, x));
        prop_assert_eq!(d_denominator(&p, x, x), 16.0 * a * a * x);
        prop_assert!(d_denominator(&p, x, y) > 0.0);
    }
}
