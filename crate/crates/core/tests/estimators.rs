use approx::assert_relative_eq;
use proptest::prelude::*;
use sdwave::error::Error;
use sdwave::estimators::*;
use sdwave::functionals::*;
use sdwave::model::*;

fn setup() -> (ModelParams, SpectralConfig) {
    (
        ModelParams::new(1.0, 0.2).unwrap(),
        SpectralConfig::dirichlet_reference(10).unwrap(),
    )
}

/// Ergodic limits of the three averages for `w`.
fn limits(p: &ModelParams, cfg: &SpectralConfig, w: &Window) -> Snapshot {
    let q1 = cfg.q_form(w.z1()).unwrap();
    let q2 = cfg.q_form(w.z2()).unwrap();
    let j1 = q1 / (4.0 * p.a() * p.b());
    let j2 = q2 / (4.0 * p.a());
    Snapshot {
        t: 1.0,
        j1: Some(j1),
        j2: Some(j2),
        j_t: Some(j1 + j2),
    }
}

#[test]
fn fixed_points() {
    let (p, cfg) = setup();
    let w = Window::new(
        (0..10).map(|i| (i as f64 * 0.7).sin()).collect(),
        (0..10).map(|i| (i as f64 * 1.3).cos()).collect(),
    )
    .unwrap();
    let s = limits(&p, &cfg, &w);
    for kind in [
        EstimatorKind::AbarGeneral,
        EstimatorKind::BbarGeneral,
        EstimatorKind::AbarZ2,
        EstimatorKind::BbarZ1Z2,
    ] {
        let spec = EstimatorSpec::new(10, kind, WindowSpec::Explicit(w.clone())).unwrap();
        let got = spec.evaluate(&p, &cfg, &s).unwrap();
        assert_relative_eq!(got, kind.target(&p), max_relative = 1e-14);
    }
    for spec in [
        EstimatorSpec::abar_k(10, 3).unwrap(),
        EstimatorSpec::bbar_jk(10, 2, 7).unwrap(),
        EstimatorSpec::bbar_jk(10, 4, 4).unwrap(),
        EstimatorSpec::bbar_fj_a(10, 9).unwrap(),
    ] {
        let s = limits(&p, &cfg, spec.window());
        let got = spec.evaluate(&p, &cfg, &s).unwrap();
        assert_relative_eq!(got, spec.kind.target(&p), max_relative = 1e-14);
    }
}

#[test]
fn hand_values() {
    let (p, cfg) = setup();
    let w = Window::e_basis(10, 1).unwrap();
    let v = abar_general(250.15, &w, &cfg, p.b()).unwrap();
    assert_relative_eq!(v, 1000.0 / (4.0 * 250.15), max_relative = 1e-15);
    assert!((v - 0.99940).abs() < 5e-6);
    assert_relative_eq!(abar_k(250.15, 1, &cfg).unwrap(), v, max_relative = 1e-15);
    // Reported value 0.1901 inverted through the formula.
    let j1 = 1000.0 / (4.0 * 0.1901);
    let f1 = Window::f_basis(10, 1).unwrap();
    assert_relative_eq!(
        bbar_z1_a(j1, f1.z1(), &cfg, 1.0).unwrap(),
        0.1901,
        max_relative = 1e-14
    );
}

#[test]
fn degenerate_inputs() {
    let (p, cfg) = setup();
    let w = Window::e_basis(10, 1).unwrap();
    assert!(matches!(
        abar_general(0.0, &w, &cfg, p.b()),
        Err(Error::DegenerateObservation(_))
    ));
    assert!(matches!(
        abar_general(1.0, &Window::zero(10), &cfg, p.b()),
        Err(Error::InvalidWindow(_))
    ));
    let both = Window::basis_pair(10, 1, 1).unwrap();
    let q2 = cfg.q_form(both.z2()).unwrap();
    assert!(matches!(
        bbar_general(q2 / 4.0, &both, &cfg, 1.0),
        Err(Error::UnstableEstimate(_))
    ));
    assert!(bbar_general(1.0, &w, &cfg, 1.0).is_err());
    assert!(abar_z2(-1.0, w.z2(), &cfg).is_err());
    assert!(bbar_z1z2(0.0, 1.0, both.z1(), both.z2(), &cfg).is_err());
    assert!(bbar_z1_a(f64::NAN, both.z1(), &cfg, 1.0).is_err());
    assert!(abar_k(1.0, 11, &cfg).is_err());
    assert!(EstimatorSpec::abar_k(10, 11).is_err());
    assert!(EstimatorSpec::new(10, EstimatorKind::BbarZ1Z2, WindowSpec::Explicit(w)).is_err());
}

#[test]
fn bbar_general_on_position_window_is_strategy_two() {
    let (_, cfg) = setup();
    let w = Window::f_basis(10, 3).unwrap();
    let j = 1234.5;
    assert_eq!(
        bbar_general(j, &w, &cfg, 1.3).unwrap(),
        bbar_z1_a(j, w.z1(), &cfg, 1.3).unwrap()
    );
}

#[test]
fn abar_z2_halves_when_j2_doubles() {
    let (_, cfg) = setup();
    let z2 = Window::e_basis(10, 2).unwrap();
    let a = abar_z2(10.0, z2.z2(), &cfg).unwrap();
    assert_eq!(abar_z2(20.0, z2.z2(), &cfg).unwrap(), a / 2.0);
    let f = Window::f_basis(10, 2).unwrap();
    let b = bbar_z1_a(10.0, f.z1(), &cfg, 1.0).unwrap();
    assert_eq!(bbar_z1_a(10.0, f.z1(), &cfg, 2.0).unwrap(), b / 2.0);
}

#[test]
fn time_series_marks_missing() {
    let (p, cfg) = setup();
    let spec = EstimatorSpec::abar_k(10, 1).unwrap();
    let good = limits(&p, &cfg, spec.window());
    let bad = Snapshot {
        j2: Some(0.0),
        ..good
    };
    let series = estimator_time_series(&[good, bad, good], &spec, &p, &cfg);
    assert_eq!(series.len(), 3);
    assert_eq!(series[1].1, None);
    assert_relative_eq!(series[2].1.unwrap(), 1.0, max_relative = 1e-15);
    assert!(estimator_time_series(&[], &spec, &p, &cfg).is_empty());
    let mut buf = Vec::new();
    write_time_series(&mut buf, &series, &spec.label()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,estimate,kind");
    assert!(lines[2].ends_with(",,abar_k_k1"));
}

#[test]
fn kinds_parse_back() {
    for k in EstimatorKind::ALL {
        assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
    }
    assert!("abar".parse::<EstimatorKind>().is_err());
}

proptest! {
    #[test]
    fn specializations_agree(
        j1 in 1e-3f64..1e4, j2 in 1e-3f64..1e4, j in 1usize..=10, k in 1usize..=10, a in 0.1f64..10.0
    ) {
        let (_, cfg) = setup();
        let e = Window::e_basis(10, k).unwrap();
        let x = abar_z2(j2, e.z2(), &cfg).unwrap();
        let y = abar_k(j2, k, &cfg).unwrap();
        prop_assert!((x - y).abs() <= 1e-14 * y.abs());
        let w = Window::basis_pair(10, j, k).unwrap();
        let x = bbar_z1z2(j1, j2, w.z1(), w.z2(), &cfg).unwrap();
        let y = bbar_jk(j1, j2, j, k, &cfg).unwrap();
        prop_assert!((x - y).abs() <= 1e-14 * y.abs());
        let f = Window::f_basis(10, j).unwrap();
        let x = bbar_general(j1, &f, &cfg, a).unwrap();
        let y = bbar_z1_a(j1, f.z1(), &cfg, a).unwrap();
        prop_assert!((x - y).abs() <= 1e-14 * y.abs());
    }

    #[test]
    fn window_scaling_invariance(
        c1 in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        c2 in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        seed in 0u32..1000,
    ) {
        let (p, cfg) = setup();
        let s = seed as f64;
        let w = Window::new(
            (0..10).map(|i| ((i as f64 + s) * 0.37).sin()).collect(),
            (0..10).map(|i| ((i as f64 - s) * 0.91).cos()).collect(),
        ).unwrap();
        // Observed averages scale with the squared window scale.
        let obs = Snapshot { t: 1.0, j1: Some(3.0 + s), j2: Some(7.0), j_t: Some(50.0 + s) };
        let base = bbar_z1z2(obs.j1.unwrap(), obs.j2.unwrap(), w.z1(), w.z2(), &cfg).unwrap();
        let ws = w.scaled(c1, c2);
        let scaled = bbar_z1z2(obs.j1.unwrap() * c1 * c1, obs.j2.unwrap() * c2 * c2, ws.z1(), ws.z2(), &cfg).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-12 * base.abs());
        let c = c1;
        let wc = w.scaled(c, c);
        for kind in [EstimatorKind::AbarGeneral, EstimatorKind::BbarGeneral, EstimatorKind::AbarZ2, EstimatorKind::BbarZ1A] {
            let spec = EstimatorSpec::new(10, kind, WindowSpec::Explicit(w.clone())).unwrap();
            let spec_c = EstimatorSpec::new(10, kind, WindowSpec::Explicit(wc.clone())).unwrap();
            let obs_c = Snapshot {
                t: 1.0,
                j1: obs.j1.map(|x| x * c * c),
                j2: obs.j2.map(|x| x * c * c),
                j_t: obs.j_t.map(|x| x * c * c),
            };
            match (spec.evaluate(&p, &cfg, &obs), spec_c.evaluate(&p, &cfg, &obs_c)) {
                (Ok(x), Ok(y)) => prop_assert!((x - y).abs() <= 1e-12 * x.abs()),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "scaling changed success of {kind}"),
            }
        }
    }
}
