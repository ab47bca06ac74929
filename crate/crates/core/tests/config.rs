use sdwave::cli::*;
use sdwave::error::{Error, Result};
use sdwave::functionals::*;
use sdwave::model::*;
use sdwave::simulator::*;

const MINIMAL: &str = "a = 1.0\nb = 0.2\nn_modes = 3\nt_horizon = 10.0\ndt = 0.01\n";

fn key_of(r: Result<RunConfig>) -> String {
    match r {
        Err(Error::Config { key, .. }) => key,
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn preset_roundtrips_through_toml() {
    let preset = ConfigFile::reference_preset();
    let text = preset.to_toml().unwrap();
    let back: ConfigFile = toml::from_str(&text).unwrap();
    assert_eq!(back, preset);
    assert!(text.contains("alpha_rule = \"dirichlet_1d\""));
    let rc = parse_config(&text).unwrap();
    assert_eq!(rc.cfg.n_modes(), 10);
    assert_eq!(rc.estimators.len(), 6);
    assert_eq!(rc.observed_modes(), vec![0, 9]);
    assert_eq!(rc.scheme, Scheme::Euler);
}

#[test]
fn defaults_apply() {
    let rc = parse_config(MINIMAL).unwrap();
    assert_eq!(rc.stride, 10_000);
    assert_eq!(rc.quadrature, Quadrature::LeftRiemann);
    assert_eq!(rc.scheme, Scheme::Euler);
    assert_eq!(rc.x0, InitialCondition::ones(3));
    assert!(rc.estimators.is_empty());
}

#[test]
fn errors_name_the_key() {
    assert_eq!(
        key_of(parse_config(&MINIMAL.replace("dt = 0.01", "dt = 10.0"))),
        "dt"
    );
    assert_eq!(
        key_of(parse_config(&format!("{MINIMAL}bogus = 1\n"))),
        "bogus"
    );
    assert_eq!(
        key_of(parse_config(&MINIMAL.replace("b = 0.2", "b = \"x\""))),
        "b"
    );
    assert_eq!(key_of(parse_config(&MINIMAL.replace("a = 1.0\n", ""))), "a");
    let bad_mode = format!("{MINIMAL}[[estimators]]\nkind = \"abar_k\"\nk = 4\n");
    assert_eq!(key_of(parse_config(&bad_mode)), "estimators[0].k");
    let bad_kind = format!("{MINIMAL}[[estimators]]\nkind = \"nope\"\nk = 1\n");
    assert_eq!(key_of(parse_config(&bad_kind)), "estimators[0].kind");
    let extra = format!("{MINIMAL}[[estimators]]\nkind = \"abar_k\"\nk = 1\nq = 2\n");
    assert_eq!(key_of(parse_config(&extra)), "estimators[0].q");
    let dup = format!("{MINIMAL}[[estimators]]\nkind = \"abar_k\"\nk = 1\n[[estimators]]\nkind = \"abar_k\"\nk = 1\n");
    assert_eq!(key_of(parse_config(&dup)), "estimators[1]");
    let scheme = MINIMAL.to_string() + "scheme = \"rk4\"\n";
    assert_eq!(key_of(parse_config(&scheme)), "scheme");
}

#[test]
fn explicit_windows() {
    let text = format!(
        "{MINIMAL}[[estimators]]\nkind = \"abar_z2\"\nz2 = [0.7, 0.7, 0.0]\nname = \"mixed\"\n"
    );
    let rc = parse_config(&text).unwrap();
    assert_eq!(rc.estimators[0].label(), "mixed");
    assert_eq!(rc.estimators[0].window().z1(), &[0.0; 3]);
    let short = format!("{MINIMAL}[[estimators]]\nkind = \"abar_z2\"\nz2 = [1.0]\n");
    assert_eq!(key_of(parse_config(&short)), "estimators[0].z2");
}

#[test]
fn explicit_spectra() {
    let text =
        "a = 1.0\nb = 1.0\nalphas = [1.0, 4.0]\nlambdas = [1.0, 1.0]\nt_horizon = 1.0\ndt = 0.1\n";
    let rc = parse_config(text).unwrap();
    assert_eq!(rc.cfg.alphas(), &[1.0, 4.0]);
    let mismatch = text.replace("lambdas = [1.0, 1.0]", "lambdas = [1.0]");
    assert_eq!(key_of(parse_config(&mismatch)), "lambdas");
}
