use proptest::prelude::*;
use sdwave::output::*;

proptest! {
    #[test]
    fn roundtrips(x in proptest::num::f64::ANY) {
        let s = fmt_f64(x);
        let back: f64 = s.parse().unwrap();
        if x.is_nan() {
            prop_assert!(back.is_nan());
        } else {
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}

#[test]
fn missing_is_empty() {
    assert_eq!(fmt_opt(None), "");
    assert_eq!(fmt_opt(Some(0.5)), "5.0000000000000000e-1");
}
