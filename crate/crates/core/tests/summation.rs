use proptest::prelude::*;
use sdwave::summation::*;

#[test]
fn cancellation_is_exact() {
    let s: ExactSum = [1e100, 1.0, -1e100, 1e-100].into_iter().collect();
    assert_eq!(s.value(), 1.0);
    assert_eq!(exact_sum(&[0.1; 10]), 1.0);
}

#[test]
fn empty_is_zero() {
    assert_eq!(ExactSum::new().value(), 0.0);
    assert!(ExactSum::new().is_empty());
}

#[test]
fn non_finite_propagates() {
    let s: ExactSum = [1.0, f64::INFINITY, 2.0].into_iter().collect();
    assert_eq!(s.value(), f64::INFINITY);
    let s: ExactSum = [f64::MAX, f64::MAX].into_iter().collect();
    assert_eq!(s.value(), f64::INFINITY);
}

#[test]
fn fixed_sum_basics() {
    let mut s = FixedSum::new();
    assert!(s.is_empty());
    assert_eq!(s.value(), 0.0);
    for x in [1e100, 1.0, -1e100, 1e-100, 5e-324, -5e-324] {
        s.add(x);
    }
    assert_eq!(s.value(), 1.0);
    let mut t = FixedSum::new();
    t.add(-3.5);
    t.add(1.25);
    assert_eq!(t.value(), -2.25);
    t.add(f64::NEG_INFINITY);
    assert_eq!(t.value(), f64::NEG_INFINITY);
    let mut big = FixedSum::new();
    big.add(f64::MAX);
    big.add(f64::MAX);
    assert_eq!(big.value(), f64::INFINITY);
    big.add(-f64::MAX);
    assert_eq!(big.value(), f64::MAX);
}

proptest! {
    #[test]
    fn fixed_sum_matches_exact_sum(
        xs in proptest::collection::vec(
            prop_oneof![-1e6f64..1e6, -1e-300f64..1e-300, -1e300f64..1e300],
            0..200,
        ),
        cut in 0usize..200,
    ) {
        let whole = exact_sum(&xs);
        let mut fixed = FixedSum::new();
        xs.iter().for_each(|&x| fixed.add(x));
        prop_assert_eq!(fixed.value().to_bits(), whole.to_bits());
        let cut = cut.min(xs.len());
        let mut left = FixedSum::new();
        xs[..cut].iter().for_each(|&x| left.add(x));
        let mut right = FixedSum::new();
        xs[cut..].iter().for_each(|&x| right.add(x));
        left.merge(&right);
        prop_assert_eq!(left.value().to_bits(), whole.to_bits());
    }

    #[test]
    fn order_independent(mut xs in proptest::collection::vec(-1e6f64..1e6, 0..200), cut in 0usize..200) {
        let whole = exact_sum(&xs);
        let cut = cut.min(xs.len());
        let mut left: ExactSum = xs[..cut].iter().copied().collect();
        let right: ExactSum = xs[cut..].iter().copied().collect();
        left.merge(&right);
        prop_assert_eq!(left.value().to_bits(), whole.to_bits());
        xs.reverse();
        prop_assert_eq!(exact_sum(&xs).to_bits(), whole.to_bits());
    }
}
