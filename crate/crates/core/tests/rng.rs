use rand::Rng;
use sdwave::rng::*;
use std::collections::HashSet;

#[test]
fn replication_seeds_distinct() {
    let seeds: HashSet<u64> = (0..10_000).map(|r| replication_seed(42, r)).collect();
    assert_eq!(seeds.len(), 10_000);
}

#[test]
fn streams_differ_and_repeat() {
    let a: u64 = mode_rng(7, 0).random();
    let b: u64 = mode_rng(7, 1).random();
    let c: u64 = mode_aux_rng(7, 0).random();
    assert_ne!(a, b);
    assert_ne!(a, c);
    assert_eq!(a, mode_rng(7, 0).random::<u64>());
}
