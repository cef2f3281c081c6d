use lamlab::minimal_factorization::*;
use lamlab::rng::stream;
use proptest::prelude::*;
use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

#[test]
fn bijection_is_exhaustive_roundtrip() {
    for n in 2..=6 {
        let all = enumerate_minimal_factorizations(n);
        let mut trees = HashSet::new();
        for f in &all {
            let (lam, t) = goulden_yong_forward(f).unwrap();
            assert!(lam.len() == n - 1);
            assert!(t.canonical_embedding().satisfies_c_delta());
            assert_eq!(&goulden_yong_inverse(&t), f);
            trees.insert(t);
        }
        assert_eq!(trees.len(), all.len());
        for t in enumerate_labelled_trees(n) {
            let f = goulden_yong_inverse(&t);
            assert!(f.verify_minimal().unwrap(), "n = {n}");
            assert_eq!(goulden_yong_forward(&f).unwrap().1, t);
        }
    }
}

fn reflect(n: u64, a: u64, b: u64) -> (u64, u64) {
    let r = |x: u64| (n + 1 - x % n) % n;
    let (x, y) = (r(a), r(b));
    (x.min(y), x.max(y))
}

#[test]
fn reverse_involution_turns_suffixes_into_reflected_prefixes() {
    for n in 2..=5 {
        for f in enumerate_minimal_factorizations(n) {
            let (_, t) = goulden_yong_forward(&f).unwrap();
            let rev = goulden_yong_inverse(&t.reverse_involution());
            for k in 0..n {
                let mut reflected: Vec<(u64, u64)> = f
                    .prefix_lamination(k, true)
                    .chords()
                    .iter()
                    .map(|c| reflect(n as u64, c.a, c.b))
                    .collect();
                reflected.sort_unstable();
                assert_eq!(
                    rev.prefix_lamination(k, false).chord_set(),
                    reflected,
                    "n = {n}, k = {k}, f = {f:?}"
                );
            }
        }
    }
}

#[test]
fn n3_sampling_is_uniform() {
    let mut rng = stream(31, "n3");
    let samples = 100_000;
    let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    for _ in 0..samples {
        *counts.entry(sample_uniform_factorization(3, &mut rng).transpositions).or_default() += 1;
    }
    assert_eq!(counts.len(), 3);
    let p = 1.0 / 3.0;
    let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
    for c in counts.values() {
        assert!((*c as f64 - samples as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn n2_is_always_the_single_transposition() {
    let mut rng = stream(1, "n2");
    for _ in 0..10 {
        assert_eq!(sample_uniform_factorization(2, &mut rng).transpositions, vec![(1, 2)]);
    }
}

#[test]
fn shuffle_with_k_n_permutes_star_children_uniformly() {
    let t = LabelledTree::new(vec![None, Some(1), Some(1), Some(1)]).unwrap().canonical_embedding();
    let mut rng = stream(5, "star");
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    let samples = 60_000;
    for _ in 0..samples {
        *counts.entry(shuffle_tree(&t, 4, &mut rng).labels).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let p = 1.0 / 6.0;
    let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
    for c in counts.values() {
        assert!((*c as f64 - samples as f64 * p).abs() < 4.0 * sigma);
    }
}

#[test]
fn shuffle_operation_one_keeps_subtrees_in_place() {
    // Root 1 with children 3 (leaf) and 2 (which has child 4); K = 1 relabels only.
    let t = LabelledTree::new(vec![None, Some(1), Some(1), Some(2)]).unwrap().canonical_embedding();
    let mut rng = stream(6, "op1");
    for _ in 0..50 {
        let s = shuffle_tree(&t, 1, &mut rng);
        assert_eq!(s.tree, t.tree);
    }
}

#[test]
fn two_vertex_shuffle_is_identity() {
    let t = LabelledTree::new(vec![None, Some(1)]).unwrap().canonical_embedding();
    let mut rng = stream(6, "n2s");
    for k in 0..=2 {
        assert_eq!(shuffle_tree(&t, k, &mut rng), t);
    }
}

#[test]
fn dual_chords_stay_close() {
    let mut rng = stream(77, "dual");
    for n in [10, 100, 1000] {
        for _ in 0..20 {
            let f = sample_uniform_factorization(n, &mut rng);
            let (_, t) = goulden_yong_forward(&f).unwrap();
            let h = t.canonical_embedding().tree.height() as f64;
            let d = max_dual_chord_distance(&f);
            assert!(d <= 2.0 * PI * (h + 1.0) / n as f64, "n = {n}: {d} vs height {h}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_laminations_are_noncrossing(n in 2usize..120, seed in any::<u64>(), frac in 0.0f64..=1.0) {
        let mut rng = stream(seed, "prop");
        let f = sample_uniform_factorization(n, &mut rng);
        let k = ((n - 1) as f64 * frac) as usize;
        for suffix in [false, true] {
            let l = f.prefix_lamination(k, suffix);
            prop_assert!(lamlab::lamination::check_noncrossing(l.den(), l.chords()).is_ok());
            prop_assert_eq!(l.len(), k);
        }
        let p = f.partition_process(k);
        prop_assert!(p.lamination.chords().len() >= p.blocks.iter().map(Vec::len).sum::<usize>());
    }

    #[test]
    fn early_partitions_match_prefixes(n in 4usize..200, seed in any::<u64>()) {
        let mut rng = stream(seed, "early");
        let f = sample_uniform_factorization(n, &mut rng);
        for k in 0..=3 {
            if f.partial_cycles(k).iter().all(|c| c.len() <= 2) {
                prop_assert_eq!(
                    f.partition_process(k).lamination.chord_set(),
                    f.prefix_lamination(k, false).chord_set()
                );
            }
        }
    }

    #[test]
    fn forward_inverse_roundtrip(n in 2usize..300, seed in any::<u64>()) {
        let mut rng = stream(seed, "rt");
        let t = sample_uniform_labelled_tree(n, &mut rng);
        let f = goulden_yong_inverse(&t);
        prop_assert!(f.verify_minimal().unwrap());
        prop_assert_eq!(goulden_yong_forward(&f).unwrap().1, t);
    }

    #[test]
    fn involution_is_involutive(n in 1usize..300, seed in any::<u64>()) {
        let mut rng = stream(seed, "inv");
        let t = sample_uniform_labelled_tree(n, &mut rng);
        let r = t.reverse_involution();
        prop_assert_eq!(r.parent(1), None);
        prop_assert_eq!(r.reverse_involution(), t);
    }
}
