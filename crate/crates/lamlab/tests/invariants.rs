use lamlab::fragmentation::sample_tree_cut_process;
use lamlab::lamination::{check_noncrossing, Lamination};
use lamlab::levy::vervaat_transform;
use lamlab::plane_tree::{LatticePath, PlaneTree};
use lamlab::rng::stream;
use proptest::prelude::*;

/// Offspring counts of a plane tree read from arbitrary steps via the cycle lemma.
fn tree_from(raw: &[u8]) -> PlaneTree {
    let m = raw.len();
    let mut steps: Vec<i64> = raw.iter().map(|x| (*x % 4) as i64 - 1).collect();
    // Force the sum to -1 by adjusting steps from the end.
    let mut sum: i64 = steps.iter().sum();
    let mut i = m;
    while sum != -1 {
        i = if i == 0 { m - 1 } else { i - 1 };
        if sum > -1 && steps[i] > -1 {
            steps[i] -= 1;
            sum -= 1;
        } else if sum < -1 {
            steps[i] += 1;
            sum += 1;
        }
    }
    let k = lamlab::gw_sampler::cycle_lemma_shift(&steps);
    let offspring: Vec<usize> = (0..m).map(|j| (steps[(k + j) % m] + 1) as usize).collect();
    PlaneTree::from_offspring(&offspring).unwrap()
}

proptest! {
    #[test]
    fn encodings_roundtrip(raw in prop::collection::vec(any::<u8>(), 1..200)) {
        let t = tree_from(&raw);
        prop_assert_eq!(PlaneTree::from_lukasiewicz(&t.lukasiewicz()).unwrap(), t.clone());
        prop_assert_eq!(PlaneTree::from_json(&t.to_json()).unwrap(), t.clone());
        let c = t.contour_heights();
        prop_assert_eq!(c.len(), 2 * t.n() + 1);
        prop_assert!(c[2 * t.n() - 2..].iter().all(|h| *h == 0));
        prop_assert_eq!(*c.iter().max().unwrap() as usize, t.height());
    }

    #[test]
    fn tree_laminations_are_noncrossing(raw in prop::collection::vec(any::<u8>(), 2..300)) {
        let t = tree_from(&raw);
        let luka = Lamination::from_lukasiewicz(&t.lukasiewicz()).unwrap();
        prop_assert!(check_noncrossing(luka.den(), luka.chords()).is_ok());
        let contour = Lamination::from_tree_contour(&t);
        prop_assert!(check_noncrossing(contour.den(), contour.chords()).is_ok());
        prop_assert_eq!(contour.face_masses().total(), contour.den());
    }

    #[test]
    fn vervaat_is_idempotent_on_its_output(steps in prop::collection::vec(-3i64..4, 1..60)) {
        let mut vals = vec![0i64];
        for x in &steps {
            vals.push(vals.last().unwrap() + x);
        }
        *vals.last_mut().unwrap() = 0;
        let p = LatticePath::from_ints(&vals);
        if let Ok(e) = vervaat_transform(&p) {
            prop_assert!(e.values.iter().all(|v| *v >= 0.0));
            prop_assert_eq!(vervaat_transform(&e).unwrap(), e);
        }
    }

    #[test]
    fn cut_laminations_nest_and_match_masses(raw in prop::collection::vec(any::<u8>(), 2..120), seed in any::<u64>()) {
        let t = tree_from(&raw);
        prop_assume!(t.n() >= 2);
        let mut rng = stream(seed, "prop-cut");
        let cp = sample_tree_cut_process(&t, 0.3, 3.0, &mut rng).unwrap();
        let times = [0.0, 0.5, 1.0, 2.0, 3.0];
        let laws = cp.lamination_process(&times);
        let trace = cp.fragmentation_masses(&t, &times).unwrap();
        for w in laws.windows(2) {
            prop_assert!(w[0].is_subset_of(&w[1]));
        }
        for (l, m) in laws.iter().zip(&trace.mass_sequences) {
            prop_assert_eq!(&l.face_masses(), m);
        }
    }
}
