use grainflow_core::metrics::{auc_via_ks_area, max_ks2, roc_auc, ScoredSample};
use proptest::prelude::*;

/// Probability that a random positive outscores a random negative, ties
/// counted as half, by comparing every pair.
fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Largest gap between the class CDFs over every candidate threshold.
fn brute_force_ks(scores: &[f64], labels: &[bool]) -> f64 {
    let n1 = labels.iter().filter(|&&l| l).count() as f64;
    let n0 = labels.len() as f64 - n1;
    let mut best = 0.0f64;
    for &t in scores {
        let c1 = scores
            .iter()
            .zip(labels)
            .filter(|(s, l)| **l && **s <= t)
            .count() as f64;
        let c0 = scores
            .iter()
            .zip(labels)
            .filter(|(s, l)| !**l && **s <= t)
            .count() as f64;
        best = best.max((c1 / n1 - c0 / n0).abs());
    }
    best
}

/// Scores and labels with both classes present. `levels` > 0 rounds scores
/// onto that many values to force ties.
fn fixture(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2..=max_n, 0u32..4).prop_flat_map(|(n, ties)| {
        let levels = [0.0, 3.0, 10.0, 40.0][ties as usize];
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(any::<bool>(), n - 2),
            Just(levels),
        )
            .prop_map(|(mut s, mut l, levels)| {
                if levels > 0.0 {
                    for v in &mut s {
                        *v = (*v * levels / 10.0).round();
                    }
                }
                l.push(true);
                l.push(false);
                (s, l)
            })
    })
}

fn tie_free(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    fixture(max_n).prop_map(|(s, l)| {
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(a.cmp(&b)));
        let mut distinct = vec![0.0; s.len()];
        for (rank, i) in order.into_iter().enumerate() {
            distinct[i] = rank as f64 + s[i] * 1e-3;
        }
        (distinct, l)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn auc_matches_pair_counting((s, l) in fixture(200)) {
        let oracle = pair_count_auc(&s, &l);
        let got = roc_auc(&ScoredSample::new(s, l).unwrap());
        prop_assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn ks_matches_threshold_enumeration((s, l) in fixture(200)) {
        let oracle = brute_force_ks(&s, &l);
        let got = max_ks2(&ScoredSample::new(s, l).unwrap());
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn ks_area_equals_auc_without_ties((s, l) in tie_free(200)) {
        let sample = ScoredSample::new(s, l).unwrap();
        prop_assert!((auc_via_ks_area(&sample) - roc_auc(&sample)).abs() < 1e-9);
    }

    #[test]
    fn ks_area_equals_auc_with_ties((s, l) in fixture(120)) {
        let sample = ScoredSample::new(s, l).unwrap();
        prop_assert!((auc_via_ks_area(&sample) - roc_auc(&sample)).abs() < 1e-9);
    }

    #[test]
    fn invariant_under_increasing_transform((s, l) in fixture(100)) {
        let a = ScoredSample::new(s.clone(), l.clone()).unwrap();
        let b = ScoredSample::new(s.iter().map(|v| (v * 0.7).exp() + 3.0).collect(), l).unwrap();
        prop_assert!((roc_auc(&a) - roc_auc(&b)).abs() < 1e-12);
        prop_assert_eq!(max_ks2(&a), max_ks2(&b));
    }

    #[test]
    fn invariant_under_permutation((s, l) in fixture(100), rot in 0usize..100) {
        let r = rot % s.len();
        let mut s2 = s.clone();
        let mut l2 = l.clone();
        s2.rotate_left(r);
        l2.rotate_left(r);
        s2.reverse();
        l2.reverse();
        let a = ScoredSample::new(s, l).unwrap();
        let b = ScoredSample::new(s2, l2).unwrap();
        prop_assert_eq!(roc_auc(&a), roc_auc(&b));
        prop_assert_eq!(max_ks2(&a), max_ks2(&b));
    }

    #[test]
    fn flipping_labels_mirrors_auc((s, l) in fixture(100)) {
        let a = ScoredSample::new(s.clone(), l.clone()).unwrap();
        let b = ScoredSample::new(s, l.iter().map(|x| !x).collect()).unwrap();
        prop_assert!((roc_auc(&a) + roc_auc(&b) - 1.0).abs() < 1e-12);
        prop_assert_eq!(max_ks2(&a), max_ks2(&b));
    }

    #[test]
    fn ranges((s, l) in fixture(100)) {
        let a = ScoredSample::new(s, l).unwrap();
        prop_assert!((0.0..=1.0).contains(&roc_auc(&a)));
        prop_assert!((0.0..=1.0).contains(&max_ks2(&a)));
    }
}

#[test]
fn worked_examples() {
    let s = |scores: &[f64], labels: &[bool]| {
        ScoredSample::new(scores.to_vec(), labels.to_vec()).unwrap()
    };
    let perfect = s(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]);
    assert_eq!(roc_auc(&perfect), 1.0);
    assert_eq!(max_ks2(&perfect), 1.0);
    let mixed = s(&[0.8, 0.4, 0.6, 0.2], &[true, true, false, false]);
    assert_eq!(roc_auc(&mixed), 0.75);
    assert_eq!(max_ks2(&mixed), 0.5);
    let flat = s(&[0.5; 6], &[true, false, true, false, false, true]);
    assert_eq!(roc_auc(&flat), 0.5);
    assert_eq!(max_ks2(&flat), 0.0);
}

#[test]
fn undefined_inputs_are_rejected() {
    assert!(ScoredSample::new(vec![0.1, 0.2], vec![true, true]).is_err());
    assert!(ScoredSample::new(vec![0.1, f64::NAN], vec![true, false]).is_err());
    assert!(ScoredSample::new(vec![0.1], vec![true, false]).is_err());
}
