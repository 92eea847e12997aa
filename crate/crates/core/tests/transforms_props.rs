use std::collections::BTreeMap;
use std::sync::Arc;

use grainflow_core::histogram::{to_histogram, CategoryHistogram, CategoryVocabulary, OTHER};
use grainflow_core::logistic::SolverConfig;
use grainflow_core::metrics::{roc_auc, ScoredSample};
use grainflow_core::relational::{CategoryCounts, DecisionTable, Entity, GrainRow, GrainTable};
use grainflow_core::transforms::{
    apply_mode, apply_rgt, apply_wgt, fit_rgt, split_transform_sample, FittedTransform, RgtOutput,
    WeightTable,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CATS: [&str; 5] = ["BSc", "MBA", "MSc", "PhD", "Zzz"];

fn vocab() -> Arc<CategoryVocabulary> {
    Arc::new(CategoryVocabulary::new(
        "edu",
        ["BSc", "MBA", "MSc", "PhD"].map(String::from),
    ))
}

fn weights() -> WeightTable {
    WeightTable::new(
        "edu",
        [("BSc", 1.0), ("MBA", 2.0), ("MSc", 3.0), ("PhD", 4.0)]
            .into_iter()
            .map(|(c, w)| (c.to_string(), w))
            .collect(),
    )
    .unwrap()
}

/// Counts over the four named categories plus an unseen one.
fn counts() -> impl Strategy<Value = CategoryCounts> {
    prop::collection::vec(0u64..20, 5).prop_map(|v| {
        CATS.iter()
            .zip(v)
            .filter(|(_, n)| *n > 0)
            .map(|(c, n)| (c.to_string(), n))
            .collect()
    })
}

fn rows() -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((0u8..6, 0u8..5), 0..60)
}

fn grain(rows: &[(u8, u8)]) -> GrainTable {
    let rows = rows
        .iter()
        .map(|&(e, c)| GrainRow {
            entity_id: format!("s{e}"),
            values: vec![CATS[c as usize].to_string()],
        })
        .collect();
    GrainTable::new("students", vec!["edu".into()], rows).unwrap()
}

proptest! {
    #[test]
    fn grouping_ignores_row_order(rs in rows(), seed in any::<u64>()) {
        let mut shuffled = rs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = grain(&rs).group_by_entity("edu").unwrap();
        prop_assert_eq!(&a, &grain(&shuffled).group_by_entity("edu").unwrap());
        for (id, c) in &a {
            let rows_of = rs.iter().filter(|(e, _)| format!("s{e}") == *id).count() as u64;
            prop_assert_eq!(c.values().sum::<u64>(), rows_of);
        }
    }

    #[test]
    fn histograms_are_distributions(c in counts()) {
        let h = to_histogram(&c, &vocab());
        prop_assert_eq!(h.frequencies().len(), 5);
        prop_assert!(h.frequencies().iter().all(|&f| f >= 0.0));
        prop_assert!((h.frequencies().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert_eq!(h.is_childless(), c.is_empty());
    }

    #[test]
    fn scaling_counts_changes_nothing(c in counts(), k in 1u64..50) {
        let scaled: CategoryCounts = c.iter().map(|(cat, n)| (cat.clone(), n * k)).collect();
        let v = vocab();
        let (a, b) = (to_histogram(&c, &v), to_histogram(&scaled, &v));
        for (x, y) in a.frequencies().iter().zip(b.frequencies()) {
            prop_assert!((x - y).abs() < 1e-15);
        }
        prop_assert_eq!(apply_mode(&a), apply_mode(&b));
    }

    #[test]
    fn mode_picks_a_maximum(c in counts()) {
        let h = to_histogram(&c, &vocab());
        let m = apply_mode(&h);
        let f = h.frequencies();
        prop_assert!(f.iter().all(|&v| v <= f[m.slot]));
        // earlier slots with the same frequency would have won
        prop_assert!(f[..m.slot].iter().all(|&v| v < f[m.slot]));
        prop_assert_eq!(m.one_hot.len(), 4);
        prop_assert!(m.one_hot.iter().sum::<f64>() <= 1.0);
    }

    #[test]
    fn wgt_is_a_convex_combination(c in counts()) {
        let h = to_histogram(&c, &vocab());
        let w = apply_wgt(&h, &weights()).unwrap();
        prop_assert!((1.0 - 1e-12..=4.0 + 1e-12).contains(&w), "{w}");
    }

    #[test]
    fn rgt_is_monotone_in_the_linear_score(cs in prop::collection::vec(counts(), 2..30), seed in any::<u64>()) {
        let v = vocab();
        let hs: Vec<CategoryHistogram> = cs.iter().map(|c| to_histogram(c, &v)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ys: Vec<bool> = (0..hs.len()).map(|_| rng.random()).collect();
        ys[0] = true;
        ys[1] = false;
        let t = fit_rgt(&hs, &ys, &SolverConfig::default(), RgtOutput::Probability).unwrap();
        let FittedTransform::Rgt { model, .. } = &t else { unreachable!() };
        let mut scored: Vec<(f64, f64)> = hs
            .iter()
            .map(|h| (model.linear_score(&h.reduced()).unwrap(), apply_rgt(&t, h).unwrap()))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, p) in &scored {
            prop_assert!(*p > 0.0 && *p < 1.0);
        }
        for w in scored.windows(2) {
            prop_assert!(w[1].1 >= w[0].1);
        }
    }
}

#[test]
fn vocabulary_layout() {
    let v = CategoryVocabulary::new("edu", ["PhD", "", "BSc", "MSc", "BSc"].map(String::from));
    assert_eq!(v.categories(), ["BSc", "MSc", "PhD"]);
    assert_eq!(v.slot_name(v.other_slot()), OTHER);
    assert_eq!(v.slot_of("nope"), v.other_slot());
    assert_eq!(v.slot_of(""), v.other_slot());
    assert_eq!(v.reference_slot(), Some(2));
    assert!(v.is_eligible());
    assert!(!CategoryVocabulary::new("x", ["a", "b"].map(String::from)).is_eligible());
}

#[test]
fn vocabulary_ignores_test_entities() {
    let train: BTreeMap<String, CategoryCounts> = [
        ("a", vec![("BSc", 2u64), ("MSc", 1)]),
        ("b", vec![("PhD", 3)]),
    ]
    .into_iter()
    .map(|(id, c)| {
        (
            id.to_string(),
            c.into_iter().map(|(k, n)| (k.to_string(), n)).collect(),
        )
    })
    .collect();
    let mut with_test = train.clone();
    with_test.insert(
        "t".into(),
        [("Unseen".to_string(), 9u64)].into_iter().collect(),
    );
    let is_train = |id: &str| id != "t";
    let a = CategoryVocabulary::from_counts("edu", train.iter(), is_train, 1).unwrap();
    let b = CategoryVocabulary::from_counts("edu", with_test.iter(), is_train, 1).unwrap();
    assert_eq!(a, b);
    let v = Arc::new(a);
    let h = to_histogram(&with_test["t"], &v);
    assert_eq!(h.frequencies()[v.other_slot()], 1.0);
}

#[test]
fn mode_and_wgt_commute_with_splits() {
    // per-entity functions: transforming a subset equals subsetting the transform
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = vocab();
    let hs: Vec<CategoryHistogram> = (0..40)
        .map(|_| {
            let c: CategoryCounts = CATS
                .iter()
                .map(|c| (c.to_string(), rng.random_range(0..5u64)))
                .collect();
            to_histogram(&c, &v)
        })
        .collect();
    let w = weights();
    let whole: Vec<f64> = hs.iter().map(|h| apply_wgt(h, &w).unwrap()).collect();
    let whole_mode: Vec<usize> = hs.iter().map(|h| apply_mode(h).slot).collect();
    let mut idx: Vec<usize> = (0..40).collect();
    idx.shuffle(&mut rng);
    for &i in &idx[..15] {
        assert_eq!(apply_wgt(&hs[i], &w).unwrap(), whole[i]);
        assert_eq!(apply_mode(&hs[i]).slot, whole_mode[i]);
    }
}

#[test]
fn rgt_separable_direction() {
    let v = vocab();
    let point = |cat: &str| to_histogram(&[(cat.to_string(), 1u64)].into_iter().collect(), &v);
    let hs: Vec<CategoryHistogram> = (0..20)
        .map(|i| point(if i % 2 == 0 { "PhD" } else { "BSc" }))
        .collect();
    let ys: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
    let t = fit_rgt(&hs, &ys, &SolverConfig::default(), RgtOutput::Probability).unwrap();
    let (phd, bsc) = (
        apply_rgt(&t, &point("PhD")).unwrap(),
        apply_rgt(&t, &point("BSc")).unwrap(),
    );
    assert!(phd > 0.9 && phd > bsc, "{phd} {bsc}");
    assert_eq!(apply_rgt(&t, &point("PhD")).unwrap(), phd);
    assert!(fit_rgt(
        &hs,
        &[true; 20],
        &SolverConfig::default(),
        RgtOutput::Probability
    )
    .is_err());
}

fn decision(n: usize, positives: usize) -> DecisionTable {
    DecisionTable::new(
        (0..n)
            .map(|i| Entity::new(format!("e{i}"), i < positives))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn split_is_a_stratified_partition(pos in 5usize..60, neg in 5usize..120, frac in 0.1f64..0.9, seed in any::<u64>()) {
        let d = decision(pos + neg, pos);
        let members: Vec<usize> = (0..d.len()).collect();
        let s = split_transform_sample(&d, &members, frac, seed).unwrap();
        let mut all: Vec<usize> = s.sample.iter().chain(&s.rest).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(&all, &members);
        let sample_pos = s.sample.iter().filter(|&&i| i < pos).count();
        prop_assert_eq!(sample_pos, (pos as f64 * frac).round() as usize);
        prop_assert_eq!(s.sample.len() - sample_pos, (neg as f64 * frac).round() as usize);
        prop_assert_eq!(s, split_transform_sample(&d, &members, frac, seed).unwrap());
    }
}

#[test]
fn split_arithmetic_example() {
    let d = decision(100, 25);
    let members: Vec<usize> = (0..100).collect();
    let s = split_transform_sample(&d, &members, 0.2, 9).unwrap();
    assert_eq!(s.sample.iter().filter(|&&i| i < 25).count(), 5);
    assert_eq!(s.sample.iter().filter(|&&i| i >= 25).count(), 15);
    assert!(split_transform_sample(&decision(6, 2), &[0, 1, 2, 3, 4, 5], 0.2, 1).is_err());
}

/// Entities with a high-cardinality attribute and few children, labels
/// independent of everything.
fn null_entities(
    rng: &mut ChaCha8Rng,
    n: usize,
    cats: usize,
) -> (Arc<CategoryVocabulary>, Vec<CategoryHistogram>, Vec<bool>) {
    let names: Vec<String> = (0..cats).map(|c| format!("c{c:02}")).collect();
    let v = Arc::new(CategoryVocabulary::new("a", names.clone()));
    let hs = (0..n)
        .map(|_| {
            let mut c = CategoryCounts::new();
            for _ in 0..rng.random_range(1..6) {
                *c.entry(names[rng.random_range(0..cats)].clone())
                    .or_default() += 1;
            }
            to_histogram(&c, &v)
        })
        .collect();
    let mut ys: Vec<bool> = (0..n).map(|i| i < n / 4).collect();
    ys.shuffle(rng);
    (v, hs, ys)
}

fn indicator_auc(t: &FittedTransform, hs: &[CategoryHistogram], ys: &[bool]) -> f64 {
    let scores = hs.iter().map(|h| apply_rgt(t, h).unwrap()).collect();
    roc_auc(&ScoredSample::new(scores, ys.to_vec()).unwrap())
}

#[test]
fn permuted_targets_give_chance_auc() {
    // cross-validated indicator AUC, averaged over independent permutations
    let mut rng = ChaCha8Rng::seed_from_u64(205);
    let mut aucs = Vec::new();
    for _ in 0..10 {
        let (_, hs, ys) = null_entities(&mut rng, 200, 8);
        let d = DecisionTable::new(
            ys.iter()
                .enumerate()
                .map(|(i, &p)| Entity::new(format!("e{i}"), p))
                .collect(),
        )
        .unwrap();
        let folds = grainflow_core::evaluation::stratified_kfold(&d, 10, rng.random()).unwrap();
        let mut fold_aucs = Vec::new();
        for f in 0..10 {
            let train = folds.train_indices(f);
            let split = split_transform_sample(&d, &train, 0.2, rng.random()).unwrap();
            let sample: Vec<CategoryHistogram> =
                split.sample.iter().map(|&i| hs[i].clone()).collect();
            let sy: Vec<bool> = split.sample.iter().map(|&i| ys[i]).collect();
            let t = fit_rgt(
                &sample,
                &sy,
                &SolverConfig::default(),
                RgtOutput::Probability,
            )
            .unwrap();
            let test = folds.test_indices(f);
            let th: Vec<CategoryHistogram> = test.iter().map(|&i| hs[i].clone()).collect();
            let ty: Vec<bool> = test.iter().map(|&i| ys[i]).collect();
            fold_aucs.push(indicator_auc(&t, &th, &ty));
        }
        aucs.push(fold_aucs.iter().sum::<f64>() / 10.0);
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    assert!((mean - 0.5).abs() < 0.05, "{mean} from {aucs:?}");
}

#[test]
fn noise_fitted_sample_does_not_leak() {
    // RGT fitted on fresh noise labels: scored on the sample it memorises,
    // scored on the remaining entities it is at chance
    let mut rng = ChaCha8Rng::seed_from_u64(229);
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for _ in 0..20 {
        let (_, hs, ys) = null_entities(&mut rng, 400, 12);
        let d = DecisionTable::new(
            ys.iter()
                .enumerate()
                .map(|(i, &p)| Entity::new(format!("e{i}"), p))
                .collect(),
        )
        .unwrap();
        let members: Vec<usize> = (0..d.len()).collect();
        let split = split_transform_sample(&d, &members, 0.2, rng.random()).unwrap();
        let sample: Vec<CategoryHistogram> = split.sample.iter().map(|&i| hs[i].clone()).collect();
        let mut noise: Vec<bool> = (0..sample.len()).map(|i| i % 4 == 0).collect();
        noise.shuffle(&mut rng);
        let t = fit_rgt(
            &sample,
            &noise,
            &SolverConfig::default(),
            RgtOutput::Probability,
        )
        .unwrap();
        inside.push(indicator_auc(&t, &sample, &noise));
        let rest: Vec<CategoryHistogram> = split.rest.iter().map(|&i| hs[i].clone()).collect();
        let ry: Vec<bool> = split.rest.iter().map(|&i| ys[i]).collect();
        outside.push(indicator_auc(&t, &rest, &ry));
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((avg(&outside) - 0.5).abs() < 0.05, "{outside:?}");
    assert!(avg(&inside) > 0.6, "{inside:?}");
}
