//! Stratified k-fold comparison of the granularity transforms.
//!
//! Within every fold the training part is reduced by the exclusive RGT
//! sample, all transforms are fitted on training entities only, a logistic
//! classifier is trained on the reduced training part and the held-out fold
//! is scored by AUC_ROC and Max_KS2. Approaches are then compared pairwise
//! with two-sided paired t-tests over the folds.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::histogram::{to_histogram, CategoryHistogram, CategoryVocabulary};
use crate::logistic::{self, Matrix, SolverConfig};
use crate::metrics::{max_ks2, roc_auc, ScoredSample};
use crate::relational::{CategoryCounts, DecisionTable, GrainTable};
use crate::stats::{student_t_critical, student_t_two_sided_p};
use crate::transforms::{fit_rgt, split_transform_sample, FittedTransform, RgtOutput, WeightTable};
use crate::{Error, Result};

/// Coverage of the LimInf/LimSup bounds reported by [`paired_t_test`].
pub const CONFIDENCE_LEVEL: f64 = 0.95;

/// Fold index (0-based) of every decision entity, in table order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, entity: usize) -> usize {
        self.folds[entity]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.folds
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] != fold)
            .collect()
    }
}

/// Seeded shuffle within each class followed by round-robin dealing.
///
/// Negatives continue the rotation where positives stopped, so fold sizes
/// also differ by at most one. A class smaller than `k` leaves some folds
/// without that class; [`run_comparison`] rejects that case.
pub fn stratified_kfold(decision: &DecisionTable, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Fold(format!("need at least 2 folds, got {k}")));
    }
    if k > decision.len() {
        return Err(Error::Fold(format!(
            "{k} folds requested for {} entities",
            decision.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; decision.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = decision
            .entities()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.positive == class)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, folds })
}

/// Paired t-test of `a - b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub mean: f64,
    pub sd: f64,
    pub lim_inf: f64,
    pub lim_sup: f64,
    pub t: f64,
    pub df: usize,
    pub p: f64,
}

impl PairedTTest {
    pub fn significant_at(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

/// Two-sided paired t-test over equal-length samples, with the
/// [`CONFIDENCE_LEVEL`] interval of the mean difference.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let k = a.len();
    if k < 2 {
        return Err(Error::Domain(format!(
            "paired t-test needs at least 2 pairs, got {k}"
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Domain("paired samples must be finite".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / k as f64;
    let sd = sample_sd(&d, mean);
    let df = k - 1;
    let se = sd / libm::sqrt(k as f64);
    let (t, p) = if sd == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / se;
        (t, student_t_two_sided_p(t, df as f64)?)
    };
    let half = student_t_critical(1.0 - CONFIDENCE_LEVEL, df as f64)? * se;
    Ok(PairedTTest {
        mean,
        sd,
        lim_inf: mean - half,
        lim_sup: mean + half,
        t,
        df,
        p,
    })
}

fn sample_sd(v: &[f64], mean: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    libm::sqrt(ss / (v.len() - 1) as f64)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Granularity transform under comparison. Ordering follows the report layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Approach {
    Rgt,
    Wgt,
    Mode,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Rgt, Approach::Wgt, Approach::Mode];

    /// Lower-case identifier used in files and on the command line.
    pub fn id(self) -> &'static str {
        match self {
            Approach::Rgt => "rgt",
            Approach::Wgt => "wgt",
            Approach::Mode => "mode",
        }
    }

    /// Display label used in tables.
    pub fn label(self) -> &'static str {
        match self {
            Approach::Rgt => "RGT",
            Approach::Wgt => "WGT",
            Approach::Mode => "Mode",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rgt" => Ok(Approach::Rgt),
            "wgt" => Ok(Approach::Wgt),
            "mode" => Ok(Approach::Mode),
            other => Err(Error::Config(format!(
                "unknown approach `{other}` (expected rgt, wgt or mode)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    AucRoc,
    MaxKs2,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::AucRoc, Metric::MaxKs2];

    pub fn id(self) -> &'static str {
        match self {
            Metric::AucRoc => "auc_roc",
            Metric::MaxKs2 => "max_ks2",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::AucRoc => "AUC ROC",
            Metric::MaxKs2 => "Max KS2",
        }
    }
}

/// A categorical attribute of a named child table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeRef {
    pub table: String,
    pub attribute: String,
}

impl AttributeRef {
    pub fn new(table: impl Into<String>, attribute: impl Into<String>) -> Self {
        AttributeRef {
            table: table.into(),
            attribute: attribute.into(),
        }
    }
}

/// Everything that shapes a comparison run apart from data, folds and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonConfig {
    pub solver: SolverConfig,
    /// Fraction of each training fold held out for fitting RGT.
    pub rgt_sample_frac: f64,
    pub rgt_output: RgtOutput,
    /// Training categories rarer than this fold into OTHER.
    pub min_category_count: u64,
    /// Expert weights by attribute name; required when WGT is compared.
    pub weights: BTreeMap<String, WeightTable>,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            solver: SolverConfig::default(),
            rgt_sample_frac: 0.2,
            rgt_output: RgtOutput::Probability,
            min_category_count: 1,
            weights: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldScore {
    pub approach: Approach,
    pub auc_roc: f64,
    pub max_ks2: f64,
}

impl FoldScore {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::AucRoc => self.auc_roc,
            Metric::MaxKs2 => self.max_ks2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    /// 0-based fold index.
    pub fold: usize,
    pub scores: Vec<FoldScore>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub approach: Approach,
    pub metric: Metric,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairComparison {
    pub metric: Metric,
    pub first: Approach,
    pub second: Approach,
    pub test: PairedTTest,
}

impl PairComparison {
    /// `rgt-mode` style identifier.
    pub fn pair_id(&self) -> String {
        format!("{}-{}", self.first.id(), self.second.id())
    }

    pub fn pair_label(&self) -> String {
        format!("{}-{}", self.first.label(), self.second.label())
    }
}

/// Per-fold metrics, per-approach summaries and pairwise t-tests.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub approaches: Vec<Approach>,
    pub folds: Vec<FoldResult>,
    pub summaries: Vec<Summary>,
    pub ttests: Vec<PairComparison>,
    /// (entity, attribute) pairs with no child rows, encoded as uniform histograms.
    pub childless: usize,
}

impl ComparisonReport {
    pub fn column(&self, approach: Approach, metric: Metric) -> Vec<f64> {
        self.folds
            .iter()
            .filter_map(|f| f.scores.iter().find(|s| s.approach == approach))
            .map(|s| s.get(metric))
            .collect()
    }

    pub fn summary(&self, approach: Approach, metric: Metric) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.approach == approach && s.metric == metric)
    }

    pub fn ttest(&self, metric: Metric, first: Approach, second: Approach) -> Option<&PairedTTest> {
        self.ttests
            .iter()
            .find(|c| c.metric == metric && c.first == first && c.second == second)
            .map(|c| &c.test)
    }
}

/// Prepared comparison: per-entity counts and the fold assignment.
///
/// Folds are independent; [`ComparisonPlan::run_fold`] may be called from
/// several threads and the results handed to [`ComparisonPlan::assemble`]
/// in any order.
#[derive(Debug)]
pub struct ComparisonPlan<'a> {
    decision: &'a DecisionTable,
    attributes: Vec<AttributeRef>,
    /// counts[attribute][entity]
    counts: Vec<Vec<CategoryCounts>>,
    approaches: Vec<Approach>,
    folds: FoldAssignment,
    seed: u64,
    cfg: ComparisonConfig,
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl<'a> ComparisonPlan<'a> {
    pub fn new(
        decision: &'a DecisionTable,
        grains: &[GrainTable],
        attributes: &[AttributeRef],
        approaches: &[Approach],
        k: usize,
        seed: u64,
        cfg: ComparisonConfig,
    ) -> Result<Self> {
        cfg.solver.validate()?;
        if !(cfg.rgt_sample_frac > 0.0 && cfg.rgt_sample_frac < 1.0) {
            return Err(Error::Config(format!(
                "RGT sample fraction must lie in (0, 1), got {}",
                cfg.rgt_sample_frac
            )));
        }
        if attributes.is_empty() {
            return Err(Error::Config("no attributes selected".into()));
        }
        let mut approaches = approaches.to_vec();
        approaches.sort();
        approaches.dedup();
        if approaches.is_empty() {
            return Err(Error::Config("no approaches selected".into()));
        }
        if approaches.contains(&Approach::Wgt) {
            for a in attributes {
                if !cfg.weights.contains_key(&a.attribute) {
                    return Err(Error::Config(format!(
                        "WGT needs weights for attribute `{}`",
                        a.attribute
                    )));
                }
            }
        }

        let positives = decision.positives();
        let minority = positives.min(decision.len() - positives);
        if minority < k {
            return Err(Error::Fold(format!(
                "{k} folds but the smaller class has only {minority} entities"
            )));
        }
        let folds = stratified_kfold(decision, k, seed)?;

        let index = decision.index();
        let mut counts = Vec::with_capacity(attributes.len());
        for a in attributes {
            let grain = grains.iter().find(|g| g.name() == a.table).ok_or_else(|| {
                Error::UnknownAttribute {
                    table: a.table.clone(),
                    attribute: a.attribute.clone(),
                }
            })?;
            let mut per_entity = vec![CategoryCounts::new(); decision.len()];
            for (id, c) in grain.group_by_entity(&a.attribute)? {
                if let Some(&i) = index.get(id.as_str()) {
                    per_entity[i] = c;
                }
            }
            counts.push(per_entity);
        }

        Ok(ComparisonPlan {
            decision,
            attributes: attributes.to_vec(),
            counts,
            approaches,
            folds,
            seed,
            cfg,
        })
    }

    pub fn k(&self) -> usize {
        self.folds.k()
    }

    pub fn folds(&self) -> &FoldAssignment {
        &self.folds
    }

    pub fn approaches(&self) -> &[Approach] {
        &self.approaches
    }

    pub fn childless(&self) -> usize {
        self.counts
            .iter()
            .map(|per_entity| per_entity.iter().filter(|c| c.is_empty()).count())
            .sum()
    }

    /// Runs one fold; errors carry the 1-based fold number.
    pub fn run_fold(&self, fold: usize) -> Result<FoldResult> {
        self.fold_inner(fold).map_err(|e| e.in_fold(fold + 1))
    }

    fn fold_inner(&self, fold: usize) -> Result<FoldResult> {
        let train = self.folds.train_indices(fold);
        let test = self.folds.test_indices(fold);
        let split = split_transform_sample(
            self.decision,
            &train,
            self.cfg.rgt_sample_frac,
            fold_seed(self.seed, fold),
        )?;
        let labels: Vec<bool> = self
            .decision
            .entities()
            .iter()
            .map(|e| e.positive)
            .collect();

        let mut in_train = vec![false; self.decision.len()];
        for &i in &train {
            in_train[i] = true;
        }
        let index = self.decision.index();

        // histograms[attribute][entity], vocabularies from training entities only
        let mut histograms: Vec<Vec<CategoryHistogram>> = Vec::with_capacity(self.attributes.len());
        for (a, per_entity) in self.attributes.iter().zip(&self.counts) {
            let ids = self
                .decision
                .entities()
                .iter()
                .map(|e| &e.id)
                .zip(per_entity);
            let vocab = CategoryVocabulary::from_counts(
                &a.attribute,
                ids,
                |id| index.get(id).is_some_and(|&i| in_train[i]),
                self.cfg.min_category_count,
            )?;
            let vocab = Arc::new(vocab);
            histograms.push(per_entity.iter().map(|c| to_histogram(c, &vocab)).collect());
        }

        let mut scores = Vec::with_capacity(self.approaches.len());
        for &approach in &self.approaches {
            let transforms = self.fit_transforms(approach, &histograms, &split.sample, &labels)?;
            let features = |rows: &[usize]| -> Result<Matrix> {
                let mut out = Vec::with_capacity(rows.len());
                for &i in rows {
                    let mut row = Vec::new();
                    for (t, h) in transforms.iter().zip(&histograms) {
                        row.extend(t.features(&h[i])?);
                    }
                    out.push(row);
                }
                Matrix::from_rows(&out)
            };
            let x_train = features(&split.rest)?;
            let y_train: Vec<bool> = split.rest.iter().map(|&i| labels[i]).collect();
            let model = logistic::fit(&x_train, &y_train, &self.cfg.solver)?;
            let x_test = features(&test)?;
            let predicted = (0..x_test.rows())
                .map(|r| model.predict(x_test.row(r)))
                .collect::<Result<Vec<f64>>>()?;
            let sample = ScoredSample::new(predicted, test.iter().map(|&i| labels[i]).collect())?;
            scores.push(FoldScore {
                approach,
                auc_roc: roc_auc(&sample),
                max_ks2: max_ks2(&sample),
            });
        }
        Ok(FoldResult { fold, scores })
    }

    fn fit_transforms(
        &self,
        approach: Approach,
        histograms: &[Vec<CategoryHistogram>],
        sample: &[usize],
        labels: &[bool],
    ) -> Result<Vec<FittedTransform>> {
        self.attributes
            .iter()
            .zip(histograms)
            .map(|(a, h)| {
                let vocab = Arc::clone(h[0].vocabulary());
                match approach {
                    Approach::Mode => Ok(FittedTransform::mode(vocab)),
                    Approach::Wgt => FittedTransform::wgt(vocab, &self.cfg.weights[&a.attribute]),
                    // two or fewer categories: not selected for regression, kept as mode
                    Approach::Rgt if !vocab.is_eligible() => Ok(FittedTransform::mode(vocab)),
                    Approach::Rgt => {
                        let hs: Vec<CategoryHistogram> =
                            sample.iter().map(|&i| h[i].clone()).collect();
                        let ys: Vec<bool> = sample.iter().map(|&i| labels[i]).collect();
                        fit_rgt(&hs, &ys, &self.cfg.solver, self.cfg.rgt_output)
                    }
                }
            })
            .collect()
    }

    /// Orders fold results and derives summaries and pairwise t-tests.
    pub fn assemble(&self, mut folds: Vec<FoldResult>) -> Result<ComparisonReport> {
        folds.sort_by_key(|f| f.fold);
        if folds.len() != self.k() || folds.iter().enumerate().any(|(i, f)| f.fold != i) {
            return Err(Error::Contract(format!(
                "expected results for folds 1..={}, got {}",
                self.k(),
                folds.len()
            )));
        }
        let mut report = ComparisonReport {
            approaches: self.approaches.clone(),
            folds,
            summaries: Vec::new(),
            ttests: Vec::new(),
            childless: self.childless(),
        };
        for &approach in &self.approaches {
            for metric in Metric::ALL {
                let col = report.column(approach, metric);
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                report.summaries.push(Summary {
                    approach,
                    metric,
                    mean,
                    median: median(&col),
                    sd: sample_sd(&col, mean),
                });
            }
        }
        for metric in Metric::ALL {
            for (i, &first) in self.approaches.iter().enumerate() {
                for &second in &self.approaches[i + 1..] {
                    let test = paired_t_test(
                        &report.column(first, metric),
                        &report.column(second, metric),
                    )?;
                    report.ttests.push(PairComparison {
                        metric,
                        first,
                        second,
                        test,
                    });
                }
            }
        }
        Ok(report)
    }
}

/// Runs every fold in order and assembles the report.
pub fn run_comparison(
    decision: &DecisionTable,
    grains: &[GrainTable],
    attributes: &[AttributeRef],
    approaches: &[Approach],
    k: usize,
    seed: u64,
    cfg: ComparisonConfig,
) -> Result<ComparisonReport> {
    let plan = ComparisonPlan::new(decision, grains, attributes, approaches, k, seed, cfg)?;
    let folds = (0..plan.k())
        .map(|f| plan.run_fold(f))
        .collect::<Result<Vec<_>>>()?;
    plan.assemble(folds)
}

impl fmt::Display for AttributeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.attribute)
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc_roc" => Ok(Metric::AucRoc),
            "max_ks2" => Ok(Metric::MaxKs2),
            other => Err(Error::Config(other.to_string())),
        }
    }
}
