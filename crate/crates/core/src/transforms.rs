//! The three granularity transforms: distribution mode, expert-weighted sum
//! (WGT) and the regression transform (RGT).
//!
//! Each turns the histogram of one lower-grain categorical attribute into
//! decision-grain feature columns. RGT fits a logistic regression from the
//! histogram to the decision target on an exclusive stratified sample
//! ([`split_transform_sample`]) that must not be reused for the downstream
//! classifier.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::histogram::{CategoryHistogram, CategoryVocabulary};
use crate::logistic::{self, LogisticModel, Matrix, SolverConfig};
use crate::relational::DecisionTable;
use crate::{Error, Result};

/// Expert weights for the categories of one attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    attribute: String,
    weights: BTreeMap<String, f64>,
}

impl WeightTable {
    pub fn new(attribute: impl Into<String>, weights: BTreeMap<String, f64>) -> Result<Self> {
        let attribute = attribute.into();
        if weights.is_empty() {
            return Err(Error::Config(format!(
                "no weights declared for `{attribute}`"
            )));
        }
        if let Some((c, w)) = weights.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::Config(format!(
                "weight of `{attribute}`/`{c}` is not finite: {w}"
            )));
        }
        Ok(WeightTable { attribute, weights })
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn get(&self, category: &str) -> Option<f64> {
        self.weights.get(category).copied()
    }

    /// Declared (category, weight) pairs in category order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.weights.iter().map(|(c, w)| (c.as_str(), *w))
    }

    /// Weight of the OTHER bucket: the smallest declared weight.
    pub fn other_weight(&self) -> f64 {
        self.weights.values().copied().fold(f64::INFINITY, f64::min)
    }

    /// One weight per vocabulary slot.
    pub fn resolve(&self, vocab: &CategoryVocabulary) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(vocab.len());
        for c in vocab.categories() {
            out.push(self.get(c).ok_or_else(|| {
                Error::Config(format!(
                    "no weight for category `{c}` of attribute `{}`",
                    self.attribute
                ))
            })?);
        }
        out.push(self.other_weight());
        Ok(out)
    }
}

/// How the RGT score is handed to the downstream classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RgtOutput {
    #[default]
    Probability,
    Logit,
}

/// The dominant category and its reference-dropped one-hot encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFeature {
    pub slot: usize,
    pub one_hot: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedTransform {
    Mode {
        vocab: Arc<CategoryVocabulary>,
    },
    Wgt {
        vocab: Arc<CategoryVocabulary>,
        /// One weight per slot, OTHER last.
        weights: Vec<f64>,
    },
    Rgt {
        vocab: Arc<CategoryVocabulary>,
        reference: usize,
        model: LogisticModel,
        output: RgtOutput,
    },
}

impl FittedTransform {
    pub fn mode(vocab: Arc<CategoryVocabulary>) -> Self {
        FittedTransform::Mode { vocab }
    }

    pub fn wgt(vocab: Arc<CategoryVocabulary>, table: &WeightTable) -> Result<Self> {
        let weights = table.resolve(&vocab)?;
        Ok(FittedTransform::Wgt { vocab, weights })
    }

    pub fn vocabulary(&self) -> &Arc<CategoryVocabulary> {
        match self {
            FittedTransform::Mode { vocab }
            | FittedTransform::Wgt { vocab, .. }
            | FittedTransform::Rgt { vocab, .. } => vocab,
        }
    }

    /// Column names, prefixed by the attribute name.
    pub fn feature_names(&self) -> Vec<String> {
        let vocab = self.vocabulary();
        match self {
            FittedTransform::Mode { .. } => one_hot_slots(vocab)
                .map(|s| format!("{}={}", vocab.attribute(), vocab.slot_name(s)))
                .collect(),
            _ => vec![String::from(vocab.attribute())],
        }
    }

    pub fn width(&self) -> usize {
        match self {
            FittedTransform::Mode { vocab } => one_hot_slots(vocab).count(),
            _ => 1,
        }
    }

    /// Feature columns for one histogram.
    pub fn features(&self, hist: &CategoryHistogram) -> Result<Vec<f64>> {
        self.check_vocabulary(hist)?;
        Ok(match self {
            FittedTransform::Mode { .. } => apply_mode(hist).one_hot,
            FittedTransform::Wgt { weights, .. } => vec![weighted_sum(hist, weights)],
            FittedTransform::Rgt { .. } => vec![apply_rgt(self, hist)?],
        })
    }

    fn check_vocabulary(&self, hist: &CategoryHistogram) -> Result<()> {
        if hist.same_vocabulary(self.vocabulary()) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "histogram vocabulary of `{}` differs from the fitted one",
                hist.vocabulary().attribute()
            )))
        }
    }
}

fn one_hot_slots(vocab: &CategoryVocabulary) -> impl Iterator<Item = usize> + '_ {
    let reference = vocab.reference_slot();
    (0..vocab.len()).filter(move |s| Some(*s) != reference)
}

/// Most frequent category; ties go to the lexicographically smallest, with
/// OTHER losing every tie.
pub fn apply_mode(hist: &CategoryHistogram) -> ModeFeature {
    let f = hist.frequencies();
    let mut slot = 0;
    for (i, v) in f.iter().enumerate() {
        if *v > f[slot] {
            slot = i;
        }
    }
    let one_hot = one_hot_slots(hist.vocabulary())
        .map(|s| if s == slot { 1.0 } else { 0.0 })
        .collect();
    ModeFeature { slot, one_hot }
}

fn weighted_sum(hist: &CategoryHistogram, weights: &[f64]) -> f64 {
    hist.frequencies()
        .iter()
        .zip(weights)
        .map(|(f, w)| f * w)
        .sum()
}

/// Weighted sum of the relative frequencies.
pub fn apply_wgt(hist: &CategoryHistogram, weights: &WeightTable) -> Result<f64> {
    Ok(weighted_sum(hist, &weights.resolve(hist.vocabulary())?))
}

/// Fits the regression transform of one attribute on the exclusive sample.
///
/// Inputs are the histogram frequencies with the reference slot dropped.
pub fn fit_rgt(
    histograms: &[CategoryHistogram],
    targets: &[bool],
    cfg: &SolverConfig,
    output: RgtOutput,
) -> Result<FittedTransform> {
    let Some(first) = histograms.first() else {
        return Err(Error::DegenerateFit("no histograms to fit".into()));
    };
    let vocab = Arc::clone(first.vocabulary());
    if histograms.iter().any(|h| !h.same_vocabulary(&vocab)) {
        return Err(Error::Contract(
            "histograms use different vocabularies".into(),
        ));
    }
    let reference = vocab.reference_slot().ok_or_else(|| {
        Error::Contract(format!(
            "vocabulary of `{}` has no named category to use as reference",
            vocab.attribute()
        ))
    })?;
    let rows: Vec<Vec<f64>> = histograms.iter().map(CategoryHistogram::reduced).collect();
    let x = Matrix::from_rows(&rows)?;
    let model = logistic::fit(&x, targets, cfg)?;
    Ok(FittedTransform::Rgt {
        vocab,
        reference,
        model,
        output,
    })
}

/// RGT indicator of one histogram: the fitted probability, or its logit.
pub fn apply_rgt(transform: &FittedTransform, hist: &CategoryHistogram) -> Result<f64> {
    let FittedTransform::Rgt { model, output, .. } = transform else {
        return Err(Error::Contract(
            "apply_rgt needs a fitted RGT transform".into(),
        ));
    };
    transform.check_vocabulary(hist)?;
    let z = model.linear_score(&hist.reduced())?;
    Ok(match output {
        RgtOutput::Probability => logistic::sigmoid(z),
        RgtOutput::Logit => z,
    })
}

/// Entity indices of the exclusive transform sample and the remaining modelling data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSplit {
    pub sample: Vec<usize>,
    pub rest: Vec<usize>,
}

/// Stratified split of `members` (indices into `decision`): a fraction
/// `frac` of each class, rounded to the nearest integer, goes to the sample.
/// Both outputs are sorted.
pub fn split_transform_sample(
    decision: &DecisionTable,
    members: &[usize],
    frac: f64,
    seed: u64,
) -> Result<SampleSplit> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::Split(format!(
            "sample fraction must lie in (0, 1), got {frac}"
        )));
    }
    let entities = decision.entities();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = Vec::new();
    let mut rest = Vec::new();
    for class in [true, false] {
        let mut group: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| entities[i].positive == class)
            .collect();
        let take = libm::round(group.len() as f64 * frac) as usize;
        if take == 0 || take >= group.len() {
            return Err(Error::Split(format!(
                "{} class has {} entities; a {frac} split leaves one side without it",
                if class { "positive" } else { "negative" },
                group.len()
            )));
        }
        group.shuffle(&mut rng);
        sample.extend_from_slice(&group[..take]);
        rest.extend_from_slice(&group[take..]);
    }
    sample.sort_unstable();
    rest.sort_unstable();
    Ok(SampleSplit { sample, rest })
}
