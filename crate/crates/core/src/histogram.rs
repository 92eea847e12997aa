//! Closed category vocabularies and per-entity relative-frequency histograms.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::relational::{CategoryCounts, GrainTable};
use crate::{Error, Result};

/// Display name of the reserved bucket for unseen, rare and missing categories.
pub const OTHER: &str = "__OTHER__";

/// Sorted training categories of one attribute plus a trailing OTHER slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryVocabulary {
    attribute: String,
    categories: Vec<String>,
}

impl CategoryVocabulary {
    /// Builds a vocabulary directly from category names. Empty names are
    /// dropped; the rest are sorted and deduplicated.
    pub fn new(attribute: impl Into<String>, categories: impl IntoIterator<Item = String>) -> Self {
        let mut categories: Vec<String> =
            categories.into_iter().filter(|c| !c.is_empty()).collect();
        categories.sort();
        categories.dedup();
        CategoryVocabulary {
            attribute: attribute.into(),
            categories,
        }
    }

    /// Vocabulary from per-entity counts, looking only at training entities.
    ///
    /// Categories seen fewer than `min_count` times across training rows are
    /// left to the OTHER bucket, as is the missing-value category `""`.
    pub fn from_counts<'a, I, F>(
        attribute: &str,
        counts: I,
        is_training: F,
        min_count: u64,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a String, &'a CategoryCounts)>,
        F: Fn(&str) -> bool,
    {
        let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
        let mut rows = 0u64;
        for (entity, c) in counts {
            if !is_training(entity) {
                continue;
            }
            for (cat, n) in c {
                rows += n;
                *totals.entry(cat.as_str()).or_insert(0) += n;
            }
        }
        if rows == 0 {
            return Err(Error::EmptyVocabulary(attribute.into()));
        }
        let categories = totals
            .into_iter()
            .filter(|(cat, n)| !cat.is_empty() && *n >= min_count.max(1))
            .map(|(cat, _)| String::from(cat));
        Ok(Self::new(attribute, categories))
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    /// Named categories in slot order, without OTHER.
    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    /// Number of histogram slots, OTHER included.
    pub fn len(&self) -> usize {
        self.categories.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn other_slot(&self) -> usize {
        self.categories.len()
    }

    /// Regression transforms only apply to attributes with more than two categories.
    pub fn is_eligible(&self) -> bool {
        self.categories.len() > 2
    }

    pub fn slot_of(&self, category: &str) -> usize {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(category))
            .unwrap_or(self.other_slot())
    }

    pub fn slot_name(&self, slot: usize) -> &str {
        self.categories.get(slot).map_or(OTHER, String::as_str)
    }

    /// The lexicographically last named category, dropped from design
    /// matrices so that the frequency columns are not collinear with the intercept.
    pub fn reference_slot(&self) -> Option<usize> {
        self.categories.len().checked_sub(1)
    }
}

/// Builds the vocabulary of `attribute` in `grain` from training entities only.
pub fn build_vocabulary<F>(
    grain: &GrainTable,
    attribute: &str,
    is_training: F,
    min_count: u64,
) -> Result<CategoryVocabulary>
where
    F: Fn(&str) -> bool,
{
    let counts = grain.group_by_entity(attribute)?;
    CategoryVocabulary::from_counts(attribute, &counts, is_training, min_count)
}

/// Relative frequencies of one entity's child rows over a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryHistogram {
    vocab: Arc<CategoryVocabulary>,
    frequencies: Vec<f64>,
    childless: bool,
}

impl CategoryHistogram {
    /// Histogram from explicit frequencies; they must be finite, nonnegative
    /// and sum to one.
    pub fn from_frequencies(vocab: Arc<CategoryVocabulary>, frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.len() != vocab.len() {
            return Err(Error::Contract(alloc::format!(
                "{} frequencies for a vocabulary of {} slots",
                frequencies.len(),
                vocab.len()
            )));
        }
        if frequencies.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::Domain(
                "frequencies must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = frequencies.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(alloc::format!(
                "frequencies sum to {sum}, not 1"
            )));
        }
        Ok(CategoryHistogram {
            vocab,
            frequencies,
            childless: false,
        })
    }

    pub fn vocabulary(&self) -> &Arc<CategoryVocabulary> {
        &self.vocab
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// True when the entity had no child rows and the histogram is the uniform stand-in.
    pub fn is_childless(&self) -> bool {
        self.childless
    }

    /// Frequencies with the reference slot removed.
    pub fn reduced(&self) -> Vec<f64> {
        match self.vocab.reference_slot() {
            Some(r) => self
                .frequencies
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != r)
                .map(|(_, f)| *f)
                .collect(),
            None => self.frequencies.clone(),
        }
    }

    pub(crate) fn same_vocabulary(&self, vocab: &Arc<CategoryVocabulary>) -> bool {
        Arc::ptr_eq(&self.vocab, vocab) || *self.vocab == **vocab
    }
}

/// Converts category counts into relative frequencies over `vocab`.
///
/// Counts are unsigned, so the negative-count domain error cannot arise.
/// Categories outside the vocabulary accumulate in OTHER. An entity without
/// rows gets the uniform histogram with the childless flag set.
pub fn to_histogram(counts: &CategoryCounts, vocab: &Arc<CategoryVocabulary>) -> CategoryHistogram {
    let total: u64 = counts.values().sum();
    let k = vocab.len();
    if total == 0 {
        return CategoryHistogram {
            vocab: Arc::clone(vocab),
            frequencies: vec![1.0 / k as f64; k],
            childless: true,
        };
    }
    let mut slots = vec![0u64; k];
    for (cat, n) in counts {
        slots[vocab.slot_of(cat)] += n;
    }
    let frequencies = slots.iter().map(|&n| n as f64 / total as f64).collect();
    CategoryHistogram {
        vocab: Arc::clone(vocab),
        frequencies,
        childless: false,
    }
}
