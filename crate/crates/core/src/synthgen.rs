//! Synthetic hierarchical datasets with a known latent signal.
//!
//! Each entity gets a latent quality `q ~ N(0, 1)`; the target marks the top
//! quartile of `q`. For every (entity, attribute) a noisy view
//! `q' = q + N(0, noise_sd)` is drawn, and each child row picks its category
//! from `softmax(ordinal * signal * q')`, so better entities lean towards
//! higher-ordinal categories. The true ordinals double as ideal WGT weights.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::relational::{DecisionTable, Entity, GrainRow, GrainTable};
use crate::transforms::WeightTable;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthAttribute {
    pub table: String,
    pub name: String,
    /// (category, ordinal value)
    pub categories: Vec<(String, f64)>,
    /// Signal strength; zero makes the attribute independent of quality.
    pub signal: f64,
}

impl SynthAttribute {
    pub fn new(table: &str, name: &str, categories: &[(&str, f64)], signal: f64) -> Self {
        SynthAttribute {
            table: table.into(),
            name: name.into(),
            categories: categories
                .iter()
                .map(|(c, o)| (c.to_string(), *o))
                .collect(),
            signal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_entities: usize,
    pub children_min: usize,
    pub children_max: usize,
    pub attributes: Vec<SynthAttribute>,
    /// Sd of the per-attribute perturbation of latent quality.
    pub quality_noise_sd: f64,
    pub seed: u64,
}

const PARENT_EDU: [(&str, f64); 4] = [
    ("Primary", 1.0),
    ("Secondary", 2.0),
    ("College", 3.0),
    ("Graduate", 4.0),
];
const TEACHER_EDU: [(&str, f64); 4] = [("BSc", 1.0), ("MBA", 2.0), ("MSc", 3.0), ("PhD", 4.0)];

impl Default for SynthConfig {
    /// 400 schools; students carry father and mother education, teachers
    /// their own education level, each on a four-step ordinal scale.
    fn default() -> Self {
        SynthConfig {
            n_entities: 400,
            children_min: 20,
            children_max: 60,
            attributes: vec![
                SynthAttribute::new("students", "father_edu", &PARENT_EDU, 1.0),
                SynthAttribute::new("students", "mother_edu", &PARENT_EDU, 1.0),
                SynthAttribute::new("teachers", "teacher_edu", &TEACHER_EDU, 1.0),
            ],
            quality_noise_sd: 1.0,
            seed: 42,
        }
    }
}

impl SynthConfig {
    /// Sets the signal strength of every attribute.
    pub fn with_signal(mut self, signal: f64) -> Self {
        for a in &mut self.attributes {
            a.signal = signal;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_entities < 40 {
            return bad(format!(
                "n_entities must be at least 40, got {}",
                self.n_entities
            ));
        }
        if self.children_min > self.children_max {
            return bad(format!(
                "children_min {} exceeds children_max {}",
                self.children_min, self.children_max
            ));
        }
        if !(self.quality_noise_sd >= 0.0 && self.quality_noise_sd.is_finite()) {
            return bad(format!(
                "quality_noise_sd must be finite and >= 0, got {}",
                self.quality_noise_sd
            ));
        }
        if self.attributes.is_empty() {
            return bad("at least one attribute is required".into());
        }
        let mut names = BTreeMap::new();
        for a in &self.attributes {
            if a.table.is_empty() || a.name.is_empty() || a.name == "entity_id" {
                return bad(format!(
                    "invalid table/attribute name `{}.{}`",
                    a.table, a.name
                ));
            }
            if names.insert(a.name.as_str(), ()).is_some() {
                return bad(format!("attribute `{}` declared twice", a.name));
            }
            if a.categories.len() < 3 {
                return bad(format!(
                    "attribute `{}` needs at least 3 categories",
                    a.name
                ));
            }
            let mut cats: Vec<&str> = a.categories.iter().map(|(c, _)| c.as_str()).collect();
            cats.sort_unstable();
            cats.dedup();
            if cats.len() != a.categories.len() || cats.iter().any(|c| c.is_empty()) {
                return bad(format!(
                    "attribute `{}` has empty or repeated categories",
                    a.name
                ));
            }
            if a.categories.iter().any(|(_, o)| !o.is_finite()) {
                return bad(format!("attribute `{}` has a non-finite ordinal", a.name));
            }
            if !(a.signal.is_finite() && a.signal >= 0.0) {
                return bad(format!(
                    "attribute `{}` has invalid signal {}",
                    a.name, a.signal
                ));
            }
        }
        Ok(())
    }

    /// Child table names in order of first appearance.
    pub fn tables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in &self.attributes {
            if !out.contains(&a.table.as_str()) {
                out.push(&a.table);
            }
        }
        out
    }
}

/// A generated dataset with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub decision: DecisionTable,
    pub grains: Vec<GrainTable>,
    /// Latent quality per entity, in decision-table order.
    pub quality: Vec<f64>,
    /// True ordinals of every attribute.
    pub weights: Vec<WeightTable>,
}

fn draw_category(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_entities;
    let width = n.to_string().len();
    let ids: Vec<String> = (1..=n).map(|i| format!("e{i:0width$}")).collect();
    let quality: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();

    // exactly ceil(n/4) positives; equal qualities keep entity order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| quality[b].total_cmp(&quality[a]).then(a.cmp(&b)));
    let mut positive = vec![false; n];
    for &i in &order[..n.div_ceil(4)] {
        positive[i] = true;
    }
    let decision = DecisionTable::new(
        ids.iter()
            .zip(&positive)
            .map(|(id, &p)| Entity::new(id.clone(), p))
            .collect(),
    )?;

    let mut grains = Vec::new();
    for table in cfg.tables() {
        let attrs: Vec<&SynthAttribute> =
            cfg.attributes.iter().filter(|a| a.table == table).collect();
        let mut rows = Vec::new();
        for (e, id) in ids.iter().enumerate() {
            let children = rng.random_range(cfg.children_min..=cfg.children_max);
            let probs: Vec<Vec<f64>> = attrs
                .iter()
                .map(|a| {
                    let noise: f64 = rng.sample(StandardNormal);
                    let seen = quality[e] + cfg.quality_noise_sd * noise;
                    let logits: Vec<f64> = a
                        .categories
                        .iter()
                        .map(|(_, o)| o * a.signal * seen)
                        .collect();
                    softmax(&logits)
                })
                .collect();
            for _ in 0..children {
                let values = attrs
                    .iter()
                    .zip(&probs)
                    .map(|(a, p)| {
                        a.categories[draw_category(p, rng.random::<f64>())]
                            .0
                            .clone()
                    })
                    .collect();
                rows.push(GrainRow {
                    entity_id: id.clone(),
                    values,
                });
            }
        }
        let names = attrs.iter().map(|a| a.name.clone()).collect();
        grains.push(GrainTable::new(table, names, rows)?);
    }

    let weights = cfg
        .attributes
        .iter()
        .map(|a| WeightTable::new(a.name.clone(), a.categories.iter().cloned().collect()))
        .collect::<Result<Vec<_>>>()?;

    Ok(SynthDataset {
        decision,
        grains,
        quality,
        weights,
    })
}
