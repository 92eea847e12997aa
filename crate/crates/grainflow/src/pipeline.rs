//! Glue between loaded files and the core algorithms.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use grainflow_core::evaluation::{
    Approach, AttributeRef, ComparisonConfig, ComparisonPlan, ComparisonReport,
};
use grainflow_core::histogram::{to_histogram, CategoryHistogram, CategoryVocabulary};
use grainflow_core::relational::{
    validate_links, CategoryCounts, DecisionTable, GrainTable, LinkReport,
};
use grainflow_core::transforms::{fit_rgt, split_transform_sample, FittedTransform};

use crate::{io, Error, Result};

/// Decision table, child tables and their link report.
#[derive(Debug)]
pub struct Inputs {
    pub decision: DecisionTable,
    pub grains: Vec<GrainTable>,
    pub links: LinkReport,
}

/// Loads and cross-checks the input tables. Orphan rows are an error under
/// `strict` and are otherwise left in the report for the caller to warn about.
pub fn load_inputs(decision: &Path, grains: &[(String, PathBuf)], strict: bool) -> Result<Inputs> {
    let decision = io::load_decision_table(decision)?;
    let mut tables = Vec::with_capacity(grains.len());
    for (name, path) in grains {
        if tables.iter().any(|g: &GrainTable| g.name() == name) {
            return Err(Error::Usage(format!("child table `{name}` given twice")));
        }
        tables.push(io::load_grain_table(path, name)?);
    }
    let links = validate_links(&decision, &tables, strict)?;
    Ok(Inputs {
        decision,
        grains: tables,
        links,
    })
}

/// Resolves `table.attribute`, or a bare attribute name that exactly one
/// child table declares.
pub fn resolve_attribute(grains: &[GrainTable], spec: &str) -> Result<AttributeRef> {
    if let Some((table, attr)) = spec.split_once('.') {
        if let Some(g) = grains.iter().find(|g| g.name() == table) {
            g.attribute_index(attr)?;
            return Ok(AttributeRef::new(table, attr));
        }
    }
    let owners: Vec<&GrainTable> = grains
        .iter()
        .filter(|g| g.attributes().iter().any(|a| a == spec))
        .collect();
    match owners.as_slice() {
        [g] => Ok(AttributeRef::new(g.name(), spec)),
        [] => Err(Error::Usage(format!(
            "no child table has an attribute `{spec}`"
        ))),
        _ => Err(Error::Usage(format!(
            "attribute `{spec}` is ambiguous; qualify it as <table>.{spec}"
        ))),
    }
}

/// Runs all folds on a pool of `jobs` threads. Results are reduced in fold
/// order, so the report does not depend on `jobs`.
pub fn run_comparison_parallel(plan: &ComparisonPlan<'_>, jobs: usize) -> Result<ComparisonReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    let folds = pool.install(|| {
        (0..plan.k())
            .into_par_iter()
            .map(|f| plan.run_fold(f))
            .collect::<Vec<_>>()
    });
    // first error by fold index, independent of scheduling
    let folds = folds.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(plan.assemble(folds)?)
}

/// Decision-grain features produced by one transform.
#[derive(Debug)]
pub struct TransformOutput {
    pub columns: Vec<String>,
    /// (entity id, target, features) for every entity that was transformed.
    pub rows: Vec<(String, bool, Vec<f64>)>,
    pub transforms: Vec<(AttributeRef, FittedTransform)>,
    /// Histograms of every decision entity, per attribute.
    pub histograms: Vec<(AttributeRef, Vec<CategoryHistogram>)>,
    /// Attributes that RGT left as mode columns for having two or fewer categories.
    pub not_regressed: Vec<AttributeRef>,
    /// Entity ids dropped with the exclusive RGT sample.
    pub discarded: Vec<String>,
    pub childless: usize,
}

/// Fits one approach on the whole decision table and applies it.
///
/// RGT is fitted on a stratified exclusive sample which is then discarded:
/// only the remaining entities are returned. Mode and WGT need no sample and
/// transform every entity.
pub fn transform(
    inputs: &Inputs,
    attributes: &[AttributeRef],
    approach: Approach,
    cfg: &ComparisonConfig,
    seed: u64,
) -> Result<TransformOutput> {
    let decision = &inputs.decision;
    let index = decision.index();
    let labels: Vec<bool> = decision.entities().iter().map(|e| e.positive).collect();

    let mut histograms = Vec::with_capacity(attributes.len());
    let mut childless = 0;
    for a in attributes {
        let grain = inputs
            .grains
            .iter()
            .find(|g| g.name() == a.table)
            .ok_or_else(|| Error::Usage(format!("unknown child table `{}`", a.table)))?;
        let mut per_entity = vec![CategoryCounts::new(); decision.len()];
        for (id, c) in grain.group_by_entity(&a.attribute)? {
            if let Some(&i) = index.get(id.as_str()) {
                per_entity[i] = c;
            }
        }
        let ids = decision.entities().iter().map(|e| &e.id).zip(&per_entity);
        let vocab = Arc::new(CategoryVocabulary::from_counts(
            &a.attribute,
            ids,
            |_| true,
            cfg.min_category_count,
        )?);
        let hs: Vec<CategoryHistogram> =
            per_entity.iter().map(|c| to_histogram(c, &vocab)).collect();
        childless += hs.iter().filter(|h| h.is_childless()).count();
        histograms.push((a.clone(), hs));
    }

    let all: Vec<usize> = (0..decision.len()).collect();
    let (keep, discarded) = if approach == Approach::Rgt {
        let split = split_transform_sample(decision, &all, cfg.rgt_sample_frac, seed)?;
        (split.rest, split.sample)
    } else {
        (all, Vec::new())
    };

    let mut transforms = Vec::with_capacity(attributes.len());
    let mut not_regressed = Vec::new();
    for (a, hs) in &histograms {
        let vocab = Arc::clone(hs[0].vocabulary());
        let t = match approach {
            Approach::Mode => FittedTransform::mode(vocab),
            Approach::Wgt => {
                let w = cfg.weights.get(&a.attribute).ok_or_else(|| {
                    Error::Usage(format!("weights file has no entries for `{}`", a.attribute))
                })?;
                FittedTransform::wgt(vocab, w)?
            }
            Approach::Rgt if !vocab.is_eligible() => {
                not_regressed.push(a.clone());
                FittedTransform::mode(vocab)
            }
            Approach::Rgt => {
                let sample: Vec<CategoryHistogram> =
                    discarded.iter().map(|&i| hs[i].clone()).collect();
                let ys: Vec<bool> = discarded.iter().map(|&i| labels[i]).collect();
                fit_rgt(&sample, &ys, &cfg.solver, cfg.rgt_output)?
            }
        };
        transforms.push((a.clone(), t));
    }

    let columns = transforms
        .iter()
        .flat_map(|(_, t)| t.feature_names())
        .collect();
    let mut rows = Vec::with_capacity(keep.len());
    for &i in &keep {
        let mut features = Vec::new();
        for ((_, t), (_, hs)) in transforms.iter().zip(&histograms) {
            features.extend(t.features(&hs[i])?);
        }
        let e = &decision.entities()[i];
        rows.push((e.id.clone(), e.positive, features));
    }

    Ok(TransformOutput {
        columns,
        rows,
        transforms,
        histograms,
        not_regressed,
        discarded: discarded
            .iter()
            .map(|&i| decision.entities()[i].id.clone())
            .collect(),
        childless,
    })
}
