//! Report files and the aligned text tables.
//!
//! Machine-readable files keep full precision (shortest round-trip decimal).
//! Text tables round to three or four decimals like a printed results table.

use std::fmt::Write as _;
use std::path::Path;

use grainflow_core::evaluation::{ComparisonReport, Metric, PairedTTest};
use grainflow_core::transforms::FittedTransform;

use crate::io::CsvFile;
use crate::pipeline::TransformOutput;
use crate::Result;

pub const FOLDS_FILE: &str = "folds.csv";
pub const TTESTS_FILE: &str = "ttests.csv";

/// `fold,approach,auc_roc,max_ks2`, folds numbered from 1.
pub fn write_folds(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut f = CsvFile::create(path, &["fold", "approach", "auc_roc", "max_ks2"])?;
    for fold in &report.folds {
        for s in &fold.scores {
            f.row([
                (fold.fold + 1).to_string(),
                s.approach.id().to_string(),
                s.auc_roc.to_string(),
                s.max_ks2.to_string(),
            ])?;
        }
    }
    f.finish()
}

/// `metric,pair,mean,sd,lim_inf,lim_sup,p`
pub fn write_ttests(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut f = CsvFile::create(
        path,
        &["metric", "pair", "mean", "sd", "lim_inf", "lim_sup", "p"],
    )?;
    for c in &report.ttests {
        let t = &c.test;
        f.row([
            c.metric.id().to_string(),
            c.pair_id(),
            t.mean.to_string(),
            t.sd.to_string(),
            t.lim_inf.to_string(),
            t.lim_sup.to_string(),
            t.p.to_string(),
        ])?;
    }
    f.finish()
}

/// Writes `folds.csv`, and `ttests.csv` when at least two approaches were compared.
pub fn write_report(dir: &Path, report: &ComparisonReport) -> Result<()> {
    crate::io::create_dir(dir)?;
    write_folds(&dir.join(FOLDS_FILE), report)?;
    if !report.ttests.is_empty() {
        write_ttests(&dir.join(TTESTS_FILE), report)?;
    }
    Ok(())
}

/// p-value with three decimals; anything below 0.0005 prints as `0.000`.
pub fn format_p(p: f64) -> String {
    format!("{p:.3}")
}

/// Per-fold metrics with mean, median and standard deviation rows.
pub fn fold_table(report: &ComparisonReport) -> String {
    let approaches = &report.approaches;
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "Metrics");
    for m in Metric::ALL {
        let _ = write!(out, "{:<width$}", m.label(), width = 8 * approaches.len());
    }
    out.push('\n');
    let _ = write!(out, "{:<10}", "Fold No.");
    for _ in Metric::ALL {
        for a in approaches {
            let _ = write!(out, "{:<8}", a.label());
        }
    }
    out.push('\n');
    for fold in &report.folds {
        let _ = write!(out, "{:<10}", fold.fold + 1);
        for m in Metric::ALL {
            for s in &fold.scores {
                let _ = write!(out, "{:<8.3}", s.get(m));
            }
        }
        out.push('\n');
    }
    for (label, pick) in [("Mean", 0usize), ("Median", 1), ("Std.Dev.", 2)] {
        let _ = write!(out, "{label:<10}");
        for m in Metric::ALL {
            for &a in approaches {
                let s = report.summary(a, m).expect("summary for every approach");
                let v = [s.mean, s.median, s.sd][pick];
                let _ = write!(out, "{v:<8.3}");
            }
        }
        out.push('\n');
    }
    out
}

/// Paired t-tests between approaches, one row per metric and pair.
pub fn ttest_table(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10}{:<12}{:>9}{:>10}{:>9}{:>9}{:>8}",
        "Metrics", "Approaches", "Mean", "Std.Dev.", "LimInf", "LimSup", "p-Val."
    );
    for c in &report.ttests {
        out.push_str(&ttest_row(c.metric.label(), &c.pair_label(), &c.test));
    }
    out
}

pub fn ttest_row(metric: &str, pair: &str, t: &PairedTTest) -> String {
    format!(
        "{:<10}{:<12}{:>9.4}{:>10.4}{:>9.4}{:>9.4}{:>8}\n",
        metric,
        pair,
        t.mean,
        t.sd,
        t.lim_inf,
        t.lim_sup,
        format_p(t.p)
    )
}

/// Both tables, separated by a blank line; the t-test table only when there are pairs.
pub fn render_tables(report: &ComparisonReport) -> String {
    let mut out = fold_table(report);
    if !report.ttests.is_empty() {
        out.push('\n');
        out.push_str(&ttest_table(report));
    }
    out
}

/// `entity_id,target,<feature columns>`
pub fn write_features(path: &Path, out: &TransformOutput) -> Result<()> {
    let mut head = vec!["entity_id", "target"];
    head.extend(out.columns.iter().map(String::as_str));
    let mut f = CsvFile::create(path, &head)?;
    for (id, positive, features) in &out.rows {
        let mut fields = vec![id.clone(), if *positive { "1" } else { "0" }.to_string()];
        fields.extend(features.iter().map(f64::to_string));
        f.row(fields)?;
    }
    f.finish()
}

/// Features as CSV text, for stdout.
pub fn features_csv(out: &TransformOutput) -> String {
    let mut s = String::from("entity_id,target");
    for c in &out.columns {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for (id, positive, features) in &out.rows {
        s.push_str(id);
        s.push_str(if *positive { ",1" } else { ",0" });
        for v in features {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// `entity_id,attribute,category,frequency` for every entity, attribute and slot.
pub fn write_histograms(path: &Path, out: &TransformOutput, ids: &[String]) -> Result<()> {
    let mut f = CsvFile::create(path, &["entity_id", "attribute", "category", "frequency"])?;
    for (a, hs) in &out.histograms {
        for (id, h) in ids.iter().zip(hs) {
            let vocab = h.vocabulary();
            for (slot, freq) in h.frequencies().iter().enumerate() {
                f.row([
                    id.clone(),
                    a.attribute.clone(),
                    vocab.slot_name(slot).to_string(),
                    freq.to_string(),
                ])?;
            }
        }
    }
    f.finish()
}

/// `term,value`: the intercept, then one coefficient per non-reference slot
/// in vocabulary order. Only RGT transforms have a model.
pub fn write_model(path: &Path, transform: &FittedTransform) -> Result<bool> {
    let FittedTransform::Rgt {
        vocab,
        reference,
        model,
        ..
    } = transform
    else {
        return Ok(false);
    };
    let mut f = CsvFile::create(path, &["term", "value"])?;
    f.row(["intercept".to_string(), model.intercept.to_string()])?;
    let slots = (0..vocab.len()).filter(|s| s != reference);
    for (slot, coef) in slots.zip(&model.coefficients) {
        f.row([vocab.slot_name(slot).to_string(), coef.to_string()])?;
    }
    f.finish()?;
    Ok(true)
}
