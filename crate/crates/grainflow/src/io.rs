//! CSV readers and writers for decision tables, child tables, weights,
//! scores and generated datasets.
//!
//! Input files are UTF-8, comma-separated, with a header line. Fields are
//! plain (no embedded commas).

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use grainflow_core::relational::{DecisionTable, Entity, GrainRow, GrainTable};
use grainflow_core::synthgen::SynthDataset;
use grainflow_core::transforms::WeightTable;

use crate::{Error, Result};

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Read {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}

fn header(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<String>> {
    Ok(rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect())
}

/// Iterates data records with their 1-based line numbers.
fn records(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn expect_header(path: &Path, got: &[String], want: &[&str]) -> Result<()> {
    if got != want {
        return Err(Error::parse(
            path,
            1,
            format!(
                "header must be `{}`, found `{}`",
                want.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(())
}

/// Reads `entity_id,target` with targets `0` or `1`.
pub fn load_decision_table(path: &Path) -> Result<DecisionTable> {
    let mut rdr = reader(path)?;
    let head = header(path, &mut rdr)?;
    expect_header(path, &head, &["entity_id", "target"])?;
    let mut entities = Vec::new();
    for (line, rec) in records(path, &mut rdr)? {
        if rec.len() != 2 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 2 fields, found {}", rec.len()),
            ));
        }
        let positive = match &rec[1] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("target must be 0 or 1, found `{other}`"),
                ))
            }
        };
        entities.push(Entity::new(&rec[0], positive));
    }
    DecisionTable::new(entities).map_err(|source| Error::Data {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `entity_id,<attr>...`; short rows get the empty category.
pub fn load_grain_table(path: &Path, name: &str) -> Result<GrainTable> {
    let mut rdr = reader(path)?;
    let head = header(path, &mut rdr)?;
    if head.first().map(String::as_str) != Some("entity_id") {
        return Err(Error::parse(path, 1, "first column must be `entity_id`"));
    }
    let mut rows = Vec::new();
    for (line, rec) in records(path, &mut rdr)? {
        if rec.len() > head.len() {
            return Err(Error::parse(
                path,
                line,
                format!("{} fields for {} columns", rec.len(), head.len()),
            ));
        }
        rows.push(GrainRow {
            entity_id: rec.get(0).unwrap_or_default().to_string(),
            values: rec.iter().skip(1).map(str::to_string).collect(),
        });
    }
    GrainTable::new(name, head[1..].to_vec(), rows).map_err(|source| Error::Data {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `attribute,category,weight` into one table per attribute.
pub fn load_weights(path: &Path) -> Result<BTreeMap<String, WeightTable>> {
    let mut rdr = reader(path)?;
    let head = header(path, &mut rdr)?;
    expect_header(path, &head, &["attribute", "category", "weight"])?;
    let mut raw: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (line, rec) in records(path, &mut rdr)? {
        if rec.len() != 3 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 3 fields, found {}", rec.len()),
            ));
        }
        let weight: f64 = rec[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("invalid weight `{}`", &rec[2])))?;
        let slot = raw.entry(rec[0].to_string()).or_default();
        if slot.insert(rec[1].to_string(), weight).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate weight for `{}`/`{}`", &rec[0], &rec[1]),
            ));
        }
    }
    raw.into_iter()
        .map(|(attr, w)| {
            let table = WeightTable::new(attr.clone(), w).map_err(|source| Error::Data {
                path: path.to_path_buf(),
                source,
            })?;
            Ok((attr, table))
        })
        .collect()
}

/// Reads `score,label` rows.
pub fn load_scores(path: &Path) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut rdr = reader(path)?;
    let head = header(path, &mut rdr)?;
    expect_header(path, &head, &["score", "label"])?;
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in records(path, &mut rdr)? {
        if rec.len() != 2 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 2 fields, found {}", rec.len()),
            ));
        }
        scores.push(
            rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line, format!("invalid score `{}`", &rec[0])))?,
        );
        labels.push(match rec[1].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("label must be 0 or 1, found `{other}`"),
                ))
            }
        });
    }
    Ok((scores, labels))
}

/// Reads two numeric columns, by name or the first two when `columns` is `None`.
pub fn load_paired_columns(
    path: &Path,
    columns: Option<(&str, &str)>,
) -> Result<(String, String, Vec<f64>, Vec<f64>)> {
    let mut rdr = reader(path)?;
    let head = header(path, &mut rdr)?;
    let find = |name: &str| {
        head.iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(path, 1, format!("no column named `{name}`")))
    };
    let (ia, ib) = match columns {
        Some((a, b)) => (find(a)?, find(b)?),
        None if head.len() >= 2 => (0, 1),
        None => return Err(Error::parse(path, 1, "need at least two columns")),
    };
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (line, rec) in records(path, &mut rdr)? {
        let num = |i: usize| -> Result<f64> {
            let field = rec.get(i).unwrap_or_default().trim();
            field
                .parse()
                .map_err(|_| Error::parse(path, line, format!("invalid number `{field}`")))
        };
        a.push(num(ia)?);
        b.push(num(ib)?);
    }
    Ok((head[ia].clone(), head[ib].clone(), a, b))
}

/// CSV writer on a buffered file.
pub struct CsvFile {
    path: std::path::PathBuf,
    inner: csv::Writer<BufWriter<File>>,
}

impl CsvFile {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })?;
        let mut f = CsvFile {
            path: path.to_path_buf(),
            inner: csv::Writer::from_writer(BufWriter::new(file)),
        };
        f.row(header)?;
        Ok(f)
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner
            .write_record(fields)
            .map_err(|e| self.error(e.into()))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| self.error(e))
    }

    fn error(&self, source: io::Error) -> Error {
        Error::Write {
            path: self.path.clone(),
            source,
        }
    }
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `decision.csv`, one `<table>.csv` per child table, `truth.csv`
/// (`entity_id,quality,target`) and `weights.csv` (the true ordinals).
pub fn write_synth_dataset(dir: &Path, data: &SynthDataset) -> Result<()> {
    create_dir(dir)?;
    let target = |p: bool| if p { "1" } else { "0" };

    let mut f = CsvFile::create(&dir.join("decision.csv"), &["entity_id", "target"])?;
    for e in data.decision.entities() {
        f.row([e.id.as_str(), target(e.positive)])?;
    }
    f.finish()?;

    for g in &data.grains {
        let mut head = vec!["entity_id"];
        head.extend(g.attributes().iter().map(String::as_str));
        let mut f = CsvFile::create(&dir.join(format!("{}.csv", g.name())), &head)?;
        for r in g.rows() {
            f.row(
                std::iter::once(r.entity_id.as_str()).chain(r.values.iter().map(String::as_str)),
            )?;
        }
        f.finish()?;
    }

    let mut f = CsvFile::create(&dir.join("truth.csv"), &["entity_id", "quality", "target"])?;
    for (e, q) in data.decision.entities().iter().zip(&data.quality) {
        f.row([e.id.clone(), q.to_string(), target(e.positive).to_string()])?;
    }
    f.finish()?;

    write_weights(&dir.join("weights.csv"), &data.weights)
}

pub fn write_weights(path: &Path, weights: &[WeightTable]) -> Result<()> {
    let mut f = CsvFile::create(path, &["attribute", "category", "weight"])?;
    for w in weights {
        for (cat, value) in w.iter() {
            f.row([
                w.attribute().to_string(),
                cat.to_string(),
                value.to_string(),
            ])?;
        }
    }
    f.finish()
}

/// Flushes `text` to stdout, reporting a closed pipe as a write error.
pub fn print(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| Error::Write {
            path: "<stdout>".into(),
            source,
        })
}
