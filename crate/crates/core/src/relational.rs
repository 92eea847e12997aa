//! Decision-grain and lower-grain tables and the 1:n links between them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// One row of the decision grain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: String,
    pub positive: bool,
}

impl Entity {
    pub fn new(id: impl Into<String>, positive: bool) -> Self {
        Entity {
            id: id.into(),
            positive,
        }
    }
}

/// The table at which the binary decision is made.
///
/// Entity ids are opaque, case-sensitive and unique; both classes are present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTable {
    entities: Vec<Entity>,
}

impl DecisionTable {
    pub fn new(entities: Vec<Entity>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &entities {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::KeyCollision(e.id.clone()));
            }
        }
        let positives = entities.iter().filter(|e| e.positive).count();
        if positives == 0 || positives == entities.len() {
            return Err(Error::DegenerateData(alloc::format!(
                "decision table needs both classes ({} positive of {})",
                positives,
                entities.len()
            )));
        }
        Ok(DecisionTable { entities })
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.entities.iter().filter(|e| e.positive).count()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.entities.iter().position(|e| e.id == id)
    }

    /// Map from entity id to row index.
    pub fn index(&self) -> BTreeMap<&str, usize> {
        self.entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect()
    }
}

/// A child row: the owning entity and one category per declared attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrainRow {
    pub entity_id: String,
    pub values: Vec<String>,
}

/// A lower-grain table holding categorical attributes of child records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrainTable {
    name: String,
    attributes: Vec<String>,
    rows: Vec<GrainRow>,
}

impl GrainTable {
    /// Rows shorter than the attribute list are padded with the empty
    /// category; longer rows are rejected.
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<String>,
        mut rows: Vec<GrainRow>,
    ) -> Result<Self> {
        let name = name.into();
        if attributes.is_empty() {
            return Err(Error::Schema(alloc::format!(
                "table `{name}` declares no attribute columns"
            )));
        }
        let mut distinct = BTreeSet::new();
        for a in &attributes {
            if a == "entity_id" || !distinct.insert(a.as_str()) {
                return Err(Error::Schema(alloc::format!(
                    "table `{name}` has a repeated or reserved column `{a}`"
                )));
            }
        }
        for (i, row) in rows.iter_mut().enumerate() {
            if row.values.len() > attributes.len() {
                return Err(Error::Schema(alloc::format!(
                    "table `{name}` row {} has {} values for {} attributes",
                    i + 1,
                    row.values.len(),
                    attributes.len()
                )));
            }
            row.values.resize(attributes.len(), String::new());
        }
        Ok(GrainTable {
            name,
            attributes,
            rows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn rows(&self) -> &[GrainRow] {
        &self.rows
    }

    pub fn attribute_index(&self, attribute: &str) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a == attribute)
            .ok_or_else(|| Error::UnknownAttribute {
                table: self.name.clone(),
                attribute: attribute.to_string(),
            })
    }

    /// Per-entity category counts of one attribute.
    pub fn group_by_entity(&self, attribute: &str) -> Result<BTreeMap<String, CategoryCounts>> {
        let col = self.attribute_index(attribute)?;
        let mut out: BTreeMap<String, CategoryCounts> = BTreeMap::new();
        for row in &self.rows {
            let counts = out.entry(row.entity_id.clone()).or_default();
            *counts.entry(row.values[col].clone()).or_insert(0) += 1;
        }
        Ok(out)
    }
}

/// Category → number of child rows carrying it.
pub type CategoryCounts = BTreeMap<String, u64>;

/// A child row whose entity is missing from the decision table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orphan {
    pub table: String,
    /// Zero-based data row index.
    pub row: usize,
    pub entity_id: String,
}

/// Result of cross-checking child tables against the decision table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkReport {
    pub orphans: Vec<Orphan>,
    /// (table, entity id) pairs for entities without rows in that table.
    pub childless: Vec<(String, String)>,
}

impl LinkReport {
    pub fn is_clean(&self) -> bool {
        self.orphans.is_empty() && self.childless.is_empty()
    }
}

/// Lists orphan rows and childless entities. With `strict`, any orphan is an error.
pub fn validate_links(
    decision: &DecisionTable,
    grains: &[GrainTable],
    strict: bool,
) -> Result<LinkReport> {
    let index = decision.index();
    let mut report = LinkReport::default();
    for grain in grains {
        let mut has_rows = BTreeSet::new();
        let mut orphans = Vec::new();
        for (i, row) in grain.rows.iter().enumerate() {
            if index.contains_key(row.entity_id.as_str()) {
                has_rows.insert(row.entity_id.as_str());
            } else {
                orphans.push(Orphan {
                    table: grain.name.clone(),
                    row: i,
                    entity_id: row.entity_id.clone(),
                });
            }
        }
        if strict {
            if let Some(first) = orphans.first() {
                return Err(Error::ReferentialIntegrity {
                    table: grain.name.clone(),
                    first: first.entity_id.clone(),
                    count: orphans.len(),
                });
            }
        }
        report.orphans.extend(orphans);
        for e in decision.entities() {
            if !has_rows.contains(e.id.as_str()) {
                report.childless.push((grain.name.clone(), e.id.clone()));
            }
        }
    }
    Ok(report)
}
