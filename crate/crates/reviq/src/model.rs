//! In-memory model of machine-actionable comparison tables.
//!
//! A [`Comparison`] holds an ordered property schema and a list of
//! contributions, each linked to its source paper. Rows of the original
//! review table become contributions; the original column headers become
//! typed properties; recurring entities are resource values shared by id.

use crate::value::CellValue;
use std::collections::BTreeMap;
use thiserror::Error;

pub const PAPER_PREDICATE: &str = "paper";
pub const LABEL_PREDICATE: &str = "label";

/// What a property's cells are expected to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Numeric,
    Text,
    Resource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDef {
    pub id: String,
    pub label: String,
    pub kind: PropertyKind,
    /// Unit label for numeric properties; empty means dimensionless.
    pub unit: Option<String>,
}

impl PropertyDef {
    pub fn numeric(id: &str, label: &str, unit: &str) -> Self {
        PropertyDef {
            id: id.into(),
            label: label.into(),
            kind: PropertyKind::Numeric,
            unit: Some(unit.into()),
        }
    }

    pub fn text(id: &str, label: &str) -> Self {
        PropertyDef { id: id.into(), label: label.into(), kind: PropertyKind::Text, unit: None }
    }

    pub fn resource(id: &str, label: &str) -> Self {
        PropertyDef { id: id.into(), label: label.into(), kind: PropertyKind::Resource, unit: None }
    }
}

/// One row of the original review table, traceable to a publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contribution {
    pub id: String,
    pub paper_id: String,
    /// Property id -> value; at most one value per property.
    pub cells: BTreeMap<String, CellValue>,
}

/// A named set of contributions sharing a property schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub id: String,
    pub title: String,
    pub properties: Vec<PropertyDef>,
    pub contributions: Vec<Contribution>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate property id {0}")]
    DuplicateProperty(String),
    #[error("unknown property id {0}")]
    UnknownProperty(String),
    #[error("unknown contribution id {0}")]
    UnknownContribution(String),
    #[error("property {property} is {expected:?}-kind but cell holds {found}")]
    KindMismatch { property: String, expected: PropertyKind, found: String },
    #[error("contribution paper id must not be empty")]
    EmptyPaperId,
}

/// A violated model invariant, reported by [`Comparison::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub contribution: Option<String>,
    pub property: Option<String>,
    pub message: String,
}

impl Comparison {
    /// Create an empty comparison with the given schema.
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        properties: Vec<PropertyDef>,
    ) -> Result<Self, ModelError> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &properties {
            if !seen.insert(p.id.clone()) {
                return Err(ModelError::DuplicateProperty(p.id.clone()));
            }
        }
        Ok(Comparison { id: id.into(), title: title.into(), properties, contributions: Vec::new() })
    }

    pub fn property(&self, id: &str) -> Option<&PropertyDef> {
        self.properties.iter().find(|p| p.id == id)
    }

    /// Append a contribution. All cell property ids must exist in the
    /// schema and numeric cells must sit under numeric-kind properties.
    pub fn add_contribution(
        &mut self,
        id: impl Into<String>,
        paper_id: impl Into<String>,
        cells: BTreeMap<String, CellValue>,
    ) -> Result<String, ModelError> {
        let id = id.into();
        let paper_id = paper_id.into();
        if paper_id.is_empty() {
            return Err(ModelError::EmptyPaperId);
        }
        for (pid, value) in &cells {
            let def = self
                .property(pid)
                .ok_or_else(|| ModelError::UnknownProperty(pid.clone()))?;
            if let Some(found) = kind_conflict(def.kind, value) {
                return Err(ModelError::KindMismatch {
                    property: pid.clone(),
                    expected: def.kind,
                    found,
                });
            }
        }
        self.contributions.push(Contribution { id: id.clone(), paper_id, cells });
        Ok(id)
    }

    /// Stored value for (contribution, property); Absent when the cell was
    /// never set.
    pub fn get_cell(&self, contribution: &str, property: &str) -> Result<CellValue, ModelError> {
        if self.property(property).is_none() {
            return Err(ModelError::UnknownProperty(property.to_string()));
        }
        let c = self
            .contributions
            .iter()
            .find(|c| c.id == contribution)
            .ok_or_else(|| ModelError::UnknownContribution(contribution.to_string()))?;
        Ok(c.cells.get(property).cloned().unwrap_or(CellValue::Absent))
    }

    /// Lossless flattening into (subject, predicate, object) triples: one
    /// triple per non-Absent cell plus one paper link per contribution.
    /// Resource cells additionally carry their label as a triple keyed by
    /// the resource id, so labels survive the round trip.
    pub fn to_triples(&self) -> Vec<Triple> {
        let mut out = Vec::new();
        for c in &self.contributions {
            out.push(Triple {
                subject: c.id.clone(),
                predicate: PAPER_PREDICATE.to_string(),
                object: CellValue::text(c.paper_id.clone()),
            });
            for p in &self.properties {
                if let Some(v) = c.cells.get(&p.id) {
                    if !v.is_absent() {
                        out.push(Triple {
                            subject: c.id.clone(),
                            predicate: p.id.clone(),
                            object: v.clone(),
                        });
                        if let CellValue::Resource { id, label } = v {
                            out.push(Triple {
                                subject: id.clone(),
                                predicate: LABEL_PREDICATE.to_string(),
                                object: CellValue::text(label.clone()),
                            });
                        }
                    }
                }
            }
        }
        out.dedup();
        out
    }

    /// Inverse of [`Comparison::to_triples`] given the original schema.
    /// Contributions come back in first-seen subject order; equality with
    /// the source holds up to contribution ordering.
    pub fn from_triples(
        id: impl Into<String>,
        title: impl Into<String>,
        properties: Vec<PropertyDef>,
        triples: &[Triple],
    ) -> Result<Self, ModelError> {
        let mut cmp = Comparison::new(id, title, properties)?;
        let mut order: Vec<String> = Vec::new();
        let mut papers: BTreeMap<String, String> = BTreeMap::new();
        let mut cells: BTreeMap<String, BTreeMap<String, CellValue>> = BTreeMap::new();
        for t in triples {
            if t.predicate == LABEL_PREDICATE {
                continue; // label triples are derived from resource cells
            }
            if !order.contains(&t.subject) {
                order.push(t.subject.clone());
            }
            if t.predicate == PAPER_PREDICATE {
                papers.insert(t.subject.clone(), t.object.render());
            } else {
                cells.entry(t.subject.clone()).or_default().insert(t.predicate.clone(), t.object.clone());
            }
        }
        for subject in order {
            let paper = papers.remove(&subject).ok_or(ModelError::EmptyPaperId)?;
            let cells = cells.remove(&subject).unwrap_or_default();
            cmp.add_contribution(subject, paper, cells)?;
        }
        Ok(cmp)
    }

    /// Check every type invariant; an empty list means the comparison is
    /// well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.properties {
            if !seen.insert(&p.id) {
                out.push(Violation {
                    contribution: None,
                    property: Some(p.id.clone()),
                    message: "duplicate property id".into(),
                });
            }
        }
        let mut resource_labels: BTreeMap<&str, &str> = BTreeMap::new();
        for c in &self.contributions {
            if c.paper_id.is_empty() {
                out.push(Violation {
                    contribution: Some(c.id.clone()),
                    property: None,
                    message: "empty paper id".into(),
                });
            }
            for (pid, v) in &c.cells {
                match self.property(pid) {
                    None => out.push(Violation {
                        contribution: Some(c.id.clone()),
                        property: Some(pid.clone()),
                        message: "cell on undeclared property".into(),
                    }),
                    Some(def) => {
                        if let Some(found) = kind_conflict(def.kind, v) {
                            out.push(Violation {
                                contribution: Some(c.id.clone()),
                                property: Some(pid.clone()),
                                message: format!("kind mismatch: expected {:?}, found {found}", def.kind),
                            });
                        }
                    }
                }
                if let CellValue::Range { lo, hi } = v {
                    if lo > hi {
                        out.push(Violation {
                            contribution: Some(c.id.clone()),
                            property: Some(pid.clone()),
                            message: format!("range bounds out of order: {lo} > {hi}"),
                        });
                    }
                }
                if let CellValue::Resource { id, label } = v {
                    match resource_labels.get(id.as_str()) {
                        Some(known) if *known != label => out.push(Violation {
                            contribution: Some(c.id.clone()),
                            property: Some(pid.clone()),
                            message: format!("resource {id} carries conflicting labels"),
                        }),
                        _ => {
                            resource_labels.insert(id, label);
                        }
                    }
                }
            }
        }
        out
    }
}

fn kind_conflict(kind: PropertyKind, value: &CellValue) -> Option<String> {
    match (kind, value) {
        (_, CellValue::Absent) => None,
        (PropertyKind::Numeric, CellValue::Number(_) | CellValue::Range { .. }) => None,
        // tables report entries like "RT" under numeric columns
        (PropertyKind::Numeric, CellValue::Text(_)) => None,
        (PropertyKind::Text, CellValue::Text(_)) => None,
        (PropertyKind::Resource, CellValue::Resource { .. }) => None,
        (_, v) => Some(v.render()),
    }
}

/// One (subject, predicate, object) edge of the flattened graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: CellValue,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::parse_scalar;
    use rust_decimal::Decimal;

    fn dec(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn mosled_schema() -> Vec<PropertyDef> {
        vec![
            PropertyDef::text("P180031", "host material matrix"),
            PropertyDef::numeric("P180032", "annealing temperature", "°C"),
            PropertyDef::numeric("P180033", "external quantum efficiency", "%"),
            PropertyDef::numeric("P180034", "power efficiency", "x10-4"),
            PropertyDef::numeric("P180035", "threshold voltage", "V"),
            PropertyDef::numeric("P180036", "emission lifetime", "ms"),
            PropertyDef::numeric("P180037", "operational device lifetime", "h"),
        ]
    }

    #[test]
    fn creates_empty_comparison_with_schema() {
        let c = Comparison::new(
            "R1",
            "LHAR",
            vec![
                PropertyDef::numeric("P37561", "temperature", "°C"),
                PropertyDef::text("P180003", "LHAR type"),
                PropertyDef::numeric("P180008", "cTMA", ""),
            ],
        )
        .unwrap();
        assert_eq!(c.properties.len(), 3);
        assert!(c.contributions.is_empty());
    }

    #[test]
    fn rejects_duplicate_property_ids() {
        let err = Comparison::new(
            "R1",
            "dup",
            vec![PropertyDef::numeric("P37561", "a", ""), PropertyDef::numeric("P37561", "b", "")],
        )
        .unwrap_err();
        assert_eq!(err, ModelError::DuplicateProperty("P37561".into()));
    }

    #[test]
    fn mosled_schema_has_seven_properties() {
        let c = Comparison::new("R1469991", "Er3+ MOSLED performance", mosled_schema()).unwrap();
        assert_eq!(c.properties.len(), 7);
    }

    #[test]
    fn adds_mosled_row() {
        let mut c = Comparison::new("R1469991", "MOSLED", mosled_schema()).unwrap();
        let mut cells = BTreeMap::new();
        cells.insert("P180031".into(), CellValue::text("Ga2O3"));
        cells.insert("P180033".into(), CellValue::number(dec("36")));
        cells.insert("P180035".into(), CellValue::number(dec("15")));
        cells.insert("P180032".into(), CellValue::number(dec("900")));
        cells.insert("P180036".into(), CellValue::number(dec("2.04")));
        cells.insert("P180037".into(), CellValue::number(dec("100")));
        c.add_contribution("C1", "paper-ga2o3", cells).unwrap();
        assert_eq!(c.get_cell("C1", "P180033").unwrap(), CellValue::number(dec("36")));
    }

    #[test]
    fn rejects_cell_on_undeclared_property() {
        let mut c = Comparison::new("R1", "t", mosled_schema()).unwrap();
        let mut cells = BTreeMap::new();
        cells.insert("P999".into(), CellValue::text("x"));
        assert_eq!(
            c.add_contribution("C1", "p", cells).unwrap_err(),
            ModelError::UnknownProperty("P999".into())
        );
    }

    #[test]
    fn accepts_sparse_rows() {
        let mut c = Comparison::new("R1", "t", mosled_schema()).unwrap();
        let mut cells = BTreeMap::new();
        cells.insert("P180031".into(), CellValue::text("Ga2O3"));
        c.add_contribution("C1", "p", cells).unwrap();
        assert_eq!(c.get_cell("C1", "P180037").unwrap(), CellValue::Absent);
        assert!(c.get_cell("C1", "Pnope").is_err());
        assert!(c.get_cell("Cnope", "P180031").is_err());
    }

    #[test]
    fn triple_count_small() {
        let mut c = Comparison::new("R1", "t", mosled_schema()).unwrap();
        assert!(c.to_triples().is_empty());
        let mut cells = BTreeMap::new();
        cells.insert("P180031".into(), CellValue::text("Ga2O3"));
        cells.insert("P180033".into(), CellValue::number(dec("36")));
        cells.insert("P180035".into(), CellValue::number(dec("15")));
        c.add_contribution("C1", "p", cells).unwrap();
        // 3 cells + 1 paper link
        assert_eq!(c.to_triples().len(), 4);
    }

    #[test]
    fn fully_populated_mosled_comparison_yields_72_triples() {
        // Nine contributions with all seven properties set: 9 x (7 + 1).
        let mut c = Comparison::new("R1469991", "MOSLED", mosled_schema()).unwrap();
        let hosts = [
            "Ga2O3", "Al2O3:Yb", "Yb3Al5O12", "Lu3Al5O12", "Yb2O3", "Y3Ga5O12", "Gd3Ga5O12",
            "ZnGa2O4", "Al2O3-Y2O3",
        ];
        for (i, host) in hosts.iter().enumerate() {
            let mut cells = BTreeMap::new();
            cells.insert("P180031".into(), CellValue::text(*host));
            for (j, pid) in ["P180032", "P180033", "P180034", "P180035", "P180036", "P180037"]
                .iter()
                .enumerate()
            {
                cells.insert((*pid).into(), CellValue::number(Decimal::from((i * 10 + j) as i64)));
            }
            c.add_contribution(format!("C{i}"), format!("paper-{i}"), cells).unwrap();
        }
        assert_eq!(c.to_triples().len(), 72);
    }

    #[test]
    fn triples_round_trip() {
        let mut c = Comparison::new("R1", "t", mosled_schema()).unwrap();
        for (i, raw) in ["36", "~15", "0.15--0.20", "RT"].iter().enumerate() {
            let mut cells = BTreeMap::new();
            cells.insert("P180031".into(), CellValue::text(format!("host-{i}")));
            cells.insert("P180033".into(), parse_scalar(raw));
            c.add_contribution(format!("C{i}"), format!("p{i}"), cells).unwrap();
        }
        let back =
            Comparison::from_triples("R1", "t", mosled_schema(), &c.to_triples()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validate_reports_bad_range_and_empty_paper() {
        let mut c = Comparison::new("R1", "t", mosled_schema()).unwrap();
        let mut cells = BTreeMap::new();
        cells.insert("P180033".into(), CellValue::Range { lo: dec("5"), hi: dec("2") });
        c.contributions.push(Contribution { id: "C1".into(), paper_id: String::new(), cells });
        let violations = c.validate();
        assert_eq!(violations.len(), 2);
        assert!(violations.iter().any(|v| v.message.contains("range bounds")));
        assert!(violations.iter().any(|v| v.message.contains("empty paper id")));
    }

    #[test]
    fn validate_clean_for_constructed_comparisons() {
        let mut c = Comparison::new("R1", "t", mosled_schema()).unwrap();
        let mut cells = BTreeMap::new();
        cells.insert("P180031".into(), CellValue::text("Ga2O3"));
        c.add_contribution("C1", "p", cells).unwrap();
        assert!(c.validate().is_empty());
    }

    #[test]
    fn resource_identity_is_id_based_labels_are_data() {
        let a = CellValue::Resource { id: "r1".into(), label: "Ga2O3".into() };
        let b = CellValue::Resource { id: "r1".into(), label: "Ga2O3".into() };
        let c = CellValue::Resource { id: "r1".into(), label: "ga2o3".into() };
        assert_eq!(a, b);
        assert_ne!(a, c); // same id, different label bytes: not equal as cells
    }
}
