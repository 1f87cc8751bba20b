//! Bit-exact table serialization.
//!
//! Comparisons travel as wide-format CSV (one row per contribution, one
//! column per property). Result tables — both gold answers and model
//! predictions — are parsed from CSV or pipe-delimited markdown, the two
//! shapes language models actually emit.

use crate::model::{Comparison, PropertyDef, PropertyKind};
use crate::value::{parse_scalar, CellValue};
use std::collections::BTreeMap;
use std::io::Write;
use thiserror::Error;

/// Serialization profile. The default is a plain spreadsheet dialect:
/// comma, double quote, empty string for absent values, `.` decimals.
#[derive(Debug, Clone)]
pub struct CsvProfile {
    pub delimiter: u8,
    pub quote: u8,
    pub absent_marker: String,
}

impl Default for CsvProfile {
    fn default() -> Self {
        CsvProfile { delimiter: b',', quote: b'"', absent_marker: String::new() }
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("no table found in input")]
    NoTable,
    #[error("ragged row at line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("duplicate column name {0}")]
    DuplicateColumn(String),
    #[error("missing required header column {0}")]
    MissingHeader(String),
    #[error("malformed property header {0}")]
    BadPropertyHeader(String),
    #[error("unparseable numeric value {value} in column {column} at line {line}")]
    BadNumeric { value: String, column: String, line: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A rectangular answer table with named columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<CellValue>>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>) -> Self {
        ResultTable { columns, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<CellValue>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Serialize as CSV under the given profile. Equal tables produce
    /// identical bytes.
    pub fn to_csv(&self, profile: &CsvProfile) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(profile.delimiter)
            .quote(profile.quote)
            .quote_style(csv::QuoteStyle::Necessary)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            let rec: Vec<String> = row
                .iter()
                .map(|c| if c.is_absent() { profile.absent_marker.clone() } else { c.render() })
                .collect();
            w.write_record(&rec).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Render as a pipe-delimited markdown table.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("| ");
        out.push_str(&self.columns.join(" | "));
        out.push_str(" |\n|");
        for _ in &self.columns {
            out.push_str(" --- |");
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str("| ");
            let cells: Vec<String> = row.iter().map(|c| c.render()).collect();
            out.push_str(&cells.join(" | "));
            out.push_str(" |\n");
        }
        out
    }

    /// Transpose: the first column becomes the header row and vice versa.
    pub fn transpose(&self) -> ResultTable {
        if self.columns.is_empty() {
            return self.clone();
        }
        let mut columns = vec![self.columns[0].clone()];
        for row in &self.rows {
            columns.push(row[0].render());
        }
        let mut rows = Vec::new();
        for (j, name) in self.columns.iter().enumerate().skip(1) {
            let mut row = vec![CellValue::text(name.clone())];
            for r in &self.rows {
                row.push(r[j].clone());
            }
            rows.push(row);
        }
        ResultTable { columns, rows }
    }
}

/// Trim cells, normalize absent markers and order rows lexicographically.
/// Used only for byte-identical golden-file comparison, never before
/// similarity scoring.
pub fn canonicalize(t: &ResultTable) -> ResultTable {
    let columns: Vec<String> = t.columns.iter().map(|c| c.trim().to_string()).collect();
    let mut rows: Vec<Vec<CellValue>> = t
        .rows
        .iter()
        .map(|row| row.iter().map(canonical_cell).collect())
        .collect();
    rows.sort_by(|a, b| {
        let ka: Vec<String> = a.iter().map(|c| c.render()).collect();
        let kb: Vec<String> = b.iter().map(|c| c.render()).collect();
        ka.cmp(&kb)
    });
    ResultTable { columns, rows }
}

fn canonical_cell(c: &CellValue) -> CellValue {
    match c {
        CellValue::Text(s) => {
            let t = s.trim();
            if t.is_empty() || t == "--" || t == "\u{2014}" {
                CellValue::Absent
            } else {
                CellValue::Text(t.to_string())
            }
        }
        other => other.clone(),
    }
}

/// Parse a result table from text: a pipe-delimited markdown table (with
/// an optional dash separator line) or CSV. Anything else is an error,
/// never a guess.
pub fn parse_result_table(text: &str) -> Result<ResultTable, TableError> {
    let lines: Vec<&str> = text.lines().collect();
    // Prefer a contiguous pipe-table block anywhere in the text.
    if let Some(block) = find_pipe_block(&lines) {
        return parse_pipe_block(&block);
    }
    // Otherwise the whole input must be CSV.
    let body = text.trim();
    if body.is_empty() || !body.lines().next().unwrap_or("").contains(',') {
        return Err(TableError::NoTable);
    }
    parse_csv_table(body.as_bytes(), &CsvProfile::default())
}

fn find_pipe_block<'a>(lines: &[&'a str]) -> Option<Vec<&'a str>> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, line) in lines.iter().enumerate() {
        let is_row = line.trim_start().starts_with('|') && line.matches('|').count() >= 2;
        match (is_row, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.map_or(true, |(bs, be)| i - s > be - bs) {
                    best = Some((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        let i = lines.len();
        if best.map_or(true, |(bs, be)| i - s > be - bs) {
            best = Some((s, i));
        }
    }
    let (s, e) = best?;
    if e - s < 2 {
        return None;
    }
    Some(lines[s..e].to_vec())
}

fn parse_pipe_block(block: &[&str]) -> Result<ResultTable, TableError> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, line) in block.iter().enumerate() {
        let trimmed = line.trim();
        let inner = trimmed.trim_start_matches('|').trim_end_matches('|');
        let cells: Vec<String> = inner.split('|').map(|c| c.trim().to_string()).collect();
        // Drop the markdown separator line of dashes/colons.
        if i > 0 && cells.iter().all(|c| !c.is_empty() && c.chars().all(|ch| matches!(ch, '-' | ':' | ' '))) {
            continue;
        }
        rows.push(cells);
    }
    if rows.len() < 2 {
        return Err(TableError::NoTable);
    }
    let header = rows.remove(0);
    check_unique(&header)?;
    let mut table = ResultTable::new(header);
    for (i, cells) in rows.into_iter().enumerate() {
        if cells.len() != table.columns.len() {
            return Err(TableError::RaggedRow {
                line: i + 2,
                expected: table.columns.len(),
                found: cells.len(),
            });
        }
        table.rows.push(cells.iter().map(|c| parse_scalar(c)).collect());
    }
    Ok(table)
}

fn parse_csv_table(bytes: &[u8], profile: &CsvProfile) -> Result<ResultTable, TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(profile.delimiter)
        .quote(profile.quote)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = rdr.records();
    let header: Vec<String> = match records.next() {
        Some(r) => r?.iter().map(|c| c.to_string()).collect(),
        None => return Err(TableError::NoTable),
    };
    check_unique(&header)?;
    let mut table = ResultTable::new(header);
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != table.columns.len() {
            return Err(TableError::RaggedRow {
                line: i + 2,
                expected: table.columns.len(),
                found: rec.len(),
            });
        }
        table.rows.push(rec.iter().map(parse_scalar).collect());
    }
    Ok(table)
}

fn check_unique(names: &[String]) -> Result<(), TableError> {
    let mut seen = std::collections::BTreeSet::new();
    for n in names {
        if !seen.insert(n.clone()) {
            return Err(TableError::DuplicateColumn(n.clone()));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Comparison CSV: wide format, original-table orientation.
//
// Header: `contribution,paper` followed by one column per property, written
// as `<id>: <label> [<unit>]` (numeric), `<id>: <label> {res}` (resource)
// or `<id>: <label>` (text). Units live in headers, never in cells.
// ---------------------------------------------------------------------------

/// Serialize a comparison. Deterministic byte output for equal inputs.
pub fn export_comparison_csv(c: &Comparison, profile: &CsvProfile) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(profile.delimiter)
        .quote(profile.quote)
        .quote_style(csv::QuoteStyle::Necessary)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["contribution".to_string(), "paper".to_string()];
    for p in &c.properties {
        header.push(property_header(p));
    }
    w.write_record(&header).expect("in-memory write");
    for contrib in &c.contributions {
        let mut rec = vec![contrib.id.clone(), contrib.paper_id.clone()];
        for p in &c.properties {
            let cell = contrib.cells.get(&p.id).cloned().unwrap_or(CellValue::Absent);
            rec.push(if cell.is_absent() { profile.absent_marker.clone() } else { cell.render() });
        }
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn property_header(p: &PropertyDef) -> String {
    match p.kind {
        PropertyKind::Numeric => {
            format!("{}: {} [{}]", p.id, p.label, p.unit.clone().unwrap_or_default())
        }
        PropertyKind::Resource => format!("{}: {} {{res}}", p.id, p.label),
        PropertyKind::Text => format!("{}: {}", p.id, p.label),
    }
}

fn parse_property_header(h: &str) -> Result<PropertyDef, TableError> {
    let (id, rest) = h
        .split_once(':')
        .ok_or_else(|| TableError::BadPropertyHeader(h.to_string()))?;
    let id = id.trim();
    let rest = rest.trim();
    if id.is_empty() || rest.is_empty() {
        return Err(TableError::BadPropertyHeader(h.to_string()));
    }
    if let Some(label) = rest.strip_suffix("{res}") {
        return Ok(PropertyDef::resource(id, label.trim()));
    }
    if rest.ends_with(']') {
        if let Some(open) = rest.rfind('[') {
            let label = rest[..open].trim();
            let unit = &rest[open + 1..rest.len() - 1];
            return Ok(PropertyDef::numeric(id, label, unit));
        }
    }
    Ok(PropertyDef::text(id, rest))
}

/// Stable resource id minted from a label, shared across all cells and
/// comparisons referencing the same entity.
pub fn resource_id(label: &str) -> String {
    let mut out = String::with_capacity(label.len() + 4);
    out.push_str("res-");
    let mut dash = false;
    for ch in label.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
            dash = false;
        } else if !dash {
            out.push('-');
            dash = true;
        }
    }
    out.trim_end_matches('-').to_string()
}

/// Inverse of [`export_comparison_csv`] for files it produced; tolerant of
/// ranges and qualified numbers in numeric columns.
pub fn import_comparison_csv(
    bytes: &[u8],
    profile: &CsvProfile,
    id: impl Into<String>,
    title: impl Into<String>,
) -> Result<Comparison, TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(profile.delimiter)
        .quote(profile.quote)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = rdr.records();
    let header: Vec<String> = match records.next() {
        Some(r) => r?.iter().map(|c| c.to_string()).collect(),
        None => return Err(TableError::NoTable),
    };
    check_unique(&header)?;
    if header.first().map(String::as_str) != Some("contribution") {
        return Err(TableError::MissingHeader("contribution".into()));
    }
    if header.get(1).map(String::as_str) != Some("paper") {
        return Err(TableError::MissingHeader("paper".into()));
    }
    let props: Vec<PropertyDef> = header[2..]
        .iter()
        .map(|h| parse_property_header(h))
        .collect::<Result<_, _>>()?;
    let mut cmp = Comparison::new(id, title, props)
        .map_err(|_| TableError::DuplicateColumn("property".into()))?;
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != header.len() {
            return Err(TableError::RaggedRow { line, expected: header.len(), found: rec.len() });
        }
        let mut cells: BTreeMap<String, CellValue> = BTreeMap::new();
        for (j, p) in cmp.properties.clone().iter().enumerate() {
            let raw = rec.get(j + 2).unwrap_or("").trim();
            if raw.is_empty() || raw == profile.absent_marker {
                continue;
            }
            let value = match p.kind {
                PropertyKind::Resource => {
                    CellValue::Resource { id: resource_id(raw), label: raw.to_string() }
                }
                PropertyKind::Text => CellValue::Text(raw.to_string()),
                PropertyKind::Numeric => {
                    let v = parse_scalar(raw);
                    match &v {
                        CellValue::Text(t) if t.chars().any(|c| c.is_ascii_digit()) => {
                            return Err(TableError::BadNumeric {
                                value: raw.to_string(),
                                column: p.label.clone(),
                                line,
                            });
                        }
                        _ => v,
                    }
                }
            };
            cells.insert(p.id.clone(), value);
        }
        cmp.add_contribution(rec.get(0).unwrap_or("").to_string(), rec.get(1).unwrap_or("").to_string(), cells)
            .map_err(|e| TableError::BadNumeric {
                value: e.to_string(),
                column: "contribution".into(),
                line,
            })?;
    }
    Ok(cmp)
}

/// Write bytes to a file, creating parent directories as needed.
pub fn write_bytes(path: &std::path::Path, bytes: &[u8]) -> Result<(), TableError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}
