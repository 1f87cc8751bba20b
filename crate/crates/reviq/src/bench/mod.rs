//! Benchmark harness: runs the query corpus under one of four settings —
//! deterministic symbolic evaluation, full-document QA, retrieval-
//! augmented QA, or symbolic-CSV-context QA — scores predictions against
//! the gold tables and emits macro-averaged reports.

pub mod report;
pub mod run;

pub use report::{
    emit_per_query_text, emit_report_csv, emit_report_text, BenchReport, QueryScore, SystemLabel,
};
pub use run::{gold_echo_llm, run_replay, run_setting1, run_system, ProviderSet};

use crate::model::Comparison;
use crate::rms::Thresholds;
use crate::tableio::{import_comparison_csv, parse_result_table, CsvProfile, ResultTable};
use crate::rag::RagConfig;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("io on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("case {case}: gold table {path} is empty or unreadable")]
    BadGold { case: String, path: PathBuf },
    #[error("case {case}: unknown comparison {id}")]
    UnknownComparison { case: String, id: String },
    #[error("case {case}: unknown document {id}")]
    UnknownDoc { case: String, id: String },
    #[error("case {case}: query error: {message}")]
    Query { case: String, message: String },
    #[error("fixture self-check failed for {case}: evaluated table differs from gold\n--- evaluated ---\n{got}\n--- gold ---\n{want}")]
    GoldMismatch { case: String, got: String, want: String },
    #[error(transparent)]
    Table(#[from] crate::tableio::TableError),
}

/// One benchmark query: which comparisons it runs over, the query file,
/// the detailed natural-language version handed to models, the gold
/// table, and the source documents for the PDF-based settings.
#[derive(Debug, Clone)]
pub struct QueryCase {
    pub id: String,
    pub comparisons: Vec<String>,
    pub query_file: PathBuf,
    pub detailed_nl_query: String,
    pub gold_table: PathBuf,
    pub doc_ids: Vec<String>,
}

/// Which pipeline a system runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Setting {
    Sparql,
    FullContext,
    Rag,
    SymbolicContext,
}

impl Setting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Setting::Sparql => "sparql",
            Setting::FullContext => "full_context",
            Setting::Rag => "rag",
            Setting::SymbolicContext => "symbolic_context",
        }
    }

    pub fn parse(s: &str) -> Option<Setting> {
        match s.replace('-', "_").as_str() {
            "sparql" => Some(Setting::Sparql),
            "full_context" => Some(Setting::FullContext),
            "rag" => Some(Setting::Rag),
            "symbolic_context" => Some(Setting::SymbolicContext),
            _ => None,
        }
    }
}

/// One system under evaluation. The sparql setting takes no provider.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub setting: Setting,
    pub provider: Option<String>,
    pub rag: RagConfig,
    pub thresholds: Thresholds,
    pub concurrency: usize,
}

impl SystemConfig {
    pub fn new(setting: Setting) -> Self {
        SystemConfig {
            setting,
            provider: None,
            rag: RagConfig::default(),
            thresholds: Thresholds::default(),
            concurrency: 4,
        }
    }
}

// -- manifest ---------------------------------------------------------------

#[derive(Deserialize)]
struct RawManifest {
    #[serde(default)]
    prompts: Option<String>,
    #[serde(rename = "comparison", default)]
    comparisons: Vec<RawComparison>,
    #[serde(rename = "case", default)]
    cases: Vec<RawCase>,
    #[serde(rename = "doc", default)]
    docs: Vec<RawDoc>,
}

#[derive(Deserialize)]
struct RawComparison {
    id: String,
    title: String,
    file: String,
}

#[derive(Deserialize)]
struct RawDoc {
    id: String,
    file: String,
}

#[derive(Deserialize)]
struct RawCase {
    id: String,
    comparisons: Vec<String>,
    query: String,
    nl_query: String,
    gold: String,
    #[serde(default)]
    docs: Vec<String>,
}

/// The loaded fixture corpus: comparisons, query cases, documents and
/// prompt templates, all resolved relative to the manifest location.
pub struct Corpus {
    pub base: PathBuf,
    pub comparisons: BTreeMap<String, Comparison>,
    pub cases: Vec<QueryCase>,
    pub docs: BTreeMap<String, PathBuf>,
    pub prompts_dir: Option<PathBuf>,
}

impl Corpus {
    /// Load and validate a manifest: every referenced file must exist and
    /// every gold table must parse non-empty.
    pub fn load(manifest_path: &Path) -> Result<Corpus, BenchError> {
        let base = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let text = std::fs::read_to_string(manifest_path)
            .map_err(|e| BenchError::Io { path: manifest_path.to_path_buf(), source: e })?;
        let raw: RawManifest =
            toml::from_str(&text).map_err(|e| BenchError::Manifest(e.to_string()))?;
        let mut comparisons = BTreeMap::new();
        for rc in raw.comparisons {
            let path = base.join(&rc.file);
            let bytes = std::fs::read(&path)
                .map_err(|e| BenchError::Io { path: path.clone(), source: e })?;
            let cmp = import_comparison_csv(&bytes, &CsvProfile::default(), &rc.id, &rc.title)?;
            comparisons.insert(rc.id, cmp);
        }
        let mut docs = BTreeMap::new();
        for d in raw.docs {
            let path = base.join(&d.file);
            if !path.exists() {
                return Err(BenchError::Io {
                    path,
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "missing document"),
                });
            }
            docs.insert(d.id, path);
        }
        let mut cases = Vec::new();
        for c in raw.cases {
            let case = QueryCase {
                id: c.id.clone(),
                comparisons: c.comparisons,
                query_file: base.join(&c.query),
                detailed_nl_query: c.nl_query,
                gold_table: base.join(&c.gold),
                doc_ids: c.docs,
            };
            for id in &case.comparisons {
                if !comparisons.contains_key(id) {
                    return Err(BenchError::UnknownComparison { case: case.id, id: id.clone() });
                }
            }
            for id in &case.doc_ids {
                if !docs.contains_key(id) {
                    return Err(BenchError::UnknownDoc { case: case.id, id: id.clone() });
                }
            }
            // invariant: the gold table parses and is non-empty
            let gold = case.load_gold()?;
            if gold.is_empty() {
                return Err(BenchError::BadGold { case: case.id, path: case.gold_table });
            }
            cases.push(case);
        }
        let prompts_dir = raw.prompts.map(|p| base.join(p));
        Ok(Corpus { base, comparisons, cases, docs, prompts_dir })
    }

    /// The comparisons a case runs over, in manifest order.
    pub fn store_for(&self, case: &QueryCase) -> Vec<Comparison> {
        case.comparisons
            .iter()
            .filter_map(|id| self.comparisons.get(id).cloned())
            .collect()
    }

    pub fn doc_text_for(&self, case: &QueryCase) -> Result<String, BenchError> {
        let mut parts = Vec::new();
        for id in &case.doc_ids {
            let path = &self.docs[id];
            let text = std::fs::read_to_string(path)
                .map_err(|e| BenchError::Io { path: path.clone(), source: e })?;
            parts.push(text);
        }
        Ok(parts.join("\n\n"))
    }
}

impl QueryCase {
    pub fn load_query_text(&self) -> Result<String, BenchError> {
        std::fs::read_to_string(&self.query_file)
            .map_err(|e| BenchError::Io { path: self.query_file.clone(), source: e })
    }

    pub fn load_gold(&self) -> Result<ResultTable, BenchError> {
        let text = std::fs::read_to_string(&self.gold_table)
            .map_err(|e| BenchError::Io { path: self.gold_table.clone(), source: e })?;
        parse_result_table(&text)
            .map_err(|_| BenchError::BadGold { case: self.id.clone(), path: self.gold_table.clone() })
    }
}
