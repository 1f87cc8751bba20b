//! The three document-QA entry points: full context, retrieval-augmented,
//! and symbolic (CSV) context.

use super::provider::{Embedder, LlmProvider};
use super::{build_index, retrieve, segment_text, RagConfig, RagError};
use crate::tableio::{parse_result_table, ResultTable};
use std::path::Path;
use std::time::{Duration, Instant};

/// Prompt templates are versioned data files, not code; `{query}` and
/// `{context}` are the substitution points.
#[derive(Debug, Clone, Default)]
pub struct PromptSet {
    pub system: String,
    pub full_context: String,
    pub rag: String,
    pub symbolic: String,
}

impl PromptSet {
    pub fn load(dir: &Path) -> std::io::Result<PromptSet> {
        Ok(PromptSet {
            system: std::fs::read_to_string(dir.join("system.txt"))?,
            full_context: std::fs::read_to_string(dir.join("full_context.txt"))?,
            rag: std::fs::read_to_string(dir.join("rag.txt"))?,
            symbolic: std::fs::read_to_string(dir.join("symbolic_context.txt"))?,
        })
    }
}

fn render(template: &str, query: &str, context: &str) -> String {
    template.replace("{query}", query).replace("{context}", context)
}

/// One request to a language model: the query, its context texts, and the
/// system instruction.
#[derive(Debug, Clone)]
pub struct QaRequest {
    pub query_id: Option<String>,
    pub system_instruction: String,
    pub query: String,
    pub contexts: Vec<String>,
    pub prompt_template: Option<String>,
}

impl QaRequest {
    pub fn rendered_prompt(&self) -> String {
        let context = self.contexts.join("\n\n---\n\n");
        match &self.prompt_template {
            Some(t) => render(t, &self.query, &context),
            None => format!("{}\n\n{}", self.query, context),
        }
    }
}

/// A response is either parsed into a table or flagged invalid — never
/// both.
#[derive(Debug, Clone, PartialEq)]
pub enum QaOutcome {
    Parsed(ResultTable),
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct QaResponse {
    pub raw: String,
    pub outcome: QaOutcome,
    pub latency: Duration,
    pub provider: String,
}

impl QaResponse {
    pub fn is_valid(&self) -> bool {
        matches!(self.outcome, QaOutcome::Parsed(_))
    }

    /// Deterministic serialization: everything except the wall-clock
    /// latency, which is observational metadata.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(self.provider.as_bytes());
        out.push(b'\n');
        match &self.outcome {
            QaOutcome::Parsed(t) => {
                out.extend_from_slice(b"parsed\n");
                out.extend_from_slice(&t.to_csv(&crate::tableio::CsvProfile::default()));
            }
            QaOutcome::Invalid(reason) => {
                out.extend_from_slice(b"invalid\n");
                out.extend_from_slice(reason.as_bytes());
                out.push(b'\n');
            }
        }
        out.extend_from_slice(self.raw.as_bytes());
        out
    }
}

fn run_llm(llm: &dyn LlmProvider, request: &QaRequest) -> QaResponse {
    let start = Instant::now();
    match llm.complete(request) {
        Ok(raw) => {
            let outcome = match parse_result_table(&raw) {
                Ok(t) => QaOutcome::Parsed(t),
                Err(e) => QaOutcome::Invalid(format!("unparseable prediction: {e}")),
            };
            QaResponse { raw, outcome, latency: start.elapsed(), provider: llm.id().to_string() }
        }
        Err(e) => QaResponse {
            raw: String::new(),
            outcome: QaOutcome::Invalid(format!("provider failure: {e}")),
            latency: start.elapsed(),
            provider: llm.id().to_string(),
        },
    }
}

/// Setting 2a: hand the model the entire extracted document at once.
pub fn answer_full_context(
    doc: &str,
    query_id: Option<&str>,
    query: &str,
    llm: &dyn LlmProvider,
    prompts: &PromptSet,
) -> QaResponse {
    let request = QaRequest {
        query_id: query_id.map(String::from),
        system_instruction: prompts.system.clone(),
        query: query.to_string(),
        contexts: vec![doc.to_string()],
        prompt_template: Some(prompts.full_context.clone()),
    };
    run_llm(llm, &request)
}

/// Setting 2b: retrieve the top segment plus neighbors and answer only
/// from those. Fails before any model call when the index would be empty.
pub fn answer_rag(
    doc: &str,
    query_id: Option<&str>,
    query: &str,
    cfg: &RagConfig,
    embedder: &dyn Embedder,
    llm: &dyn LlmProvider,
    prompts: &PromptSet,
) -> Result<QaResponse, RagError> {
    let segments = segment_text(doc, cfg)?;
    let index = build_index(segments, embedder)?;
    if index.segments.is_empty() {
        return Err(RagError::EmptyIndex);
    }
    let query_vec = embedder.embed(query)?;
    let window = retrieve(&index, &query_vec, cfg)?;
    let request = QaRequest {
        query_id: query_id.map(String::from),
        system_instruction: prompts.system.clone(),
        query: query.to_string(),
        contexts: window.into_iter().map(|s| s.text).collect(),
        prompt_template: Some(prompts.rag.clone()),
    };
    Ok(run_llm(llm, &request))
}

/// Setting 3: the model sees the comparison itself, exported as CSV, and
/// never the source document. The CSV must parse before any model call.
pub fn answer_symbolic_context(
    comparison_csv: &[u8],
    query_id: Option<&str>,
    query: &str,
    llm: &dyn LlmProvider,
    prompts: &PromptSet,
) -> Result<QaResponse, RagError> {
    let text = std::str::from_utf8(comparison_csv)
        .map_err(|e| RagError::BadContext(e.to_string()))?;
    parse_result_table(text).map_err(|e| RagError::BadContext(e.to_string()))?;
    let request = QaRequest {
        query_id: query_id.map(String::from),
        system_instruction: prompts.system.clone(),
        query: query.to_string(),
        contexts: vec![text.to_string()],
        prompt_template: Some(prompts.symbolic.clone()),
    };
    Ok(run_llm(llm, &request))
}
