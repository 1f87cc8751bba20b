//! Retrieval-augmented and full-context document QA over pre-extracted
//! paper text.
//!
//! Documents are split into contiguous, non-overlapping segments of about
//! 8000 characters (the join of all segments reproduces the source text
//! exactly), embedded into a per-document vector index, and queried by
//! cosine similarity: the single top-ranked segment is expanded by its
//! immediate neighbors on each side and handed to a language model.

pub mod pipeline;
pub mod provider;

pub use pipeline::{
    answer_full_context, answer_rag, answer_symbolic_context, PromptSet, QaOutcome, QaRequest,
    QaResponse,
};
pub use provider::{
    Embedder, HashEmbedder, HttpEmbedder, HttpLlm, LlmProvider, ProviderError, ScriptedLlm,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RagError {
    #[error("document is empty")]
    EmptyDocument,
    #[error("chunk size must be positive")]
    BadChunkSize,
    #[error("index is empty")]
    EmptyIndex,
    #[error("context does not parse as a table: {0}")]
    BadContext(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Chunking and retrieval parameters. The defaults are the paper-faithful
/// profile: 8000-character segments, zero overlap, one anchor segment
/// expanded by two neighbors on each side.
#[derive(Debug, Clone)]
pub struct RagConfig {
    pub chunk_size: usize,
    pub chunk_overlap: usize,
    pub top_k: usize,
    pub neighbor_radius: usize,
}

impl Default for RagConfig {
    fn default() -> Self {
        RagConfig { chunk_size: 8000, chunk_overlap: 0, top_k: 1, neighbor_radius: 2 }
    }
}

/// A contiguous slice of the source document, in character offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub index: usize,
    pub text: String,
    pub char_span: (usize, usize),
}

/// How far back from the hard chunk boundary a newline may soften the cut.
const SPLIT_WINDOW: usize = 200;

/// Split a document into segments of roughly `chunk_size` characters.
/// Split points prefer the last newline within a small window before the
/// hard boundary; otherwise the cut is hard. With zero overlap the
/// concatenation of all segment texts equals the source exactly.
pub fn segment_text(doc: &str, cfg: &RagConfig) -> Result<Vec<Segment>, RagError> {
    if cfg.chunk_size == 0 {
        return Err(RagError::BadChunkSize);
    }
    if doc.is_empty() {
        return Err(RagError::EmptyDocument);
    }
    let chars: Vec<char> = doc.chars().collect();
    let n = chars.len();
    let mut segments = Vec::new();
    let mut start = 0usize;
    while start < n {
        let hard = (start + cfg.chunk_size).min(n);
        let mut end = hard;
        if hard < n {
            let window_lo = hard.saturating_sub(SPLIT_WINDOW).max(start + 1);
            if let Some(pos) = (window_lo..hard).rev().find(|&i| chars[i] == '\n') {
                end = pos + 1; // newline stays with the left segment
            }
        }
        let text: String = chars[start..end].iter().collect();
        segments.push(Segment { index: segments.len(), text, char_span: (start, end) });
        if end == n {
            break;
        }
        start = end.saturating_sub(cfg.chunk_overlap).max(start + 1);
    }
    Ok(segments)
}

/// Cosine similarity; zero-magnitude vectors yield 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Per-document vector index: one embedding per segment.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    pub dim: usize,
    pub segments: Vec<Segment>,
    pub vectors: Vec<Vec<f64>>,
}

/// Embed every segment. Provider failures and zero vectors surface with
/// the offending segment index.
pub fn build_index(segments: Vec<Segment>, embedder: &dyn Embedder) -> Result<VectorIndex, RagError> {
    let mut vectors = Vec::with_capacity(segments.len());
    let mut dim = 0usize;
    for seg in &segments {
        let v = embedder
            .embed(&seg.text)
            .map_err(|e| ProviderError::AtSegment { segment: seg.index, source: Box::new(e) })?;
        if v.iter().all(|x| *x == 0.0) {
            return Err(ProviderError::ZeroVector { segment: seg.index }.into());
        }
        if dim == 0 {
            dim = v.len();
        } else if v.len() != dim {
            return Err(ProviderError::DimensionMismatch { expected: dim, found: v.len() }.into());
        }
        vectors.push(v);
    }
    Ok(VectorIndex { dim, segments, vectors })
}

/// Rank segments by cosine similarity to the query vector, take the top
/// anchor (ties go to the lower index), and expand it by
/// `neighbor_radius` segments on each side, clipped at document bounds.
/// Segments come back in index order.
pub fn retrieve(index: &VectorIndex, query_vector: &[f64], cfg: &RagConfig) -> Result<Vec<Segment>, RagError> {
    if index.segments.is_empty() {
        return Err(RagError::EmptyIndex);
    }
    let mut ranked: Vec<(usize, f64)> = index
        .vectors
        .iter()
        .enumerate()
        .map(|(i, v)| (i, cosine(query_vector, v)))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    let mut selected = std::collections::BTreeSet::new();
    for &(anchor, _) in ranked.iter().take(cfg.top_k.max(1)) {
        let lo = anchor.saturating_sub(cfg.neighbor_radius);
        let hi = (anchor + cfg.neighbor_radius).min(index.segments.len() - 1);
        selected.extend(lo..=hi);
    }
    Ok(selected.into_iter().map(|i| index.segments[i].clone()).collect())
}
