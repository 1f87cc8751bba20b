//! Relative Mapping Similarity (RMS) and Relative Number Set Similarity
//! (RNSS) for comparing predicted answer tables against gold tables.
//!
//! A table is decomposed into (row key, column key, value) mappings.
//! Predicted and gold mappings are paired by a minimum-cost bipartite
//! matching over key dissimilarity; each matched pair contributes the
//! product of its key and value similarity. Precision normalizes by the
//! prediction size, recall by the gold size. Both the original and
//! transposed layouts are considered, so scores are invariant to row and
//! column permutations and to transposition.

mod assign;
mod lev;

pub use assign::min_cost_assignment;
pub use lev::{levenshtein, nl_tau};

use crate::tableio::ResultTable;
use crate::value::{to_f64, CellValue};
use rust_decimal::Decimal;
use thiserror::Error;

/// Separator between row and column key in the concatenated matching key.
/// A non-printing unit separator prevents `ab`+`c` colliding with `a`+`bc`.
const KEY_SEP: char = '\u{1f}';

#[derive(Debug, Error, PartialEq)]
pub enum RmsError {
    #[error("gold table has no scorable entries")]
    EmptyGold,
    #[error("cannot macro-average an empty list")]
    EmptyList,
    #[error("threshold {0} out of range (0, 1]")]
    BadThreshold(f64),
}

/// Similarity thresholds: `tau` scales the normalized Levenshtein clip,
/// `theta` divides the relative numeric error before clipping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub tau: f64,
    pub theta: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { tau: 0.5, theta: 0.5 }
    }
}

impl Thresholds {
    pub fn new(tau: f64, theta: f64) -> Result<Self, RmsError> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(RmsError::BadThreshold(tau));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(RmsError::BadThreshold(theta));
        }
        Ok(Thresholds { tau, theta })
    }
}

/// One (row key, column key, value) entry of a decomposed table.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingEntry {
    pub row_key: String,
    pub col_key: String,
    pub value: CellValue,
}

impl MappingEntry {
    fn key(&self) -> String {
        format!("{}{KEY_SEP}{}", self.row_key, self.col_key)
    }
}

/// An unordered collection of mappings extracted from one table layout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MappingSet {
    pub entries: Vec<MappingEntry>,
}

impl MappingSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Normal,
    Transposed,
}

/// How the row key column is chosen during decomposition.
#[derive(Debug, Clone, Default)]
pub struct MappingOptions {
    /// When set, the first column acts as row key only if its header is in
    /// this list; otherwise the row index becomes the key. When unset the
    /// first column is always the key.
    pub key_headers: Option<Vec<String>>,
}

/// Decompose a table into mappings: one entry per data cell, keyed by the
/// first-column value (or row index, see [`MappingOptions`]) and the
/// column header. Key texts are whitespace-trimmed verbatim.
pub fn table_to_mappings(
    table: &ResultTable,
    orientation: Orientation,
    options: &MappingOptions,
) -> MappingSet {
    let t = match orientation {
        Orientation::Normal => table.clone(),
        Orientation::Transposed => table.transpose(),
    };
    let mut entries = Vec::new();
    if t.columns.is_empty() {
        return MappingSet { entries };
    }
    let first_is_key = match &options.key_headers {
        None => true,
        Some(list) => list.iter().any(|h| h.trim() == t.columns[0].trim()),
    };
    let data_start = usize::from(first_is_key);
    for (r, row) in t.rows.iter().enumerate() {
        let row_key = if first_is_key {
            row[0].render().trim().to_string()
        } else {
            r.to_string()
        };
        for (c, name) in t.columns.iter().enumerate().skip(data_start) {
            entries.push(MappingEntry {
                row_key: row_key.clone(),
                col_key: name.trim().to_string(),
                value: row[c].clone(),
            });
        }
    }
    MappingSet { entries }
}

/// Relative numeric error `D(p, t) = min(1, |p - t| / |t|)`, with the
/// continuous-limit convention at t = 0: zero if p is also zero, else 1.
pub fn relative_distance(p: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if p == 0.0 { 0.0 } else { 1.0 };
    }
    ((p - t).abs() / t.abs()).min(1.0)
}

/// Relative Number Set Similarity between two number multisets. Values are
/// paired by minimum-cost matching on `D`; unpaired values cost 1 each and
/// the total is normalized by `max(N, M)`. Two empty sets are identical.
pub fn rnss(pred: &[Decimal], target: &[Decimal]) -> f64 {
    let n = pred.len();
    let m = target.len();
    if n == 0 && m == 0 {
        return 1.0;
    }
    let denom = n.max(m) as f64;
    if n == 0 || m == 0 {
        return 1.0 - denom / denom; // all unmatched
    }
    let cost: Vec<Vec<f64>> = pred
        .iter()
        .map(|p| target.iter().map(|t| relative_distance(to_f64(*p), to_f64(*t))).collect())
        .collect();
    let (_, matched_cost) = min_cost_assignment(&cost);
    let unmatched = (n.max(m) - n.min(m)) as f64;
    1.0 - (matched_cost + unmatched) / denom
}

/// Key similarity `1 - NL_tau` over the concatenated row and column keys.
pub fn key_similarity(a: &MappingEntry, b: &MappingEntry, tau: f64) -> f64 {
    1.0 - nl_tau(&a.key(), &b.key(), tau)
}

/// Value similarity: numeric pairs use the theta-scaled relative error;
/// when either side is non-numeric both fall back to text similarity over
/// the rendered values. Qualified numbers count as their numeric part;
/// ranges compare as text.
pub fn value_similarity(a: &MappingEntry, b: &MappingEntry, thresholds: Thresholds) -> f64 {
    let num = |v: &CellValue| match v {
        CellValue::Number(n) => Some(to_f64(n.value)),
        _ => None,
    };
    match (num(&a.value), num(&b.value)) {
        (Some(p), Some(t)) => 1.0 - (relative_distance(p, t) / thresholds.theta).min(1.0),
        _ => 1.0 - nl_tau(&a.value.render(), &b.value.render(), thresholds.tau),
    }
}

/// Binary assignment between two mapping sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Matched (pred index, gold index) pairs, `min(N, M)` of them.
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

/// Minimum-cost matching over key dissimilarity alone (value similarity
/// enters only in scoring). Equal-cost optima resolve to the
/// lexicographically smallest (i, j) assignment.
pub fn match_entries(pred: &MappingSet, target: &MappingSet, tau: f64) -> Assignment {
    if pred.is_empty() || target.is_empty() {
        return Assignment { pairs: Vec::new(), total_cost: 0.0 };
    }
    let cost: Vec<Vec<f64>> = pred
        .entries
        .iter()
        .map(|p| target.entries.iter().map(|t| 1.0 - key_similarity(p, t, tau)).collect())
        .collect();
    let (pairs, total_cost) = min_cost_assignment(&cost);
    Assignment { pairs, total_cost }
}

/// RMS precision, recall and F1, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RmsScores {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RmsScores { precision, recall, f1 }
    }

    pub const ZERO: RmsScores = RmsScores { precision: 0.0, recall: 0.0, f1: 0.0 };
}

/// Scoring outcome; `empty_prediction` flags a prediction with nothing to
/// score (its scores are all zero by definition, not by matching).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsReport {
    pub scores: RmsScores,
    pub empty_prediction: bool,
}

fn score_pair(pred: &MappingSet, gold: &MappingSet, thresholds: Thresholds) -> RmsScores {
    let assignment = match_entries(pred, gold, thresholds.tau);
    let mut total = 0.0;
    for &(i, j) in &assignment.pairs {
        let p = &pred.entries[i];
        let t = &gold.entries[j];
        total += key_similarity(p, t, thresholds.tau) * value_similarity(p, t, thresholds);
    }
    RmsScores::from_pr(total / pred.len() as f64, total / gold.len() as f64)
}

/// Score a predicted table against a gold table. All four layout
/// combinations (each side normal or transposed) are evaluated; the one
/// with the best (F1, precision + recall) wins, which makes the result
/// invariant to transposing either argument.
pub fn rms_scores(
    pred: &ResultTable,
    gold: &ResultTable,
    thresholds: Thresholds,
) -> Result<RmsReport, RmsError> {
    rms_scores_with(pred, gold, thresholds, &MappingOptions::default())
}

pub fn rms_scores_with(
    pred: &ResultTable,
    gold: &ResultTable,
    thresholds: Thresholds,
    options: &MappingOptions,
) -> Result<RmsReport, RmsError> {
    let gold_n = table_to_mappings(gold, Orientation::Normal, options);
    let gold_t = table_to_mappings(gold, Orientation::Transposed, options);
    if gold_n.is_empty() && gold_t.is_empty() {
        return Err(RmsError::EmptyGold);
    }
    let pred_n = table_to_mappings(pred, Orientation::Normal, options);
    let pred_t = table_to_mappings(pred, Orientation::Transposed, options);
    if pred_n.is_empty() && pred_t.is_empty() {
        return Ok(RmsReport { scores: RmsScores::ZERO, empty_prediction: true });
    }
    let mut best: Option<RmsScores> = None;
    for p in [&pred_n, &pred_t] {
        for g in [&gold_n, &gold_t] {
            if p.is_empty() || g.is_empty() {
                continue;
            }
            let s = score_pair(p, g, thresholds);
            let better = match &best {
                None => true,
                Some(b) => {
                    (s.f1, s.precision + s.recall, s.precision)
                        > (b.f1, b.precision + b.recall, b.precision)
                }
            };
            if better {
                best = Some(s);
            }
        }
    }
    Ok(RmsReport { scores: best.unwrap_or(RmsScores::ZERO), empty_prediction: false })
}

/// Unweighted arithmetic mean of per-query scores; F1 is averaged
/// directly, not recomputed from averaged precision and recall.
pub fn macro_average(per_query: &[RmsScores]) -> Result<RmsScores, RmsError> {
    if per_query.is_empty() {
        return Err(RmsError::EmptyList);
    }
    let n = per_query.len() as f64;
    Ok(RmsScores {
        precision: per_query.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: per_query.iter().map(|s| s.recall).sum::<f64>() / n,
        f1: per_query.iter().map(|s| s.f1).sum::<f64>() / n,
    })
}
