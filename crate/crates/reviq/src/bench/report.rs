//! Per-system score reports.

use crate::rms::{macro_average, RmsScores};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Outcome for one query: scores when the prediction was valid, otherwise
/// a note saying why it was excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryScore {
    pub scores: Option<RmsScores>,
    pub note: Option<String>,
}

/// Per-query scores plus the macro average over valid predictions only.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub per_query: BTreeMap<String, QueryScore>,
    pub n_valid: usize,
    pub n_total: usize,
    pub macro_scores: Option<RmsScores>,
}

impl BenchReport {
    pub fn from_results(results: Vec<(String, QueryScore)>) -> BenchReport {
        let per_query: BTreeMap<String, QueryScore> = results.into_iter().collect();
        let valid: Vec<RmsScores> =
            per_query.values().filter_map(|q| q.scores).collect();
        let n_valid = valid.len();
        let n_total = per_query.len();
        let macro_scores = macro_average(&valid).ok();
        BenchReport { per_query, n_valid, n_total, macro_scores }
    }
}

/// A report row's identity: the setting name and the model (or `sparql`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SystemLabel {
    pub setting: String,
    pub model: String,
}

fn pct(x: f64) -> String {
    format!("{:.1}", x * 100.0)
}

fn macro_cells(r: &BenchReport) -> (String, String, String) {
    match &r.macro_scores {
        Some(m) => (pct(m.precision), pct(m.recall), pct(m.f1)),
        None => ("-".into(), "-".into(), "-".into()),
    }
}

/// CSV rendering: one row per system, ordered by setting then model,
/// percentages with one decimal.
pub fn emit_report_csv(reports: &[(SystemLabel, BenchReport)]) -> Vec<u8> {
    let mut rows: Vec<&(SystemLabel, BenchReport)> = reports.iter().collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["setting", "model", "n_queries", "rms_precision", "rms_recall", "rms_f1"])
        .expect("in-memory write");
    for (label, report) in rows {
        let (p, r, f1) = macro_cells(report);
        w.write_record([
            label.setting.as_str(),
            label.model.as_str(),
            &report.n_valid.to_string(),
            &p,
            &r,
            &f1,
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Aligned-text rendering of the same rows.
pub fn emit_report_text(reports: &[(SystemLabel, BenchReport)]) -> String {
    let mut rows: Vec<&(SystemLabel, BenchReport)> = reports.iter().collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut table: Vec<[String; 6]> = vec![[
        "setting".into(),
        "model".into(),
        "#queries".into(),
        "RMS-prec".into(),
        "RMS-rec".into(),
        "RMS-F1".into(),
    ]];
    for (label, report) in rows {
        let (p, r, f1) = macro_cells(report);
        table.push([
            label.setting.clone(),
            label.model.clone(),
            report.n_valid.to_string(),
            p,
            r,
            f1,
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        for (c, cell) in row.iter().enumerate() {
            let _ = write!(out, "{cell:width$}  ", width = widths[c]);
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

/// Per-query detail rendering for one system.
pub fn emit_per_query_text(report: &BenchReport) -> String {
    let mut out = String::new();
    for (id, q) in &report.per_query {
        match (&q.scores, &q.note) {
            (Some(s), _) => {
                let _ = writeln!(out, "{id}: P={} R={} F1={}", pct(s.precision), pct(s.recall), pct(s.f1));
            }
            (None, Some(note)) => {
                let _ = writeln!(out, "{id}: invalid ({note})");
            }
            (None, None) => {
                let _ = writeln!(out, "{id}: invalid");
            }
        }
    }
    let _ = writeln!(out, "valid: {}/{}", report.n_valid, report.n_total);
    if let Some(m) = &report.macro_scores {
        let _ = writeln!(out, "macro: P={} R={} F1={}", pct(m.precision), pct(m.recall), pct(m.f1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> RmsScores {
        RmsScores { precision: 1.0, recall: 1.0, f1: 1.0 }
    }

    #[test]
    fn perfect_system_renders_one_hundreds() {
        let report = BenchReport::from_results(vec![
            ("Q.1".into(), QueryScore { scores: Some(one()), note: None }),
            ("Q.2".into(), QueryScore { scores: Some(one()), note: None }),
        ]);
        let label = SystemLabel { setting: "sparql".into(), model: "sparql".into() };
        let csv = String::from_utf8(emit_report_csv(&[(label, report)])).unwrap();
        assert!(csv.contains("sparql,sparql,2,100.0,100.0,100.0"));
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = String::from_utf8(emit_report_csv(&[])).unwrap();
        assert_eq!(csv, "setting,model,n_queries,rms_precision,rms_recall,rms_f1\n");
    }

    #[test]
    fn rows_ordered_by_setting_then_model() {
        let r = BenchReport::from_results(vec![(
            "Q.1".into(),
            QueryScore { scores: Some(one()), note: None },
        )]);
        let rows = vec![
            (SystemLabel { setting: "symbolic_context".into(), model: "b".into() }, r.clone()),
            (SystemLabel { setting: "full_context".into(), model: "z".into() }, r.clone()),
            (SystemLabel { setting: "symbolic_context".into(), model: "a".into() }, r),
        ];
        let csv = String::from_utf8(emit_report_csv(&rows)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[1].starts_with("full_context,z"));
        assert!(lines[2].starts_with("symbolic_context,a"));
        assert!(lines[3].starts_with("symbolic_context,b"));
    }

    #[test]
    fn invalid_predictions_excluded_from_macro_but_counted() {
        let report = BenchReport::from_results(vec![
            ("Q.1".into(), QueryScore { scores: Some(one()), note: None }),
            ("Q.2".into(), QueryScore { scores: None, note: Some("prose".into()) }),
        ]);
        assert_eq!(report.n_valid, 1);
        assert_eq!(report.n_total, 2);
        let m = report.macro_scores.unwrap();
        assert!((m.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_bytes_deterministic() {
        let mk = || {
            BenchReport::from_results(vec![
                ("Q.2".into(), QueryScore { scores: Some(one()), note: None }),
                ("Q.1".into(), QueryScore { scores: Some(one()), note: None }),
            ])
        };
        let label = || SystemLabel { setting: "sparql".into(), model: "sparql".into() };
        assert_eq!(emit_report_csv(&[(label(), mk())]), emit_report_csv(&[(label(), mk())]));
    }
}
