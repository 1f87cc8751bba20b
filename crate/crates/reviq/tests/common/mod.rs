//! Shared test support: independent oracles for matching, query
//! evaluation and agreement statistics, plus random-input generators.
//! Everything here recomputes results from first principles and stays
//! independent of the library's implementation paths.

use reviq::model::Comparison;
use reviq::query::{Store, StoreTriple};
use reviq::rms::{MappingEntry, MappingOptions, MappingSet, Orientation, RmsScores, Thresholds};
use reviq::tableio::ResultTable;
use reviq::value::CellValue;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn manifest_path() -> PathBuf {
    fixtures_dir().join("manifest.toml")
}

// ---------------------------------------------------------------------------
// Exhaustive RMS oracle
// ---------------------------------------------------------------------------

fn lev(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur.push(sub.min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn nl(a: &str, b: &str, tau: f64) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 0.0;
    }
    (lev(a, b) as f64 / (tau * max_len as f64)).min(1.0)
}

fn key_text(e: &MappingEntry) -> String {
    format!("{}\u{1f}{}", e.row_key, e.col_key)
}

fn key_sim(a: &MappingEntry, b: &MappingEntry, tau: f64) -> f64 {
    1.0 - nl(&key_text(a), &key_text(b), tau)
}

fn val_sim(a: &MappingEntry, b: &MappingEntry, th: Thresholds) -> f64 {
    let num = |v: &CellValue| match v {
        CellValue::Number(n) => reviq::value::to_f64(n.value).into(),
        _ => None,
    };
    match (num(&a.value), num(&b.value)) {
        (Some(p), Some(t)) => {
            let d = if t == 0.0 {
                if p == 0.0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                (((p - t) as f64).abs() / t.abs()).min(1.0)
            };
            1.0 - (d / th.theta).min(1.0)
        }
        _ => 1.0 - nl(&a.value.render(), &b.value.render(), th.tau),
    }
}

/// All injections from the smaller side into the larger, scored by key
/// cost; among minimum-cost injections the lexicographically smallest
/// (i, j) pair sequence wins, mirroring the library's canonical choice.
fn oracle_match(pred: &MappingSet, gold: &MappingSet, tau: f64) -> Vec<(usize, usize)> {
    let n = pred.len();
    let m = gold.len();
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let mut best_cost = f64::INFINITY;
    let mut best: Vec<Vec<(usize, usize)>> = Vec::new();
    // enumerate column choices for each row (or row choices per column)
    fn rec(
        n: usize,
        m: usize,
        cost: &dyn Fn(usize, usize) -> f64,
        i: usize,
        used: &mut Vec<bool>,
        acc: f64,
        pairs: &mut Vec<(usize, usize)>,
        best_cost: &mut f64,
        best: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if i == n {
            if acc < *best_cost - 1e-12 {
                *best_cost = acc;
                best.clear();
                best.push(pairs.clone());
            } else if (acc - *best_cost).abs() <= 1e-12 {
                best.push(pairs.clone());
            }
            return;
        }
        if n <= m {
            for j in 0..m {
                if !used[j] {
                    used[j] = true;
                    pairs.push((i, j));
                    rec(n, m, cost, i + 1, used, acc + cost(i, j), pairs, best_cost, best);
                    pairs.pop();
                    used[j] = false;
                }
            }
        } else {
            // more rows than columns: decide which row each column takes
            unreachable!("caller orients the recursion");
        }
    }
    if n <= m {
        let cost = |i: usize, j: usize| 1.0 - key_sim(&pred.entries[i], &gold.entries[j], tau);
        let mut used = vec![false; m];
        rec(n, m, &cost, 0, &mut used, 0.0, &mut Vec::new(), &mut best_cost, &mut best);
    } else {
        // enumerate over gold side, then flip pairs back
        let cost = |j: usize, i: usize| 1.0 - key_sim(&pred.entries[i], &gold.entries[j], tau);
        let mut used = vec![false; n];
        rec(m, n, &cost, 0, &mut used, 0.0, &mut Vec::new(), &mut best_cost, &mut best);
        for pairs in &mut best {
            for p in pairs.iter_mut() {
                *p = (p.1, p.0);
            }
            pairs.sort_unstable();
        }
    }
    best.sort();
    best.into_iter().next().unwrap_or_default()
}

fn oracle_score_pair(pred: &MappingSet, gold: &MappingSet, th: Thresholds) -> RmsScores {
    let pairs = oracle_match(pred, gold, th.tau);
    let total: f64 = pairs
        .iter()
        .map(|&(i, j)| {
            key_sim(&pred.entries[i], &gold.entries[j], th.tau)
                * val_sim(&pred.entries[i], &gold.entries[j], th)
        })
        .sum();
    let p = total / pred.len() as f64;
    let r = total / gold.len() as f64;
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    RmsScores { precision: p, recall: r, f1 }
}

/// Exhaustive counterpart of `rms_scores`: same four-combination layout
/// handling, brute-force matching underneath.
pub fn oracle_rms(pred: &ResultTable, gold: &ResultTable, th: Thresholds) -> Option<RmsScores> {
    let opts = MappingOptions::default();
    let pn = reviq::rms::table_to_mappings(pred, Orientation::Normal, &opts);
    let pt = reviq::rms::table_to_mappings(pred, Orientation::Transposed, &opts);
    let gn = reviq::rms::table_to_mappings(gold, Orientation::Normal, &opts);
    let gt = reviq::rms::table_to_mappings(gold, Orientation::Transposed, &opts);
    if gn.is_empty() && gt.is_empty() {
        return None;
    }
    if pn.is_empty() && pt.is_empty() {
        return Some(RmsScores { precision: 0.0, recall: 0.0, f1: 0.0 });
    }
    let mut best: Option<RmsScores> = None;
    for p in [&pn, &pt] {
        for g in [&gn, &gt] {
            if p.is_empty() || g.is_empty() {
                continue;
            }
            let s = oracle_score_pair(p, g, th);
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
    best
}

// ---------------------------------------------------------------------------
// Brute-force query evaluation over triple patterns with simple filters
// ---------------------------------------------------------------------------

/// One pattern of the oracle's restricted query form.
#[derive(Debug, Clone)]
pub struct NaivePattern {
    pub subject: Option<String>, // None = variable name in vars below
    pub subject_var: Option<String>,
    pub predicate: String, // always a constant IRI
    pub object_var: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NaiveOp {
    Le,
    Ge,
    Eq,
}

/// FILTER(?var OP k) over numeric parts; non-numeric bindings drop.
#[derive(Debug, Clone)]
pub struct NaiveFilter {
    pub var: String,
    pub op: NaiveOp,
    pub threshold: f64,
}

/// Enumerate all assignments of patterns to store triples, keep the
/// consistent ones, apply filters, and project. Quadratic and proud.
pub fn naive_evaluate(
    store: &Store,
    patterns: &[NaivePattern],
    filters: &[NaiveFilter],
    projection: &[String],
) -> Vec<Vec<String>> {
    let mut results: Vec<BTreeMap<String, CellValue>> = Vec::new();
    let k = patterns.len();
    let t = store.triples.len();
    let mut idx = vec![0usize; k];
    'outer: loop {
        // check this tuple
        let mut env: BTreeMap<String, CellValue> = BTreeMap::new();
        let mut subjects: BTreeMap<String, String> = BTreeMap::new();
        let mut ok = true;
        for (p, &ti) in patterns.iter().zip(&idx) {
            if ti >= t {
                ok = false;
                break;
            }
            let triple: &StoreTriple = &store.triples[ti];
            if triple.predicate != p.predicate {
                ok = false;
                break;
            }
            if let Some(s) = &p.subject {
                if s != &triple.subject {
                    ok = false;
                    break;
                }
            }
            if let Some(v) = &p.subject_var {
                match subjects.get(v) {
                    Some(known) if known != &triple.subject => {
                        ok = false;
                        break;
                    }
                    _ => {
                        subjects.insert(v.clone(), triple.subject.clone());
                    }
                }
            }
            match env.get(&p.object_var) {
                Some(known) => {
                    let eq = match (known, &triple.object) {
                        (CellValue::Number(a), CellValue::Number(b)) => a.value == b.value,
                        (a, b) => a.render() == b.render() && std::mem::discriminant(a) == std::mem::discriminant(b),
                    };
                    if !eq {
                        ok = false;
                        break;
                    }
                }
                None => {
                    env.insert(p.object_var.clone(), triple.object.clone());
                }
            }
        }
        if ok {
            let passes = filters.iter().all(|f| match env.get(&f.var) {
                Some(v) => match v.numeric_part() {
                    Some(d) => {
                        let x = reviq::value::to_f64(d);
                        match f.op {
                            NaiveOp::Le => x <= f.threshold,
                            NaiveOp::Ge => {
                                // ranges satisfy >= through their upper bound
                                let hi = match v {
                                    CellValue::Range { hi, .. } => reviq::value::to_f64(*hi),
                                    _ => x,
                                };
                                hi >= f.threshold
                            }
                            NaiveOp::Eq => x == f.threshold,
                        }
                    }
                    None => false,
                },
                None => false,
            });
            if passes {
                results.push(env);
            }
        }
        // advance the odometer
        let mut pos = 0;
        loop {
            if pos == k {
                break 'outer;
            }
            idx[pos] += 1;
            if idx[pos] < t {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if k == 0 {
            break;
        }
    }
    let mut rows: Vec<Vec<String>> = results
        .into_iter()
        .map(|env| {
            projection
                .iter()
                .map(|v| env.get(v).map(|c| c.render()).unwrap_or_default())
                .collect()
        })
        .collect();
    rows.sort();
    rows
}

/// Sort a result table's rows into a canonical multiset representation.
pub fn row_multiset(table: &ResultTable) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| r.iter().map(|c| c.render()).collect())
        .collect();
    rows.sort();
    rows
}

pub fn store_of(comparisons: &[Comparison]) -> Store {
    Store::from_comparisons(comparisons.iter())
}

// ---------------------------------------------------------------------------
// Agreement oracles, straight from the definitions
// ---------------------------------------------------------------------------

/// Fleiss' kappa via pairwise agreement counting: observed agreement is
/// the fraction of agreeing rater pairs per item.
pub fn oracle_fleiss(rows: &[Vec<i64>], scale: &[i64]) -> Option<f64> {
    let n_items = rows.len() as f64;
    let n = rows[0].len() as f64;
    let mut p_bar = 0.0;
    for row in rows {
        let mut agree = 0usize;
        let mut pairs = 0usize;
        for a in 0..row.len() {
            for b in 0..row.len() {
                if a != b {
                    pairs += 1;
                    if row[a] == row[b] {
                        agree += 1;
                    }
                }
            }
        }
        p_bar += agree as f64 / pairs as f64;
    }
    p_bar /= n_items;
    let mut pe = 0.0;
    for c in scale {
        let share = rows.iter().flat_map(|r| r.iter()).filter(|x| *x == c).count() as f64
            / (n_items * n);
        pe += share * share;
    }
    if (1.0 - pe).abs() < 1e-12 {
        return None;
    }
    Some((p_bar - pe) / (1.0 - pe))
}

/// Krippendorff's ordinal alpha from the raw pair enumeration.
pub fn oracle_alpha_ordinal(rows: &[Vec<Option<i64>>], scale: &[i64]) -> Option<f64> {
    let k = scale.len();
    let pos = |v: i64| scale.iter().position(|c| *c == v).expect("in scale");
    let mut o = vec![vec![0.0f64; k]; k];
    for row in rows {
        let present: Vec<usize> = row.iter().flatten().map(|v| pos(*v)).collect();
        let mu = present.len();
        if mu < 2 {
            continue;
        }
        for a in 0..mu {
            for b in 0..mu {
                if a != b {
                    o[present[a]][present[b]] += 1.0 / (mu as f64 - 1.0);
                }
            }
        }
    }
    let marginals: Vec<f64> = (0..k).map(|c| o[c].iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    if n <= 1.0 {
        return None;
    }
    let d2 = |c: usize, kk: usize| -> f64 {
        if c == kk {
            return 0.0;
        }
        let (lo, hi) = if c < kk { (c, kk) } else { (kk, c) };
        let between: f64 = marginals[lo..=hi].iter().sum();
        let d = between - (marginals[lo] + marginals[hi]) / 2.0;
        d * d
    };
    let mut d_o = 0.0;
    let mut d_e = 0.0;
    for c in 0..k {
        for kk in 0..k {
            d_o += o[c][kk] * d2(c, kk);
            d_e += marginals[c] * marginals[kk] * d2(c, kk);
        }
    }
    d_o /= n;
    d_e /= n * (n - 1.0);
    if d_e.abs() < 1e-12 {
        return None;
    }
    Some(1.0 - d_o / d_e)
}
