//! Inter-annotator agreement statistics over Likert-scale rating
//! matrices: Fleiss' kappa, Krippendorff's ordinal alpha, Cohen's kappa
//! and the exact match rate.
//!
//! Degenerate inputs (zero variance, expected agreement of one) produce a
//! flagged [`Stat::Undefined`] value instead of a number or a crash;
//! rating skew near the top of the scale makes that a real case, not a
//! theoretical one.

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AgreementError {
    #[error("rating {0} outside the declared scale")]
    OutOfScale(i64),
    #[error("need at least 2 raters and 1 item")]
    TooSmall,
    #[error("Fleiss' kappa requires complete data (missing rating at item {item}, rater {rater})")]
    MissingData { item: usize, rater: usize },
    #[error("rating lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no item carries two or more ratings")]
    NoCoincidences,
    #[error("csv: {0}")]
    Csv(String),
}

/// A statistic that may be undefined on degenerate data.
#[derive(Debug, Clone, PartialEq)]
pub enum Stat {
    Value(f64),
    Undefined(String),
}

impl Stat {
    pub fn value(&self) -> Option<f64> {
        match self {
            Stat::Value(v) => Some(*v),
            Stat::Undefined(_) => None,
        }
    }
}

/// Items x raters category ratings with missing entries allowed.
#[derive(Debug, Clone)]
pub struct RatingMatrix {
    pub scale: Vec<i64>,
    /// ratings[item][rater]
    pub ratings: Vec<Vec<Option<i64>>>,
}

impl RatingMatrix {
    pub fn new(scale: Vec<i64>, ratings: Vec<Vec<Option<i64>>>) -> Result<Self, AgreementError> {
        let n_items = ratings.len();
        let n_raters = ratings.first().map_or(0, Vec::len);
        if n_items < 1 || n_raters < 2 {
            return Err(AgreementError::TooSmall);
        }
        for row in &ratings {
            if row.len() != n_raters {
                return Err(AgreementError::LengthMismatch(row.len(), n_raters));
            }
            for r in row.iter().flatten() {
                if !scale.contains(r) {
                    return Err(AgreementError::OutOfScale(*r));
                }
            }
        }
        Ok(RatingMatrix { scale, ratings })
    }

    pub fn likert5(ratings: Vec<Vec<Option<i64>>>) -> Result<Self, AgreementError> {
        RatingMatrix::new(vec![1, 2, 3, 4, 5], ratings)
    }

    pub fn n_items(&self) -> usize {
        self.ratings.len()
    }

    pub fn n_raters(&self) -> usize {
        self.ratings.first().map_or(0, Vec::len)
    }

    /// Column of one rater's ratings.
    pub fn rater_column(&self, rater: usize) -> Vec<Option<i64>> {
        self.ratings.iter().map(|row| row[rater]).collect()
    }
}

/// Load a long-format CSV with `item`, `rater` and `rating` columns into a
/// matrix (items and raters ordered by name). Other columns are ignored;
/// pre-filter rows before calling when the file mixes several scales.
pub fn matrix_from_long_csv(
    text: &str,
    scale: Vec<i64>,
) -> Result<(RatingMatrix, Vec<String>, Vec<String>), AgreementError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| AgreementError::Csv(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| AgreementError::Csv(format!("missing column {name}")))
    };
    let (ic, rc, vc) = (col("item")?, col("rater")?, col("rating")?);
    let mut cells: BTreeMap<(String, String), i64> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| AgreementError::Csv(e.to_string()))?;
        let rating: i64 = rec
            .get(vc)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| AgreementError::Csv(format!("bad rating {:?}", rec.get(vc))))?;
        cells.insert(
            (rec.get(ic).unwrap_or("").to_string(), rec.get(rc).unwrap_or("").to_string()),
            rating,
        );
    }
    let items: Vec<String> = {
        let mut v: Vec<String> = cells.keys().map(|(i, _)| i.clone()).collect();
        v.sort();
        v.dedup();
        v
    };
    let raters: Vec<String> = {
        let mut v: Vec<String> = cells.keys().map(|(_, r)| r.clone()).collect();
        v.sort();
        v.dedup();
        v
    };
    let ratings: Vec<Vec<Option<i64>>> = items
        .iter()
        .map(|i| raters.iter().map(|r| cells.get(&(i.clone(), r.clone())).copied()).collect())
        .collect();
    Ok((RatingMatrix::new(scale, ratings)?, items, raters))
}

/// Fleiss' kappa for complete data over two or more raters.
pub fn fleiss_kappa(m: &RatingMatrix) -> Result<Stat, AgreementError> {
    let n_raters = m.n_raters();
    for (i, row) in m.ratings.iter().enumerate() {
        if let Some(j) = row.iter().position(Option::is_none) {
            return Err(AgreementError::MissingData { item: i, rater: j });
        }
    }
    let n_items = m.n_items() as f64;
    let n = n_raters as f64;
    let k = m.scale.len();
    let mut cat_totals = vec![0.0f64; k];
    let mut p_bar = 0.0;
    for row in &m.ratings {
        let mut counts = vec![0.0f64; k];
        for r in row.iter().flatten() {
            let idx = m.scale.iter().position(|c| c == r).expect("validated");
            counts[idx] += 1.0;
        }
        let sum_sq: f64 = counts.iter().map(|c| c * c).sum();
        p_bar += (sum_sq - n) / (n * (n - 1.0));
        for (t, c) in cat_totals.iter_mut().zip(&counts) {
            *t += c;
        }
    }
    p_bar /= n_items;
    let pe: f64 = cat_totals.iter().map(|t| (t / (n_items * n)).powi(2)).sum();
    if (1.0 - pe).abs() < 1e-12 {
        return Ok(Stat::Undefined("expected agreement is 1 (no rating variance)".into()));
    }
    Ok(Stat::Value((p_bar - pe) / (1.0 - pe)))
}

/// Squared ordinal distance between categories `c` and `k` given category
/// marginals: the cumulative-marginal metric
/// `(sum_{g=c}^{k} n_g - (n_c + n_k) / 2)^2`.
fn ordinal_delta_sq(marginals: &[f64], c: usize, k: usize) -> f64 {
    if c == k {
        return 0.0;
    }
    let (lo, hi) = if c < k { (c, k) } else { (k, c) };
    let between: f64 = marginals[lo..=hi].iter().sum();
    let d = between - (marginals[lo] + marginals[hi]) / 2.0;
    d * d
}

/// Krippendorff's alpha with the ordinal metric; tolerates missing
/// ratings. Requires at least one item rated by two or more raters.
pub fn krippendorff_alpha_ordinal(m: &RatingMatrix) -> Result<Stat, AgreementError> {
    let k = m.scale.len();
    // coincidence matrix over pairable ratings
    let mut o = vec![vec![0.0f64; k]; k];
    let mut any = false;
    for row in &m.ratings {
        let present: Vec<usize> = row
            .iter()
            .flatten()
            .map(|r| m.scale.iter().position(|c| c == r).expect("validated"))
            .collect();
        let mu = present.len();
        if mu < 2 {
            continue;
        }
        any = true;
        for (a, &ca) in present.iter().enumerate() {
            for (b, &cb) in present.iter().enumerate() {
                if a != b {
                    o[ca][cb] += 1.0 / (mu as f64 - 1.0);
                }
            }
        }
    }
    if !any {
        return Err(AgreementError::NoCoincidences);
    }
    let marginals: Vec<f64> = (0..k).map(|c| o[c].iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    let mut d_o = 0.0;
    let mut d_e = 0.0;
    for c in 0..k {
        for kk in 0..k {
            let d2 = ordinal_delta_sq(&marginals, c, kk);
            d_o += o[c][kk] * d2;
            d_e += marginals[c] * marginals[kk] * d2;
        }
    }
    d_o /= n;
    d_e /= n * (n - 1.0);
    if d_e.abs() < 1e-12 {
        return Ok(Stat::Undefined("no expected disagreement (all pairable ratings equal)".into()));
    }
    Ok(Stat::Value(1.0 - d_o / d_e))
}

/// Cohen's kappa between two raters over equal-length complete lists.
pub fn cohen_kappa(a: &[i64], b: &[i64]) -> Result<Stat, AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(AgreementError::TooSmall);
    }
    let n = a.len() as f64;
    let po = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut cats: Vec<i64> = a.iter().chain(b).copied().collect();
    cats.sort_unstable();
    cats.dedup();
    let pe: f64 = cats
        .iter()
        .map(|c| {
            let ca = a.iter().filter(|x| *x == c).count() as f64 / n;
            let cb = b.iter().filter(|x| *x == c).count() as f64 / n;
            ca * cb
        })
        .sum();
    if (1.0 - pe).abs() < 1e-12 {
        return Ok(Stat::Undefined("expected agreement is 1".into()));
    }
    Ok(Stat::Value((po - pe) / (1.0 - pe)))
}

/// Fraction of items with identical categories.
pub fn exact_match_rate(a: &[i64], b: &[i64]) -> Result<f64, AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(AgreementError::TooSmall);
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn complete(rows: &[&[i64]]) -> RatingMatrix {
        RatingMatrix::likert5(
            rows.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn fleiss_perfect_agreement_with_variation_is_one() {
        let m = complete(&[&[1, 1], &[1, 1], &[2, 2], &[2, 2]]);
        match fleiss_kappa(&m).unwrap() {
            Stat::Value(v) => assert!((v - 1.0).abs() < 1e-12),
            s => panic!("expected value, got {s:?}"),
        }
    }

    #[test]
    fn fleiss_degenerate_is_flagged() {
        let m = complete(&[&[3, 3], &[3, 3]]);
        assert!(matches!(fleiss_kappa(&m).unwrap(), Stat::Undefined(_)));
    }

    #[test]
    fn fleiss_rejects_missing_data() {
        let m = RatingMatrix::likert5(vec![vec![Some(1), None]]).unwrap();
        assert!(matches!(fleiss_kappa(&m), Err(AgreementError::MissingData { .. })));
    }

    #[test]
    fn fleiss_random_ratings_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ratings: Vec<Vec<Option<i64>>> = (0..1000)
            .map(|_| (0..3).map(|_| Some(rng.gen_range(1..=5))).collect())
            .collect();
        let m = RatingMatrix::likert5(ratings).unwrap();
        match fleiss_kappa(&m).unwrap() {
            Stat::Value(v) => assert!(v.abs() < 0.05, "kappa {v} too far from 0"),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn alpha_perfect_agreement_is_one() {
        let m = RatingMatrix::new(
            vec![1, 2],
            vec![vec![Some(1), Some(1)], vec![Some(2), Some(2)], vec![Some(1), Some(1)]],
        )
        .unwrap();
        match krippendorff_alpha_ordinal(&m).unwrap() {
            Stat::Value(v) => assert!((v - 1.0).abs() < 1e-12),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn alpha_single_item_max_disagreement() {
        // one co-rated item, ratings 1 and 5: observed equals expected
        // disagreement, so alpha is 0
        let m = RatingMatrix::likert5(vec![vec![Some(1), Some(5)]]).unwrap();
        match krippendorff_alpha_ordinal(&m).unwrap() {
            Stat::Value(v) => assert!(v.abs() < 1e-12, "alpha {v}"),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn alpha_tolerates_missing_ratings() {
        let m = RatingMatrix::likert5(vec![
            vec![Some(4), Some(4), None],
            vec![Some(5), None, Some(5)],
            vec![Some(3), Some(4), Some(3)],
        ])
        .unwrap();
        assert!(matches!(krippendorff_alpha_ordinal(&m).unwrap(), Stat::Value(_)));
    }

    #[test]
    fn alpha_errors_without_coincidences() {
        let m = RatingMatrix::likert5(vec![vec![Some(4), None], vec![None, Some(5)]]).unwrap();
        assert!(matches!(krippendorff_alpha_ordinal(&m), Err(AgreementError::NoCoincidences)));
    }

    #[test]
    fn cohen_identical_lists_with_variation() {
        let a = [1, 2, 3, 1, 2];
        match cohen_kappa(&a, &a).unwrap() {
            Stat::Value(v) => assert!((v - 1.0).abs() < 1e-12),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn cohen_length_mismatch() {
        assert!(matches!(cohen_kappa(&[1, 2], &[1]), Err(AgreementError::LengthMismatch(2, 1))));
    }

    #[test]
    fn cohen_independent_uniform_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Vec<i64> = (0..1000).map(|_| rng.gen_range(1..=5)).collect();
        let b: Vec<i64> = (0..1000).map(|_| rng.gen_range(1..=5)).collect();
        match cohen_kappa(&a, &b).unwrap() {
            Stat::Value(v) => assert!(v.abs() < 0.07, "kappa {v}"),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn exact_match_edges() {
        assert_eq!(exact_match_rate(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(exact_match_rate(&[1, 1, 1], &[2, 2, 2]).unwrap(), 0.0);
    }

    #[test]
    fn rater_permutation_invariance() {
        let base = complete(&[&[1, 2, 3], &[4, 4, 5], &[2, 2, 2], &[5, 4, 5]]);
        let permuted = complete(&[&[3, 1, 2], &[5, 4, 4], &[2, 2, 2], &[5, 5, 4]]);
        let (a, b) = (
            fleiss_kappa(&base).unwrap().value().unwrap(),
            fleiss_kappa(&permuted).unwrap().value().unwrap(),
        );
        assert!((a - b).abs() < 1e-12);
        let (a, b) = (
            krippendorff_alpha_ordinal(&base).unwrap().value().unwrap(),
            krippendorff_alpha_ordinal(&permuted).unwrap().value().unwrap(),
        );
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn long_csv_loader_builds_matrix() {
        let csv = "item,rater,rating\nq1,a,5\nq1,b,4\nq2,a,3\nq2,b,3\n";
        let (m, items, raters) = matrix_from_long_csv(csv, vec![1, 2, 3, 4, 5]).unwrap();
        assert_eq!(items, vec!["q1", "q2"]);
        assert_eq!(raters, vec!["a", "b"]);
        assert_eq!(m.ratings[0][0], Some(5));
        assert_eq!(m.ratings[1][1], Some(3));
    }
}
