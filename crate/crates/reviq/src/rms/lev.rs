//! Levenshtein edit distance over Unicode scalar values and its
//! threshold-normalized form.

/// Classic two-row dynamic program; case-sensitive, no trimming here.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Normalized Levenshtein distance clipped at 1:
/// `NL_tau(x, y) = min(1, lev(x, y) / (tau * max(|x|, |y|)))`.
/// Two empty strings are identical (distance 0).
pub fn nl_tau(a: &str, b: &str, tau: f64) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 0.0;
    }
    let d = levenshtein(a, b) as f64;
    (d / (tau * max_len as f64)).min(1.0)
}
