//! Exact minimum-cost bipartite assignment.
//!
//! The solver is the O(n^3) shortest-augmenting-path formulation with row
//! and column potentials. On top of the raw optimum we canonicalize the
//! returned matching: among all minimum-cost assignments (perfect
//! matchings of the tight-edge subgraph left by the potentials) we pick
//! the lexicographically smallest one in (row, column) order, so equal-cost
//! optima resolve deterministically.

const TIGHT_EPS: f64 = 1e-9;

/// Solve the square assignment problem, returning `assign[row] = col`.
fn solve_square(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const NONE: usize = usize::MAX;
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![NONE; n + 1]; // p[j] = row matched to column j
    let mut way = vec![0usize; n + 1];
    for i in 0..n {
        p[n] = i;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 0..n {
                if !used[j] {
                    let cur = cost[i0][j] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    if p[j] != NONE {
                        u[p[j]] += delta;
                    }
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == NONE {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == n {
                break;
            }
        }
    }
    let mut assign = vec![NONE; n];
    for j in 0..n {
        if p[j] != NONE {
            assign[p[j]] = j;
        }
    }
    // complementary slackness leaves usable potentials; refine to the
    // lexicographically smallest optimal matching on tight edges
    lexicographic_refine(cost, &u, &v, assign)
}

fn is_tight(cost: &[Vec<f64>], u: &[f64], v: &[f64], i: usize, j: usize) -> bool {
    (cost[i][j] - u[i] - v[j]).abs() <= TIGHT_EPS
}

/// Greedy row-by-row fixing: give each row the smallest tight column that
/// still leaves a perfect matching for the remaining rows.
fn lexicographic_refine(
    cost: &[Vec<f64>],
    u: &[f64],
    v: &[f64],
    solver_assign: Vec<usize>,
) -> Vec<usize> {
    let n = cost.len();
    let mut fixed: Vec<usize> = Vec::with_capacity(n);
    let mut used_cols = vec![false; n];
    for i in 0..n {
        let current = solver_assign[i];
        let mut chosen = current;
        for j in 0..n {
            if j >= current {
                break; // the solver's own column is always feasible
            }
            if used_cols[j] || !is_tight(cost, u, v, i, j) {
                continue;
            }
            let mut cols = used_cols.clone();
            cols[j] = true;
            if perfect_matching_exists(cost, u, v, i + 1, &cols) {
                chosen = j;
                break;
            }
        }
        fixed.push(chosen);
        used_cols[chosen] = true;
        if chosen != current {
            // repair the tentative solver assignment so later rows still
            // have a feasible reference column
            return repair_tail(cost, u, v, fixed, used_cols);
        }
    }
    fixed
}

/// Re-match the remaining rows on the tight subgraph, then continue the
/// lexicographic scan for them.
fn repair_tail(
    cost: &[Vec<f64>],
    u: &[f64],
    v: &[f64],
    fixed: Vec<usize>,
    used_cols: Vec<bool>,
) -> Vec<usize> {
    let n = cost.len();
    let start = fixed.len();
    let mut fixed = fixed;
    let mut used_cols = used_cols;
    for i in start..n {
        let mut chosen = None;
        for j in 0..n {
            if used_cols[j] || !is_tight(cost, u, v, i, j) {
                continue;
            }
            let mut cols = used_cols.clone();
            cols[j] = true;
            if perfect_matching_exists(cost, u, v, i + 1, &cols) {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.expect("tight subgraph admits a perfect matching");
        fixed.push(j);
        used_cols[j] = true;
    }
    fixed
}

/// Kuhn's algorithm: can rows `from..n` all be matched into unused
/// columns of the tight subgraph?
fn perfect_matching_exists(
    cost: &[Vec<f64>],
    u: &[f64],
    v: &[f64],
    from: usize,
    used_cols: &[bool],
) -> bool {
    let n = cost.len();
    let mut col_match: Vec<Option<usize>> = vec![None; n];
    fn try_row(
        i: usize,
        cost: &[Vec<f64>],
        u: &[f64],
        v: &[f64],
        used_cols: &[bool],
        visited: &mut [bool],
        col_match: &mut [Option<usize>],
    ) -> bool {
        let n = cost.len();
        for j in 0..n {
            if used_cols[j] || visited[j] || !is_tight(cost, u, v, i, j) {
                continue;
            }
            visited[j] = true;
            if col_match[j].is_none()
                || try_row(col_match[j].unwrap(), cost, u, v, used_cols, visited, col_match)
            {
                col_match[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in from..n {
        let mut visited = vec![false; n];
        if !try_row(i, cost, u, v, used_cols, &mut visited, &mut col_match) {
            return false;
        }
    }
    true
}

/// Minimum-cost assignment of an N x M matrix. Returns pairs `(i, j)` in
/// ascending row order — exactly `min(N, M)` of them — and the total cost
/// over those pairs. Rectangular inputs are padded to square with a
/// constant, which leaves the optimum over real pairs unchanged.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> (Vec<(usize, usize)>, f64) {
    let n_rows = cost.len();
    let n_cols = cost.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return (Vec::new(), 0.0);
    }
    let n = n_rows.max(n_cols);
    let pad = 2.0 + cost
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    let square: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i < n_rows && j < n_cols { cost[i][j] } else { pad })
                .collect()
        })
        .collect();
    let assign = solve_square(&square);
    let mut pairs = Vec::new();
    let mut total = 0.0;
    for (i, &j) in assign.iter().enumerate() {
        if i < n_rows && j < n_cols {
            pairs.push((i, j));
            total += cost[i][j];
        }
    }
    pairs.sort_unstable();
    (pairs, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_classic_three_by_three() {
        let cost = vec![vec![8.0, 5.0, 9.0], vec![4.0, 2.0, 4.0], vec![7.0, 3.0, 8.0]];
        let (pairs, total) = min_cost_assignment(&cost);
        assert_eq!(pairs, vec![(0, 0), (1, 2), (2, 1)]);
        assert!((total - 15.0).abs() < 1e-12);
    }

    #[test]
    fn identity_on_zero_diagonal() {
        let cost = vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let (pairs, total) = min_cost_assignment(&cost);
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(total, 0.0);
    }

    #[test]
    fn rectangular_matches_min_side() {
        let cost = vec![vec![1.0, 0.0, 3.0]];
        let (pairs, total) = min_cost_assignment(&cost);
        assert_eq!(pairs, vec![(0, 1)]);
        assert_eq!(total, 0.0);
        let tall = vec![vec![5.0], vec![1.0], vec![3.0]];
        let (pairs, total) = min_cost_assignment(&tall);
        assert_eq!(pairs, vec![(1, 0)]);
        assert_eq!(total, 1.0);
    }

    #[test]
    fn equal_cost_ties_resolve_lexicographically() {
        // every assignment costs 2: expect the identity
        let cost = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let (pairs, _) = min_cost_assignment(&cost);
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        // crossed optimum forces (0,1),(1,0); ties inside broken low-first
        let cost = vec![vec![5.0, 0.0], vec![0.0, 5.0]];
        let (pairs, total) = min_cost_assignment(&cost);
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(total, 0.0);
    }

    #[test]
    fn empty_input_is_empty_assignment() {
        let (pairs, total) = min_cost_assignment(&[]);
        assert!(pairs.is_empty());
        assert_eq!(total, 0.0);
    }

    #[test]
    fn matches_exhaustive_minimum_on_random_matrices() {
        // deterministic LCG so the test needs no external rng
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let n = 1 + (next() * 4.0) as usize;
            let m = 1 + (next() * 4.0) as usize;
            let cost: Vec<Vec<f64>> =
                (0..n).map(|_| (0..m).map(|_| (next() * 8.0).round() / 8.0).collect()).collect();
            let (_, total) = min_cost_assignment(&cost);
            let best = exhaustive_min(&cost);
            assert!(
                (total - best).abs() < 1e-9,
                "solver {total} vs exhaustive {best} on {cost:?}"
            );
        }
    }

    fn exhaustive_min(cost: &[Vec<f64>]) -> f64 {
        let n = cost.len();
        let m = cost[0].len();
        let k = n.min(m);
        let mut best = f64::INFINITY;
        let rows: Vec<usize> = (0..n).collect();
        let cols: Vec<usize> = (0..m).collect();
        // choose k rows (when n > m) and permute columns over them
        fn rec(
            cost: &[Vec<f64>],
            rows: &[usize],
            cols: &[usize],
            k: usize,
            used: &mut Vec<bool>,
            i: usize,
            acc: f64,
            best: &mut f64,
        ) {
            if i == k {
                *best = best.min(acc);
                return;
            }
            for (cj, &j) in cols.iter().enumerate() {
                if !used[cj] {
                    used[cj] = true;
                    rec(cost, rows, cols, k, used, i + 1, acc + cost[rows[i]][j], best);
                    used[cj] = false;
                }
            }
        }
        if n <= m {
            let mut used = vec![false; m];
            rec(cost, &rows, &cols, k, &mut used, 0, 0.0, &mut best);
        } else {
            // transpose view
            let t: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| cost[i][j]).collect()).collect();
            let rows: Vec<usize> = (0..m).collect();
            let cols: Vec<usize> = (0..n).collect();
            let mut used = vec![false; n];
            rec(&t, &rows, &cols, k, &mut used, 0, 0.0, &mut best);
        }
        best
    }
}
