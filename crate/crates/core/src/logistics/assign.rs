//! Assignment solvers for conditional-move planning: exact rectangular
//! Hungarian (shortest augmenting path with potentials) and a greedy
//! nearest-source fallback for very large instances.

/// Exact min-cost assignment of `n` rows to `m >= n` columns.
/// `cost[r][c]` must be finite and nonnegative. Returns `row -> col`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(m >= n, "need at least as many columns as rows");
    const INF: f64 = f64::INFINITY;

    // 1-based potentials over rows (u) and columns (v); p[c] = row matched
    // to column c (0 = unmatched).
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    debug_assert!(row_to_col.iter().all(|&c| c != usize::MAX));
    row_to_col
}

/// Greedy nearest-source assignment; used above the exact-solver size cap.
pub fn greedy_nearest(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    let mut taken = vec![false; m];
    let mut out = Vec::with_capacity(n);
    for row in cost {
        let mut best = usize::MAX;
        let mut best_cost = f64::INFINITY;
        for (c, &w) in row.iter().enumerate() {
            if !taken[c] && w < best_cost {
                best_cost = w;
                best = c;
            }
        }
        assert!(best != usize::MAX, "greedy ran out of sources");
        taken[best] = true;
        out.push(best);
    }
    out
}

/// Exhaustive minimum assignment cost, for cross-checking small instances.
pub fn brute_force_min_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    let m = cost[0].len();
    fn rec(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == cost.len() {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if acc >= *best {
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                rec(cost, row + 1, used, acc + cost[row][c], best);
                used[c] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(cost, 0, &mut vec![false; m], 0.0, &mut best);
    best
}

pub fn assignment_cost(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(r, &c)| cost[r][c]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ShotRng;

    #[test]
    fn hungarian_trivial_cases() {
        assert!(hungarian(&[]).is_empty());
        assert_eq!(hungarian(&[vec![3.0, 1.0, 2.0]]), vec![1]);
    }

    #[test]
    fn hungarian_square_known_answer() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let a = hungarian(&cost);
        assert_eq!(assignment_cost(&cost, &a), 5.0);
    }

    #[test]
    fn hungarian_matches_brute_force_on_random_instances() {
        let mut rng = ShotRng::from_seed(99);
        for _ in 0..200 {
            let n = 1 + rng.below(5);
            let m = n + rng.below(5);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| (rng.below(100) as f64) / 4.0).collect())
                .collect();
            let a = hungarian(&cost);
            // Distinct columns.
            let mut cols: Vec<usize> = a.clone();
            cols.sort_unstable();
            cols.dedup();
            assert_eq!(cols.len(), n);
            let got = assignment_cost(&cost, &a);
            let want = brute_force_min_cost(&cost);
            assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        }
    }

    #[test]
    fn greedy_is_feasible() {
        let cost = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        let a = greedy_nearest(&cost);
        assert_eq!(a, vec![0, 1]);
    }
}
