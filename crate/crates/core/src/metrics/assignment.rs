//! Dense Hungarian (Kuhn-Munkres) solver over integer weights.
//!
//! O(n^3) shortest-augmenting-path form with row and column potentials.
//! Rectangular inputs are padded to square with zero-weight cells.

/// Maximum-weight one-to-one assignment of rows to columns.
///
/// Returns, for every row, the column it is matched to, or `None` when the
/// row could only be matched to a padding column.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = weights[0].len();
    debug_assert!(weights.iter().all(|r| r.len() == cols));
    let n = rows.max(cols);
    let top = weights.iter().flatten().copied().max().unwrap_or(0).max(0);
    // maximize weight == minimize (top - weight); padding cells cost `top`
    let cost = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            top - weights[i][j]
        } else {
            top
        }
    };

    let inf = i64::MAX / 4;
    // one-based arrays; index 0 is the virtual source column
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut min_slack = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let slack = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if slack < min_slack[j] {
                    min_slack[j] = slack;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut matched = vec![None; rows];
    for (j, &i) in owner.iter().enumerate().skip(1) {
        if i >= 1 && i <= rows && j <= cols {
            matched[i - 1] = Some(j - 1);
        }
    }
    matched
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_example() {
        let w = vec![vec![7, 5, 1], vec![2, 8, 3], vec![4, 6, 9]];
        assert_eq!(
            max_weight_assignment(&w),
            vec![Some(0), Some(1), Some(2)]
        );
    }

    #[test]
    fn wide_and_tall() {
        let wide = vec![vec![1, 9, 2, 0], vec![8, 7, 0, 1]];
        assert_eq!(max_weight_assignment(&wide), vec![Some(1), Some(0)]);
        let tall = vec![vec![1, 9], vec![8, 7], vec![0, 10]];
        let m = max_weight_assignment(&tall);
        assert_eq!(m.iter().filter(|c| c.is_some()).count(), 2);
        let sum: i64 = m
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| tall[i][c]))
            .sum();
        assert_eq!(sum, 18);
    }

    #[test]
    fn empty() {
        assert!(max_weight_assignment(&[]).is_empty());
    }
}
