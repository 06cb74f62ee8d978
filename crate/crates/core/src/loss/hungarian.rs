//! Minimum-cost perfect matching on a square cost matrix (Hungarian method
//! with row/column potentials, O(k³)).

/// Returns `matching` with `matching[row] = column` minimizing the total cost.
pub fn solve_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    debug_assert!(cost.iter().all(|row| row.len() == k));
    if k == 0 {
        return Vec::new();
    }
    // 1-based indices; column 0 is a virtual column holding the current row.
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut row_of_col = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for row in 1..=k {
        row_of_col[0] = row;
        let mut col0 = 0;
        let mut min_slack = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[col0] = true;
            let r = row_of_col[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=k {
                if used[col] {
                    continue;
                }
                let slack = cost[r - 1][col - 1] - u[r] - v[col];
                if slack < min_slack[col] {
                    min_slack[col] = slack;
                    way[col] = col0;
                }
                if min_slack[col] < delta {
                    delta = min_slack[col];
                    col1 = col;
                }
            }
            for col in 0..=k {
                if used[col] {
                    u[row_of_col[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_slack[col] -= delta;
                }
            }
            col0 = col1;
            if row_of_col[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of_col[col0] = row_of_col[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut matching = vec![0; k];
    for col in 1..=k {
        matching[row_of_col[col] - 1] = col - 1;
    }
    matching
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_known_instance() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let m = solve_assignment(&cost);
        let total: f64 = m.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
        assert_eq!(total, 5.0);
        assert_eq!(m, vec![1, 0, 2]);
    }

    #[test]
    fn trivial_sizes() {
        assert!(solve_assignment(&[]).is_empty());
        assert_eq!(solve_assignment(&[vec![7.0]]), vec![0]);
    }

    #[test]
    fn negative_costs_maximize_agreement() {
        let cost = vec![vec![-1.0, -9.0], vec![-8.0, -2.0]];
        assert_eq!(solve_assignment(&cost), vec![1, 0]);
    }
}
