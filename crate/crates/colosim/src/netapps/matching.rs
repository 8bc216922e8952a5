//! Assignment solvers over SINR weight matrices.

use super::{NetappsError, SinrMatrix};
use crate::rng::{domain, shuffle, Key};

/// Shortest-augmenting-path assignment (minimum total cost) for a
/// rectangular matrix with rows <= columns. Returns the column chosen for
/// each row.
fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let m = cost[0].len();
    debug_assert!(n <= m);
    // 1-indexed with a sentinel column 0.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut row_at = vec![0usize; m + 1]; // row assigned to each column
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_at[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_at[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if !used[j] {
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
            }
            for j in 0..=m {
                if used[j] {
                    u[row_at[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_at[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_at[j0] = row_at[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![usize::MAX; n];
    for j in 1..=m {
        if row_at[j] != 0 {
            assignment[row_at[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Best achievable total weight assigning `rows` (indices into the matrix)
/// injectively into `cols`.
fn best_total(matrix: &SinrMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| -matrix.weight(r, c)).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| matrix.weight(rows[i], cols[j]))
        .sum()
}

/// Maximum-weight injective assignment of every relay (row) to a distinct
/// destination (column). Ties break toward the lexicographically smallest
/// assignment vector, so outputs are reproducible.
pub fn max_weight_matching(matrix: &SinrMatrix) -> Result<Vec<usize>, NetappsError> {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if rows > cols {
        return Err(NetappsError::RowsExceedColumns { rows, cols });
    }
    let all_rows: Vec<usize> = (0..rows).collect();
    let mut avail: Vec<usize> = (0..cols).collect();
    let mut target = best_total(matrix, &all_rows, &avail);
    let eps = 1e-9 * (1.0 + target.abs());

    let mut assignment = Vec::with_capacity(rows);
    for row in 0..rows {
        let rest_rows: Vec<usize> = (row + 1..rows).collect();
        let mut chosen = None;
        for (pos, &col) in avail.iter().enumerate() {
            let mut rest_cols = avail.clone();
            rest_cols.remove(pos);
            let total = matrix.weight(row, col) + best_total(matrix, &rest_rows, &rest_cols);
            if total >= target - eps {
                chosen = Some((pos, col));
                break;
            }
        }
        let (pos, col) = chosen.expect("an optimal completion always exists");
        target -= matrix.weight(row, col);
        avail.remove(pos);
        assignment.push(col);
    }
    Ok(assignment)
}

/// Uniform injective assignment drawn from the seed; the baseline strategy.
pub fn random_assignment(matrix: &SinrMatrix, seed: u64) -> Result<Vec<usize>, NetappsError> {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if rows > cols {
        return Err(NetappsError::RowsExceedColumns { rows, cols });
    }
    let mut columns: Vec<usize> = (0..cols).collect();
    shuffle(Key::new(seed).word(domain::ASSIGN), &mut columns);
    Ok(columns[..rows].to_vec())
}
