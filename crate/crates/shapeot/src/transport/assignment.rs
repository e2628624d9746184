//! Square assignment problem via shortest augmenting paths with potentials
//! (the O(n³) Hungarian variant). Exact for real-valued costs up to float
//! rounding; used for uniform equal-cardinality transport where the LP has
//! permutation extreme points.

use nalgebra::DMatrix;

/// Returns the optimal column for each row and the number of augmentations.
pub(super) fn solve(cost: &DMatrix<f64>) -> (Vec<usize>, usize) {
    let n = cost.nrows();
    debug_assert_eq!(n, cost.ncols());
    // 1-based arrays; row_for_col[0] is the virtual column used as the start
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut row_for_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_for_col[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_for_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
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
                    u[row_for_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_for_col[j0] == 0 {
                break;
            }
        }
        // augment along the recorded alternating path
        loop {
            let j1 = way[j0];
            row_for_col[j0] = row_for_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![usize::MAX; n];
    for j in 1..=n {
        assignment[row_for_col[j] - 1] = j - 1;
    }
    (assignment, n)
}
