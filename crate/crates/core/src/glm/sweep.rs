//! Sequential sums of squares via the sweep operator.
//!
//! This is a deliberately different code path from the margin-mean route
//! in [`cellmeans`](super::cellmeans): the model is built up column block
//! by column block (intercept, then one indicator block per source, in row
//! order) on the cross-products matrix, and each source's sequential SS is
//! the drop in residual SS when its block is swept in. On balanced designs
//! the two routes must agree, which the test suite asserts.
//!
//! The response is centered on the grand mean before the cross-products
//! matrix is formed; that removes the catastrophic cancellation that raw
//! second moments would suffer when responses are large (operation counts
//! in the millions).

use super::numeric::CompensatedSum;

/// Relative pivot tolerance: a diagonal entry this small compared to its
/// starting value is treated as linearly dependent and skipped.
const PIVOT_TOLERANCE: f64 = 1e-8;

/// Sequential SS per source, plus the residual SS of the full model.
pub(crate) struct SequentialSs {
    pub by_source: Vec<f64>,
    pub residual_ss: f64,
}

/// Computes sequential sums of squares for the given source masks (in
/// row order) on a balanced design.
///
/// `levels`, `codes` and `y` are as in
/// [`decompose`](super::cellmeans::decompose); `grand_mean` is the mean of
/// `y`.
pub(crate) fn sequential_ss(
    levels: &[usize],
    codes: &[Vec<usize>],
    y: &[f64],
    source_masks: &[u32],
    grand_mean: f64,
) -> SequentialSs {
    // Column layout: intercept, then one one-hot block per source.
    let block_sizes: Vec<usize> = source_masks
        .iter()
        .map(|&mask| {
            levels
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &l)| l)
                .product()
        })
        .collect();
    let p: usize = 1 + block_sizes.iter().sum::<usize>();
    let dim = p + 1; // trailing row/column holds X'y and y'y

    // Cross-products matrix of [1 | blocks | y - grand_mean].
    let mut m = vec![vec![0.0f64; dim]; dim];
    let mut y_col: Vec<CompensatedSum> = vec![CompensatedSum::default(); dim];
    let mut active = Vec::with_capacity(1 + source_masks.len());
    for (obs_codes, &value) in codes.iter().zip(y) {
        let centered = value - grand_mean;
        active.clear();
        active.push(0usize);
        let mut offset = 1usize;
        for (&mask, &size) in source_masks.iter().zip(&block_sizes) {
            let mut index = 0usize;
            for (i, &l) in levels.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    index = index * l + obs_codes[i];
                }
            }
            active.push(offset + index);
            offset += size;
        }
        for &a in &active {
            for &b in &active {
                m[a][b] += 1.0;
            }
            y_col[a].add(centered);
        }
        y_col[p].add(centered * centered);
    }
    for a in 0..p {
        m[a][p] = y_col[a].value();
        m[p][a] = m[a][p];
    }
    m[p][p] = y_col[p].value();

    let start_diag: Vec<f64> = (0..p).map(|i| m[i][i]).collect();
    let total_centered_ss = m[p][p];

    // Sweep the intercept, then each source block, recording the residual
    // SS after every block.
    sweep_column(&mut m, 0, start_diag[0]);
    let mut residual = m[p][p];
    let mut by_source = Vec::with_capacity(source_masks.len());
    let mut offset = 1usize;
    for &size in &block_sizes {
        for col in offset..offset + size {
            sweep_column(&mut m, col, start_diag[col]);
        }
        offset += size;
        let after = m[p][p];
        // Guard against sign noise when a block explains ~nothing.
        let drop = (residual - after).max(0.0);
        by_source.push(drop.min(total_centered_ss.max(0.0)));
        residual = after;
    }

    SequentialSs {
        by_source,
        residual_ss: residual.max(0.0),
    }
}

/// Sweeps column `k` of the symmetric matrix in place, skipping pivots
/// that have become (numerically) linearly dependent on columns already
/// swept.
fn sweep_column(m: &mut [Vec<f64>], k: usize, start_diag: f64) {
    let dim = m.len();
    let pivot = m[k][k];
    if pivot.abs() <= PIVOT_TOLERANCE * start_diag.abs().max(1.0) {
        return;
    }
    let row_k: Vec<f64> = m[k].clone();
    for j in 0..dim {
        m[k][j] = row_k[j] / pivot;
    }
    for i in 0..dim {
        if i == k {
            continue;
        }
        let factor = m[i][k];
        if factor == 0.0 {
            continue;
        }
        for j in 0..dim {
            m[i][j] -= factor * m[k][j];
        }
        m[i][k] = -factor / pivot;
    }
    m[k][k] = 1.0 / pivot;
}
