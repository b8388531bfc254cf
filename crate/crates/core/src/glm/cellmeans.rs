//! Adjusted sums of squares for balanced full factorials, computed
//! directly from margin means.
//!
//! For a source `T` (a non-empty subset of factors) the effect at each
//! `T`-level combination is the inclusion-exclusion alternating sum of the
//! margin means of its subsets; the sum of squared effects times the
//! number of observations per `T`-combination gives the source SS. On a
//! balanced design this equals both the sequential and the adjusted SS of
//! the general linear model.
//!
//! All loops run in a fixed order and accumulate with compensated
//! summation, so results are bitwise reproducible for a given canonical
//! observation order.

use super::numeric::CompensatedSum;

/// SS and degrees of freedom for one source, identified by its factor
/// bitmask (bit `i` = factor `i`).
pub(crate) struct SourceSs {
    pub mask: u32,
    pub df: usize,
    pub ss: f64,
}

/// Full decomposition of a balanced response vector.
pub(crate) struct Decomposition {
    pub sources: Vec<SourceSs>,
    pub error_ss: f64,
    pub error_df: usize,
    pub total_ss: f64,
    pub total_df: usize,
    pub grand_mean: f64,
}

/// Margin table for one subset of factors: compensated sums and counts per
/// level combination of that subset.
struct Margin {
    sums: Vec<CompensatedSum>,
    counts: Vec<u64>,
}

impl Margin {
    fn new(size: usize) -> Self {
        Margin {
            sums: vec![CompensatedSum::default(); size],
            counts: vec![0; size],
        }
    }

    fn mean(&self, index: usize) -> f64 {
        self.sums[index].value() / self.counts[index] as f64
    }
}

/// Index of an observation's level combination within the margin table of
/// `mask`, mixed-radix over the factors in the mask in ascending order.
fn margin_index(mask: u32, levels: &[usize], codes: &[usize]) -> usize {
    let mut index = 0;
    for (i, &l) in levels.iter().enumerate() {
        if mask & (1 << i) != 0 {
            index = index * l + codes[i];
        }
    }
    index
}

/// Number of level combinations of the factors in `mask`.
fn margin_size(mask: u32, levels: &[usize]) -> usize {
    levels
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &l)| l)
        .product()
}

/// Decodes a margin-table index back into per-factor level codes (only the
/// factors in `mask` are written).
fn decode_margin_index(mask: u32, levels: &[usize], mut index: usize, codes: &mut [usize]) {
    for (i, &l) in levels.iter().enumerate().rev() {
        if mask & (1 << i) != 0 {
            codes[i] = index % l;
            index /= l;
        }
    }
}

/// Source masks in canonical row order: main effects first in factor
/// order, then interactions by ascending order (pairs, triples, ...), each
/// group ordered lexicographically by factor indices.
pub(crate) fn source_masks(k: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (1..(1u32 << k)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// Computes every source SS, the error SS and the total SS of a balanced
/// design.
///
/// `codes[i]` are observation `i`'s level codes, `y[i]` its response.
/// Callers must pass observations in canonical (cell, replicate) order and
/// a balanced design; both are established by the caller.
pub(crate) fn decompose(
    levels: &[usize],
    codes: &[Vec<usize>],
    y: &[f64],
    replicates: usize,
) -> Decomposition {
    let k = levels.len();
    let n = y.len();
    let full: u32 = (1u32 << k) - 1;
    debug_assert_eq!(n, replicates * levels.iter().product::<usize>());

    let grand_mean = {
        let mut acc = CompensatedSum::default();
        for &v in y {
            acc.add(v);
        }
        acc.value() / n as f64
    };

    // Margin tables for every non-empty subset of factors.
    let mut margins: Vec<Margin> = (0..=full)
        .map(|mask| Margin::new(margin_size(mask, levels)))
        .collect();
    for mask in 1..=full {
        let margin = &mut margins[mask as usize];
        for (obs_codes, &value) in codes.iter().zip(y) {
            let idx = margin_index(mask, levels, obs_codes);
            margin.sums[idx].add(value);
            margin.counts[idx] += 1;
        }
    }

    let mut sources = Vec::new();
    let mut scratch = vec![0usize; k];
    for mask in source_masks(k) {
        let size = margin_size(mask, levels);
        let mut sum_sq = CompensatedSum::default();
        for combo in 0..size {
            decode_margin_index(mask, levels, combo, &mut scratch);
            // Inclusion-exclusion over all subsets of the source, the
            // empty subset contributing the grand mean.
            let mut effect = CompensatedSum::default();
            let mut sub = mask;
            loop {
                let sign = if (mask.count_ones() - sub.count_ones()) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let term = if sub == 0 {
                    grand_mean
                } else {
                    margins[sub as usize].mean(margin_index(sub, levels, &scratch))
                };
                effect.add(sign * term);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
            let e = effect.value();
            sum_sq.add(e * e);
        }
        let df = levels
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &l)| l - 1)
            .product();
        sources.push(SourceSs {
            mask,
            df,
            ss: (n as f64 / size as f64) * sum_sq.value(),
        });
    }

    // Error: spread of observations around their full-cell means.
    let mut error = CompensatedSum::default();
    for (obs_codes, &value) in codes.iter().zip(y) {
        let cell_mean = margins[full as usize].mean(margin_index(full, levels, obs_codes));
        let r = value - cell_mean;
        error.add(r * r);
    }
    let n_cells: usize = levels.iter().product();

    let mut total = CompensatedSum::default();
    for &value in y {
        let r = value - grand_mean;
        total.add(r * r);
    }

    Decomposition {
        sources,
        error_ss: error.value(),
        error_df: n_cells * (replicates - 1),
        total_ss: total.value(),
        total_df: n - 1,
        grand_mean,
    }
}
