//! Instrumented comparison sorts.
//!
//! Two insertion-sort variants with identical cost accounting so their
//! operation counts can be compared directly:
//!
//! * [`shift_insertion_sort`] scans *forward* from the front of the sorted
//!   prefix, and on the first element greater than the candidate performs a
//!   block shift and one insertion.
//! * [`insertion_sort`] is the conventional variant: it scans *backward*
//!   from the end of the sorted prefix, shifting as it goes.
//!
//! A comparison is one key-vs-key order test; a write is one element
//! assignment (saving the candidate to a temporary, each shift assignment,
//! and the final placement all count). Neither count depends on the clock,
//! so counters are exactly reproducible for a given input.
//!
//! Both variants use strict `>` tests only, which makes them stable: equal
//! keys keep their input order.

use serde::{Deserialize, Serialize};

/// Errors from the sorting entry points.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SortError {
    /// The input contained a NaN or infinite value at the given index.
    #[error("element at index {index} is not finite")]
    NonFinite { index: usize },
    /// An algorithm name did not match any known variant.
    #[error("unknown algorithm {name:?} (expected \"shift_insertion\" or \"insertion\")")]
    UnknownAlgorithm { name: String },
}

/// Deterministic cost counters for one sort run.
///
/// `wall_time` is filled in by the measurement harness; the sort routines
/// themselves leave it at zero (counters never depend on timing).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SortStats {
    /// Number of key-vs-key order tests performed.
    pub comparisons: u64,
    /// Number of element assignments performed.
    pub writes: u64,
    /// Measured wall time in seconds; zero when timing is disabled.
    pub wall_time: f64,
}

/// The two sort variants under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Forward-scanning variant with block shift on first greater element.
    ShiftInsertion,
    /// Conventional backward-scanning insertion sort.
    Insertion,
}

impl Algorithm {
    /// Stable identifier used in plan files, dataset files and reports.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ShiftInsertion => "shift_insertion",
            Algorithm::Insertion => "insertion",
        }
    }

    /// Runs this variant on `input`, returning the sorted copy and counters.
    pub fn sort(self, input: &[f64]) -> Result<(Vec<f64>, SortStats), SortError> {
        match self {
            Algorithm::ShiftInsertion => shift_insertion_sort(input),
            Algorithm::Insertion => insertion_sort(input),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = SortError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shift_insertion" => Ok(Algorithm::ShiftInsertion),
            "insertion" => Ok(Algorithm::Insertion),
            other => Err(SortError::UnknownAlgorithm {
                name: other.to_string(),
            }),
        }
    }
}

fn check_finite(input: &[f64]) -> Result<(), SortError> {
    match input.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(SortError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Generic forward-scanning engine; `is_greater(x, y)` must implement the
/// strict order test `x > y`. Every call to `is_greater` is counted as one
/// comparison.
///
/// For each candidate position `j` (left to right), the sorted prefix
/// `a[0..j]` is scanned from the front. At the first `i` with
/// `a[i] > a[j]`, the candidate is saved, `a[i..j]` is shifted one slot
/// right (writes walk from `j` down to `i + 1`), the candidate lands at
/// `i`, and the pass ends. If no prefix element is greater the candidate
/// stays put with zero writes.
pub fn shift_insertion_sort_by<T, F>(input: &[T], mut is_greater: F) -> (Vec<T>, SortStats)
where
    T: Clone,
    F: FnMut(&T, &T) -> bool,
{
    let mut a = input.to_vec();
    let mut stats = SortStats::default();
    for j in 1..a.len() {
        for i in 0..j {
            stats.comparisons += 1;
            if is_greater(&a[i], &a[j]) {
                let candidate = a[j].clone();
                stats.writes += 1;
                for k in (i + 1..=j).rev() {
                    a[k] = a[k - 1].clone();
                    stats.writes += 1;
                }
                a[i] = candidate;
                stats.writes += 1;
                break;
            }
        }
    }
    (a, stats)
}

/// Generic backward-scanning engine; `is_greater(x, y)` must implement the
/// strict order test `x > y`. Every call to `is_greater` is counted as one
/// comparison.
///
/// Each pass saves `a[j]` (one write), shifts greater prefix elements right
/// one at a time (one comparison and one write each), and places the saved
/// key (one write). The comparison that *stops* the scan is counted; a scan
/// that runs off the front of the array stops without a sentinel test.
pub fn insertion_sort_by<T, F>(input: &[T], mut is_greater: F) -> (Vec<T>, SortStats)
where
    T: Clone,
    F: FnMut(&T, &T) -> bool,
{
    let mut a = input.to_vec();
    let mut stats = SortStats::default();
    for j in 1..a.len() {
        let key = a[j].clone();
        stats.writes += 1;
        let mut slot = j;
        while slot > 0 {
            stats.comparisons += 1;
            if is_greater(&a[slot - 1], &key) {
                a[slot] = a[slot - 1].clone();
                stats.writes += 1;
                slot -= 1;
            } else {
                break;
            }
        }
        a[slot] = key;
        stats.writes += 1;
    }
    (a, stats)
}

/// Forward-scanning shift-insertion sort over finite keys.
///
/// Returns the sorted copy and exact counters. On an already ascending
/// input it performs `n(n-1)/2` comparisons and zero writes; on a strictly
/// descending input it performs `n-1` comparisons (each candidate is caught
/// by the first prefix element).
///
/// # Errors
///
/// Rejects inputs containing NaN or infinite values.
pub fn shift_insertion_sort(input: &[f64]) -> Result<(Vec<f64>, SortStats), SortError> {
    check_finite(input)?;
    Ok(shift_insertion_sort_by(input, |x, y| x > y))
}

/// Conventional backward-scanning insertion sort over finite keys.
///
/// Returns the sorted copy and exact counters. On an already ascending
/// input it performs `n-1` comparisons and `2(n-1)` writes (save and place
/// per pass); on a strictly descending input it performs `n(n-1)/2`
/// comparisons.
///
/// # Errors
///
/// Rejects inputs containing NaN or infinite values.
pub fn insertion_sort(input: &[f64]) -> Result<(Vec<f64>, SortStats), SortError> {
    check_finite(input)?;
    Ok(insertion_sort_by(input, |x, y| x > y))
}

/// Checks that `sorted` is non-decreasing and is a permutation of
/// `original` (multiset equality). Used as a correctness gate after every
/// measured run.
pub fn verify_sorted(sorted: &[f64], original: &[f64]) -> bool {
    if sorted.len() != original.len() {
        return false;
    }
    if !sorted.windows(2).all(|w| w[0] <= w[1]) {
        return false;
    }
    let mut a = sorted.to_vec();
    let mut b = original.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).all(|(x, y)| x == y)
}
