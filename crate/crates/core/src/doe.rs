//! Balanced full-factorial experiment designs and the long-format dataset
//! model.
//!
//! A plan names `k` fixed factors, each with at least two distinct levels,
//! a replicate count and a master seed. Treatment cells are the Cartesian
//! product of the factor levels, enumerated in lexicographic order of their
//! level codes (factor 0 varies slowest), which makes the `cell_id` of a
//! level combination deterministic. A [`Dataset`] holds one algorithm's
//! observations over that design plus enough metadata (PRNG id, clock id,
//! run order) to audit or regenerate the run.

use serde::{Deserialize, Serialize};

use crate::runner::Observation;
use crate::sortcore::Algorithm;

/// First balance violation found in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BalanceViolation {
    /// A (cell, replicate) pair with no observation.
    #[error("no observation for cell {cell_id}, replicate {replicate}")]
    Missing { cell_id: usize, replicate: usize },
    /// A (cell, replicate) pair observed more than once.
    #[error("duplicate observation for cell {cell_id}, replicate {replicate}")]
    Duplicate { cell_id: usize, replicate: usize },
    /// An observation outside the plan's cell or replicate range.
    #[error("observation for cell {cell_id}, replicate {replicate} is outside the plan")]
    OutOfRange { cell_id: usize, replicate: usize },
}

/// Errors from plan construction and dataset (de)serialization.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DoeError {
    #[error("a plan needs at least one factor")]
    NoFactors,
    #[error("factor name {0:?} is not a valid identifier (letters, digits, underscore)")]
    BadFactorName(String),
    #[error("duplicate factor name {0:?}")]
    DuplicateFactorName(String),
    #[error("factor {factor:?} needs at least two levels, got {count}")]
    TooFewLevels { factor: String, count: usize },
    #[error("factor {factor:?} has a non-finite level value")]
    NonFiniteLevel { factor: String },
    #[error("factor {factor:?} lists the level value {value} twice")]
    DuplicateLevel { factor: String, value: f64 },
    #[error("replicates must be at least 1")]
    ZeroReplicates,
    #[error("a plan needs at least one algorithm")]
    NoAlgorithms,
    #[error("algorithm {0} is listed twice")]
    DuplicateAlgorithm(Algorithm),
    #[error("invalid plan JSON: {0}")]
    PlanJson(String),
    #[error("invalid dataset file (line {line}): {message}")]
    DatasetFormat { line: usize, message: String },
    #[error("unbalanced dataset: {0}")]
    Unbalanced(#[from] BalanceViolation),
}

/// One fixed factor: a name and its ordered level values.
///
/// Level *codes* are positional (0-based indices into `values`); the
/// dataset stores both the code and the actual value for each observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub name: String,
    pub values: Vec<f64>,
}

impl FactorSpec {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self, DoeError> {
        let spec = FactorSpec {
            name: name.into(),
            values,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), DoeError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(DoeError::BadFactorName(self.name.clone()));
        }
        if self.values.len() < 2 {
            return Err(DoeError::TooFewLevels {
                factor: self.name.clone(),
                count: self.values.len(),
            });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(DoeError::NonFiniteLevel {
                factor: self.name.clone(),
            });
        }
        for (i, v) in self.values.iter().enumerate() {
            if self.values[..i].contains(v) {
                return Err(DoeError::DuplicateLevel {
                    factor: self.name.clone(),
                    value: *v,
                });
            }
        }
        Ok(())
    }

    /// Number of levels.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One treatment cell: its id, level codes and actual level values,
/// parallel to the plan's factor list.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub levels: Vec<usize>,
    pub values: Vec<f64>,
}

/// A balanced full-factorial plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub factors: Vec<FactorSpec>,
    pub replicates: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
}

impl ExperimentPlan {
    /// Builds and validates a plan.
    pub fn new(
        factors: Vec<FactorSpec>,
        replicates: usize,
        master_seed: u64,
        algorithms: Vec<Algorithm>,
    ) -> Result<Self, DoeError> {
        let plan = ExperimentPlan {
            factors,
            replicates,
            master_seed,
            algorithms,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Re-checks every plan invariant (used after deserializing).
    pub fn validate(&self) -> Result<(), DoeError> {
        if self.factors.is_empty() {
            return Err(DoeError::NoFactors);
        }
        for (i, f) in self.factors.iter().enumerate() {
            f.validate()?;
            if self.factors[..i].iter().any(|g| g.name == f.name) {
                return Err(DoeError::DuplicateFactorName(f.name.clone()));
            }
        }
        if self.replicates == 0 {
            return Err(DoeError::ZeroReplicates);
        }
        if self.algorithms.is_empty() {
            return Err(DoeError::NoAlgorithms);
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(DoeError::DuplicateAlgorithm(*a));
            }
        }
        Ok(())
    }

    /// Parses a plan from JSON and validates it.
    pub fn from_json(text: &str) -> Result<Self, DoeError> {
        let plan: ExperimentPlan =
            serde_json::from_str(text).map_err(|e| DoeError::PlanJson(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization cannot fail")
    }

    /// Level counts per factor, in declaration order.
    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(FactorSpec::len).collect()
    }

    /// Number of treatment cells (product of level counts).
    pub fn n_cells(&self) -> usize {
        self.factors.iter().map(FactorSpec::len).product()
    }

    /// Measured runs per algorithm (cells x replicates).
    pub fn runs_per_algorithm(&self) -> usize {
        self.n_cells() * self.replicates
    }

    /// Decodes a cell id into its level codes and values.
    ///
    /// Ids enumerate the Cartesian product lexicographically: factor 0 is
    /// the most significant digit.
    pub fn cell(&self, id: usize) -> Cell {
        assert!(id < self.n_cells(), "cell id {id} out of range");
        let mut levels = vec![0usize; self.factors.len()];
        let mut rest = id;
        for (i, f) in self.factors.iter().enumerate().rev() {
            levels[i] = rest % f.len();
            rest /= f.len();
        }
        let values = self
            .factors
            .iter()
            .zip(&levels)
            .map(|(f, &c)| f.values[c])
            .collect();
        Cell { id, levels, values }
    }

    /// All cells in lexicographic order.
    pub fn cells(&self) -> Vec<Cell> {
        (0..self.n_cells()).map(|id| self.cell(id)).collect()
    }
}

/// Provenance metadata stored in every dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Identifier of the uniform PRNG that generated the inputs.
    pub prng_id: String,
    /// Identifier of the clock used for wall times ("none" when timing was
    /// disabled).
    pub clock_id: String,
    /// Smallest observed clock tick in nanoseconds (0 when timing was
    /// disabled).
    pub clock_resolution_ns: u64,
    /// Execution order: `run_order[t]` is the canonical run index
    /// (`cell_id * replicates + replicate - 1`) measured at position `t`.
    pub run_order: Vec<usize>,
}

/// One algorithm's observations over a plan, in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub plan: ExperimentPlan,
    pub algorithm: Algorithm,
    pub observations: Vec<Observation>,
    pub metadata: DatasetMeta,
}

/// Checks that the dataset is balanced and complete: every (cell,
/// replicate) pair of the plan appears exactly once.
pub fn validate_balanced(dataset: &Dataset) -> Result<(), BalanceViolation> {
    let n_cells = dataset.plan.n_cells();
    let replicates = dataset.plan.replicates;
    let mut seen = vec![false; n_cells * replicates];
    for obs in &dataset.observations {
        if obs.cell_id >= n_cells || obs.replicate == 0 || obs.replicate > replicates {
            return Err(BalanceViolation::OutOfRange {
                cell_id: obs.cell_id,
                replicate: obs.replicate,
            });
        }
        let slot = obs.cell_id * replicates + (obs.replicate - 1);
        if seen[slot] {
            return Err(BalanceViolation::Duplicate {
                cell_id: obs.cell_id,
                replicate: obs.replicate,
            });
        }
        seen[slot] = true;
    }
    if let Some(slot) = seen.iter().position(|s| !s) {
        return Err(BalanceViolation::Missing {
            cell_id: slot / replicates,
            replicate: slot % replicates + 1,
        });
    }
    Ok(())
}

impl Dataset {
    /// Renders the dataset as CSV with a `#`-prefixed metadata header
    /// block. Numeric fields use the shortest round-trippable decimal form,
    /// so `from_csv(to_csv(d)) == d`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# algorithm: {}\n", self.algorithm));
        out.push_str(&format!("# prng: {}\n", self.metadata.prng_id));
        out.push_str(&format!("# clock: {}\n", self.metadata.clock_id));
        out.push_str(&format!(
            "# clock_resolution_ns: {}\n",
            self.metadata.clock_resolution_ns
        ));
        out.push_str(&format!("# master_seed: {}\n", self.plan.master_seed));
        out.push_str(&format!("# replicates: {}\n", self.plan.replicates));
        for f in &self.plan.factors {
            let values: Vec<String> = f.values.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("# factor: {} = {}\n", f.name, values.join(",")));
        }
        let order: Vec<String> = self.metadata.run_order.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("# run_order: {}\n", order.join(",")));

        out.push_str("algorithm,cell_id");
        for f in &self.plan.factors {
            out.push_str(&format!(",level_{}", f.name));
        }
        for f in &self.plan.factors {
            out.push_str(&format!(",{}", f.name));
        }
        out.push_str(",replicate,derived_seed,time_seconds,comparisons,writes\n");

        for obs in &self.observations {
            out.push_str(&format!("{},{}", obs.algorithm, obs.cell_id));
            for level in &obs.levels {
                out.push_str(&format!(",{level}"));
            }
            for value in &obs.values {
                out.push_str(&format!(",{value}"));
            }
            out.push_str(&format!(
                ",{},{},{},{},{}\n",
                obs.replicate, obs.derived_seed, obs.time_seconds, obs.comparisons, obs.writes
            ));
        }
        out
    }

    /// Parses a dataset written by [`Dataset::to_csv`].
    ///
    /// Checks the column header against the declared factors, that every
    /// row's algorithm matches the file's, and that each row's level codes
    /// map to exactly the level values declared for the plan. Balance is
    /// *not* checked here; call [`validate_balanced`] on the result.
    pub fn from_csv(text: &str) -> Result<Self, DoeError> {
        let fail = |line: usize, message: String| DoeError::DatasetFormat { line, message };

        let mut algorithm: Option<Algorithm> = None;
        let mut prng_id: Option<String> = None;
        let mut clock_id: Option<String> = None;
        let mut clock_resolution_ns: u64 = 0;
        let mut master_seed: Option<u64> = None;
        let mut replicates: Option<usize> = None;
        let mut factors: Vec<FactorSpec> = Vec::new();
        let mut run_order: Vec<usize> = Vec::new();
        let mut header_seen = false;
        let mut observations: Vec<Observation> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if header_seen {
                    return Err(fail(lineno, "metadata after the column header".into()));
                }
                let meta = meta.trim();
                let (key, value) = meta
                    .split_once(':')
                    .ok_or_else(|| fail(lineno, format!("malformed metadata line {meta:?}")))?;
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "algorithm" => {
                        algorithm =
                            Some(value.parse().map_err(|e| fail(lineno, format!("{e}")))?);
                    }
                    "prng" => prng_id = Some(value.to_string()),
                    "clock" => clock_id = Some(value.to_string()),
                    "clock_resolution_ns" => {
                        clock_resolution_ns = value
                            .parse()
                            .map_err(|_| fail(lineno, format!("bad clock resolution {value:?}")))?
                    }
                    "master_seed" => {
                        master_seed = Some(
                            value
                                .parse()
                                .map_err(|_| fail(lineno, format!("bad master seed {value:?}")))?,
                        )
                    }
                    "replicates" => {
                        replicates = Some(
                            value
                                .parse()
                                .map_err(|_| fail(lineno, format!("bad replicate count {value:?}")))?,
                        )
                    }
                    "factor" => {
                        let (name, levels) = value.split_once('=').ok_or_else(|| {
                            fail(lineno, format!("malformed factor declaration {value:?}"))
                        })?;
                        let values = levels
                            .trim()
                            .split(',')
                            .map(|v| v.trim().parse::<f64>())
                            .collect::<Result<Vec<f64>, _>>()
                            .map_err(|_| fail(lineno, format!("bad factor levels {levels:?}")))?;
                        factors.push(FactorSpec {
                            name: name.trim().to_string(),
                            values,
                        });
                    }
                    "run_order" => {
                        if !value.is_empty() {
                            run_order = value
                                .split(',')
                                .map(|v| v.trim().parse::<usize>())
                                .collect::<Result<Vec<usize>, _>>()
                                .map_err(|_| fail(lineno, format!("bad run order {value:?}")))?;
                        }
                    }
                    other => return Err(fail(lineno, format!("unknown metadata key {other:?}"))),
                }
                continue;
            }

            if !header_seen {
                // Column header row: validate against the declared factors.
                if algorithm.is_none() {
                    return Err(fail(lineno, "missing `# algorithm:` metadata".into()));
                }
                if factors.is_empty() {
                    return Err(fail(lineno, "missing `# factor:` metadata".into()));
                }
                let mut expected = String::from("algorithm,cell_id");
                for f in &factors {
                    expected.push_str(&format!(",level_{}", f.name));
                }
                for f in &factors {
                    expected.push_str(&format!(",{}", f.name));
                }
                expected.push_str(",replicate,derived_seed,time_seconds,comparisons,writes");
                if line != expected {
                    return Err(fail(
                        lineno,
                        format!("column header {line:?} does not match factors {expected:?}"),
                    ));
                }
                header_seen = true;
                continue;
            }

            let fields: Vec<&str> = line.split(',').collect();
            let k = factors.len();
            let expected_fields = 2 + 2 * k + 5;
            if fields.len() != expected_fields {
                return Err(fail(
                    lineno,
                    format!("expected {expected_fields} fields, got {}", fields.len()),
                ));
            }
            let row_algorithm: Algorithm =
                fields[0].parse().map_err(|e| fail(lineno, format!("{e}")))?;
            let cell_id: usize = fields[1]
                .parse()
                .map_err(|_| fail(lineno, format!("bad cell id {:?}", fields[1])))?;
            let mut levels = Vec::with_capacity(k);
            let mut values = Vec::with_capacity(k);
            for (i, f) in factors.iter().enumerate() {
                let code: usize = fields[2 + i].parse().map_err(|_| {
                    fail(lineno, format!("bad level code {:?}", fields[2 + i]))
                })?;
                let value: f64 = fields[2 + k + i].parse().map_err(|_| {
                    fail(lineno, format!("bad level value {:?}", fields[2 + k + i]))
                })?;
                if code >= f.len() || f.values[code] != value {
                    return Err(fail(
                        lineno,
                        format!(
                            "level code {code} of factor {:?} does not map to value {value}",
                            f.name
                        ),
                    ));
                }
                levels.push(code);
                values.push(value);
            }
            let base = 2 + 2 * k;
            let replicate: usize = fields[base]
                .parse()
                .map_err(|_| fail(lineno, format!("bad replicate {:?}", fields[base])))?;
            let derived_seed: u64 = fields[base + 1]
                .parse()
                .map_err(|_| fail(lineno, format!("bad derived seed {:?}", fields[base + 1])))?;
            let time_seconds: f64 = fields[base + 2]
                .parse()
                .map_err(|_| fail(lineno, format!("bad time {:?}", fields[base + 2])))?;
            let comparisons: u64 = fields[base + 3]
                .parse()
                .map_err(|_| fail(lineno, format!("bad comparison count {:?}", fields[base + 3])))?;
            let writes: u64 = fields[base + 4]
                .parse()
                .map_err(|_| fail(lineno, format!("bad write count {:?}", fields[base + 4])))?;
            observations.push(Observation {
                algorithm: row_algorithm,
                cell_id,
                levels,
                values,
                replicate,
                derived_seed,
                time_seconds,
                comparisons,
                writes,
            });
        }

        if !header_seen {
            return Err(fail(text.lines().count(), "missing column header".into()));
        }
        let algorithm = algorithm.expect("checked before header");
        for (i, obs) in observations.iter().enumerate() {
            if obs.algorithm != algorithm {
                return Err(fail(
                    0,
                    format!(
                        "row {} is for algorithm {}, file is for {}",
                        i + 1,
                        obs.algorithm,
                        algorithm
                    ),
                ));
            }
        }
        let plan = ExperimentPlan::new(
            factors,
            replicates.ok_or_else(|| fail(0, "missing `# replicates:` metadata".into()))?,
            master_seed.ok_or_else(|| fail(0, "missing `# master_seed:` metadata".into()))?,
            vec![algorithm],
        )?;
        // The level codes are redundant with the cell id; a row where they
        // disagree is corrupt even if each part is individually valid.
        for (i, obs) in observations.iter().enumerate() {
            if obs.cell_id >= plan.n_cells() || obs.levels != plan.cell(obs.cell_id).levels {
                return Err(fail(
                    0,
                    format!(
                        "row {}: level codes {:?} do not match cell id {}",
                        i + 1,
                        obs.levels,
                        obs.cell_id
                    ),
                ));
            }
        }
        Ok(Dataset {
            plan,
            algorithm,
            observations,
            metadata: DatasetMeta {
                prng_id: prng_id.ok_or_else(|| fail(0, "missing `# prng:` metadata".into()))?,
                clock_id: clock_id.ok_or_else(|| fail(0, "missing `# clock:` metadata".into()))?,
                clock_resolution_ns,
                run_order,
            },
        })
    }
}
