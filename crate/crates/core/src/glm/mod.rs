//! Fixed-effects ANOVA for balanced full-factorial datasets.
//!
//! [`anova`] decomposes a response column into one sum of squares per
//! source (every non-empty subset of factors), an error term and a total,
//! then attaches mean squares, F ratios and upper-tail probabilities. Two
//! independent code paths produce the SS columns: the adjusted SS comes
//! from margin means ([`cellmeans`]), the sequential SS from sweeping the
//! cross-products matrix ([`sweep`]). On balanced data — the only kind
//! accepted — the columns are equal up to floating-point noise, and the
//! test suite holds them to that.
//!
//! Undefined statistics are represented, not invented: with a single
//! replicate there is no error term and every F and p is `None`; with a
//! zero error mean square F is `None`, p is 0 by convention and the table
//! is flagged.

mod cellmeans;
mod numeric;
mod special;
mod sweep;

pub use special::{f_tail_prob, ln_beta, ln_gamma, regularized_incomplete_beta};

use serde::{Deserialize, Serialize};

use crate::doe::{BalanceViolation, Dataset};
use crate::runner::Observation;

/// Largest factor count the decomposition supports; the full model over k
/// factors has 2^k - 1 sources, so big k is both statistically and
/// computationally unreasonable.
pub const MAX_FACTORS: usize = 6;

/// Errors from the statistical engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GlmError {
    #[error("unbalanced dataset: {0}")]
    Unbalanced(#[from] BalanceViolation),
    #[error("dataset has no observations")]
    Empty,
    #[error("a full-model decomposition over {count} factors is not supported (max {MAX_FACTORS})")]
    TooManyFactors { count: usize },
    #[error("response {column} is not finite for cell {cell_id}, replicate {replicate}")]
    NonFiniteResponse {
        column: &'static str,
        cell_id: usize,
        replicate: usize,
    },
    #[error("f must be finite and non-negative, got {value}")]
    BadF { value: f64 },
    #[error("degrees of freedom must be positive, got d1 = {d1_value}, d2 = {d2_value}")]
    BadDf { d1_value: usize, d2_value: usize },
    #[error("x must lie in [0, 1], got {value}")]
    BadX { value: f64 },
    #[error("shape parameters must be positive and finite, got a = {a}, b = {b}")]
    BadShape { a: f64, b: f64 },
    #[error("continued fraction for I_x(a, b) did not converge (x = {x}, a = {a}, b = {b})")]
    NoConvergence { x: f64, a: f64, b: f64 },
    #[error("invalid table component: {message}")]
    BadComponent { message: String },
    #[error("table has no error term (single-replicate design)")]
    MissingErrorTerm,
}

/// Which dataset column to analyze.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    TimeSeconds,
    Comparisons,
    Writes,
}

impl Response {
    pub fn column(self) -> &'static str {
        match self {
            Response::TimeSeconds => "time_seconds",
            Response::Comparisons => "comparisons",
            Response::Writes => "writes",
        }
    }

    fn extract(self, obs: &Observation) -> f64 {
        match self {
            Response::TimeSeconds => obs.time_seconds,
            Response::Comparisons => obs.comparisons as f64,
            Response::Writes => obs.writes as f64,
        }
    }
}

impl std::fmt::Display for Response {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.column())
    }
}

impl std::str::FromStr for Response {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time_seconds" => Ok(Response::TimeSeconds),
            "comparisons" => Ok(Response::Comparisons),
            "writes" => Ok(Response::Writes),
            other => Err(format!(
                "unknown response {other:?} (expected time_seconds, comparisons or writes)"
            )),
        }
    }
}

/// A factor as it appears in a rendered table: name and actual level
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorInfo {
    pub name: String,
    pub values: Vec<f64>,
}

/// One source row of an ANOVA table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    /// Source label: factor names joined with `*` for interactions.
    pub source: String,
    pub df: usize,
    /// Sequential SS (sweep route).
    pub seq_ss: f64,
    /// Adjusted SS (margin-mean route); equals `seq_ss` on balanced data.
    pub adj_ss: f64,
    /// `adj_ss / df`.
    pub adj_ms: f64,
    /// F ratio against the error mean square; `None` when undefined.
    pub f: Option<f64>,
    /// Upper-tail probability of `f`; `None` when no error term exists,
    /// 0 by convention when the error mean square is zero.
    pub p: Option<f64>,
}

/// Error term of an ANOVA table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTerm {
    pub df: usize,
    pub ss: f64,
    pub ms: f64,
}

/// A complete fixed-effects ANOVA table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    /// Name of the analyzed response column.
    pub response: String,
    /// Factor block for rendering.
    pub factors: Vec<FactorInfo>,
    /// Source rows: mains in factor order, then interactions by order.
    pub rows: Vec<AnovaRow>,
    /// Absent for single-replicate designs.
    pub error: Option<ErrorTerm>,
    pub total_df: usize,
    pub total_ss: f64,
    /// Root error mean square, in response units.
    pub s: Option<f64>,
    /// Fraction of total SS explained by the model.
    pub r_sq: Option<f64>,
    /// `r_sq` penalized for model degrees of freedom.
    pub r_sq_adj: Option<f64>,
    /// True when the error mean square was exactly zero, making every F
    /// undefined (p is 0 by convention in that case).
    pub zero_error_ms: bool,
}

/// Summary statistics of a table with an error term:
/// `(s, r_sq, r_sq_adj)` where `s = sqrt(error MS)`,
/// `r_sq = 1 - SSE / SST` and
/// `r_sq_adj = 1 - (SSE / error df) / (SST / total df)`.
///
/// A constant response (`SST = 0`) yields `r_sq = r_sq_adj = 1` by
/// convention (the model explains everything there is).
///
/// # Errors
///
/// Fails on tables without an error term.
pub fn summary_stats(table: &AnovaTable) -> Result<(f64, f64, f64), GlmError> {
    let error = table.error.as_ref().ok_or(GlmError::MissingErrorTerm)?;
    Ok(summary_from_parts(
        error,
        table.total_df,
        table.total_ss,
    ))
}

fn summary_from_parts(error: &ErrorTerm, total_df: usize, total_ss: f64) -> (f64, f64, f64) {
    let s = error.ms.sqrt();
    if total_ss == 0.0 {
        return (s, 1.0, 1.0);
    }
    let r_sq = 1.0 - error.ss / total_ss;
    let r_sq_adj = 1.0 - (error.ss / error.df as f64) / (total_ss / total_df as f64);
    (s, r_sq, r_sq_adj)
}

/// Label for a source bitmask: factor names joined with `*`.
fn source_label(mask: u32, factors: &[FactorInfo]) -> String {
    let names: Vec<&str> = factors
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, f)| f.name.as_str())
        .collect();
    names.join("*")
}

/// Attaches mean squares, F ratios and p values to raw SS rows.
fn finish_table(
    response: String,
    factors: Vec<FactorInfo>,
    row_parts: Vec<(String, usize, f64, f64)>,
    error: Option<(usize, f64)>,
    total_df: usize,
    total_ss: f64,
) -> Result<AnovaTable, GlmError> {
    let error = error.map(|(df, ss)| ErrorTerm {
        df,
        ss,
        ms: ss / df as f64,
    });
    let zero_error_ms = matches!(&error, Some(e) if e.ms == 0.0);

    let mut rows = Vec::with_capacity(row_parts.len());
    for (source, df, seq_ss, adj_ss) in row_parts {
        let adj_ms = adj_ss / df as f64;
        let (f, p) = match &error {
            None => (None, None),
            Some(e) if e.ms == 0.0 => (None, Some(0.0)),
            Some(e) => {
                let f = adj_ms / e.ms;
                let p = f_tail_prob(f, df, e.df)?;
                (Some(f), Some(p))
            }
        };
        rows.push(AnovaRow {
            source,
            df,
            seq_ss,
            adj_ss,
            adj_ms,
            f,
            p,
        });
    }

    let (s, r_sq, r_sq_adj) = match &error {
        Some(e) => {
            let (s, r, ra) = summary_from_parts(e, total_df, total_ss);
            (Some(s), Some(r), Some(ra))
        }
        None => (None, None, None),
    };

    Ok(AnovaTable {
        response,
        factors,
        rows,
        error,
        total_df,
        total_ss,
        s,
        r_sq,
        r_sq_adj,
        zero_error_ms,
    })
}

/// Runs the full fixed-effects ANOVA of `response` over a balanced
/// dataset.
///
/// Observations are processed in canonical (cell, replicate) order
/// regardless of how the dataset stores them, so the result is bitwise
/// identical for any row permutation of the same data.
///
/// # Errors
///
/// Rejects unbalanced or empty datasets, non-finite response values, and
/// designs with more than [`MAX_FACTORS`] factors.
pub fn anova(dataset: &Dataset, response: Response) -> Result<AnovaTable, GlmError> {
    crate::doe::validate_balanced(dataset)?;
    if dataset.observations.is_empty() {
        return Err(GlmError::Empty);
    }
    let k = dataset.plan.factors.len();
    if k > MAX_FACTORS {
        return Err(GlmError::TooManyFactors { count: k });
    }

    let mut order: Vec<usize> = (0..dataset.observations.len()).collect();
    order.sort_by_key(|&i| {
        let o = &dataset.observations[i];
        (o.cell_id, o.replicate)
    });

    let levels = dataset.plan.shape();
    let mut codes = Vec::with_capacity(order.len());
    let mut y = Vec::with_capacity(order.len());
    for &i in &order {
        let obs = &dataset.observations[i];
        let value = response.extract(obs);
        if !value.is_finite() {
            return Err(GlmError::NonFiniteResponse {
                column: response.column(),
                cell_id: obs.cell_id,
                replicate: obs.replicate,
            });
        }
        // Level codes are derived from the cell id, the one place the
        // balance check already validated.
        codes.push(dataset.plan.cell(obs.cell_id).levels);
        y.push(value);
    }

    let factors: Vec<FactorInfo> = dataset
        .plan
        .factors
        .iter()
        .map(|f| FactorInfo {
            name: f.name.clone(),
            values: f.values.clone(),
        })
        .collect();

    let decomposition = cellmeans::decompose(&levels, &codes, &y, dataset.plan.replicates);
    let masks = cellmeans::source_masks(k);
    let sequential = sweep::sequential_ss(&levels, &codes, &y, &masks, decomposition.grand_mean);
    // The two SS routes are independent implementations; their residuals
    // agreeing is a cheap whole-pipeline consistency check.
    debug_assert!(
        (sequential.residual_ss - decomposition.error_ss).abs()
            <= 1e-6 * decomposition.total_ss.abs().max(1.0),
        "sweep residual {} disagrees with cell-mean SSE {}",
        sequential.residual_ss,
        decomposition.error_ss
    );

    let row_parts: Vec<(String, usize, f64, f64)> = decomposition
        .sources
        .iter()
        .zip(&sequential.by_source)
        .map(|(src, &seq)| {
            (
                source_label(src.mask, &factors),
                src.df,
                seq,
                src.ss,
            )
        })
        .collect();

    let error = (dataset.plan.replicates > 1)
        .then_some((decomposition.error_df, decomposition.error_ss));

    finish_table(
        response.column().to_string(),
        factors,
        row_parts,
        error,
        decomposition.total_df,
        decomposition.total_ss,
    )
}

impl AnovaTable {
    /// Builds a table from already-known components: `(label, df, ss)` per
    /// source plus an optional error term. Used to re-derive mean squares,
    /// F ratios, p values and summary statistics from published tables;
    /// the total is the sum of the parts.
    ///
    /// On balanced data sequential and adjusted SS coincide, so the given
    /// SS fills both columns.
    pub fn from_components(
        response: &str,
        factors: Vec<FactorInfo>,
        sources: &[(&str, usize, f64)],
        error: Option<(usize, f64)>,
    ) -> Result<AnovaTable, GlmError> {
        if sources.is_empty() {
            return Err(GlmError::BadComponent {
                message: "at least one source row is required".into(),
            });
        }
        for &(label, df, ss) in sources {
            if df == 0 {
                return Err(GlmError::BadComponent {
                    message: format!("source {label:?} has zero degrees of freedom"),
                });
            }
            if !ss.is_finite() || ss < 0.0 {
                return Err(GlmError::BadComponent {
                    message: format!("source {label:?} has invalid SS {ss}"),
                });
            }
        }
        if let Some((df, ss)) = error {
            if df == 0 || !ss.is_finite() || ss < 0.0 {
                return Err(GlmError::BadComponent {
                    message: format!("invalid error term (df = {df}, ss = {ss})"),
                });
            }
        }

        let total_df =
            sources.iter().map(|&(_, df, _)| df).sum::<usize>() + error.map_or(0, |(df, _)| df);
        let total_ss = numeric::sum_compensated(
            sources
                .iter()
                .map(|&(_, _, ss)| ss)
                .chain(error.map(|(_, ss)| ss)),
        );

        let row_parts = sources
            .iter()
            .map(|&(label, df, ss)| (label.to_string(), df, ss, ss))
            .collect();

        finish_table(
            response.to_string(),
            factors,
            row_parts,
            error,
            total_df,
            total_ss,
        )
    }

    /// JSON rendering with full-precision numbers; byte-identical for
    /// equal tables.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialization cannot fail")
    }
}
