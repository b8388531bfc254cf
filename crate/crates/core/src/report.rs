//! Text and CSV rendering of ANOVA tables, plus the two-table
//! sensitivity comparison.
//!
//! The text renderer produces the classic fixed-effects layout: a factor
//! block, one row per source with `DF`, `Seq SS`, `Adj SS`, `Adj MS`,
//! `F` and `P`, an error and total row, and an `S = … R-Sq = … R-Sq(adj)
//! = …` footer. Columns are space-aligned with widths computed from the
//! actual content. Sums of squares and mean squares print with seven
//! decimals, F with two, and p with three (so any p below 0.0005 shows
//! as `0.000`); undefined statistics print as `*`.
//!
//! [`sensitivity_summary`] lines two tables up row by row and decides,
//! per source, which analysis reacts more strongly — larger F wins —
//! with ties and jointly non-significant rows called out explicitly.

use serde::{Deserialize, Serialize};

use crate::glm::AnovaTable;

/// Relative F difference below which two rows are declared a tie.
pub const F_TIE_TOLERANCE: f64 = 1e-6;

/// Errors from table comparison.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("tables have different numbers of source rows: {a} vs {b}")]
    RowCountMismatch { a: usize, b: usize },
    #[error("tables disagree on source rows at position {index}: {a:?} vs {b:?}")]
    SourceMismatch { index: usize, a: String, b: String },
    #[error("source {source_name:?} has no defined F ratio in table {table}")]
    UndefinedF { source_name: String, table: char },
    #[error("alpha must lie strictly between 0 and 1, got {value}")]
    BadAlpha { value: f64 },
}

/// Verdict for one source row of a sensitivity comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoreSensitive {
    A,
    B,
    Tie,
    NeitherSignificant,
}

impl std::fmt::Display for MoreSensitive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MoreSensitive::A => "A",
            MoreSensitive::B => "B",
            MoreSensitive::Tie => "tie",
            MoreSensitive::NeitherSignificant => "neither",
        })
    }
}

/// One source row of a sensitivity comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub source: String,
    pub f_a: f64,
    pub p_a: f64,
    pub significant_a: bool,
    pub f_b: f64,
    pub p_b: f64,
    pub significant_b: bool,
    pub more_sensitive: MoreSensitive,
}

fn fmt_ss(value: f64) -> String {
    format!("{value:.7}")
}

fn fmt_f(value: f64) -> String {
    format!("{value:.2}")
}

fn fmt_p(value: f64) -> String {
    format!("{value:.3}")
}

/// Formats with `digits` significant digits (plain notation), the style
/// used for the footer `S`.
fn fmt_sig(value: f64, digits: usize) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Space-aligns `rows` under `header`; column 0 is left-aligned, the rest
/// right-aligned. Trailing spaces are trimmed per line.
fn align_columns(header: &[&str], rows: &[Vec<String>]) -> String {
    let columns = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let mut emit = |cells: Vec<String>| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if i == 0 {
                line.push_str(&format!("{cell:<width$}", width = widths[i]));
            } else {
                line.push_str(&format!("{cell:>width$}", width = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };
    emit(header.iter().map(|h| h.to_string()).collect());
    for row in rows {
        debug_assert_eq!(row.len(), columns);
        emit(row.clone());
    }
    out
}

/// Renders a table in the classic fixed-effects ANOVA layout.
pub fn render_anova(table: &AnovaTable) -> String {
    let mut out = String::new();

    if !table.factors.is_empty() {
        let rows: Vec<Vec<String>> = table
            .factors
            .iter()
            .map(|f| {
                let values: Vec<String> = f.values.iter().map(|v| format!("{v}")).collect();
                vec![
                    f.name.clone(),
                    "fixed".to_string(),
                    f.values.len().to_string(),
                    values.join(", "),
                ]
            })
            .collect();
        // The values column reads better left-aligned; emit it by hand.
        let name_width = rows
            .iter()
            .map(|r| r[0].len())
            .chain(["Factor".len()])
            .max()
            .unwrap();
        let levels_width = rows
            .iter()
            .map(|r| r[2].len())
            .chain(["Levels".len()])
            .max()
            .unwrap();
        out.push_str(&format!(
            "{:<name_width$}  {:<5}  {:>levels_width$}  {}\n",
            "Factor", "Type", "Levels", "Values"
        ));
        for r in &rows {
            out.push_str(&format!(
                "{:<name_width$}  {:<5}  {:>levels_width$}  {}\n",
                r[0], r[1], r[2], r[3]
            ));
        }
        out.push('\n');
    }

    out.push_str(&format!("Analysis of Variance for {}\n\n", table.response));

    let header = ["Source", "DF", "Seq SS", "Adj SS", "Adj MS", "F", "P"];
    let mut rows: Vec<Vec<String>> = Vec::new();
    for row in &table.rows {
        rows.push(vec![
            row.source.clone(),
            row.df.to_string(),
            fmt_ss(row.seq_ss),
            fmt_ss(row.adj_ss),
            fmt_ss(row.adj_ms),
            row.f.map_or_else(|| "*".to_string(), fmt_f),
            row.p.map_or_else(|| "*".to_string(), fmt_p),
        ]);
    }
    if let Some(error) = &table.error {
        rows.push(vec![
            "Error".to_string(),
            error.df.to_string(),
            fmt_ss(error.ss),
            fmt_ss(error.ss),
            fmt_ss(error.ms),
            String::new(),
            String::new(),
        ]);
    }
    rows.push(vec![
        "Total".to_string(),
        table.total_df.to_string(),
        fmt_ss(table.total_ss),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    out.push_str(&align_columns(&header, &rows));

    if let (Some(s), Some(r_sq), Some(r_sq_adj)) = (table.s, table.r_sq, table.r_sq_adj) {
        out.push('\n');
        out.push_str(&format!(
            "S = {}   R-Sq = {:.2}%   R-Sq(adj) = {:.2}%\n",
            fmt_sig(s, 6),
            100.0 * r_sq,
            100.0 * r_sq_adj
        ));
    }
    out
}

/// CSV rendering of a table: full-precision numbers, one row per source
/// plus `Error` and `Total` rows; undefined entries are empty fields.
/// Summary statistics ride along as `#`-prefixed comment lines.
pub fn anova_to_csv(table: &AnovaTable) -> String {
    let mut out = String::new();
    out.push_str(&format!("# response: {}\n", table.response));
    if let (Some(s), Some(r_sq), Some(r_sq_adj)) = (table.s, table.r_sq, table.r_sq_adj) {
        out.push_str(&format!("# s: {s}\n"));
        out.push_str(&format!("# r_sq: {r_sq}\n"));
        out.push_str(&format!("# r_sq_adj: {r_sq_adj}\n"));
    }
    out.push_str("source,df,seq_ss,adj_ss,adj_ms,f,p\n");
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x}"));
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.source,
            row.df,
            row.seq_ss,
            row.adj_ss,
            row.adj_ms,
            opt(row.f),
            opt(row.p),
        ));
    }
    if let Some(error) = &table.error {
        out.push_str(&format!(
            "Error,{},{},{},{},,\n",
            error.df, error.ss, error.ss, error.ms
        ));
    }
    out.push_str(&format!("Total,{},{},,,,\n", table.total_df, table.total_ss));
    out
}

/// Compares two tables of the same design row by row at significance
/// level `alpha`.
///
/// Per source, in order of precedence: F ratios within
/// [`F_TIE_TOLERANCE`] relative difference are a tie; rows where neither
/// table is significant at `alpha` are called jointly non-significant;
/// otherwise the table with the larger F is the more sensitive one.
///
/// # Errors
///
/// The tables must list identical sources in identical order and every
/// row must carry a defined F ratio; `alpha` must lie strictly in (0, 1).
pub fn sensitivity_summary(
    a: &AnovaTable,
    b: &AnovaTable,
    alpha: f64,
) -> Result<Vec<SensitivityRow>, ReportError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ReportError::BadAlpha { value: alpha });
    }
    if a.rows.len() != b.rows.len() {
        return Err(ReportError::RowCountMismatch {
            a: a.rows.len(),
            b: b.rows.len(),
        });
    }

    let mut rows = Vec::with_capacity(a.rows.len());
    for (index, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        if ra.source != rb.source {
            return Err(ReportError::SourceMismatch {
                index,
                a: ra.source.clone(),
                b: rb.source.clone(),
            });
        }
        let undefined = |table| ReportError::UndefinedF {
            source_name: ra.source.clone(),
            table,
        };
        let f_a = ra.f.ok_or_else(|| undefined('A'))?;
        let p_a = ra.p.ok_or_else(|| undefined('A'))?;
        let f_b = rb.f.ok_or_else(|| undefined('B'))?;
        let p_b = rb.p.ok_or_else(|| undefined('B'))?;

        let significant_a = p_a < alpha;
        let significant_b = p_b < alpha;
        let scale = f_a.abs().max(f_b.abs());
        let more_sensitive = if scale == 0.0 || (f_a - f_b).abs() / scale < F_TIE_TOLERANCE {
            MoreSensitive::Tie
        } else if !significant_a && !significant_b {
            MoreSensitive::NeitherSignificant
        } else if f_a > f_b {
            MoreSensitive::A
        } else {
            MoreSensitive::B
        };

        rows.push(SensitivityRow {
            source: ra.source.clone(),
            f_a,
            p_a,
            significant_a,
            f_b,
            p_b,
            significant_b,
            more_sensitive,
        });
    }
    Ok(rows)
}

/// Renders a sensitivity comparison as an aligned text table.
pub fn render_sensitivity(
    rows: &[SensitivityRow],
    label_a: &str,
    label_b: &str,
    alpha: f64,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("Sensitivity comparison (alpha = {alpha})\n"));
    out.push_str(&format!("  A = {label_a}\n"));
    out.push_str(&format!("  B = {label_b}\n\n"));

    let header = [
        "Source",
        "F(A)",
        "P(A)",
        "Sig(A)",
        "F(B)",
        "P(B)",
        "Sig(B)",
        "More sensitive",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.source.clone(),
                fmt_f(r.f_a),
                fmt_p(r.p_a),
                if r.significant_a { "yes" } else { "no" }.to_string(),
                fmt_f(r.f_b),
                fmt_p(r.p_b),
                if r.significant_b { "yes" } else { "no" }.to_string(),
                r.more_sensitive.to_string(),
            ]
        })
        .collect();
    out.push_str(&align_columns(&header, &body));
    out
}

/// CSV rendering of a sensitivity comparison, full precision.
pub fn sensitivity_to_csv(rows: &[SensitivityRow]) -> String {
    let mut out = String::new();
    out.push_str("source,f_a,p_a,significant_a,f_b,p_b,significant_b,more_sensitive\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.source,
            r.f_a,
            r.p_a,
            r.significant_a,
            r.f_b,
            r.p_b,
            r.significant_b,
            serde_json::to_value(r.more_sensitive)
                .expect("enum serialization cannot fail")
                .as_str()
                .unwrap(),
        ));
    }
    out
}
