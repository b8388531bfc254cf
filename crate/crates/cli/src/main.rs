//! `sortlab` — run sorting experiments, analyze them, and compare the
//! sensitivity of the two algorithms' analyses.
//!
//! Subcommands:
//!
//! * `run` — execute an experiment plan and write one dataset CSV per
//!   algorithm.
//! * `anova` — fixed-effects ANOVA of one dataset response (text, CSV or
//!   JSON).
//! * `compare` — row-by-row sensitivity comparison of two datasets'
//!   ANOVA tables.
//! * `fprob` — upper-tail probability of an F ratio.
//! * `gen` — emit one column of normal variates for ad-hoc use.
//! * `selftest` — run the built-in reference checks.
//!
//! Exit codes: 0 on success, 2 for invalid input (arguments, files,
//! unbalanced data), 3 for numerical failures (non-convergence, sort
//! verification, failed self-checks).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use sortlab_core::doe::{Dataset, DoeError, ExperimentPlan};
use sortlab_core::glm::{anova, f_tail_prob, GlmError, Response};
use sortlab_core::randgen::{normal_sample, GenSpec, RandError};
use sortlab_core::report::{
    anova_to_csv, render_anova, render_sensitivity, sensitivity_summary, sensitivity_to_csv,
    ReportError,
};
use sortlab_core::runner::{run_experiment, RunError};

#[derive(Parser)]
#[command(
    name = "sortlab",
    version,
    about = "Measure and analyze the comparison/write costs of two insertion sorts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment plan; writes <out>/<algorithm>.csv per algorithm.
    Run {
        /// Experiment plan (JSON).
        #[arg(long)]
        plan: PathBuf,
        /// Output directory for dataset CSV files.
        #[arg(long)]
        out: PathBuf,
        /// Override the plan's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Analyze one dataset response with a fixed-effects ANOVA.
    Anova {
        /// Dataset CSV produced by `run`.
        dataset: PathBuf,
        #[arg(long, default_value = "time_seconds", value_parser = Response::from_str)]
        response: Response,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the sensitivity of two datasets' ANOVA tables.
    Compare {
        /// First dataset CSV (table A).
        dataset_a: PathBuf,
        /// Second dataset CSV (table B).
        dataset_b: PathBuf,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value = "time_seconds", value_parser = Response::from_str)]
        response: Response,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper-tail probability of an F ratio with (d1, d2) degrees of freedom.
    Fprob { f: f64, d1: usize, d2: usize },
    /// Generate one CSV column of normal variates.
    Gen {
        /// Number of variates.
        #[arg(long)]
        n: usize,
        /// Location (mean).
        #[arg(long, default_value_t = 0.0)]
        m: f64,
        /// Spread (standard deviation), zero allowed.
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in reference checks and report each one.
    Selftest,
}

/// User-facing failure, carrying the exit code policy: invalid input
/// exits 2, numerical failure exits 3.
enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<DoeError> for CliError {
    fn from(e: DoeError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<GlmError> for CliError {
    fn from(e: GlmError) -> Self {
        match e {
            GlmError::NoConvergence { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<RandError> for CliError {
    fn from(e: RandError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::VerificationFailed { .. } | RunError::Sort { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, so readers
/// never observe a half-written file and an interrupted run leaves the
/// previous contents intact.
fn atomic_write(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let problem =
        |e: &dyn std::fmt::Display| CliError::Validation(format!("cannot write {}: {e}", path.display()));
    let mut file = tempfile::NamedTempFile::new_in(dir).map_err(|e| problem(&e))?;
    file.write_all(contents.as_bytes()).map_err(|e| problem(&e))?;
    file.persist(path).map_err(|e| problem(&e))?;
    Ok(())
}

/// Sends rendered output to `--out` (atomically) or stdout.
fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => atomic_write(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let text = read_file(path)?;
    Dataset::from_csv(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn cmd_run(plan_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut plan = ExperimentPlan::from_json(&read_file(plan_path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", plan_path.display())))?;
    if let Some(seed) = seed {
        plan.master_seed = seed;
    }
    if plan.replicates == 1 {
        eprintln!(
            "warning: single-replicate plan; the ANOVA will have no error term, \
             so no F ratios or p values"
        );
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", out_dir.display())))?;

    let datasets = run_experiment(&plan)?;
    for dataset in &datasets {
        let path = out_dir.join(format!("{}.csv", dataset.algorithm));
        atomic_write(&path, &dataset.to_csv())?;
        println!(
            "wrote {} ({} runs, master seed {})",
            path.display(),
            dataset.observations.len(),
            plan.master_seed
        );
    }
    Ok(())
}

fn cmd_anova(
    dataset_path: &Path,
    response: Response,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dataset = load_dataset(dataset_path)?;
    let table = anova(&dataset, response)?;
    let rendered = match format {
        OutputFormat::Text => render_anova(&table),
        OutputFormat::Csv => anova_to_csv(&table),
        OutputFormat::Json => table.to_json() + "\n",
    };
    emit(out, &rendered)
}

fn cmd_compare(
    path_a: &Path,
    path_b: &Path,
    alpha: f64,
    response: Response,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dataset_a = load_dataset(path_a)?;
    let dataset_b = load_dataset(path_b)?;
    let label_a = dataset_a.algorithm.name();
    let label_b = dataset_b.algorithm.name();
    let table_a = anova(&dataset_a, response)?;
    let table_b = anova(&dataset_b, response)?;
    let rows = sensitivity_summary(&table_a, &table_b, alpha)?;

    let rendered = match format {
        OutputFormat::Text => render_sensitivity(&rows, label_a, label_b, alpha),
        OutputFormat::Csv => sensitivity_to_csv(&rows),
        OutputFormat::Json => {
            let value = serde_json::json!({
                "alpha": alpha,
                "response": response.column(),
                "label_a": label_a,
                "label_b": label_b,
                "rows": rows,
            });
            serde_json::to_string_pretty(&value).expect("serialization cannot fail") + "\n"
        }
    };
    emit(out, &rendered)
}

fn cmd_fprob(f: f64, d1: usize, d2: usize) -> Result<(), CliError> {
    let p = f_tail_prob(f, d1, d2)?;
    println!("{p}");
    Ok(())
}

fn cmd_gen(
    n: usize,
    m: f64,
    s: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let spec = GenSpec::new(n, m, s, seed)?;
    let values = normal_sample(&spec);
    let mut contents = String::with_capacity(values.len() * 20 + 6);
    contents.push_str("value\n");
    for v in values {
        writeln!(contents, "{v}").expect("string writes cannot fail");
    }
    emit(out, &contents)
}

fn cmd_selftest() -> Result<(), CliError> {
    let checks = sortlab::golden::run_selfchecks();
    let mut failed = 0usize;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status}  {}  ({})", c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} checks, {} failed", checks.len(), failed);
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} self-checks failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { plan, out, seed } => cmd_run(plan, out, *seed),
        Command::Anova {
            dataset,
            response,
            format,
            out,
        } => cmd_anova(dataset, *response, *format, out.as_deref()),
        Command::Compare {
            dataset_a,
            dataset_b,
            alpha,
            response,
            format,
            out,
        } => cmd_compare(
            dataset_a,
            dataset_b,
            *alpha,
            *response,
            *format,
            out.as_deref(),
        ),
        Command::Fprob { f, d1, d2 } => cmd_fprob(*f, *d1, *d2),
        Command::Gen { n, m, s, seed, out } => cmd_gen(*n, *m, *s, *seed, out.as_deref()),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
