//! A laboratory for measuring how comparison sorts respond to the shape
//! of their input.
//!
//! The crate wires together five pieces:
//!
//! * [`sortcore`] — two instrumented insertion-family sorts (a
//!   forward-scanning shift variant and the conventional backward-scanning
//!   one) that count comparisons and element writes exactly.
//! * [`randgen`] — a deterministic normal-variate generator (polar-free
//!   Box–Muller transform over a seeded uniform stream) for building
//!   inputs with chosen location and spread.
//! * [`doe`] — balanced full-factorial experiment plans, the datasets
//!   they produce, and CSV/JSON (de)serialization with balance
//!   validation.
//! * [`runner`] — executes a plan: derives per-run seeds so competing
//!   algorithms sort identical inputs, randomizes run order, warms up,
//!   times, and verifies every sort.
//! * [`glm`] / [`report`] — fixed-effects ANOVA over a dataset response
//!   (two independent sum-of-squares routes, F ratios, upper-tail
//!   probabilities) plus text/CSV rendering and a two-table sensitivity
//!   comparison.
//!
//! Everything is deterministic given a master seed: rerunning a plan
//! reproduces the same datasets byte for byte (modulo wall-clock
//! timings), and the analysis is invariant to observation order.

pub mod doe;
pub mod glm;
pub mod randgen;
pub mod report;
pub mod runner;
pub mod sortcore;

pub use doe::{Dataset, ExperimentPlan, FactorSpec};
pub use glm::{anova, AnovaTable, Response};
pub use runner::{run_experiment, Observation};
pub use sortcore::{Algorithm, SortStats};
