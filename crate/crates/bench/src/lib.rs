//! Benchmark-only crate; see `benches/sorts.rs`. The library target
//! exists so `cargo test --workspace` has something to compile and the
//! input-building helper is testable.

use sortlab_core::randgen::{normal_sample, GenSpec};

/// Builds the standard benchmark input: `n` normal variates with
/// location `m`, spread `s` and the given seed.
pub fn bench_input(n: usize, m: f64, s: f64, seed: u64) -> Vec<f64> {
    normal_sample(&GenSpec::new(n, m, s, seed).expect("valid benchmark spec"))
}
