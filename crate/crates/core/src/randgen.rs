//! Seeded normal-variate generation via the trigonometric Box-Muller
//! transform.
//!
//! A [`UniformStream`] wraps a documented, seedable 64-bit PRNG (ChaCha8,
//! period 2^128) and maps its output to the open unit interval. Pairs of
//! uniforms are turned into pairs of standard normal variates by
//! [`box_muller_pair`], then scaled as `m + s * z`. Everything is
//! deterministic in the seed, so an input array can be regenerated exactly
//! from the seed recorded alongside a measurement.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier of the uniform source, recorded in dataset files so a reader
/// knows how to regenerate inputs: ChaCha8 seeded via `seed_from_u64`, with
/// each `f64` built from the top 53 bits of one 64-bit draw (zero redrawn).
pub const PRNG_ID: &str = "chacha8-u53";

/// Errors from generator construction and the raw transform.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RandError {
    /// A requested sample size of zero.
    #[error("sample size must be at least 1")]
    EmptySample,
    /// A non-finite or negative scale parameter.
    #[error("scale must be finite and non-negative, got {value}")]
    InvalidScale { value: f64 },
    /// A non-finite location parameter.
    #[error("location must be finite, got {value}")]
    InvalidLocation { value: f64 },
    /// `box_muller_pair` called with u1 outside (0, 1].
    #[error("u1 must lie in (0, 1], got {value}")]
    U1OutOfRange { value: f64 },
    /// `box_muller_pair` called with u2 outside [0, 1).
    #[error("u2 must lie in [0, 1), got {value}")]
    U2OutOfRange { value: f64 },
}

/// Parameters of one generated array: `n` normal variates with mean `m`
/// and standard deviation `s`, reproducible from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenSpec {
    /// Number of elements to generate (at least 1).
    pub n: usize,
    /// Mean of the generated distribution.
    pub m: f64,
    /// Standard deviation of the generated distribution (0 gives a
    /// constant array).
    pub s: f64,
    /// Seed for the uniform stream.
    pub seed: u64,
}

impl GenSpec {
    /// Validates the parameters: `n >= 1`, `m` finite, `s` finite and
    /// non-negative.
    pub fn new(n: usize, m: f64, s: f64, seed: u64) -> Result<Self, RandError> {
        if n == 0 {
            return Err(RandError::EmptySample);
        }
        if !m.is_finite() {
            return Err(RandError::InvalidLocation { value: m });
        }
        if !s.is_finite() || s < 0.0 {
            return Err(RandError::InvalidScale { value: s });
        }
        Ok(GenSpec { n, m, s, seed })
    }
}

/// Seeded source of uniforms strictly inside (0, 1).
///
/// An exact zero from the raw 53-bit conversion is discarded and the next
/// draw is used instead, so the logarithm in the Box-Muller transform never
/// sees zero. 1.0 is unreachable from a 53-bit fraction.
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    /// Creates a stream for the given seed.
    pub fn new(seed: u64) -> Self {
        UniformStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Identifier of the underlying generator and conversion.
    pub fn algorithm_id(&self) -> &'static str {
        PRNG_ID
    }

    /// Next uniform in the open interval (0, 1).
    pub fn next_unit(&mut self) -> f64 {
        loop {
            // Top 53 bits give the finest grid an f64 can represent in
            // [0, 1) with equal spacing.
            let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 {
                return u;
            }
        }
    }
}

/// Trigonometric Box-Muller transform: maps uniforms `(u1, u2)` to a pair
/// of independent standard normal variates
///
/// ```text
/// z1 = sqrt(-2 ln u1) * cos(2 pi u2)
/// z2 = sqrt(-2 ln u1) * sin(2 pi u2)
/// ```
///
/// `u1 = 1` is allowed and yields radius zero; `u1 = 0` is rejected (the
/// stream never produces it, see [`UniformStream`]).
///
/// # Errors
///
/// Rejects `u1` outside (0, 1] and `u2` outside [0, 1), NaN included.
pub fn box_muller_pair(u1: f64, u2: f64) -> Result<(f64, f64), RandError> {
    if !(u1 > 0.0 && u1 <= 1.0) {
        return Err(RandError::U1OutOfRange { value: u1 });
    }
    if !(u2 >= 0.0 && u2 < 1.0) {
        return Err(RandError::U2OutOfRange { value: u2 });
    }
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    Ok((radius * angle.cos(), radius * angle.sin()))
}

/// Generates `spec.n` normal variates with mean `spec.m` and standard
/// deviation `spec.s`, deterministically from `spec.seed`.
///
/// Uniform draws are consumed strictly in pairs `(u1, u2)` and both
/// members of each Box-Muller pair are used in order; for odd `n` the final
/// pair's second variate is discarded. All outputs are finite.
pub fn normal_sample(spec: &GenSpec) -> Vec<f64> {
    let mut stream = UniformStream::new(spec.seed);
    let mut out = Vec::with_capacity(spec.n);
    while out.len() < spec.n {
        let u1 = stream.next_unit();
        let u2 = stream.next_unit();
        let (z1, z2) = box_muller_pair(u1, u2)
            .expect("stream uniforms lie strictly inside (0, 1)");
        out.push(spec.m + spec.s * z1);
        if out.len() < spec.n {
            out.push(spec.m + spec.s * z2);
        }
    }
    out
}
