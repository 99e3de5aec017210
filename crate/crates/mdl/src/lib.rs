//! Multi-distribution learning over finite instances.
//!
//! A learner has sampling access to a finite set of distributions and must
//! output the decision maximizing the worst-case expected reward
//! `μ_DR(a) = min_Q E[r(a, X_Q)]` after a fixed sampling budget. This crate
//! provides:
//!
//! - [`instance`]: exactly specified problem instances (finite decision set,
//!   finite real support, named probability vectors, bounded reward table)
//!   and every gap/complexity quantity derived from them.
//! - [`sampling`]: deterministic, seedable random streams with counter-based
//!   substream derivation for order-independent parallel Monte Carlo.
//! - [`algorithms`]: uniform exploration, non-uniform exploration, and the
//!   adaptive LCB-DR procedure built on a modified UCB-E inner loop that
//!   credits samples carried over from earlier rounds.
//! - [`bounds`]: closed-form regret / error-probability bound evaluators with
//!   applicability checks, plus the empirical-process variance quantities
//!   (exact via enumeration over the finite support, or Monte Carlo).
//! - [`verify`]: ground-truth oracles (exact enumeration of the output law),
//!   Monte Carlo regret estimation, and empirical tail / expectation checks
//!   of the concentration inequalities the bounds rest on.
//! - [`cli`]: a batch front-end emitting machine-readable JSON/CSV reports.
//!
//! Start with the runnable examples (`cargo run --example analyze_instance`,
//! `--example exact_oracle`, ...), each of which exercises one capability
//! end to end.

pub mod algorithms;
pub mod bounds;
pub mod cli;
pub mod instance;
pub mod sampling;
pub mod verify;

/// Absolute tolerance used when deciding whether a gap is positive.
///
/// Inputs are exact rationals in practice; the tolerance only guards float
/// roundoff.
pub const GAP_TOL: f64 = 1e-12;

/// Absolute tolerance for protocol-level comparisons (sampling thresholds,
/// budget ceilings, schedule validation) where quantities are products of a
/// handful of exact rationals.
pub const PROTOCOL_TOL: f64 = 1e-9;
