//! Anytime-valid estimation of Bernoulli parameters.
//!
//! The crate is layered bottom-up:
//!
//! - [`binom`], [`normal`], [`roots`]: numerically stable binomial tails, the
//!   standard normal quantile and a deterministic bisection routine.
//! - [`ci`]: fixed-sample Clopper-Pearson intervals, their randomized (exact
//!   coverage) variant and Hoeffding intervals.
//! - [`cs`]: confidence sequences, either recomputing randomized intervals on a
//!   geometric schedule under a union bound, or betting against every candidate
//!   mean with the Krichevsky-Trofimov mixture.
//! - [`decision`]: the sequential "is the mean above or below a threshold" task
//!   and the baselines it is compared against.
//! - [`cert`]: randomized-smoothing certification on top of the above.
//!
//! All randomness is injected. Monte Carlo drivers derive one independent
//! ChaCha substream per trial from a 64-bit seed (see [`rng`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binom;
pub mod cert;
pub mod ci;
pub mod cs;
pub mod decision;
mod error;
pub mod interval;
pub mod normal;
pub mod rng;
pub mod roots;

pub use binom::Counts;
pub use error::{Error, Result};
pub use interval::Interval;
