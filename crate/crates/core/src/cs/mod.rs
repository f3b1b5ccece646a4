//! Confidence sequences: intervals `I_t` with `P(∀t, p ∈ I_t) >= 1 - α`.

pub mod betting;
pub mod schedule;
pub mod thresholds;
pub mod union;

pub use betting::{bet_cs_update, kt_log_q, kt_log_wealth, BettingCs};
pub use schedule::{ub_cs_width_envelope, BudgetRule, Schedule};
pub use thresholds::{dp_thresholds, write_thresholds_csv};
pub use union::{ub_cs_update, UnionCs};

use crate::binom::Counts;
use crate::error::Result;
use crate::interval::Interval;
use crate::rng::UniformSource;

/// Which construction to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsKind {
    Union(Schedule),
    Betting,
}

impl CsKind {
    pub fn start(&self, alpha: f64) -> Result<CsState> {
        Ok(match self {
            CsKind::Union(s) => CsState::Union(UnionCs::new(alpha, *s)?),
            CsKind::Betting => CsState::Betting(BettingCs::new(alpha)?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CsKind::Betting => "betting",
            CsKind::Union(s) if *s == Schedule::geometric() => "union",
            CsKind::Union(s) if *s == Schedule::doubling() => "union-doubling",
            CsKind::Union(_) => "union-custom",
        }
    }

    /// Inverse of [`CsKind::name`] for the two named schedules.
    pub fn from_name(name: &str) -> Option<CsKind> {
        match name {
            "betting" => Some(CsKind::Betting),
            "union" => Some(CsKind::Union(Schedule::geometric())),
            "union-doubling" => Some(CsKind::Union(Schedule::doubling())),
            _ => None,
        }
    }
}

/// A running confidence sequence of either kind.
#[derive(Debug, Clone)]
pub enum CsState {
    Union(UnionCs),
    Betting(BettingCs),
}

impl CsState {
    /// Absorbs one bit. Only the union construction consumes draws.
    pub fn observe<S: UniformSource + ?Sized>(&mut self, x: bool, draws: &mut S) -> Interval {
        match self {
            CsState::Union(cs) => cs.update(x, draws),
            CsState::Betting(cs) => cs.update(x),
        }
    }

    pub fn running(&self) -> Interval {
        match self {
            CsState::Union(cs) => cs.running(),
            CsState::Betting(cs) => cs.running(),
        }
    }

    pub fn counts(&self) -> Counts {
        match self {
            CsState::Union(cs) => cs.counts(),
            CsState::Betting(cs) => cs.counts(),
        }
    }
}
