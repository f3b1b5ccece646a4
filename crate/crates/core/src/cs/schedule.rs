//! Recomputation times and per-stage failure budgets for the union-bound
//! confidence sequence.

use crate::error::{Error, Result};

/// How the total budget `α` is spread over stages `k = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetRule {
    /// `α_k = α (m + 1) / ((k + m)(k + m + 1))`; telescopes to exactly `α`.
    /// `m = 0` gives `α / (k(k+1))`, `m = 4` gives `5α / ((k+4)(k+5))`.
    Telescoping { offset: u32 },
    /// `α_k = c α / (k + m)^γ` with `c` normalizing the series to at most `α`.
    Power {
        exponent: f64,
        offset: f64,
        norm: f64,
    },
}

/// Stage layout: stage `k` starts at the `k`-th distinct value of
/// `⌈growth^K⌉`, `K = 0, 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub growth: f64,
    pub rule: BudgetRule,
}

impl Schedule {
    /// Recompute at `t = 1, 2, 4, 8, ...` with `α_k = α / (k(k+1))`.
    pub fn doubling() -> Self {
        Schedule {
            growth: 2.0,
            rule: BudgetRule::Telescoping { offset: 0 },
        }
    }

    /// Recompute whenever `t` passes `1.1^K`, with `α_k = 5α / ((k+4)(k+5))`.
    pub fn geometric() -> Self {
        Schedule {
            growth: 1.1,
            rule: BudgetRule::Telescoping { offset: 4 },
        }
    }

    /// Telescoping budget with an arbitrary growth factor and index offset.
    pub fn telescoping(growth: f64, offset: u32) -> Result<Self> {
        check_growth(growth)?;
        Ok(Schedule {
            growth,
            rule: BudgetRule::Telescoping { offset },
        })
    }

    /// Polynomially decaying budget `∝ 1 / (k + offset)^exponent`.
    pub fn power(growth: f64, exponent: f64, offset: f64) -> Result<Self> {
        check_growth(growth)?;
        if !(exponent > 1.0) {
            return Err(Error::invalid(
                "exponent",
                format!("must exceed 1, got {exponent}"),
            ));
        }
        if !(offset >= 0.0) {
            return Err(Error::invalid(
                "offset",
                format!("must be nonnegative, got {offset}"),
            ));
        }
        Ok(Schedule {
            growth,
            rule: BudgetRule::Power {
                exponent,
                offset,
                norm: power_series_upper(exponent, offset),
            },
        })
    }

    /// Failure budget of stage `k >= 1`.
    pub fn budget(&self, alpha: f64, k: u64) -> f64 {
        debug_assert!(k >= 1);
        let k = k as f64;
        match self.rule {
            BudgetRule::Telescoping { offset } => {
                let m = offset as f64;
                alpha * (m + 1.0) / ((k + m) * (k + m + 1.0))
            }
            BudgetRule::Power {
                exponent,
                offset,
                norm,
            } => alpha / norm / (k + offset).powf(exponent),
        }
    }

    /// Start times of successive stages.
    pub fn boundaries(&self) -> Boundaries {
        Boundaries {
            growth: self.growth,
            power: 0,
            last: 0,
        }
    }

    /// Width envelope `C·√(growth·(ln(1/(γ-1)) + ln(1/α) + γ ln log_growth t) / t)`
    /// for the power rule; the telescoping rules behave like `γ = 2` and
    /// the doubling schedule reduces to `C·√((ln(1/α) + ln ln t) / t)`.
    pub fn width_envelope(&self, alpha: f64, t: u64, constant: f64) -> Result<f64> {
        ub_cs_width_envelope(t, alpha, constant).map(|base| {
            if *self == Schedule::doubling() {
                return base;
            }
            let tf = t as f64;
            let gamma = match self.rule {
                BudgetRule::Telescoping { .. } => 2.0,
                BudgetRule::Power { exponent, .. } => exponent,
            };
            let log_b = (tf.ln() / self.growth.ln()).max(1.0);
            let inner = (1.0 / (gamma - 1.0)).ln() + (1.0 / alpha).ln() + gamma * log_b.ln();
            constant * (self.growth * inner.max(0.0) / tf).sqrt()
        })
    }
}

/// `C·√((ln(1/α) + ln ln t) / t)`, defined for `t >= 3`.
pub fn ub_cs_width_envelope(t: u64, alpha: f64, constant: f64) -> Result<f64> {
    if t < 3 {
        return Err(Error::invalid(
            "t",
            format!("envelope needs t >= 3, got {t}"),
        ));
    }
    let tf = t as f64;
    Ok(constant * (((1.0 / alpha).ln() + tf.ln().ln()) / tf).sqrt())
}

fn check_growth(growth: f64) -> Result<()> {
    if growth > 1.0 && growth.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "growth",
            format!("must exceed 1, got {growth}"),
        ))
    }
}

/// Upper bound on `Σ_{k>=1} (k + m)^{-γ}`: exact head plus the midpoint
/// integral of the tail, which dominates the tail for a convex summand.
fn power_series_upper(gamma: f64, m: f64) -> f64 {
    const HEAD: u32 = 20_000;
    let head: f64 = (1..=HEAD).map(|k| (k as f64 + m).powf(-gamma)).sum();
    let start = HEAD as f64 + 0.5 + m;
    head + start.powf(1.0 - gamma) / (gamma - 1.0)
}

/// Iterator over distinct `⌈growth^K⌉`.
#[derive(Debug, Clone)]
pub struct Boundaries {
    growth: f64,
    power: i32,
    last: u64,
}

impl Iterator for Boundaries {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            let t = self.growth.powi(self.power).ceil();
            self.power += 1;
            if t >= u64::MAX as f64 {
                return None;
            }
            let t = t as u64;
            if t > self.last {
                self.last = t;
                return Some(t);
            }
        }
    }
}
