//! Confidence sequence from randomized Clopper-Pearson intervals recomputed
//! at stage boundaries and intersected under a union bound.

use crate::binom::Counts;
use crate::ci::{rcp_lower, rcp_upper};
use crate::error::{check_open_unit, Result};
use crate::interval::Interval;
use crate::rng::UniformSource;

use super::schedule::{Boundaries, Schedule};

#[derive(Debug, Clone)]
pub struct UnionCs {
    alpha: f64,
    schedule: Schedule,
    counts: Counts,
    stage: u64,
    next_update_at: u64,
    boundaries: Boundaries,
    running: Interval,
}

impl UnionCs {
    pub fn new(alpha: f64, schedule: Schedule) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        let mut boundaries = schedule.boundaries();
        let next_update_at = boundaries.next().unwrap_or(u64::MAX);
        Ok(UnionCs {
            alpha,
            schedule,
            counts: Counts::default(),
            stage: 0,
            next_update_at,
            boundaries,
            running: Interval::UNIT,
        })
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn running(&self) -> Interval {
        self.running
    }

    /// Number of completed stages.
    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn next_update_at(&self) -> u64 {
        self.next_update_at
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Absorbs one observation. At a stage boundary two fresh draws are
    /// taken from `draws` (lower side first) and a new randomized pair at
    /// half the stage budget per side is intersected into the running
    /// interval; otherwise nothing but the tally changes.
    pub fn update<S: UniformSource + ?Sized>(&mut self, x: bool, draws: &mut S) -> Interval {
        self.counts.push(x);
        if self.counts.trials < self.next_update_at {
            return self.running;
        }
        self.stage += 1;
        self.next_update_at = self.boundaries.next().unwrap_or(u64::MAX);

        let half = 0.5 * self.schedule.budget(self.alpha, self.stage);
        let w_lo = draws.next_uniform();
        let w_hi = draws.next_uniform();
        let lo = rcp_upper(self.counts, half, w_lo).lo;
        let up = rcp_lower(self.counts, half, w_hi).up;
        let fresh = if lo <= up {
            Interval { lo, up }
        } else {
            Interval::point(self.counts.mean())
        };
        self.running = match self.running.intersect(&fresh) {
            Some(i) => i,
            // Disjoint: keep the point of the old interval nearest the new one.
            None if fresh.lo > self.running.up => Interval::point(self.running.up),
            None => Interval::point(self.running.lo),
        };
        self.running
    }
}

/// One step of the union-bound sequence; see [`UnionCs::update`].
pub fn ub_cs_update<S: UniformSource + ?Sized>(
    state: &mut UnionCs,
    x: bool,
    draws: &mut S,
) -> Interval {
    state.update(x, draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, BernoulliStream, Fixed};

    #[test]
    fn first_update_uses_half_the_budget_per_stage() {
        let mut cs = UnionCs::new(0.05, Schedule::doubling()).unwrap();
        let i = cs.update(true, &mut Fixed(1.0));
        assert!((i.lo - 0.0125).abs() < 1e-9 && i.up == 1.0, "{i}");
        assert_eq!(cs.stage(), 1);
        assert_eq!(cs.next_update_at(), 2);

        let mut cs = UnionCs::new(0.05, Schedule::doubling()).unwrap();
        let i = cs.update(false, &mut Fixed(1.0));
        assert!(i.lo == 0.0 && (i.up - 0.9875).abs() < 1e-9, "{i}");
    }

    #[test]
    fn unchanged_between_boundaries() {
        let mut cs = UnionCs::new(0.05, Schedule::doubling()).unwrap();
        let mut draws = Fixed(0.5);
        for x in [true, false, true, true] {
            cs.update(x, &mut draws);
        }
        let at4 = cs.running();
        for x in [false, true, true] {
            assert_eq!(cs.update(x, &mut draws), at4);
        }
        assert_eq!(cs.stage(), 3);
        assert_ne!(cs.update(true, &mut draws), at4);
    }

    #[test]
    fn draws_consumed_only_at_boundaries() {
        struct Counting(u32);
        impl UniformSource for Counting {
            fn next_uniform(&mut self) -> f64 {
                self.0 += 1;
                0.5
            }
        }
        let mut cs = UnionCs::new(0.05, Schedule::doubling()).unwrap();
        let mut draws = Counting(0);
        for _ in 0..100 {
            cs.update(true, &mut draws);
        }
        // Boundaries 1, 2, 4, ..., 64.
        assert_eq!(draws.0, 2 * 7);
    }

    #[test]
    fn running_interval_is_nested() {
        for seed in 0..50 {
            let p = 0.02 * seed as f64;
            let mut bits = BernoulliStream::new(substream(seed, 0, 0, 0), p);
            let mut draws = substream(seed, 1, 0, 0);
            let mut cs = UnionCs::new(0.05, Schedule::geometric()).unwrap();
            let mut prev = Interval::UNIT;
            for _ in 0..2000 {
                let i = cs.update(bits.next().unwrap(), &mut draws);
                assert!(i.is_subset_of(&prev), "seed {seed}: {i} not in {prev}");
                prev = i;
            }
        }
    }

    #[test]
    fn running_is_the_intersection_of_stage_intervals() {
        let bits: Vec<bool> = (0..40).map(|k| k % 3 == 0).collect();
        let mut cs = UnionCs::new(0.01, Schedule::doubling()).unwrap();
        for &x in &bits {
            cs.update(x, &mut Fixed(1.0));
        }
        let mut expect = Interval::UNIT;
        for (k, t) in [1u64, 2, 4, 8, 16, 32].into_iter().enumerate() {
            let heads = bits[..t as usize].iter().filter(|&&b| b).count() as u64;
            let c = Counts::new(heads, t).unwrap();
            let k = (k + 1) as f64;
            let half = 0.5 * 0.01 / (k * (k + 1.0));
            let fresh = Interval {
                lo: crate::ci::cp_upper(c, half).lo,
                up: crate::ci::cp_lower(c, half).up,
            };
            expect = expect.intersect(&fresh).unwrap();
        }
        assert_eq!(cs.running(), expect);
    }
}
