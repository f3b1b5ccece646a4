//! Betting confidence sequence.
//!
//! For every candidate mean `p` a gambler stakes, on each toss, the fraction
//! suggested by the Krichevsky-Trofimov estimate `(H + 1/2) / (t + 1)`. The
//! wealth against `p` after `t` tosses is `Q / P(p)`, where
//!
//! ```text
//! ln Q    = Σ ln(estimated probability of the observed bit)
//! ln P(p) = H ln p + (t - H) ln(1 - p)
//! ```
//!
//! Wealth is a nonnegative martingale under `p`, so by Ville's inequality
//! `{p : ln Q - ln P(p) <= ln(1/α)}` holds the truth at all times with
//! probability `1 - α`. The map `g(p) = ln Q - ln P(p)` is convex with its
//! minimum at `H / t`, so each side of the set is found by a monotone solve.

use crate::binom::Counts;
use crate::error::{check_open_unit, Result};
use crate::interval::Interval;
use crate::roots::bisect_boundary;

const LN_GAMMA_HALF: f64 = 0.572_364_942_924_700_087_071_713_675_677; // ln √π

/// Lower endpoint of one side, stored with its logarithms so the per-step
/// check costs a few multiplications.
#[derive(Debug, Clone, Copy)]
struct Side {
    v: f64,
    ln_v: f64,
    ln_comp: f64,
}

impl Side {
    const ZERO: Side = Side {
        v: 0.0,
        ln_v: f64::NEG_INFINITY,
        ln_comp: 0.0,
    };

    fn at(v: f64) -> Side {
        Side {
            v,
            ln_v: v.ln(),
            ln_comp: (-v).ln_1p(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BettingCs {
    alpha: f64,
    threshold: f64,
    counts: Counts,
    log_q: f64,
    // Running lower end `L`, and `1 - U` for the upper end.
    lower: Side,
    upper: Side,
}

impl BettingCs {
    pub fn new(alpha: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        Ok(BettingCs {
            alpha,
            threshold: (1.0 / alpha).ln(),
            counts: Counts::default(),
            log_q: 0.0,
            lower: Side::ZERO,
            upper: Side::ZERO,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    /// Accumulated `ln Q`.
    pub fn log_q(&self) -> f64 {
        self.log_q
    }

    pub fn running(&self) -> Interval {
        Interval {
            lo: self.lower.v,
            up: 1.0 - self.upper.v,
        }
    }

    pub fn update(&mut self, x: bool) -> Interval {
        let c = self.counts;
        let q_hat = (c.heads as f64 + 0.5) / (c.trials as f64 + 1.0);
        self.log_q += if x { q_hat.ln() } else { (-q_hat).ln_1p() };
        self.counts.push(x);

        let (h, t) = (self.counts.heads, self.counts.tails());
        if let Some(s) = tighten(self.lower, self.log_q, h, t, self.threshold) {
            self.lower = s;
        }
        if let Some(s) = tighten(self.upper, self.log_q, t, h, self.threshold) {
            self.upper = s;
        }
        self.running()
    }

    /// The set `{p : g(p) <= ln(1/α)}` at the current time, before
    /// intersecting with earlier times.
    pub fn instantaneous(&self) -> Interval {
        let (h, t) = (self.counts.heads, self.counts.tails());
        let lo = tighten(Side::ZERO, self.log_q, h, t, self.threshold).unwrap_or(Side::ZERO);
        let hi = tighten(Side::ZERO, self.log_q, t, h, self.threshold).unwrap_or(Side::ZERO);
        Interval {
            lo: lo.v,
            up: 1.0 - hi.v,
        }
    }
}

/// One step of the betting sequence; see [`BettingCs::update`].
pub fn bet_cs_update(state: &mut BettingCs, x: bool) -> Interval {
    state.update(x)
}

/// `ln Q` after `H` heads in `t` tosses; independent of the order.
pub fn kt_log_q(counts: Counts) -> f64 {
    let h = counts.heads as f64;
    let t = counts.tails() as f64;
    libm::lgamma(h + 0.5) + libm::lgamma(t + 0.5) - 2.0 * LN_GAMMA_HALF - libm::lgamma(h + t + 1.0)
}

/// Log-wealth `ln Q - H ln p - (t - H) ln(1 - p)` of the bettor against `p`.
///
/// At `p ∈ {0, 1}` the usual `0·ln 0 = 0` limit applies: the wealth is
/// finite when every toss agrees with `p` and infinite otherwise.
pub fn kt_log_wealth(counts: Counts, p: f64) -> f64 {
    let h = counts.heads as f64;
    let t = counts.tails() as f64;
    let head_term = if counts.heads == 0 { 0.0 } else { h * p.ln() };
    let tail_term = if counts.tails() == 0 {
        0.0
    } else {
        t * (-p).ln_1p()
    };
    kt_log_q(counts) - head_term - tail_term
}

/// Pushes the lower end `side` of `{p : ln Q - h ln p - t ln(1-p) <= c}`
/// to the right if the current set starts beyond it. The upper end uses the
/// same routine with heads and tails swapped.
fn tighten(side: Side, log_q: f64, h: u64, t: u64, c: f64) -> Option<Side> {
    if h == 0 {
        return None;
    }
    let (hf, tf) = (h as f64, t as f64);
    let p_hat = hf / (hf + tf);
    if side.v >= p_hat {
        return None;
    }
    let g_minus_c = |ln_p: f64, ln_comp: f64| {
        let tail = if t == 0 { 0.0 } else { tf * ln_comp };
        log_q - hf * ln_p - tail - c
    };
    if g_minus_c(side.ln_v, side.ln_comp) <= 0.0 {
        return None;
    }
    Some(lower_root(side, log_q, hf, tf, c, g_minus_c))
}

/// Root of the convex, decreasing `g - c` on `(side.v, p̂)`, approached from
/// the left by Newton steps in `u = ln p`. Tangents of a convex function lie
/// below it, so every iterate stays left of the root and the answer never
/// cuts into the exact set.
fn lower_root<G: Fn(f64, f64) -> f64>(
    side: Side,
    log_q: f64,
    h: f64,
    t: f64,
    c: f64,
    g: G,
) -> Side {
    // g(p) >= ln Q - h ln p, which exceeds c left of this point.
    let u0 = ((log_q - c) / h).max(side.ln_v);
    let mut u = u0;
    let mut good: Option<f64> = None;
    for _ in 0..100 {
        let p = u.exp();
        let ln_comp = (-p).ln_1p();
        let f = g(u, ln_comp);
        if f < 0.0 {
            break;
        }
        good = Some(u);
        let slope = -h + t * p / (1.0 - p);
        let step = -f / slope;
        if !(step > 1e-15 * u.abs().max(1.0)) {
            return Side {
                v: p,
                ln_v: u,
                ln_comp,
            };
        }
        u += step;
    }
    // Rounding pushed an iterate past the root, or convergence stalled:
    // finish by bisection on the bracket.
    let left = good.map_or(side.v, f64::exp);
    let right = u.exp().clamp(left, h / (h + t));
    let tol = (right * 1e-15).max(f64::MIN_POSITIVE);
    let (lo, _) = bisect_boundary(|p| g(p.ln(), (-p).ln_1p()) <= 0.0, left, right, tol);
    Side::at(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, BernoulliStream};
    use rand::seq::SliceRandom;

    /// Bisection on `g` over `[0, p̂]` directly, sharing nothing with the
    /// Newton solver.
    fn lower_oracle(counts: Counts, alpha: f64) -> f64 {
        if counts.heads == 0 {
            return 0.0;
        }
        let c = (1.0 / alpha).ln();
        let (mut l, mut h) = (0.0, counts.mean());
        for _ in 0..200 {
            let m = 0.5 * (l + h);
            if kt_log_wealth(counts, m) > c {
                l = m;
            } else {
                h = m;
            }
        }
        l
    }

    #[test]
    fn single_toss() {
        let mut cs = BettingCs::new(0.05).unwrap();
        let i = cs.update(true);
        assert!((i.lo - 0.025).abs() < 1e-9 && i.up == 1.0, "{i}");
        let mut cs = BettingCs::new(0.05).unwrap();
        let i = cs.update(false);
        assert!(i.lo == 0.0 && (i.up - 0.975).abs() < 1e-9, "{i}");
    }

    #[test]
    fn two_heads() {
        let mut cs = BettingCs::new(0.05).unwrap();
        cs.update(true);
        let i = cs.update(true);
        assert!((cs.log_q() - 0.375f64.ln()).abs() < 1e-15);
        assert!((i.lo - (0.375f64 * 0.05).sqrt()).abs() < 1e-9);
        assert!((i.lo - 0.13693).abs() < 1e-4);
    }

    #[test]
    fn heads_only_closed_form() {
        // With no tails the lower end is (Q α)^{1/t}.
        let mut cs = BettingCs::new(0.05).unwrap();
        let mut q = 1.0f64;
        for t in 1..=30u32 {
            q *= (2.0 * t as f64 - 1.0) / (2.0 * t as f64);
            let i = cs.update(true);
            let expect = (q * 0.05).powf(1.0 / t as f64);
            assert!((i.lo - expect).abs() < 1e-9, "t={t}: {} vs {expect}", i.lo);
            assert!(i.lo <= expect + 1e-15);
        }
    }

    #[test]
    fn closed_form_log_q() {
        let c = |h, t| Counts::new(h, t).unwrap();
        assert_eq!(kt_log_q(c(0, 0)), 0.0);
        assert_eq!(kt_log_wealth(c(0, 0), 0.3), 0.0);
        assert!((kt_log_q(c(2, 2)) - 0.375f64.ln()).abs() < 1e-14);
        assert!((kt_log_q(c(1, 2)) - 0.125f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn wealth_limits_at_degenerate_p() {
        let heads_only = Counts::new(3, 3).unwrap();
        assert!(kt_log_wealth(heads_only, 1.0).is_finite());
        assert_eq!(kt_log_wealth(heads_only, 0.0), f64::INFINITY);
        let mixed = Counts::new(1, 3).unwrap();
        assert_eq!(kt_log_wealth(mixed, 1.0), f64::INFINITY);
        assert_eq!(kt_log_wealth(mixed, 0.0), f64::INFINITY);
    }

    /// Wealth after staking a fixed fraction `f` on heads every toss.
    fn fixed_fraction_wealth(bits: impl Iterator<Item = bool>, f: f64) -> f64 {
        bits.fold(1.0, |w, x| if x { w * (1.0 + f) } else { w * (1.0 - f) })
    }

    #[test]
    fn fixed_fraction_wealth_example() {
        let bits = (0..100).map(|k| k < 51);
        let wealth = fixed_fraction_wealth(bits, 0.02);
        assert!((wealth - 1.02f64.powi(51) * 0.98f64.powi(49)).abs() < 1e-12);
        // Winning and losing 2% are not inverse moves, so the net gain over
        // 100 tosses is about 2%, below the 1.02² ≈ 1.04 of the rough count.
        assert!((1.02f64.powi(51) * 1.02f64.powi(-49) - 1.04).abs() < 1e-3);
        assert!(wealth > 1.0 && (wealth - 1.0202).abs() < 1e-4, "{wealth}");
        // The growth compounds: 1000 such blocks multiply the stake.
        let long = fixed_fraction_wealth((0..100_000).map(|k| k % 100 < 51), 0.02);
        assert!((long.ln() - 1000.0 * wealth.ln()).abs() < 1e-6);
    }

    #[test]
    fn incremental_matches_closed_form_and_order() {
        let mut rng = substream(7, 0, 0, 0);
        for s in 0..200 {
            let p = (s % 19 + 1) as f64 / 20.0;
            let mut bits: Vec<bool> = BernoulliStream::new(substream(7, 1, s, 0), p)
                .take(300)
                .collect();
            let mut a = BettingCs::new(0.05).unwrap();
            bits.iter().for_each(|&x| {
                a.update(x);
            });
            bits.shuffle(&mut rng);
            let mut b = BettingCs::new(0.05).unwrap();
            bits.iter().for_each(|&x| {
                b.update(x);
            });
            assert!((a.log_q() - b.log_q()).abs() < 1e-9);
            assert!((a.log_q() - kt_log_q(a.counts())).abs() < 1e-9);
        }
    }

    #[test]
    fn endpoints_match_bisection_oracle() {
        for s in 0..100 {
            let p = (s % 10) as f64 / 9.0;
            let alpha = [0.05, 0.001][s as usize % 2];
            let mut cs = BettingCs::new(alpha).unwrap();
            let bits = BernoulliStream::new(substream(3, 0, s, 0), p);
            for (k, x) in bits.take(500).enumerate() {
                cs.update(x);
                if k % 37 == 0 {
                    let inst = cs.instantaneous();
                    let c = cs.counts();
                    let lo = lower_oracle(c, alpha);
                    let up = 1.0 - lower_oracle(c.mirrored(), alpha);
                    assert!((inst.lo - lo).abs() < 1e-12, "{} vs {lo}", inst.lo);
                    assert!((inst.up - up).abs() < 1e-12, "{} vs {up}", inst.up);
                }
            }
        }
    }

    #[test]
    fn running_is_intersection_of_instantaneous() {
        let mut cs = BettingCs::new(0.05).unwrap();
        let mut expect = Interval::UNIT;
        for x in BernoulliStream::new(substream(11, 0, 0, 0), 0.3).take(400) {
            let r = cs.update(x);
            expect = expect.intersect(&cs.instantaneous()).unwrap();
            assert!(
                (r.lo - expect.lo).abs() < 1e-12 && (r.up - expect.up).abs() < 1e-12,
                "t={} {r} {expect}",
                cs.counts().trials
            );
        }
    }
}
