//! Fixed-sample confidence intervals for a binomial proportion.
//!
//! One-sided Clopper-Pearson bounds invert the binomial tail. The randomized
//! variant replaces `P(B >= x)` by `P(B > x) + w·P(B = x)` with an auxiliary
//! `w ~ Uniform[0, 1]`, which interpolates between the deterministic bounds
//! for `x` and `x + 1` and gives coverage exactly `1 - α` at every `p`.
//!
//! `p ↦ P(B > x) + w·P(B = x) = (1 - w)·P(B >= x + 1) + w·P(B >= x)` is a
//! convex combination of two nondecreasing tails, hence nondecreasing, so a
//! plain bisection finds the endpoint.
//!
//! Lower bounds are obtained from upper bounds by the mirror
//! `(x, p) → (n - x, 1 - p)`.

use rand::Rng;

use crate::binom::{self, Counts};
use crate::error::{check_open_unit, Error, Result};
use crate::interval::Interval;
use crate::roots::{bisect_boundary, BISECT_TOL};

/// `P(B(n,p) > x) + w·P(B(n,p) = x)`.
fn randomized_tail(n: u64, x: u64, p: f64, w: f64) -> f64 {
    if w == 1.0 {
        binom::sf(n, x, p)
    } else {
        binom::sf(n, x + 1, p) + w * binom::ln_pmf(n, x, p).exp()
    }
}

/// `inf{p | P(B > x) + w·P(B = x) > α}`, clamped to `[0, 1]`.
///
/// The returned value is the left end of the final bisection bracket, so it
/// never exceeds the exact infimum.
fn upper_bound_lo(n: u64, x: u64, alpha: f64, w: f64) -> f64 {
    if randomized_tail(n, x, 0.0, w) > alpha {
        return 0.0;
    }
    if randomized_tail(n, x, 1.0, w) <= alpha {
        return 1.0;
    }
    let (lo, _) = bisect_boundary(
        |p| randomized_tail(n, x, p, w) > alpha,
        0.0,
        1.0,
        BISECT_TOL,
    );
    lo
}

/// One-sided upper Clopper-Pearson interval `[u(x), 1]`.
pub fn cp_upper(counts: Counts, alpha: f64) -> Interval {
    rcp_upper(counts, alpha, 1.0)
}

/// One-sided lower Clopper-Pearson interval `[0, v(x)]`.
pub fn cp_lower(counts: Counts, alpha: f64) -> Interval {
    rcp_lower(counts, alpha, 1.0)
}

/// Randomized upper interval `[u'(x, w), 1]`.
pub fn rcp_upper(counts: Counts, alpha: f64, w: f64) -> Interval {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let lo = upper_bound_lo(counts.trials, counts.heads, alpha, w);
    Interval { lo, up: 1.0 }
}

/// Randomized lower interval `[0, v'(x, w)]`.
pub fn rcp_lower(counts: Counts, alpha: f64, w: f64) -> Interval {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let up = 1.0 - upper_bound_lo(counts.trials, counts.tails(), alpha, w);
    Interval { lo: 0.0, up }
}

/// Two-sided interval from two randomized one-sided bounds at `α/2` each.
///
/// An empty intersection (only reachable through extreme draws) collapses to
/// the point interval at the sample mean.
pub fn rcp_two_sided(counts: Counts, alpha: f64, w_lo: f64, w_hi: f64) -> Interval {
    let half = 0.5 * alpha;
    let upper = rcp_upper(counts, half, w_lo);
    let lower = rcp_lower(counts, half, w_hi);
    upper
        .intersect(&lower)
        .unwrap_or_else(|| Interval::point(counts.mean()))
}

/// Whether `p ∈ rcp_upper(counts, alpha, w)`, decided from the tail
/// directly rather than by locating the endpoint.
pub fn rcp_upper_contains(counts: Counts, alpha: f64, w: f64, p: f64) -> bool {
    randomized_tail(counts.trials, counts.heads, p, w) > alpha
}

/// Two-sided Hoeffding interval `mean ± √(ln(2/α) / (2t))`, clamped to `[0, 1]`.
pub fn hoeffding_interval(counts: Counts, alpha: f64) -> Result<Interval> {
    check_open_unit("alpha", alpha)?;
    if counts.trials == 0 {
        return Err(Error::invalid("trials", "need at least one observation"));
    }
    let eps = hoeffding_radius(counts.trials, alpha);
    let mean = counts.mean();
    Ok(Interval::new(mean - eps, mean + eps))
}

/// Half-width of the two-sided Hoeffding interval after `t` samples.
pub fn hoeffding_radius(t: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * t as f64)).sqrt()
}

/// `⌈2 ln(1/γ) / ε²⌉`, the fixed sample size that separates `p = q` from
/// `|p - q| > ε` with probability `1 - γ`.
pub fn hoeffding_sample_size(eps: f64, gamma: f64) -> Result<u64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(
            "eps",
            format!("expected a value in (0, 1], got {eps}"),
        ));
    }
    check_open_unit("gamma", gamma)?;
    let n = -2.0 * gamma.ln() / (eps * eps);
    // Strip float noise so that exact integers are not bumped up by one.
    Ok((n * (1.0 - 1e-12)).ceil().max(1.0) as u64)
}

/// Interval flavour compared by the coverage experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalKind {
    ClopperPearson,
    Randomized,
}

impl IntervalKind {
    pub fn name(&self) -> &'static str {
        match self {
            IntervalKind::ClopperPearson => "cp",
            IntervalKind::Randomized => "rcp",
        }
    }
}

/// `P_W(q ∉ upper interval | X = x)` for the given kind.
///
/// For the randomized interval, given `X = x` the point `q` is excluded iff
/// `P_q(B > x) + W·P_q(B = x) <= α`, i.e. iff `W` falls below
/// `(α - P_q(B > x)) / P_q(B = x)`.
fn upper_exclusion_given_x(kind: IntervalKind, n: u64, x: u64, alpha: f64, q: f64) -> f64 {
    match kind {
        IntervalKind::ClopperPearson => {
            let lo = upper_bound_lo(n, x, alpha, 1.0);
            if q < lo {
                1.0
            } else {
                0.0
            }
        }
        IntervalKind::Randomized => {
            let above = binom::sf(n, x + 1, q);
            let at = binom::ln_pmf(n, x, q).exp();
            if at == 0.0 {
                return if above <= alpha { 1.0 } else { 0.0 };
            }
            ((alpha - above) / at).clamp(0.0, 1.0)
        }
    }
}

/// Exact `P_{X ~ B(n, p_true), W}(q ∈ I(X, W))` for the one-sided upper
/// interval, by enumerating `x` and integrating `W` out analytically.
pub fn upper_inclusion_probability(
    kind: IntervalKind,
    n: u64,
    alpha: f64,
    p_true: f64,
    q: f64,
) -> f64 {
    let excluded: f64 = (0..=n)
        .map(|x| {
            let e = upper_exclusion_given_x(kind, n, x, alpha, q);
            if e == 0.0 {
                0.0
            } else {
                e * binom::ln_pmf(n, x, p_true).exp()
            }
        })
        .sum();
    1.0 - excluded
}

/// Exact coverage `P_p(p ∈ I(X, W))` of the one-sided upper interval.
pub fn upper_coverage_exact(kind: IntervalKind, n: u64, alpha: f64, p: f64) -> f64 {
    upper_inclusion_probability(kind, n, alpha, p, p)
}

/// Monte Carlo coverage of the one-sided upper interval.
pub fn upper_coverage_monte_carlo<R: Rng>(
    kind: IntervalKind,
    n: u64,
    alpha: f64,
    p: f64,
    trials: u64,
    rng: &mut R,
) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let mut covered = 0u64;
    for _ in 0..trials {
        let x = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
        let w = match kind {
            IntervalKind::ClopperPearson => 1.0,
            IntervalKind::Randomized => rng.random::<f64>(),
        };
        if rcp_upper_contains(
            Counts {
                heads: x,
                trials: n,
            },
            alpha,
            w,
            p,
        ) {
            covered += 1;
        }
    }
    covered as f64 / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: u64, n: u64) -> Counts {
        Counts::new(x, n).unwrap()
    }

    #[test]
    fn cp_upper_two_trials() {
        assert_eq!(cp_upper(c(0, 2), 0.05), Interval::UNIT);
        let one = cp_upper(c(1, 2), 0.05);
        assert!((one.lo - 0.0253).abs() < 1e-3 && one.up == 1.0);
        assert!((one.lo - (1.0 - 0.95f64.sqrt())).abs() < 1e-9);
        let two = cp_upper(c(2, 2), 0.05);
        assert!((two.lo - 0.2236).abs() < 1e-3);
        assert!((two.lo - 0.05f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn cp_lower_two_trials() {
        assert_eq!(cp_lower(c(2, 2), 0.05), Interval::UNIT);
        assert!((cp_lower(c(1, 2), 0.05).up - 0.9747).abs() < 1e-3);
        assert!((cp_lower(c(0, 2), 0.05).up - 0.7764).abs() < 1e-3);
    }

    #[test]
    fn randomized_with_w_one_is_deterministic() {
        for n in [1, 2, 10, 57] {
            for x in 0..=n {
                assert_eq!(rcp_upper(c(x, n), 0.05, 1.0), cp_upper(c(x, n), 0.05));
                assert_eq!(rcp_lower(c(x, n), 0.05, 1.0), cp_lower(c(x, n), 0.05));
            }
        }
    }

    #[test]
    fn randomized_examples() {
        // Given x = n = 2 the condition reads w·p² > α.
        assert!((rcp_upper(c(2, 2), 0.05, 0.2).lo - 0.5).abs() < 1e-9);
        assert_eq!(rcp_upper(c(2, 2), 0.05, 0.04).lo, 1.0);
        assert!((rcp_lower(c(0, 2), 0.05, 0.2).up - 0.5).abs() < 1e-9);
        assert_eq!(rcp_lower(c(0, 2), 0.05, 0.04).up, 0.0);
    }

    #[test]
    fn two_sided_examples() {
        let i = rcp_two_sided(c(1, 2), 0.1, 1.0, 1.0);
        assert!((i.lo - 0.0253).abs() < 1e-3 && (i.up - 0.9747).abs() < 1e-3);
        let i = rcp_two_sided(c(0, 2), 0.1, 1.0, 1.0);
        assert!(i.lo == 0.0 && (i.up - 0.7764).abs() < 1e-3);
        let i = rcp_two_sided(c(2, 2), 0.1, 1.0, 1.0);
        assert!((i.lo - 0.2236).abs() < 1e-3 && i.up == 1.0);
    }

    #[test]
    fn monotone_in_w_and_interpolates() {
        let (n, alpha) = (20, 0.05);
        for x in 0..n {
            let mut prev = f64::INFINITY;
            for k in 0..=50 {
                let w = 1e-9 + (1.0 - 1e-9) * k as f64 / 50.0;
                let lo = rcp_upper(c(x, n), alpha, w).lo;
                assert!(lo <= prev + 1e-12, "x={x} w={w}");
                prev = lo;
            }
            assert_eq!(
                rcp_upper(c(x, n), alpha, 1.0).lo,
                cp_upper(c(x, n), alpha).lo
            );
            let near_zero = rcp_upper(c(x, n), alpha, 1e-12).lo;
            assert!((near_zero - cp_upper(c(x + 1, n), alpha).lo).abs() < 1e-6);
        }
    }

    #[test]
    fn endpoint_agrees_with_direct_membership() {
        let alpha = 0.01;
        for n in [3, 17, 60] {
            for x in 0..=n {
                for w in [0.05, 0.3, 0.77, 1.0] {
                    let lo = rcp_upper(c(x, n), alpha, w).lo;
                    for q in [lo - 1e-6, lo + 1e-6] {
                        if (0.0..=1.0).contains(&q) {
                            assert_eq!(
                                rcp_upper_contains(c(x, n), alpha, w, q),
                                q > lo,
                                "n={n} x={x} w={w}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn randomized_exclusion_threshold_matches_interval() {
        // The analytic W-threshold used by the exact coverage must agree with
        // the interval returned for W on either side of it.
        let (n, alpha) = (12, 0.05);
        for x in 0..=n {
            for q in [0.1, 0.35, 0.6, 0.85] {
                let thr = upper_exclusion_given_x(IntervalKind::Randomized, n, x, alpha, q);
                if thr > 0.02 {
                    assert!(rcp_upper(c(x, n), alpha, thr - 0.01).lo > q);
                }
                if thr < 0.98 {
                    assert!(rcp_upper(c(x, n), alpha, thr + 0.01).lo <= q);
                }
            }
        }
    }

    #[test]
    fn example_coverage_at_half() {
        // n = 2, α = 0.05, p = 0.5: excluded iff X = 2 and W <= α/p².
        let excl = 1.0 - upper_coverage_exact(IntervalKind::Randomized, 2, 0.05, 0.5);
        assert!((excl - 0.05).abs() < 1e-10);
    }

    #[test]
    fn randomized_coverage_is_exact() {
        for n in [1, 2, 10, 50] {
            for k in 1..20 {
                let p = k as f64 / 20.0;
                let cov = upper_coverage_exact(IntervalKind::Randomized, n, 0.05, p);
                assert!((cov - 0.95).abs() < 1e-10, "n={n} p={p} cov={cov}");
            }
        }
    }

    #[test]
    fn deterministic_coverage_conservative() {
        let (n, alpha) = (2, 0.05);
        let cov = |p| upper_coverage_exact(IntervalKind::ClopperPearson, n, alpha, p);
        assert!((cov(0.1) - 0.99).abs() < 1e-12);
        assert_eq!(cov(0.3), 1.0);
        for k in 1..100 {
            assert!(cov(k as f64 / 100.0) >= 1.0 - alpha);
        }
    }

    #[test]
    fn randomized_dominates_every_deterministic_level() {
        // For p >= q, q is included less often by the randomized interval.
        for n in [5, 20, 50] {
            for i in 1..10 {
                for j in 1..=i {
                    let (p, q) = (i as f64 / 10.0, j as f64 / 10.0 - 0.03);
                    let det =
                        upper_inclusion_probability(IntervalKind::ClopperPearson, n, 0.05, p, q);
                    let rnd = upper_inclusion_probability(IntervalKind::Randomized, n, 0.05, p, q);
                    assert!(rnd <= det + 1e-12, "n={n} p={p} q={q}: {rnd} > {det}");
                }
            }
        }
    }

    #[test]
    fn hoeffding_examples() {
        let alpha = 2.0 * (-2.0f64).exp();
        let i = hoeffding_interval(c(50, 100), alpha).unwrap();
        assert!((i.lo - 0.4).abs() < 1e-12 && (i.up - 0.6).abs() < 1e-12);
        let i = hoeffding_interval(c(0, 10), 0.05).unwrap();
        assert!(i.lo == 0.0 && (i.up - 0.4295).abs() < 1e-3);
        let i = hoeffding_interval(c(10, 10), 0.05).unwrap();
        assert!((i.lo - 0.5705).abs() < 1e-3 && i.up == 1.0);
        assert!(hoeffding_interval(c(0, 0), 0.05).is_err());
        let w = 2.0 * hoeffding_radius(37, 0.01);
        assert!((w - 2.0 * ((200.0f64).ln() / 74.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hoeffding_sample_sizes() {
        assert_eq!(hoeffding_sample_size(0.1, 0.05).unwrap(), 600);
        assert_eq!(hoeffding_sample_size(1.0, (-1.0f64).exp()).unwrap(), 2);
        assert_eq!(hoeffding_sample_size(0.01, 0.001).unwrap(), 138_156);
        assert!(hoeffding_sample_size(0.0, 0.1).is_err());
    }
}
