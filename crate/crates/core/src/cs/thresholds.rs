//! Precomputed head-count thresholds for the betting sequence.
//!
//! Wealth depends on the stream only through `(H, t)`, so whether a fixed
//! `p` has been excluded from below at time `t` is the question
//! `H >= H(t)`. The table is built by walking the frontier of the `(h, t)`
//! grid one cell at a time: a tail moves `(h, t-1) → (h, t)` and a head
//! moves `(h-1, t) → (h, t)`, each in constant time.

use std::io::{self, Write};

use crate::error::{check_open_unit, Result};

/// `H(t)` for `t = 1..=n_max`: the least `h > p t` whose log-wealth against
/// `p` reaches `ln(1/α)`, or `t + 1` when even `h = t` falls short.
pub fn dp_thresholds(p: f64, alpha: f64, n_max: u64) -> Result<Vec<u64>> {
    check_open_unit("p", p)?;
    check_open_unit("alpha", alpha)?;
    let c = (1.0 / alpha).ln();
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_odds = ln_p - ln_q;

    let mut out = Vec::with_capacity(n_max as usize);
    // Current cell (h, t) and its log-wealth; W(0, 0) = 0.
    let mut h = 0u64;
    let mut log_w = 0.0f64;
    for t in 1..=n_max {
        let tf = t as f64;
        log_w += ((tf - 1.0 - h as f64 + 0.5) / tf).ln() - ln_q;
        let h_min = (p * tf).floor() as u64 + 1;
        while h < t && (h < h_min || log_w < c) {
            let hf = h as f64;
            log_w += ((hf + 0.5) / (tf - hf - 0.5)).ln() - ln_odds;
            h += 1;
        }
        out.push(if h >= h_min && log_w >= c { h } else { t + 1 });
    }
    Ok(out)
}

/// Writes the table as CSV with header `t,H_t`.
pub fn write_thresholds_csv<W: Write>(mut out: W, thresholds: &[u64]) -> io::Result<()> {
    out.write_all(b"t,H_t\n")?;
    for (i, h) in thresholds.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, h)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binom::Counts;
    use crate::cs::betting::{kt_log_wealth, BettingCs};
    use crate::rng::{substream, BernoulliStream};

    fn brute_force(p: f64, alpha: f64, t: u64) -> u64 {
        let c = (1.0 / alpha).ln();
        (0..=t)
            .find(|&h| h as f64 > p * t as f64 && kt_log_wealth(Counts::new(h, t).unwrap(), p) >= c)
            .unwrap_or(t + 1)
    }

    #[test]
    fn first_entries() {
        let th = dp_thresholds(0.5, 0.05, 10).unwrap();
        assert_eq!(th[0], 2);
        // All heads first excludes 1/2 at t = 7.
        assert_eq!(&th[..7], &[2, 3, 4, 5, 6, 7, 7]);
    }

    #[test]
    fn matches_brute_force() {
        for p in [0.91, 0.5] {
            for alpha in [0.001, 0.05] {
                let th = dp_thresholds(p, alpha, 2000).unwrap();
                for (i, &h) in th.iter().enumerate() {
                    let t = i as u64 + 1;
                    assert_eq!(h, brute_force(p, alpha, t), "p={p} α={alpha} t={t}");
                }
            }
        }
    }

    #[test]
    fn nondecreasing() {
        for p in [0.05, 0.3, 0.5, 0.77, 0.99] {
            let th = dp_thresholds(p, 0.01, 20_000).unwrap();
            assert!(th.windows(2).all(|w| w[0] <= w[1]), "p={p}");
        }
    }

    #[test]
    fn agrees_with_betting_exclusion() {
        let (p, alpha) = (0.5, 0.05);
        let th = dp_thresholds(p, alpha, 3000).unwrap();
        let c = (1.0 / alpha).ln();
        for s in 0..20 {
            let q = 0.45 + 0.01 * s as f64;
            let mut cs = BettingCs::new(alpha).unwrap();
            for x in BernoulliStream::new(substream(5, 0, s, 0), q).take(3000) {
                cs.update(x);
                let counts = cs.counts();
                if (kt_log_wealth(counts, p) - c).abs() < 1e-9 {
                    continue;
                }
                let excluded = cs.instantaneous().lo > p;
                let t = counts.trials as usize;
                assert_eq!(excluded, counts.heads >= th[t - 1], "q={q} t={t}");
            }
        }
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_thresholds_csv(&mut buf, &[2, 3, 4]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,H_t\n1,2\n2,3\n3,4\n");
    }

    #[test]
    fn rejects_degenerate_arguments() {
        assert!(dp_thresholds(0.0, 0.05, 10).is_err());
        assert!(dp_thresholds(0.5, 1.0, 10).is_err());
    }
}
