//! Binomial probabilities.
//!
//! The point mass uses Loader's saddle-point decomposition (Stirling remainder
//! plus a deviance term), which keeps full relative precision for any `n`
//! instead of cancelling large log-factorials. Tails are summed outward from
//! the end nearest the mode so every term is smaller than the previous one;
//! the sum stops once the terms no longer change it. The complementary tail is
//! only ever subtracted from one when it is at most one half, so both tails
//! keep relative accuracy.

use std::f64::consts::PI;

use crate::error::{check_unit, Error, Result};

/// Running tally of a Bernoulli stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Counts {
    pub heads: u64,
    pub trials: u64,
}

impl Counts {
    pub fn new(heads: u64, trials: u64) -> Result<Self> {
        if heads > trials {
            return Err(Error::invalid(
                "heads",
                format!("{heads} heads exceed {trials} trials"),
            ));
        }
        Ok(Counts { heads, trials })
    }

    pub fn tails(&self) -> u64 {
        self.trials - self.heads
    }

    pub fn push(&mut self, x: bool) {
        self.trials += 1;
        self.heads += u64::from(x);
    }

    /// Sample mean, `0` before the first observation.
    pub fn mean(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.heads as f64 / self.trials as f64
        }
    }

    /// Counts of the complementary stream (every bit flipped).
    pub fn mirrored(&self) -> Counts {
        Counts {
            heads: self.tails(),
            trials: self.trials,
        }
    }
}

/// `ln P(B(n, p) = x)`.
pub fn log_binom_pmf(n: u64, x: u64, p: f64) -> Result<f64> {
    check_unit("p", p)?;
    if x > n {
        return Err(Error::invalid("x", format!("{x} exceeds n = {n}")));
    }
    Ok(ln_pmf(n, x, p))
}

/// `P(B(n, p) = x)`.
pub fn binom_pmf(n: u64, x: u64, p: f64) -> Result<f64> {
    log_binom_pmf(n, x, p).map(f64::exp)
}

/// `P(B(n, p) >= x)`; `x = n + 1` is allowed and gives `0`.
pub fn binom_sf(n: u64, x: u64, p: f64) -> Result<f64> {
    check_unit("p", p)?;
    if x > n + 1 {
        return Err(Error::invalid(
            "x",
            format!("{x} exceeds n + 1 = {}", n + 1),
        ));
    }
    Ok(sf(n, x, p))
}

/// `P(B(n, p) <= x)`.
pub fn binom_cdf(n: u64, x: u64, p: f64) -> Result<f64> {
    check_unit("p", p)?;
    if x > n {
        return Err(Error::invalid("x", format!("{x} exceeds n = {n}")));
    }
    Ok(cdf(n, x, p))
}

/// Unchecked `ln P(B(n,p) = x)`; requires `x <= n`, `p ∈ [0, 1]`.
pub(crate) fn ln_pmf(n: u64, x: u64, p: f64) -> f64 {
    debug_assert!(x <= n);
    let q = 1.0 - p;
    if p == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    if x == 0 {
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
    }
    if x == n {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let xf = x as f64;
    let yf = (n - x) as f64;
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(yf, nf * q);
    let lf = (2.0 * PI).ln() + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

/// Unchecked `P(B(n,p) >= x)`.
pub(crate) fn sf(n: u64, x: u64, p: f64) -> f64 {
    if x == 0 {
        return 1.0;
    }
    if x > n {
        return 0.0;
    }
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    if x as f64 >= n as f64 * p {
        upper_tail(n, x, p)
    } else {
        1.0 - lower_tail(n, x - 1, p)
    }
}

/// Unchecked `P(B(n,p) <= x)`.
pub(crate) fn cdf(n: u64, x: u64, p: f64) -> f64 {
    if x >= n {
        return 1.0;
    }
    if p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return 0.0;
    }
    if x as f64 <= n as f64 * p {
        lower_tail(n, x, p)
    } else {
        1.0 - upper_tail(n, x + 1, p)
    }
}

/// `Σ_{k >= x} pmf(k)`, for `x >= np` where the terms decrease.
fn upper_tail(n: u64, x: u64, p: f64) -> f64 {
    let odds = p / (1.0 - p);
    let mut term = ln_pmf(n, x, p).exp();
    let mut acc = Neumaier::default();
    let mut k = x;
    loop {
        acc.add(term);
        if k == n || term <= acc.value() * 1e-17 {
            break;
        }
        term *= (n - k) as f64 / (k + 1) as f64 * odds;
        k += 1;
    }
    acc.value()
}

/// `Σ_{k <= x} pmf(k)`, for `x <= np` where the terms decrease downward.
fn lower_tail(n: u64, x: u64, p: f64) -> f64 {
    let inv_odds = (1.0 - p) / p;
    let mut term = ln_pmf(n, x, p).exp();
    let mut acc = Neumaier::default();
    let mut k = x;
    loop {
        acc.add(term);
        if k == 0 || term <= acc.value() * 1e-17 {
            break;
        }
        term *= k as f64 / (n - k + 1) as f64 * inv_odds;
        k -= 1;
    }
    acc.value()
}

/// Compensated (Kahan-Babuška-Neumaier) summation.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln n! - ln(sqrt(2πn) (n/e)^n)` for integer `n >= 1`.
fn stirlerr(n: u64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const SMALL: [f64; 16] = [
        0.0,
        0.081_061_466_795_327_258_219_670_26,
        0.041_340_695_955_409_294_093_822_08,
        0.027_677_925_684_998_339_148_789_29,
        0.020_790_672_103_765_093_111_522_77,
        0.016_644_691_189_821_192_163_194_87,
        0.013_876_128_823_070_747_998_745_73,
        0.011_896_709_945_891_770_095_055_72,
        0.010_411_265_261_972_096_497_478_57,
        0.009_255_462_182_712_732_917_728_637,
        0.008_330_563_433_362_871_256_469_319,
        0.007_573_675_487_951_840_794_972_024,
        0.006_942_840_107_209_529_865_664_153,
        0.006_408_994_188_004_207_068_439_631,
        0.005_951_370_112_758_847_735_624_416,
        0.005_554_733_551_962_801_371_038_69,
    ];
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n <= 15 {
        return SMALL[n as usize];
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x / m) + m - x`, evaluated without cancellation when
/// `x ≈ m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        let mut j = 1.0;
        loop {
            ej *= v;
            let s1 = s + ej / (2.0 * j + 1.0);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1.0;
        }
    }
    x * (x / m).ln() + m - x
}
