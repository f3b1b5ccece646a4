//! Randomized-smoothing certification with sequential sampling.
//!
//! A smoothed classifier is robust at radius `r(p_A, p_B)` where `p_A` is the
//! probability of the top class under noise and `p_B` that of the runner-up.
//! Only the Gaussian ℓ2 radius is provided.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;

use crate::cs::{CsKind, CsState};
use crate::decision::{Method, Verdict};
use crate::error::{check_open_unit, Error, Result};
use crate::interval::Interval;
use crate::normal::quantile_unchecked;
use crate::rng::{substream, UniformSource};
use crate::roots::bisect_monotone;

/// `(σ/2)(Φ⁻¹(p_A) - Φ⁻¹(p_B))`.
pub fn radius_gauss_l2(p_a: f64, p_b: f64, sigma: f64) -> Result<f64> {
    check_open_unit("p_a", p_a)?;
    check_open_unit("p_b", p_b)?;
    check_sigma(sigma)?;
    Ok(gauss_l2(p_a, p_b, sigma))
}

/// Unchecked radius; bounds of 0 or 1 map to `∓∞` and the result may be NaN
/// only when both arguments sit on the same degenerate end.
fn gauss_l2(p_a: f64, p_b: f64, sigma: f64) -> f64 {
    0.5 * sigma * (quantile_ext(p_a) - quantile_ext(p_b))
}

fn quantile_ext(u: f64) -> f64 {
    if u <= 0.0 {
        f64::NEG_INFINITY
    } else if u >= 1.0 {
        f64::INFINITY
    } else {
        quantile_unchecked(u)
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "sigma",
            format!("must be positive, got {sigma}"),
        ))
    }
}

/// The `p*` with `r(p*, 1 - p*) = radius`: certifying `radius` with the
/// bound `p_B <= 1 - p_A` amounts to showing `p_A > p*`.
pub fn binary_threshold(radius: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::invalid(
            "radius",
            format!("must be nonnegative, got {radius}"),
        ));
    }
    // The radius is steep in p near 1, hence the fine tolerance.
    let hi = 1.0 - f64::EPSILON / 2.0;
    Ok(bisect_monotone(
        |p| gauss_l2(p, 1.0 - p, sigma),
        0.5,
        hi,
        radius,
        1e-15,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CertMode {
    /// One stream: the target class against everything else.
    Binary,
    /// Separate streams for the top class (budget `λα`) and the others
    /// (budget `(1-λ)α`). The top class is fixed after `warmup` samples.
    Multiclass { lambda: f64, warmup: u64 },
}

impl CertMode {
    pub fn name(&self) -> &'static str {
        match self {
            CertMode::Binary => "binary",
            CertMode::Multiclass { .. } => "multiclass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertSpec {
    pub sigma: f64,
    pub radius: f64,
    pub alpha: f64,
    pub mode: CertMode,
}

impl CertSpec {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid(
                "radius",
                format!("must be nonnegative, got {}", self.radius),
            ));
        }
        check_open_unit("alpha", self.alpha)?;
        if let CertMode::Multiclass { lambda, .. } = self.mode {
            check_open_unit("lambda", lambda)?;
        }
        Ok(())
    }
}

const ORACLE_STREAM: u64 = 16;

/// Synthetic classifier: each query returns a class index drawn from fixed
/// probabilities.
#[derive(Debug, Clone)]
pub struct ClassOracle {
    probs: Vec<f64>,
    dist: WeightedIndex<f64>,
    rng: ChaCha8Rng,
    key: (u64, u64, u64),
}

impl ClassOracle {
    pub fn new(probs: Vec<f64>, seed: u64) -> Result<Self> {
        Self::for_cell(probs, seed, 0, 0)
    }

    /// Oracle on the substream of `seed` reserved for experiment cell
    /// `cell` and repetition `trial`.
    pub fn for_cell(probs: Vec<f64>, seed: u64, cell: u64, trial: u64) -> Result<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("class_probs", "entries must lie in [0, 1]"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "class_probs",
                format!("sum to {total}, not 1"),
            ));
        }
        let dist =
            WeightedIndex::new(&probs).map_err(|e| Error::invalid("class_probs", e.to_string()))?;
        Ok(ClassOracle {
            probs,
            dist,
            rng: substream(seed, ORACLE_STREAM, cell, trial),
            key: (seed, cell, trial),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn classes(&self) -> usize {
        self.probs.len()
    }

    pub fn seed(&self) -> u64 {
        self.key.0
    }

    pub fn sample(&mut self) -> usize {
        self.dist.sample(&mut self.rng)
    }

    /// Auxiliary uniforms for randomized intervals, independent of the
    /// class draws.
    fn draws(&self) -> ChaCha8Rng {
        let (seed, cell, trial) = self.key;
        substream(seed, ORACLE_STREAM | 1 << 32, cell, trial)
    }
}

/// Draws one class index.
pub fn sample_oracle(oracle: &mut ClassOracle) -> usize {
    oracle.sample()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CertOutcome {
    Certified,
    NotCertifiable,
    Undecided,
    Abstain,
}

impl CertOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            CertOutcome::Certified => "certified",
            CertOutcome::NotCertifiable => "not_certifiable",
            CertOutcome::Undecided => "undecided",
            CertOutcome::Abstain => "abstain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertResult {
    pub outcome: CertOutcome,
    pub samples: u64,
}

/// Decides whether `p_A > p*` for the indicator stream of `target`.
///
/// The threshold lying below the mean (`Less`) certifies the radius; lying
/// above it (`Greater`) proves the radius out of reach. [`Method::Sprt`] is
/// told the true `p_A`.
pub fn certify_binary(
    oracle: &mut ClassOracle,
    target: usize,
    spec: &CertSpec,
    method: &Method,
    cap: u64,
) -> Result<CertResult> {
    spec.validate()?;
    if target >= oracle.classes() {
        return Err(Error::invalid(
            "target",
            format!("class {target} out of range"),
        ));
    }
    let p_star = binary_threshold(spec.radius, spec.sigma)?;
    let p_a = oracle.probs[target];
    let mut draws = oracle.draws();
    let bits = std::iter::from_fn(|| Some(oracle.sample() == target));
    let d = match method {
        Method::Sprt if p_a == p_star || p_a == 0.0 || p_a == 1.0 => {
            return Err(Error::invalid(
                "method",
                "the likelihood-ratio test needs 0 < p_A < 1 and p_A != p*",
            ))
        }
        _ => method.decide(p_star, p_a, spec.alpha, cap, bits, &mut draws)?,
    };
    let outcome = match d.verdict {
        Verdict::Less => CertOutcome::Certified,
        Verdict::Greater => CertOutcome::NotCertifiable,
        Verdict::Undecided => CertOutcome::Undecided,
        Verdict::Abstain => CertOutcome::Abstain,
    };
    Ok(CertResult {
        outcome,
        samples: d.samples,
    })
}

/// Multiclass certification.
///
/// The class seen most often during the warmup (lowest index on ties)
/// becomes `A`. Its lower bound `L_A` comes from a sequence at level `λα`;
/// every other class runs its own sequence at `(1-λ)α` and `U_B` is the
/// largest of their upper bounds, so it dominates the runner-up's
/// probability whichever class that is. Warmup samples feed all sequences.
///
/// Certified once `r(L_A, U_B) >= radius`. Declared not certifiable once
/// `r(U_A, (1 - U_A)/(K - 1)) < radius`, which bounds the true radius from
/// above because `p_B >= (1 - p_A)/(K - 1)`.
pub fn certify_multiclass(
    oracle: &mut ClassOracle,
    spec: &CertSpec,
    kind: CsKind,
    cap: u64,
) -> Result<CertResult> {
    spec.validate()?;
    let CertMode::Multiclass { lambda, warmup } = spec.mode else {
        return Err(Error::invalid("mode", "expected multiclass"));
    };
    let k = oracle.classes();
    if k < 2 {
        return Err(Error::invalid("class_probs", "need at least two classes"));
    }
    if cap == 0 {
        return Err(Error::invalid("cap", "must be at least 1"));
    }
    let mut draws = oracle.draws();

    let first: Vec<usize> = (0..warmup.clamp(1, cap)).map(|_| oracle.sample()).collect();
    let mut tally = vec![0u64; k];
    first.iter().for_each(|&c| tally[c] += 1);
    let a = (0..k).fold(0, |best, c| if tally[c] > tally[best] { c } else { best });

    let mut cs_a = kind.start(lambda * spec.alpha)?;
    let mut others: Vec<(usize, CsState)> = (0..k)
        .filter(|&c| c != a)
        .map(|c| Ok((c, kind.start((1.0 - lambda) * spec.alpha)?)))
        .collect::<Result<_>>()?;

    let spread = (k - 1) as f64;
    let mut step = |class: usize, draws: &mut dyn UniformSource| -> Option<CertOutcome> {
        let ia = cs_a.observe(class == a, draws);
        let mut u_b = 0.0f64;
        for (c, cs) in others.iter_mut() {
            u_b = u_b.max(cs.observe(class == *c, draws).up);
        }
        if gauss_l2(ia.lo, u_b, spec.sigma) >= spec.radius {
            Some(CertOutcome::Certified)
        } else if gauss_l2(ia.up, (1.0 - ia.up) / spread, spec.sigma) < spec.radius {
            Some(CertOutcome::NotCertifiable)
        } else {
            None
        }
    };

    let mut samples = first.len() as u64;
    for &c in &first {
        if let Some(outcome) = step(c, &mut draws) {
            return Ok(CertResult { outcome, samples });
        }
    }
    while samples < cap {
        samples += 1;
        let c = oracle.sample();
        if let Some(outcome) = step(c, &mut draws) {
            return Ok(CertResult { outcome, samples });
        }
    }
    Ok(CertResult {
        outcome: CertOutcome::Undecided,
        samples,
    })
}

/// Samples until the running interval is narrower than `eps` or the cap is
/// reached. With `eps > 1` this stops after the first sample.
pub fn width_target_run<I, S>(
    stream: I,
    eps: f64,
    alpha: f64,
    kind: CsKind,
    cap: u64,
    draws: &mut S,
) -> Result<(Interval, u64)>
where
    I: Iterator<Item = bool>,
    S: UniformSource + ?Sized,
{
    if !(eps > 0.0) {
        return Err(Error::invalid(
            "eps",
            format!("must be positive, got {eps}"),
        ));
    }
    let mut cs = kind.start(alpha)?;
    let mut samples = 0;
    for x in stream.take(cap as usize) {
        samples += 1;
        if cs.observe(x, draws).width() < eps {
            break;
        }
    }
    Ok((cs.running(), samples))
}

/// Binary certification through a confidence sequence; shorthand for
/// [`certify_binary`] with [`Method::Cs`].
pub fn certify_binary_cs(
    oracle: &mut ClassOracle,
    target: usize,
    spec: &CertSpec,
    kind: CsKind,
    cap: u64,
) -> Result<CertResult> {
    certify_binary(oracle, target, spec, &Method::Cs(kind), cap)
}
