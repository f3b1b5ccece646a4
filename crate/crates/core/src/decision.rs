//! Sequential decisions: is the mean of a Bernoulli stream above or below a
//! threshold `p`?
//!
//! A rule draws one bit at a time and either halts with a verdict or asks for
//! another sample. A [`Verdict`] states where the threshold lies relative to
//! the true mean `q`: `Greater` means `p > q`, `Less` means `p < q`.

use std::time::Instant;

use rayon::prelude::*;

use crate::binom::Counts;
use crate::ci::{cp_lower, cp_upper, hoeffding_interval, hoeffding_sample_size};
use crate::cs::CsKind;
use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::rng::{substream, BernoulliStream, UniformSource, SHARED_BITS};

/// Default cumulative stage sizes of the staged baseline.
pub const HORVATH_STAGES: [u64; 4] = [100, 1_000, 10_000, 120_000];

/// Default sample cap for confidence-sequence rules.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Greater,
    Less,
    Undecided,
    Abstain,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Greater => "greater",
            Verdict::Less => "less",
            Verdict::Undecided => "undecided",
            Verdict::Abstain => "abstain",
        }
    }

    /// Whether this verdict contradicts the true mean `q` for threshold `p`.
    /// Any `Greater`/`Less` is wrong when `p == q`.
    pub fn is_wrong(&self, p: f64, q: f64) -> bool {
        match self {
            Verdict::Greater => p <= q,
            Verdict::Less => p >= q,
            Verdict::Undecided | Verdict::Abstain => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub samples: u64,
}

/// A decision rule compared in the sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Likelihood-ratio test that is told the true mean.
    Sprt,
    Cs(CsKind),
    /// Staged Clopper-Pearson tests at the given cumulative sample sizes.
    Horvath(Vec<u64>),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sprt => "sprt",
            Method::Cs(k) => k.name(),
            Method::Horvath(_) => "horvath",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        match name {
            "sprt" => Some(Method::Sprt),
            "horvath" => Some(Method::Horvath(HORVATH_STAGES.to_vec())),
            _ => CsKind::from_name(name).map(Method::Cs),
        }
    }

    /// Stable identifier used to key random substreams.
    pub fn id(&self) -> u64 {
        match self {
            Method::Sprt => 0,
            Method::Horvath(_) => 1,
            Method::Cs(CsKind::Betting) => 2,
            Method::Cs(k) if k.name() == "union" => 3,
            Method::Cs(k) if k.name() == "union-doubling" => 4,
            Method::Cs(_) => 5,
        }
    }

    /// Runs the rule at threshold `p` on `stream`, consuming at most `cap`
    /// bits. `q_true` is used only by [`Method::Sprt`]; `draws` only by the
    /// union-bound sequence.
    pub fn decide<I, S>(
        &self,
        p: f64,
        q_true: f64,
        alpha: f64,
        cap: u64,
        stream: I,
        draws: &mut S,
    ) -> Result<Decision>
    where
        I: Iterator<Item = bool>,
        S: UniformSource + ?Sized,
    {
        match self {
            Method::Sprt => sprt_ideal(p, q_true, alpha, stream, cap),
            Method::Cs(kind) => decide_with_cs(*kind, p, stream, alpha, cap, draws),
            Method::Horvath(stages) => {
                horvath_adaptive(p, stream.take(cap as usize), alpha, stages)
            }
        }
    }
}

fn check_cap(cap: u64) -> Result<()> {
    if cap == 0 {
        Err(Error::invalid("cap", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// Feeds `stream` into a confidence sequence at level `α` and stops as soon
/// as the running interval excludes `p`: `Greater` once it lies below `p`,
/// `Less` once above. A stream that ends early, or the cap, gives
/// `Undecided`.
pub fn decide_with_cs<I, S>(
    kind: CsKind,
    p: f64,
    stream: I,
    alpha: f64,
    cap: u64,
    draws: &mut S,
) -> Result<Decision>
where
    I: Iterator<Item = bool>,
    S: UniformSource + ?Sized,
{
    check_unit("p", p)?;
    check_cap(cap)?;
    let mut cs = kind.start(alpha)?;
    let mut samples = 0;
    for x in stream.take(cap as usize) {
        samples += 1;
        let i = cs.observe(x, draws);
        if i.up < p {
            return Ok(Decision {
                verdict: Verdict::Greater,
                samples,
            });
        }
        if i.lo > p {
            return Ok(Decision {
                verdict: Verdict::Less,
                samples,
            });
        }
    }
    Ok(Decision {
        verdict: Verdict::Undecided,
        samples,
    })
}

/// Wald's test of mean `p` against mean `q` with thresholds `±ln(1/α)`.
///
/// Crossing the upper threshold accepts `q` and the verdict follows the sign
/// of `q - p`; crossing the lower one accepts `p`, reported as the opposite
/// verdict. `p` may sit on `{0, 1}`, in which case a single bit that is
/// impossible under `p` ends the test.
pub fn sprt_ideal<I: Iterator<Item = bool>>(
    p: f64,
    q: f64,
    alpha: f64,
    stream: I,
    cap: u64,
) -> Result<Decision> {
    check_unit("p", p)?;
    check_open_unit("q", q)?;
    check_open_unit("alpha", alpha)?;
    check_cap(cap)?;
    if p == q {
        return Err(Error::invalid("q", "must differ from p"));
    }
    let c = (1.0 / alpha).ln();
    // Branches avoid 0·∞ when p is degenerate.
    let up = if p == 0.0 {
        f64::INFINITY
    } else {
        (q / p).ln()
    };
    let down = if p == 1.0 {
        f64::INFINITY
    } else {
        ((1.0 - q) / (1.0 - p)).ln()
    };
    let (toward_q, toward_p) = if q > p {
        (Verdict::Less, Verdict::Greater)
    } else {
        (Verdict::Greater, Verdict::Less)
    };
    let mut llr = 0.0;
    let mut samples = 0;
    for x in stream.take(cap as usize) {
        samples += 1;
        llr += if x { up } else { down };
        if llr >= c {
            return Ok(Decision {
                verdict: toward_q,
                samples,
            });
        }
        if llr <= -c {
            return Ok(Decision {
                verdict: toward_p,
                samples,
            });
        }
    }
    Ok(Decision {
        verdict: Verdict::Undecided,
        samples,
    })
}

/// Failure budget of one stage when `s` stages share `α`.
pub fn horvath_stage_budget(alpha: f64, stages: usize) -> f64 {
    alpha / stages as f64
}

/// Staged baseline: at each cumulative size `n_i` build a two-sided
/// Clopper-Pearson interval with `α/(2s)` per side; declare as soon as `p`
/// falls outside, abstain after the last stage.
pub fn horvath_adaptive<I: Iterator<Item = bool>>(
    p: f64,
    mut stream: I,
    alpha: f64,
    stages: &[u64],
) -> Result<Decision> {
    check_unit("p", p)?;
    check_open_unit("alpha", alpha)?;
    if stages.is_empty() || stages[0] == 0 || stages.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "stages",
            "need a nonempty, strictly increasing list of positive sizes",
        ));
    }
    let side = 0.5 * horvath_stage_budget(alpha, stages.len());
    let mut counts = Counts::default();
    for &n in stages {
        while counts.trials < n {
            match stream.next() {
                Some(x) => counts.push(x),
                None => {
                    return Ok(Decision {
                        verdict: Verdict::Undecided,
                        samples: counts.trials,
                    })
                }
            }
        }
        if cp_upper(counts, side).lo > p {
            return Ok(Decision {
                verdict: Verdict::Less,
                samples: n,
            });
        }
        if cp_lower(counts, side).up < p {
            return Ok(Decision {
                verdict: Verdict::Greater,
                samples: n,
            });
        }
    }
    Ok(Decision {
        verdict: Verdict::Abstain,
        samples: counts.trials,
    })
}

/// Outcome of the fixed-sample rule. `equal` is set when the hypothesis
/// could not be rejected; the verdict is then `Undecided`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoeffdingDecision {
    pub verdict: Verdict,
    pub equal: bool,
    pub samples: u64,
}

/// Draws `⌈2 ln(1/γ)/ε²⌉` bits and checks `q` against the two-sided
/// Hoeffding interval at level `γ`. `Greater` means `q` is above the
/// interval. Fails if the stream runs dry first.
pub fn nonadaptive_hoeffding<I: Iterator<Item = bool>>(
    q: f64,
    eps: f64,
    gamma: f64,
    stream: I,
) -> Result<HoeffdingDecision> {
    check_unit("q", q)?;
    let n = hoeffding_sample_size(eps, gamma)?;
    let mut counts = Counts::default();
    for x in stream.take(n as usize) {
        counts.push(x);
    }
    if counts.trials < n {
        return Err(Error::invalid(
            "stream",
            format!("ended after {} of {n} samples", counts.trials),
        ));
    }
    let i = hoeffding_interval(counts, gamma)?;
    let verdict = if q > i.up {
        Verdict::Greater
    } else if q < i.lo {
        Verdict::Less
    } else {
        Verdict::Undecided
    };
    Ok(HoeffdingDecision {
        verdict,
        equal: verdict == Verdict::Undecided,
        samples: n,
    })
}

/// One benchmark outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: &'static str,
    pub p_threshold: f64,
    pub q_true: f64,
    pub alpha: f64,
    pub trial: u64,
    pub verdict: Verdict,
    pub samples_used: u64,
    /// Zero unless timing was requested, so records stay reproducible.
    pub wall_clock_ns: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub p_grid: Vec<f64>,
    pub q: f64,
    pub alpha: f64,
    pub trials: u64,
    pub methods: Vec<Method>,
    pub cap: u64,
    pub seed: u64,
    pub timing: bool,
}

impl SweepConfig {
    /// The standard decision experiment: `q = 0.91`,
    /// `α = 0.001`, 51 thresholds `i/50`.
    pub fn figure(trials: u64, seed: u64) -> Self {
        SweepConfig {
            p_grid: (0..=50).map(|i| i as f64 / 50.0).collect(),
            q: 0.91,
            alpha: 0.001,
            trials,
            methods: vec![
                Method::Sprt,
                Method::Cs(CsKind::Betting),
                Method::Cs(CsKind::Union(crate::cs::Schedule::geometric())),
                Method::Horvath(HORVATH_STAGES.to_vec()),
            ],
            cap: DEFAULT_CAP,
            seed,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("q", self.q)?;
        check_open_unit("alpha", self.alpha)?;
        check_cap(self.cap)?;
        if self.p_grid.is_empty() {
            return Err(Error::invalid("p_grid", "empty"));
        }
        for &p in &self.p_grid {
            check_unit("p", p)?;
            if p == self.q && self.methods.contains(&Method::Sprt) {
                return Err(Error::invalid(
                    "p_grid",
                    "the likelihood-ratio test needs p != q",
                ));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "empty"));
        }
        for m in &self.methods {
            if let Method::Horvath(stages) = m {
                if stages.is_empty() || stages[0] == 0 || stages.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid(
                        "stages",
                        "need a strictly increasing list of positive sizes",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Runs every `(method, p, trial)` cell. All methods at a given `(p, trial)`
/// read the same bits; auxiliary draws are keyed by method.
/// Records come back sorted by `(method, p, trial)` in config order,
/// whatever the thread count.
pub fn benchmark_sweep(config: &SweepConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let cells: Vec<(usize, usize, u64)> = (0..config.methods.len())
        .flat_map(|m| {
            (0..config.p_grid.len()).flat_map(move |g| (0..config.trials).map(move |t| (m, g, t)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(m, g, trial)| {
            let method = &config.methods[m];
            let p = config.p_grid[g];
            let id = method.id();
            let bits = BernoulliStream::new(
                substream(config.seed, SHARED_BITS, g as u64, trial),
                config.q,
            );
            let mut draws = substream(config.seed, id | 1 << 32, g as u64, trial);
            let start = config.timing.then(Instant::now);
            let d = method.decide(p, config.q, config.alpha, config.cap, bits, &mut draws)?;
            Ok(TrialRecord {
                method: method.name(),
                p_threshold: p,
                q_true: config.q,
                alpha: config.alpha,
                trial,
                verdict: d.verdict,
                samples_used: d.samples,
                wall_clock_ns: start.map_or(0, |s| s.elapsed().as_nanos() as u64),
                seed: config.seed,
            })
        })
        .collect()
}

/// `(1/(24ε²)) ln ln(1/ε)`, defined for `0 < ε < 1/e`.
pub fn lower_bound_samples(eps: f64) -> Option<f64> {
    (eps > 0.0 && eps < (-1.0f64).exp()).then(|| (1.0 / eps).ln().ln() / (24.0 * eps * eps))
}

/// Aggregate of one `(method, p)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub method: &'static str,
    pub p: f64,
    pub trials: u64,
    pub mean_samples: f64,
    pub wrong: u64,
    pub undecided: u64,
    pub abstain: u64,
    /// Mean samples divided by the likelihood-ratio test's at the same `p`.
    pub rel_to_sprt: Option<f64>,
    pub lower_bound: Option<f64>,
}

/// Collapses records (as returned by [`benchmark_sweep`]) into one row per
/// `(method, p)`, in first-appearance order.
pub fn summarize(records: &[TrialRecord]) -> Vec<SweepSummary> {
    let mut rows: Vec<SweepSummary> = Vec::new();
    for r in records {
        let hit = rows
            .iter_mut()
            .rev()
            .find(|s| s.method == r.method && s.p == r.p_threshold);
        let row = match hit {
            Some(row) => row,
            None => {
                rows.push(SweepSummary {
                    method: r.method,
                    p: r.p_threshold,
                    trials: 0,
                    mean_samples: 0.0,
                    wrong: 0,
                    undecided: 0,
                    abstain: 0,
                    rel_to_sprt: None,
                    lower_bound: lower_bound_samples((r.p_threshold - r.q_true).abs()),
                });
                rows.last_mut().unwrap()
            }
        };
        row.trials += 1;
        row.mean_samples += r.samples_used as f64;
        row.wrong += u64::from(r.verdict.is_wrong(r.p_threshold, r.q_true));
        row.undecided += u64::from(r.verdict == Verdict::Undecided);
        row.abstain += u64::from(r.verdict == Verdict::Abstain);
    }
    for row in &mut rows {
        row.mean_samples /= row.trials as f64;
    }
    let sprt: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.method == "sprt")
        .map(|r| (r.p, r.mean_samples))
        .collect();
    for row in &mut rows {
        row.rel_to_sprt = sprt
            .iter()
            .find(|(p, _)| *p == row.p)
            .map(|(_, base)| row.mean_samples / base);
    }
    rows
}
