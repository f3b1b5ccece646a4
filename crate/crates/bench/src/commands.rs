//! Experiment drivers. Each command is a pure function from its config to
//! the bytes of a CSV document.

use rayon::prelude::*;

use anytime_core::cert::{
    certify_binary, certify_multiclass, CertMode, CertOutcome, CertSpec, ClassOracle,
};
use anytime_core::ci::{upper_coverage_exact, upper_coverage_monte_carlo, IntervalKind};
use anytime_core::cs::{dp_thresholds, CsKind};
use anytime_core::decision::{benchmark_sweep, summarize, Method, SweepConfig};
use anytime_core::rng::{substream, BernoulliStream, SHARED_BITS};

use crate::format::{float, opt_float, Csv};
use crate::BenchError;

/// Largest `n` for which the coverage command enumerates exactly.
pub const EXACT_MAX_N: u64 = 10_000;

fn config_err(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}

fn check_alpha(alpha: f64) -> Result<(), BenchError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(config_err(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_grid(grid: &[f64]) -> Result<(), BenchError> {
    if grid.is_empty() {
        return Err(config_err("empty p grid"));
    }
    match grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(p) => Err(config_err(format!("grid value {p} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// `k/(m)` for `k = lo..=hi`.
pub fn ratio_grid(lo: u32, hi: u32, m: u32) -> Vec<f64> {
    (lo..=hi).map(|k| k as f64 / m as f64).collect()
}

pub fn interval_kind(name: &str) -> Result<IntervalKind, BenchError> {
    match name {
        "cp" => Ok(IntervalKind::ClopperPearson),
        "rcp" => Ok(IntervalKind::Randomized),
        _ => Err(config_err(format!(
            "unknown interval kind `{name}` (expected cp or rcp)"
        ))),
    }
}

pub fn cs_kind(name: &str) -> Result<CsKind, BenchError> {
    CsKind::from_name(name).ok_or_else(|| {
        config_err(format!(
            "unknown sequence `{name}` (expected betting, union or union-doubling)"
        ))
    })
}

pub fn method(name: &str) -> Result<Method, BenchError> {
    Method::from_name(name).ok_or_else(|| config_err(format!("unknown method `{name}`")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub n: u64,
    pub alpha: f64,
    pub p_grid: Vec<f64>,
    pub trials: u64,
    pub kinds: Vec<IntervalKind>,
    pub seed: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            n: 100,
            alpha: 0.001,
            p_grid: ratio_grid(1, 99, 100),
            trials: 1000,
            kinds: vec![IntervalKind::ClopperPearson, IntervalKind::Randomized],
            seed: 42,
        }
    }
}

/// Coverage of the one-sided upper interval: Monte Carlo (skipped when
/// `trials == 0`) and exact enumeration (for `n <= EXACT_MAX_N`).
pub fn coverage(cfg: &CoverageConfig) -> Result<String, BenchError> {
    if cfg.n == 0 {
        return Err(config_err("n must be at least 1"));
    }
    check_alpha(cfg.alpha)?;
    check_grid(&cfg.p_grid)?;
    if cfg.kinds.is_empty() {
        return Err(config_err("no interval kinds"));
    }
    let cells: Vec<(usize, usize)> = (0..cfg.kinds.len())
        .flat_map(|k| (0..cfg.p_grid.len()).map(move |g| (k, g)))
        .collect();
    let rows: Vec<Vec<String>> = cells
        .into_par_iter()
        .map(|(k, g)| {
            let kind = cfg.kinds[k];
            let p = cfg.p_grid[g];
            let mc = (cfg.trials > 0).then(|| {
                let mut rng = substream(cfg.seed, k as u64, g as u64, 0);
                upper_coverage_monte_carlo(kind, cfg.n, cfg.alpha, p, cfg.trials, &mut rng)
            });
            let exact =
                (cfg.n <= EXACT_MAX_N).then(|| upper_coverage_exact(kind, cfg.n, cfg.alpha, p));
            vec![
                float(p),
                kind.name().to_string(),
                opt_float(mc),
                opt_float(exact),
                cfg.trials.to_string(),
            ]
        })
        .collect();
    let mut csv = Csv::new(&["p", "kind", "coverage_mc", "coverage_exact", "trials"]);
    rows.into_iter().for_each(|r| csv.row(r));
    Ok(csv.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthConfig {
    pub p: f64,
    pub alpha: f64,
    pub horizon: u64,
    pub kinds: Vec<CsKind>,
    pub seed: u64,
    /// Index of the shared stream among those derived from `seed`.
    pub stream: u64,
}

impl Default for WidthConfig {
    fn default() -> Self {
        WidthConfig {
            p: 0.1,
            alpha: 0.001,
            horizon: 1 << 16,
            kinds: vec![
                CsKind::Betting,
                CsKind::Union(anytime_core::cs::Schedule::geometric()),
            ],
            seed: 42,
            stream: 0,
        }
    }
}

/// One `(t, L, U)` sample of a running interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: u64,
    pub lo: f64,
    pub up: f64,
}

/// Runs `kind` on stream `stream` of `seed` and records the running
/// interval at `t = 1, 2, 4, ...` up to `horizon`. All kinds see the same
/// bits for a given `(seed, stream)`.
pub fn width_trace(
    kind: CsKind,
    p: f64,
    alpha: f64,
    horizon: u64,
    seed: u64,
    stream: u64,
) -> Result<Vec<TracePoint>, BenchError> {
    let mut cs = kind.start(alpha)?;
    let bits = BernoulliStream::new(substream(seed, SHARED_BITS, 0, stream), p);
    let mut draws = substream(seed, Method::Cs(kind).id() | 1 << 32, 0, stream);
    let mut out = Vec::new();
    let mut next_log = 1;
    for (t, x) in (1..=horizon).zip(bits) {
        let i = cs.observe(x, &mut draws);
        if t == next_log {
            out.push(TracePoint {
                t,
                lo: i.lo,
                up: i.up,
            });
            next_log *= 2;
        }
    }
    Ok(out)
}

pub fn width(cfg: &WidthConfig) -> Result<String, BenchError> {
    if !(0.0..=1.0).contains(&cfg.p) {
        return Err(config_err(format!("p must lie in [0, 1], got {}", cfg.p)));
    }
    check_alpha(cfg.alpha)?;
    if cfg.horizon == 0 {
        return Err(config_err("horizon must be at least 1"));
    }
    if cfg.kinds.is_empty() {
        return Err(config_err("no sequence kinds"));
    }
    let traces = cfg
        .kinds
        .par_iter()
        .map(|&k| width_trace(k, cfg.p, cfg.alpha, cfg.horizon, cfg.seed, cfg.stream))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["t", "kind", "L", "U", "width"]);
    for (kind, trace) in cfg.kinds.iter().zip(traces) {
        for pt in trace {
            csv.row([
                pt.t.to_string(),
                kind.name().into(),
                float(pt.lo),
                float(pt.up),
                float(pt.up - pt.lo),
            ]);
        }
    }
    Ok(csv.finish())
}

/// Decision sweep; per-trial rows, or one row per `(method, p)` with
/// `summary`.
pub fn decide(cfg: &SweepConfig, summary: bool) -> Result<String, BenchError> {
    let records = benchmark_sweep(cfg)?;
    if summary {
        let mut csv = Csv::new(&[
            "method",
            "p",
            "trials",
            "mean_samples",
            "wrong",
            "undecided",
            "abstain",
            "rel_to_sprt",
            "lower_bound",
        ]);
        for s in summarize(&records) {
            csv.row([
                s.method.to_string(),
                float(s.p),
                s.trials.to_string(),
                float(s.mean_samples),
                s.wrong.to_string(),
                s.undecided.to_string(),
                s.abstain.to_string(),
                opt_float(s.rel_to_sprt),
                opt_float(s.lower_bound),
            ]);
        }
        return Ok(csv.finish());
    }
    let mut csv = Csv::new(&[
        "method", "p", "q", "alpha", "trial", "verdict", "samples", "seed",
    ]);
    for r in records {
        csv.row([
            r.method.to_string(),
            float(r.p_threshold),
            float(r.q_true),
            float(r.alpha),
            r.trial.to_string(),
            r.verdict.name().to_string(),
            r.samples_used.to_string(),
            r.seed.to_string(),
        ]);
    }
    Ok(csv.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyConfig {
    pub probs: Vec<f64>,
    pub target: usize,
    pub sigma: f64,
    pub radii: Vec<f64>,
    pub alpha: f64,
    pub mode: CertMode,
    pub methods: Vec<Method>,
    pub trials: u64,
    pub cap: u64,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            probs: vec![0.9, 0.1],
            target: 0,
            sigma: 1.0,
            radii: vec![0.25, 0.5, 1.0],
            alpha: 0.001,
            mode: CertMode::Binary,
            methods: vec![
                Method::Horvath(anytime_core::decision::HORVATH_STAGES.to_vec()),
                Method::Cs(CsKind::Union(anytime_core::cs::Schedule::geometric())),
                Method::Cs(CsKind::Betting),
            ],
            trials: 100,
            cap: anytime_core::decision::DEFAULT_CAP,
            seed: 42,
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        ClassOracle::new(self.probs.clone(), 0)?;
        if self.target >= self.probs.len() {
            return Err(config_err(format!(
                "target class {} out of range",
                self.target
            )));
        }
        if self.radii.is_empty() || self.methods.is_empty() {
            return Err(config_err("need at least one radius and one method"));
        }
        for &radius in &self.radii {
            self.spec(radius).validate()?;
        }
        if self.cap == 0 {
            return Err(config_err("cap must be at least 1"));
        }
        if let CertMode::Multiclass { .. } = self.mode {
            if self.probs.len() < 2 {
                return Err(config_err("multiclass mode needs at least two classes"));
            }
            if let Some(m) = self.methods.iter().find(|m| !matches!(m, Method::Cs(_))) {
                return Err(config_err(format!(
                    "method `{}` has no multiclass variant",
                    m.name()
                )));
            }
        }
        Ok(())
    }

    fn spec(&self, radius: f64) -> CertSpec {
        CertSpec {
            sigma: self.sigma,
            radius,
            alpha: self.alpha,
            mode: self.mode,
        }
    }
}

fn run_certification(
    cfg: &CertifyConfig,
) -> Result<Vec<(usize, usize, CertOutcome, u64)>, BenchError> {
    cfg.validate()?;
    let cells: Vec<(usize, usize, u64)> = (0..cfg.methods.len())
        .flat_map(|m| {
            (0..cfg.radii.len()).flat_map(move |r| (0..cfg.trials).map(move |t| (m, r, t)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(m, r, t)| {
            // Every method sees the same oracle draws for a given radius and trial.
            let mut oracle = ClassOracle::for_cell(cfg.probs.clone(), cfg.seed, r as u64, t)?;
            let spec = cfg.spec(cfg.radii[r]);
            let res = match (&cfg.methods[m], cfg.mode) {
                (Method::Cs(kind), CertMode::Multiclass { .. }) => {
                    certify_multiclass(&mut oracle, &spec, *kind, cfg.cap)?
                }
                (method, _) => certify_binary(&mut oracle, cfg.target, &spec, method, cfg.cap)?,
            };
            Ok((m, r, res.outcome, res.samples))
        })
        .collect()
}

/// Certification runs; per-trial rows, or per-cell sample statistics with
/// `summary`.
pub fn certify(cfg: &CertifyConfig, summary: bool) -> Result<String, BenchError> {
    let runs = run_certification(cfg)?;
    let lambda = match cfg.mode {
        CertMode::Multiclass { lambda, .. } => float(lambda),
        CertMode::Binary => String::new(),
    };
    let lead = |m: usize, r: usize| {
        vec![
            cfg.mode.name().to_string(),
            cfg.methods[m].name().to_string(),
            float(cfg.sigma),
            float(cfg.radii[r]),
            float(cfg.alpha),
            lambda.clone(),
        ]
    };
    if !summary {
        let mut csv = Csv::new(&[
            "mode", "cs", "sigma", "radius", "alpha", "lambda", "verdict", "samples", "seed",
        ]);
        for (m, r, outcome, samples) in runs {
            let mut row = lead(m, r);
            row.extend([
                outcome.name().to_string(),
                samples.to_string(),
                cfg.seed.to_string(),
            ]);
            csv.row(row);
        }
        return Ok(csv.finish());
    }
    let mut csv = Csv::new(&[
        "mode",
        "cs",
        "sigma",
        "radius",
        "alpha",
        "lambda",
        "trials",
        "certified",
        "not_certifiable",
        "undecided",
        "mean_samples",
        "std_samples",
    ]);
    for (m, r) in (0..cfg.methods.len()).flat_map(|m| (0..cfg.radii.len()).map(move |r| (m, r))) {
        let cell: Vec<_> = runs.iter().filter(|x| x.0 == m && x.1 == r).collect();
        let n = cell.len() as f64;
        let count = |o: CertOutcome| cell.iter().filter(|x| x.2 == o).count().to_string();
        let mean = cell.iter().map(|x| x.3 as f64).sum::<f64>() / n;
        let var = cell
            .iter()
            .map(|x| (x.3 as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        let mut row = lead(m, r);
        row.extend([
            cell.len().to_string(),
            count(CertOutcome::Certified),
            count(CertOutcome::NotCertifiable),
            count(CertOutcome::Undecided),
            if cell.is_empty() {
                String::new()
            } else {
                float(mean)
            },
            if cell.len() < 2 {
                String::new()
            } else {
                float(var.sqrt())
            },
        ]);
        csv.row(row);
    }
    Ok(csv.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdsConfig {
    pub p: f64,
    pub alpha: f64,
    pub n_max: u64,
}

pub fn thresholds(cfg: &ThresholdsConfig) -> Result<String, BenchError> {
    if cfg.n_max == 0 {
        return Err(config_err("n_max must be at least 1"));
    }
    let table = dp_thresholds(cfg.p, cfg.alpha, cfg.n_max)?;
    let mut buf = Vec::with_capacity(table.len() * 12);
    anytime_core::cs::write_thresholds_csv(&mut buf, &table)?;
    Ok(String::from_utf8(buf).expect("ascii"))
}
