//! Seeded simulations of the strong laws under a battery of kernel-selection
//! strategies, plus the exact side conditions (truncation bands,
//! Borel–Cantelli sub-additivity) the proofs rely on.
//!
//! A quasi-sure statement is checked as "for every strategy in the
//! battery": each strategy picks one of the template's kernels at every
//! step, which realises one pasted measure of the credal set. Simulation is
//! evidence, not proof.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigRational, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::credal::{CredalModel, TOL};
use crate::distribution::StepTemplate;
use crate::error::{Error, Result};
use crate::tree::Event;

/// Mean spread tolerated by the mean-certainty test. Means are compared in
/// exact rational arithmetic; the slack only absorbs the binary rounding of
/// decimal inputs such as `0.1`.
pub const MEAN_CERTAIN_TOL: f64 = 1e-12;

/// Margin on fitted power-law exponents in the convergence tests.
pub const TREND_MARGIN: f64 = 0.05;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "SUBLEX_THREADS";

/// Greedy targets of the adaptive strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryTarget {
    /// Maximise the next `E[S_{n+1}²]` given `S_n`.
    MaxAbs,
    /// Maximise the next mean.
    DriftUp,
    /// Minimise the next mean.
    DriftDown,
}

/// How a path chooses its kernel at each step.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioStrategy {
    Constant(usize),
    /// Kernel `pattern[((i-1)/block) % len]` at step `i`.
    Periodic { pattern: Vec<usize>, block: usize },
    /// Uniform kernel choice from a private stream.
    SeededRandom(u64),
    Adversarial(AdversaryTarget),
    /// Alternates the highest- and lowest-mean kernels on blocks ending at
    /// `ratio^k`.
    Oscillating(u64),
}

impl ScenarioStrategy {
    /// Constants on each kernel, three periodic patterns, eight seeded
    /// random strategies and two greedy adversaries.
    pub fn default_battery(kernels: usize) -> Vec<ScenarioStrategy> {
        let mut v: Vec<ScenarioStrategy> = (0..kernels).map(ScenarioStrategy::Constant).collect();
        let forward: Vec<usize> = (0..kernels).collect();
        let backward: Vec<usize> = (0..kernels).rev().collect();
        v.push(ScenarioStrategy::Periodic {
            pattern: forward.clone(),
            block: 1,
        });
        v.push(ScenarioStrategy::Periodic {
            pattern: forward,
            block: 10,
        });
        v.push(ScenarioStrategy::Periodic {
            pattern: backward,
            block: 1000,
        });
        v.extend((1..=8).map(ScenarioStrategy::SeededRandom));
        v.push(ScenarioStrategy::Adversarial(AdversaryTarget::MaxAbs));
        v.push(ScenarioStrategy::Adversarial(AdversaryTarget::DriftUp));
        v
    }

    /// Parses a list separated by `;` or `,`. A comma fragment starting with
    /// a digit continues the preceding periodic pattern, so
    /// `const:0,periodic:0,1/10` holds two entries.
    pub fn parse_list(s: &str, kernels: usize) -> Result<Vec<ScenarioStrategy>> {
        let mut parts: Vec<String> = Vec::new();
        for group in s.split(';') {
            let mut open_periodic = false;
            for frag in group.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                if frag.starts_with(|c: char| c.is_ascii_digit()) {
                    match parts.last_mut() {
                        Some(last) if open_periodic => {
                            last.push(',');
                            last.push_str(frag);
                            continue;
                        }
                        _ => return Err(Error::InvalidParameter(format!("stray list fragment {frag:?}"))),
                    }
                }
                open_periodic = frag.starts_with("periodic:");
                parts.push(frag.to_string());
            }
        }
        let mut out = Vec::new();
        for part in &parts {
            let part = part.as_str();
            if part == "default" {
                out.extend(Self::default_battery(kernels));
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Empty("strategy list"));
        }
        Ok(out)
    }

    fn validate(&self, kernels: usize) -> Result<()> {
        let bad = |k: usize| {
            Err(Error::InvalidParameter(format!(
                "strategy {self} uses kernel {k}, but the template has {kernels}"
            )))
        };
        match self {
            ScenarioStrategy::Constant(k) if *k >= kernels => bad(*k),
            ScenarioStrategy::Periodic { pattern, block } => {
                if pattern.is_empty() || *block == 0 {
                    return Err(Error::InvalidParameter(format!("degenerate periodic strategy {self}")));
                }
                match pattern.iter().find(|&&k| k >= kernels) {
                    Some(&k) => bad(k),
                    None => Ok(()),
                }
            }
            ScenarioStrategy::Oscillating(r) if *r < 2 => Err(Error::InvalidParameter(
                "oscillation ratio must be at least 2".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ScenarioStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioStrategy::Constant(k) => write!(f, "const:{k}"),
            ScenarioStrategy::Periodic { pattern, block } => {
                let p: Vec<String> = pattern.iter().map(|k| k.to_string()).collect();
                write!(f, "periodic:{}", p.join(","))?;
                if *block != 1 {
                    write!(f, "/{block}")?;
                }
                Ok(())
            }
            ScenarioStrategy::SeededRandom(s) => write!(f, "random:{s}"),
            ScenarioStrategy::Adversarial(AdversaryTarget::MaxAbs) => f.write_str("adv:maxabs"),
            ScenarioStrategy::Adversarial(AdversaryTarget::DriftUp) => f.write_str("adv:up"),
            ScenarioStrategy::Adversarial(AdversaryTarget::DriftDown) => f.write_str("adv:down"),
            ScenarioStrategy::Oscillating(r) => write!(f, "osc:{r}"),
        }
    }
}

impl FromStr for ScenarioStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown strategy {s:?}"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let int = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        Ok(match kind.trim() {
            "const" => ScenarioStrategy::Constant(int(arg)? as usize),
            "random" => ScenarioStrategy::SeededRandom(int(arg)?),
            "osc" => ScenarioStrategy::Oscillating(int(arg)?),
            "adv" => ScenarioStrategy::Adversarial(match arg.trim() {
                "maxabs" => AdversaryTarget::MaxAbs,
                "up" => AdversaryTarget::DriftUp,
                "down" => AdversaryTarget::DriftDown,
                _ => return Err(bad()),
            }),
            "periodic" => {
                let (pat, block) = match arg.split_once('/') {
                    Some((p, b)) => (p, int(b)? as usize),
                    None => (arg, 1),
                };
                let pattern = pat
                    .split(',')
                    .map(|t| int(t).map(|k| k as usize))
                    .collect::<Result<Vec<_>>>()?;
                ScenarioStrategy::Periodic { pattern, block }
            }
            _ => return Err(bad()),
        })
    }
}

/// Normalising sequence `b_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalizer {
    /// `b_n = n`
    Linear,
    /// `b_n = √n`
    Sqrt,
    /// `b_n = log(n + 1)`
    Log,
    /// `b_n = n^α`
    Power(f64),
    /// `b_1, b_2, …` supplied explicitly.
    Custom(Vec<f64>),
}

impl Normalizer {
    fn at(&self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            Normalizer::Linear => x,
            Normalizer::Sqrt => x.sqrt(),
            Normalizer::Log => (x + 1.0).ln(),
            Normalizer::Power(a) => x.powf(*a),
            Normalizer::Custom(v) => v[n - 1],
        }
    }

    fn validate(&self, steps: usize) -> Result<()> {
        match self {
            Normalizer::Power(a) if !(a.is_finite() && *a > 0.0) => Err(Error::InvalidParameter(
                format!("b_n = n^{a} must have a positive exponent"),
            )),
            Normalizer::Custom(v) => {
                if v.len() < steps {
                    return Err(Error::InvalidParameter(format!(
                        "custom b_n has {} terms for {steps} steps",
                        v.len()
                    )));
                }
                if v.iter().any(|b| !b.is_finite() || *b <= 0.0) {
                    return Err(Error::InvalidParameter("custom b_n must be positive".into()));
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidParameter("custom b_n must be nondecreasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether `Σ 1/b_n²` converges: exact for the closed forms, by a
    /// fitted growth exponent for custom sequences.
    pub fn square_reciprocal_converges(&self) -> bool {
        match self {
            Normalizer::Linear => true,
            Normalizer::Sqrt | Normalizer::Log => false,
            Normalizer::Power(a) => 2.0 * a > 1.0,
            Normalizer::Custom(v) => growth_exponent(v).is_some_and(|a| 2.0 * a > 1.0 + TREND_MARGIN),
        }
    }
}

impl fmt::Display for Normalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalizer::Linear => f.write_str("n"),
            Normalizer::Sqrt => f.write_str("sqrt"),
            Normalizer::Log => f.write_str("log"),
            Normalizer::Power(a) => write!(f, "pow:{a}"),
            Normalizer::Custom(v) => write!(f, "custom[{}]", v.len()),
        }
    }
}

impl FromStr for Normalizer {
    type Err = Error;

    /// `n`, `sqrt`, `log` or `pow:ALPHA`; custom sequences are loaded by the caller.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "n" | "linear" => Ok(Normalizer::Linear),
            "sqrt" => Ok(Normalizer::Sqrt),
            "log" => Ok(Normalizer::Log),
            t => match t.strip_prefix("pow:") {
                Some(a) => a
                    .parse()
                    .map(Normalizer::Power)
                    .map_err(|_| Error::InvalidParameter(format!("bad exponent in {t:?}"))),
                None => Err(Error::InvalidParameter(format!("unknown b_n {t:?}"))),
            },
        }
    }
}

/// Step weights `w_i` of the series check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weights {
    /// `w_i = 1`
    Unit,
    /// `w_i = 1/i`
    Harmonic,
    /// `w_i = i^{-α}`
    Power(f64),
    Custom(Vec<f64>),
}

impl Weights {
    fn at(&self, i: usize) -> f64 {
        match self {
            Weights::Unit => 1.0,
            Weights::Harmonic => 1.0 / i as f64,
            Weights::Power(a) => (i as f64).powf(-a),
            Weights::Custom(v) => v[i - 1],
        }
    }

    fn validate(&self, steps: usize) -> Result<()> {
        match self {
            Weights::Power(a) if !a.is_finite() => {
                Err(Error::InvalidParameter("weight exponent must be finite".into()))
            }
            Weights::Custom(v) => {
                if v.len() < steps {
                    return Err(Error::InvalidParameter(format!(
                        "custom weights have {} terms for {steps} steps",
                        v.len()
                    )));
                }
                if v.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                    return Err(Error::InvalidParameter("weights must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether `Σ w_i²` converges.
    pub fn square_sum_converges(&self) -> bool {
        match self {
            Weights::Unit => false,
            Weights::Harmonic => true,
            Weights::Power(a) => 2.0 * a > 1.0,
            Weights::Custom(v) => {
                let inv: Vec<f64> = v.iter().map(|w| 1.0 / w).collect();
                growth_exponent(&inv).is_some_and(|a| 2.0 * a > 1.0 + TREND_MARGIN)
            }
        }
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weights::Unit => f.write_str("1"),
            Weights::Harmonic => f.write_str("1/i"),
            Weights::Power(a) => write!(f, "i^-{a}"),
            Weights::Custom(v) => write!(f, "custom[{}]", v.len()),
        }
    }
}

impl FromStr for Weights {
    type Err = Error;

    /// `1`, `harmonic` (or `1/i`) or `pow:ALPHA`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "unit" => Ok(Weights::Unit),
            "harmonic" | "1/i" => Ok(Weights::Harmonic),
            t => match t.strip_prefix("pow:") {
                Some(a) => a
                    .parse()
                    .map(Weights::Power)
                    .map_err(|_| Error::InvalidParameter(format!("bad exponent in {t:?}"))),
                None => Err(Error::InvalidParameter(format!("unknown weights {t:?}"))),
            },
        }
    }
}

/// Least-squares slope of `log v_n` against `log n` over the second half of
/// the sequence; `None` when it is too short or not positive.
pub fn growth_exponent(v: &[f64]) -> Option<f64> {
    let n = v.len();
    if n < 8 || v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return None;
    }
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .map(|i| (((i + 1) as f64).ln(), v[i].ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in &pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub steps: usize,
    pub replications: usize,
    pub seed: u64,
    /// `None` selects [`ScenarioStrategy::default_battery`].
    pub strategies: Option<Vec<ScenarioStrategy>>,
    pub normalizer: Normalizer,
    pub tolerance: f64,
    pub burn_in: usize,
    /// Worker threads; `None` reads `SUBLEX_THREADS`, then uses rayon's default.
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Points kept per trajectory; 0 keeps none.
    pub trajectory_points: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            steps: 100_000,
            replications: 32,
            seed: 0,
            strategies: None,
            normalizer: Normalizer::Linear,
            tolerance: 0.02,
            burn_in: 10_000,
            threads: None,
            trajectory_points: 0,
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.replications == 0 {
            return Err(Error::InvalidParameter("steps and replications must be at least 1".into()));
        }
        if self.burn_in == 0 || self.burn_in > self.steps {
            return Err(Error::InvalidParameter(format!(
                "burn-in {} must lie in 1..={}",
                self.burn_in, self.steps
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::InvalidParameter("tolerance must be nonnegative".into()));
        }
        self.normalizer.validate(self.steps)
    }

    fn battery(&self, kernels: usize) -> Result<Vec<ScenarioStrategy>> {
        let list = match &self.strategies {
            Some(s) if s.is_empty() => return Err(Error::Empty("strategy list")),
            Some(s) => s.clone(),
            None => ScenarioStrategy::default_battery(kernels),
        };
        for s in &list {
            s.validate(kernels)?;
        }
        Ok(list)
    }

    fn thread_count(&self) -> Option<usize> {
        self.threads.or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .filter(|&n: &usize| n > 0)
        })
    }
}

/// One simulated `(strategy, replication)` path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSummary {
    pub strategy: usize,
    pub replication: usize,
    /// `S_N`
    pub terminal_sum: f64,
    /// `S_N / b_N`
    pub terminal: f64,
    /// `max_{n >= N0} |S_n / b_n|`
    pub tail_max: f64,
    /// `min` and `max` of `S_n / b_n` over `n >= N0`.
    pub tail_low: f64,
    pub tail_high: f64,
    /// `sup_{j,k >= N0} |S_j − S_k|`
    pub range: f64,
    /// `(n, S_n, S_n / b_n)` at the recorded points.
    #[serde(skip)]
    pub trajectory: Vec<(usize, f64, f64)>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-unit seed: depends only on the master seed and the unit's ids.
pub fn unit_seed(master: u64, strategy: u64, replication: u64) -> u64 {
    splitmix(splitmix(splitmix(master) ^ strategy) ^ replication.rotate_left(32))
}

/// Precomputed per-kernel quantities.
struct Sampler {
    outcomes: Vec<f64>,
    cumulative: Vec<Vec<f64>>,
    means: Vec<f64>,
    second: Vec<f64>,
    argmax_mean: usize,
    argmin_mean: usize,
}

impl Sampler {
    fn new(template: &StepTemplate, center: f64) -> Self {
        let outcomes = template.outcomes().to_vec();
        let cumulative = template
            .kernels()
            .iter()
            .map(|p| {
                let mut acc = 0.0;
                let mut c: Vec<f64> = p
                    .iter()
                    .map(|q| {
                        acc += q;
                        acc
                    })
                    .collect();
                // the last outcome with positive mass absorbs rounding
                if let Some(j) = p.iter().rposition(|q| *q > 0.0) {
                    for v in &mut c[j..] {
                        *v = f64::INFINITY;
                    }
                }
                c
            })
            .collect();
        let means: Vec<f64> = template
            .kernels()
            .iter()
            .map(|p| p.iter().zip(&outcomes).map(|(q, x)| q * x).sum())
            .collect();
        let second = template
            .kernels()
            .iter()
            .map(|p| p.iter().zip(&outcomes).map(|(q, x)| q * (x - center) * (x - center)).sum())
            .collect();
        let argmax_mean = (0..means.len()).fold(0, |b, k| if means[k] > means[b] { k } else { b });
        let argmin_mean = (0..means.len()).fold(0, |b, k| if means[k] < means[b] { k } else { b });
        Sampler {
            outcomes,
            cumulative,
            means,
            second,
            argmax_mean,
            argmin_mean,
        }
    }

    #[inline]
    fn draw(&self, k: usize, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.gen();
        let cum = &self.cumulative[k];
        let j = cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1);
        self.outcomes[j]
    }
}

/// Everything a path needs besides the strategy.
struct PathSpec<'a> {
    sampler: &'a Sampler,
    center: f64,
    weights: &'a Weights,
    normalizer: &'a Normalizer,
    steps: usize,
    burn_in: usize,
    stride: usize,
}

fn run_path(spec: &PathSpec, strategy: &ScenarioStrategy, sid: usize, rep: usize, master: u64) -> PathSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(unit_seed(master, sid as u64, rep as u64));
    let mut choice_rng = match strategy {
        ScenarioStrategy::SeededRandom(s) => Some(ChaCha8Rng::seed_from_u64(unit_seed(*s, u64::MAX, rep as u64))),
        _ => None,
    };
    let kernels = spec.sampler.cumulative.len();
    let s_ = spec.sampler;
    let mut osc_next: u64 = 0;
    let mut osc_high = true;
    if let ScenarioStrategy::Oscillating(r) = strategy {
        osc_next = *r;
    }

    let mut sum = 0.0;
    let mut tail_max: f64 = 0.0;
    let (mut tail_low, mut tail_high) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut s_low, mut s_high) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut trajectory = Vec::new();
    let mut ratio = 0.0;
    for i in 1..=spec.steps {
        let w = spec.weights.at(i);
        let k = match strategy {
            ScenarioStrategy::Constant(k) => *k,
            ScenarioStrategy::Periodic { pattern, block } => pattern[((i - 1) / block) % pattern.len()],
            ScenarioStrategy::SeededRandom(_) => {
                choice_rng.as_mut().expect("stream").gen_range(0..kernels)
            }
            ScenarioStrategy::Adversarial(AdversaryTarget::DriftUp) => s_.argmax_mean,
            ScenarioStrategy::Adversarial(AdversaryTarget::DriftDown) => s_.argmin_mean,
            ScenarioStrategy::Adversarial(AdversaryTarget::MaxAbs) => {
                // E[(S + w(X − c))²] − S² = 2Sw(m_k − c) + w² E_k(X − c)²
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for k in 0..kernels {
                    let v = 2.0 * sum * w * (s_.means[k] - spec.center) + w * w * s_.second[k];
                    if v > best_v {
                        best_v = v;
                        best = k;
                    }
                }
                best
            }
            ScenarioStrategy::Oscillating(r) => {
                if i as u64 >= osc_next {
                    osc_high = !osc_high;
                    osc_next = osc_next.saturating_mul(*r);
                }
                if osc_high {
                    s_.argmax_mean
                } else {
                    s_.argmin_mean
                }
            }
        };
        let x = s_.draw(k, &mut rng);
        sum += w * (x - spec.center);
        if i >= spec.burn_in {
            ratio = sum / spec.normalizer.at(i);
            tail_max = tail_max.max(ratio.abs());
            tail_low = tail_low.min(ratio);
            tail_high = tail_high.max(ratio);
            s_low = s_low.min(sum);
            s_high = s_high.max(sum);
        }
        if spec.stride > 0 && (i % spec.stride == 0 || i == 1) {
            trajectory.push((i, sum, sum / spec.normalizer.at(i)));
        }
    }
    PathSummary {
        strategy: sid,
        replication: rep,
        terminal_sum: sum,
        terminal: ratio,
        tail_max,
        tail_low,
        tail_high,
        range: s_high - s_low,
        trajectory,
    }
}

/// All paths, in `(strategy, replication)` order whatever the thread count.
fn run_all(
    template: &StepTemplate,
    config: &SimulationConfig,
    strategies: &[ScenarioStrategy],
    center: f64,
    weights: &Weights,
) -> Result<Vec<PathSummary>> {
    config.validate()?;
    weights.validate(config.steps)?;
    let sampler = Sampler::new(template, center);
    let stride = if config.trajectory_points == 0 {
        0
    } else {
        (config.steps / config.trajectory_points).max(1)
    };
    let spec = PathSpec {
        sampler: &sampler,
        center,
        weights,
        normalizer: &config.normalizer,
        steps: config.steps,
        burn_in: config.burn_in,
        stride,
    };
    let units: Vec<(usize, usize)> = (0..strategies.len())
        .flat_map(|s| (0..config.replications).map(move |r| (s, r)))
        .collect();
    let work = || -> Vec<PathSummary> {
        units
            .par_iter()
            .map(|&(s, r)| run_path(&spec, &strategies[s], s, r, config.seed))
            .collect()
    };
    match config.thread_count() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// A downsampled path for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub strategy: String,
    pub replication: usize,
    pub points: Vec<(usize, f64, f64)>,
}

/// Raw paths of `S_n = Σ X_i` (uncentred, unit weights) under `config`.
pub fn simulate_paths(template: &StepTemplate, config: &SimulationConfig) -> Result<(Vec<PathSummary>, Vec<Trajectory>)> {
    let strategies = config.battery(template.kernels().len())?;
    let paths = run_all(template, config, &strategies, 0.0, &Weights::Unit)?;
    let traj = trajectories(&strategies, &paths);
    Ok((paths, traj))
}

fn trajectories(strategies: &[ScenarioStrategy], paths: &[PathSummary]) -> Vec<Trajectory> {
    paths
        .iter()
        .filter(|p| !p.trajectory.is_empty())
        .map(|p| Trajectory {
            strategy: strategies[p.strategy].to_string(),
            replication: p.replication,
            points: p.trajectory.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    pub strategy: String,
    /// Worst value of the check's statistic over the replications.
    pub statistic: f64,
    pub mean_terminal: f64,
    pub min_terminal: f64,
    pub max_terminal: f64,
    /// Smallest and largest `S_n/b_n` seen after the burn-in.
    pub tail_low: f64,
    pub tail_high: f64,
    pub pass: bool,
}

/// Outcome of a simulation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub check: String,
    pub statistic: String,
    pub config: SimulationConfig,
    pub strategies: Vec<StrategyResult>,
    pub pass_fraction: f64,
    pub pass: bool,
    /// Diagnostic verdicts are reported but carry no claim.
    pub diagnostic: bool,
    pub limit: Option<f64>,
    pub notes: Vec<String>,
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

impl ConvergenceVerdict {
    pub fn strategy(&self, name: &str) -> Option<&StrategyResult> {
        self.strategies.iter().find(|s| s.strategy == name)
    }

    /// Largest statistic over all strategies.
    pub fn worst(&self) -> f64 {
        self.strategies.iter().fold(0.0, |m, s| m.max(s.statistic))
    }
}

fn summarize(
    check: &str,
    statistic: &str,
    config: &SimulationConfig,
    strategies: &[ScenarioStrategy],
    paths: &[PathSummary],
    stat: impl Fn(&PathSummary) -> f64,
) -> ConvergenceVerdict {
    let mut results = Vec::with_capacity(strategies.len());
    for (sid, s) in strategies.iter().enumerate() {
        let mine: Vec<&PathSummary> = paths.iter().filter(|p| p.strategy == sid).collect();
        let worst = mine.iter().map(|p| stat(p)).fold(0.0, f64::max);
        let terms: Vec<f64> = mine.iter().map(|p| p.terminal).collect();
        results.push(StrategyResult {
            strategy: s.to_string(),
            statistic: worst,
            mean_terminal: terms.iter().sum::<f64>() / terms.len() as f64,
            min_terminal: terms.iter().copied().fold(f64::INFINITY, f64::min),
            max_terminal: terms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            tail_low: mine.iter().map(|p| p.tail_low).fold(f64::INFINITY, f64::min),
            tail_high: mine.iter().map(|p| p.tail_high).fold(f64::NEG_INFINITY, f64::max),
            pass: worst <= config.tolerance,
        });
    }
    let passed = results.iter().filter(|r| r.pass).count();
    ConvergenceVerdict {
        check: check.into(),
        statistic: statistic.into(),
        config: SimulationConfig {
            strategies: Some(strategies.to_vec()),
            ..config.clone()
        },
        pass_fraction: passed as f64 / results.len() as f64,
        pass: passed == results.len(),
        strategies: results,
        diagnostic: false,
        limit: None,
        notes: Vec::new(),
        diagnostics: BTreeMap::new(),
        trajectories: trajectories(strategies, paths),
    }
}

/// `E((X − E X)²)` for one step of the template.
fn centred_second_moment(template: &StepTemplate) -> f64 {
    let m = template.upper_mean();
    template.upper(|x| (x - m) * (x - m))
}

/// Theorem-4.2 style check: `Σ w_i (Z_i − E Z)` converges, tested through
/// the Cauchy statistic `sup_{j,k >= N0} |S_j − S_k|`.
pub fn series_convergence_check(
    template: &StepTemplate,
    weights: &Weights,
    config: &SimulationConfig,
) -> Result<ConvergenceVerdict> {
    weights.validate(config.steps)?;
    let v = centred_second_moment(template);
    if v > 0.0 && !weights.square_sum_converges() {
        return Err(Error::Precondition(format!(
            "Σ E((w_i Z̄_i)²) = {v} · Σ w_i² diverges for w_i = {weights}"
        )));
    }
    let strategies = config.battery(template.kernels().len())?;
    let center = template.upper_mean();
    let paths = run_all(template, config, &strategies, center, weights)?;
    let mut r = summarize("series", "sup_{j,k>=N0} |S_j - S_k|", config, &strategies, &paths, |p| p.range);
    r.diagnostics.insert("E((Z-EZ)^2)".into(), v);
    mean_uncertainty_note(template, &mut r);
    Ok(r)
}

/// Theorem-4.3 style check: `Σ_{i<=n}(X_i − E X_i) / b_n → 0`, tested
/// through `max_{n >= N0} |S_n| / b_n`.
pub fn weighted_slln_check(template: &StepTemplate, config: &SimulationConfig) -> Result<ConvergenceVerdict> {
    config.validate()?;
    let v = centred_second_moment(template);
    if v > 0.0 && !config.normalizer.square_reciprocal_converges() {
        return Err(Error::Precondition(format!(
            "Σ E(X̄²)/b_n² = {v} · Σ 1/b_n² diverges for b_n = {}",
            config.normalizer
        )));
    }
    let strategies = config.battery(template.kernels().len())?;
    let center = template.upper_mean();
    let paths = run_all(template, config, &strategies, center, &Weights::Unit)?;
    let mut r = summarize("weighted", "max_{n>=N0} |S_n|/b_n", config, &strategies, &paths, |p| p.tail_max);
    r.diagnostics.insert("E(Xbar^2)".into(), v);
    let terminal = paths.iter().map(|p| p.terminal.abs()).fold(0.0, f64::max);
    r.diagnostics.insert("max |S_N|/b_N".into(), terminal);
    mean_uncertainty_note(template, &mut r);
    Ok(r)
}

/// Under mean uncertainty the centred sums drift for low-mean strategies;
/// such runs are descriptive only.
fn mean_uncertainty_note(template: &StepTemplate, r: &mut ConvergenceVerdict) {
    if !mean_certain_exact(template) {
        r.diagnostic = true;
        r.notes.push(format!(
            "mean-uncertain template (E(X) = {}, -E(-X) = {}): verdict is descriptive only",
            template.upper_mean(),
            template.lower_mean()
        ));
    }
}

/// Mean spread `E(X) + E(−X)` in exact rational arithmetic.
pub fn exact_mean_spread(template: &StepTemplate) -> f64 {
    let rat = |v: f64| BigRational::from_float(v).expect("finite");
    let xs: Vec<BigRational> = template.outcomes().iter().map(|&v| rat(v)).collect();
    let means: Vec<BigRational> = template
        .kernels()
        .iter()
        .map(|p| p.iter().zip(&xs).map(|(&q, x)| rat(q) * x).sum())
        .collect();
    let hi = means.iter().max().expect("kernels");
    let lo = means.iter().min().expect("kernels");
    crate::exact::to_f64(&(hi - lo).abs())
}

pub fn mean_certain_exact(template: &StepTemplate) -> bool {
    exact_mean_spread(template) <= MEAN_CERTAIN_TOL
}

/// Main SLLN for a mean-certain template: `S_N/N → E(X_1)`, checked through
/// `|S_N/N − E(X_1)|`. The reported limit is the exact `E(X_1)`.
pub fn mean_certain_slln(template: &StepTemplate, config: &SimulationConfig) -> Result<ConvergenceVerdict> {
    if !mean_certain_exact(template) {
        return Err(Error::MeanUncertain {
            upper: template.upper_mean(),
            lower: template.lower_mean(),
        });
    }
    let trunc = truncation_condition_check(&BandSource::Template(template.clone()), None)?;
    if trunc.verdict != TruncationVerdict::Finite {
        return Err(Error::Precondition("truncation condition not verified".into()));
    }
    let config = SimulationConfig {
        normalizer: Normalizer::Linear,
        ..config.clone()
    };
    let strategies = config.battery(template.kernels().len())?;
    let limit = template.upper_mean();
    let paths = run_all(template, &config, &strategies, 0.0, &Weights::Unit)?;
    let mut r = summarize("slln", "|S_N/N - E(X_1)|", &config, &strategies, &paths, |p| {
        (p.terminal - limit).abs()
    });
    r.limit = Some(limit);
    r.diagnostics.insert("E(X_1)".into(), limit);
    r.diagnostics.insert("-E(-X_1)".into(), template.lower_mean());
    r.diagnostics.insert("E|X_1|".into(), template.upper(f64::abs));
    r.diagnostics.insert("truncation band sum".into(), trunc.partial_sums.last().copied().unwrap_or(0.0));
    // Borel–Cantelli side of the truncation Y_n = X_n 1{|X_n| <= n}:
    // Σ_n V(|X_1| > n) is a finite sum for bounded steps
    let bc: f64 = (1..=template.max_abs().ceil() as usize)
        .map(|n| template.upper(|x| if x.abs() > n as f64 { 1.0 } else { 0.0 }))
        .sum();
    r.diagnostics.insert("sum_n V(|X_1| > n)".into(), bc);
    let tail = paths
        .iter()
        .map(|p| (p.tail_low - limit).abs().max((p.tail_high - limit).abs()))
        .fold(0.0, f64::max);
    r.diagnostics.insert("max_{n>=N0} |S_n/n - E(X_1)|".into(), tail);
    Ok(r)
}

/// Limit points of `S_n/n` against `[−E(−X_1), E(X_1)]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub interval: (f64, f64),
    pub degenerate: bool,
    pub verdict: ConvergenceVerdict,
    /// Every tail value of `S_n/n` lies in the widened interval.
    pub contained: bool,
    /// Terminal averages of the constant strategies on the extreme kernels.
    pub upper_extreme: f64,
    pub lower_extreme: f64,
    pub extremes_ok: bool,
    /// Two strategies with limits further apart than `2·tol`.
    pub non_convergence_witness: Option<(String, String, f64, f64)>,
    pub pass: bool,
}

pub fn cluster_diagnostic(template: &StepTemplate, config: &SimulationConfig) -> Result<ClusterReport> {
    let hi = template.upper_mean();
    let lo = template.lower_mean();
    let degenerate = mean_certain_exact(template);
    // limit points are read off the second half of each path; at the
    // default N0 the sampling spread of S_n/n is about half the tolerance
    let config = SimulationConfig {
        normalizer: Normalizer::Linear,
        burn_in: config.burn_in.max(config.steps / 2).max(1),
        ..config.clone()
    };
    let k = template.kernels().len();
    let mut strategies = config.battery(k)?;
    let sampler = Sampler::new(template, 0.0);
    let (kmax, kmin) = (sampler.argmax_mean, sampler.argmin_mean);
    for s in [ScenarioStrategy::Constant(kmax), ScenarioStrategy::Constant(kmin)] {
        if !strategies.contains(&s) {
            strategies.push(s);
        }
    }
    if !degenerate && !strategies.iter().any(|s| matches!(s, ScenarioStrategy::Oscillating(_))) {
        strategies.push(ScenarioStrategy::Oscillating(2));
    }
    let paths = run_all(template, &config, &strategies, 0.0, &Weights::Unit)?;
    let tol = config.tolerance;
    let mut verdict = summarize("cluster", "distance of S_n/n (n>=N0) from the interval", &config, &strategies, &paths, |p| {
        (lo - p.tail_low).max(p.tail_high - hi).max(0.0)
    });
    verdict.limit = degenerate.then_some(hi);
    verdict.diagnostics.insert("E(X_1)".into(), hi);
    verdict.diagnostics.insert("-E(-X_1)".into(), lo);
    let contained = verdict.pass;

    let name_hi = ScenarioStrategy::Constant(kmax).to_string();
    let name_lo = ScenarioStrategy::Constant(kmin).to_string();
    let s_hi = verdict.strategy(&name_hi).expect("added above").clone();
    let s_lo = verdict.strategy(&name_lo).expect("added above").clone();
    let extremes_ok = (s_hi.min_terminal - hi).abs() <= tol
        && (s_hi.max_terminal - hi).abs() <= tol
        && (s_lo.min_terminal - lo).abs() <= tol
        && (s_lo.max_terminal - lo).abs() <= tol;

    let mut witness = None;
    if !degenerate {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..verdict.strategies.len() {
            for j in 0..verdict.strategies.len() {
                let gap = verdict.strategies[i].mean_terminal - verdict.strategies[j].mean_terminal;
                if gap > 2.0 * tol && best.map_or(true, |b| gap > b.0) {
                    best = Some((gap, i, j));
                }
            }
        }
        witness = best.map(|(_, i, j)| {
            let (a, b) = (&verdict.strategies[i], &verdict.strategies[j]);
            (a.strategy.clone(), b.strategy.clone(), a.mean_terminal, b.mean_terminal)
        });
    }
    if degenerate {
        verdict.notes.push("interval degenerate, converges".into());
    } else {
        verdict.diagnostic = true;
        verdict
            .notes
            .push("mean-uncertain: S_n/n does not converge q.s.; limit points fill the interval".into());
    }
    let pass = contained && extremes_ok && (degenerate || witness.is_some());
    Ok(ClusterReport {
        interval: (lo, hi),
        degenerate,
        verdict,
        contained,
        upper_extreme: s_hi.mean_terminal,
        lower_extreme: s_lo.mean_terminal,
        extremes_ok,
        non_convergence_witness: witness,
        pass,
    })
}

/// Closed-form band sequences for unbounded steps, always labelled synthetic.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticBands {
    /// `c/m²`
    InverseSquare(f64),
    /// `c/m`
    Harmonic(f64),
    /// `c·m^{-α}`
    Power { c: f64, alpha: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandSource {
    Template(StepTemplate),
    Synthetic(SyntheticBands),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationVerdict {
    /// Bands vanish beyond `max |X|`.
    Finite,
    /// Fitted decay exponent above one.
    FiniteTrend,
    /// Fitted decay exponent at most one.
    DivergentTrend,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub synthetic: bool,
    /// `band_m = E(|X_1| 1{m−1 < |X_1| <= m})`, `m = 1..=M`.
    pub bands: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub decay_exponent: Option<f64>,
    pub verdict: TruncationVerdict,
    /// `(n, E(|X_1| 1{|X_1| > n}), Σ_{m>n} band_m)`; exact templates only.
    pub tail_checks: Vec<(usize, f64, f64)>,
    pub tail_bound_holds: bool,
}

/// Default horizon for synthetic band sequences.
pub const DEFAULT_HORIZON: usize = 100_000;

pub fn truncation_condition_check(source: &BandSource, horizon: Option<usize>) -> Result<TruncationReport> {
    match source {
        BandSource::Template(t) => {
            let top = (t.max_abs().ceil() as usize).max(1);
            let m_max = horizon.unwrap_or(top).max(top);
            let bands: Vec<f64> = (1..=m_max)
                .map(|m| {
                    let (a, b) = ((m - 1) as f64, m as f64);
                    t.upper(|x| if x.abs() > a && x.abs() <= b { x.abs() } else { 0.0 })
                })
                .collect();
            let partial_sums = prefix_sums(&bands);
            let tail_checks: Vec<(usize, f64, f64)> = (0..=top)
                .map(|n| {
                    let lhs = t.upper(|x| if x.abs() > n as f64 { x.abs() } else { 0.0 });
                    let rhs: f64 = bands.iter().skip(n).sum();
                    (n, lhs, rhs)
                })
                .collect();
            let tail_bound_holds = tail_checks.iter().all(|(_, l, r)| *l <= r + TOL);
            Ok(TruncationReport {
                synthetic: false,
                bands,
                partial_sums,
                decay_exponent: None,
                verdict: TruncationVerdict::Finite,
                tail_checks,
                tail_bound_holds,
            })
        }
        BandSource::Synthetic(s) => {
            let m_max = horizon.unwrap_or(DEFAULT_HORIZON);
            let bands: Vec<f64> = match s {
                SyntheticBands::InverseSquare(c) => (1..=m_max).map(|m| c / (m as f64).powi(2)).collect(),
                SyntheticBands::Harmonic(c) => (1..=m_max).map(|m| c / m as f64).collect(),
                SyntheticBands::Power { c, alpha } => {
                    (1..=m_max).map(|m| c * (m as f64).powf(-alpha)).collect()
                }
                SyntheticBands::Explicit(v) => v.clone(),
            };
            if bands.is_empty() {
                return Err(Error::Empty("band sequence"));
            }
            if let Some(i) = bands.iter().position(|b| !b.is_finite() || *b < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "band {} is negative or non-finite",
                    i + 1
                )));
            }
            let partial_sums = prefix_sums(&bands);
            let decay_exponent = growth_exponent(&bands).map(|g| -g);
            let verdict = if bands.iter().rev().take((bands.len() / 2).max(1)).all(|&b| b == 0.0) {
                TruncationVerdict::Finite
            } else {
                match decay_exponent {
                    Some(b) if b > 1.0 + TREND_MARGIN => TruncationVerdict::FiniteTrend,
                    Some(b) if b <= 1.0 + TREND_MARGIN => TruncationVerdict::DivergentTrend,
                    _ => TruncationVerdict::Inconclusive,
                }
            };
            Ok(TruncationReport {
                synthetic: true,
                bands,
                partial_sums,
                decay_exponent,
                verdict,
                tail_checks: Vec::new(),
                tail_bound_holds: true,
            })
        }
    }
}

fn prefix_sums(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, b| {
            *acc += b;
            Some(*acc)
        })
        .collect()
}

/// Finite Borel–Cantelli: sub-additivity of `V` over the family and all of
/// its tails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorelCantelliReport {
    pub capacities: Vec<f64>,
    /// `(j, V(∪_{k>=j} A_k), Σ_{k>=j} V(A_k))`, `j` 1-based.
    pub tails: Vec<(usize, f64, f64)>,
    pub union_capacity: f64,
    pub sum: f64,
    pub holds: bool,
}

pub fn borel_cantelli_bound(model: &CredalModel, events: &[Event]) -> Result<BorelCantelliReport> {
    if events.is_empty() {
        return Err(Error::Empty("event family"));
    }
    let space = model.space();
    for e in events {
        if e.members().len() != space.leaf_count() {
            return Err(Error::LengthMismatch {
                what: "event",
                expected: space.leaf_count(),
                got: e.members().len(),
            });
        }
    }
    let capacities: Vec<f64> = events.par_iter().map(|e| model.capacity(e)).collect();
    let m = events.len();
    let mut tails = vec![(0, 0.0, 0.0); m];
    let mut union = Event::empty(space);
    let mut sum = 0.0;
    for j in (0..m).rev() {
        union = union.union(space, &events[j]);
        sum += capacities[j];
        tails[j] = (j + 1, model.capacity(&union), sum);
    }
    let holds = tails.iter().all(|(_, u, s)| *u <= s + TOL);
    Ok(BorelCantelliReport {
        union_capacity: tails[0].1,
        sum: tails[0].2,
        capacities,
        tails,
        holds,
    })
}
