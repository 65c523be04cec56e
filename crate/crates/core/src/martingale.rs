//! Sublinear martingales: classification, centered partial sums, optional
//! sampling at bounded stopping times and Jensen's inequality.

use std::fmt;

use serde::Serialize;

use crate::credal::{CredalModel, TOL};
use crate::error::{Error, Result};
use crate::tree::{AdaptedProcess, RandomVariable, StoppingTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Martingale,
    Submartingale,
    Supermartingale,
    None,
}

impl ProcessKind {
    /// Martingales count as submartingales.
    pub fn is_submartingale(self) -> bool {
        matches!(self, ProcessKind::Martingale | ProcessKind::Submartingale)
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProcessKind::Martingale => "martingale",
            ProcessKind::Submartingale => "submartingale",
            ProcessKind::Supermartingale => "supermartingale",
            ProcessKind::None => "none",
        };
        f.write_str(s)
    }
}

/// Result of [`classify_process`].
///
/// `rise[i][j]` is the largest `E_s(X_t) − X_s` and `fall[i][j]` the largest
/// `X_s − E_s(X_t)` over the depth-`s` atoms of positive capacity, for
/// `s = start + i <= t = start + j`. Entries with `j < i` are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessClass {
    pub kind: ProcessKind,
    pub start: usize,
    pub rise: Vec<Vec<f64>>,
    pub fall: Vec<Vec<f64>>,
    pub tolerance: f64,
}

impl ProcessClass {
    pub fn max_rise(&self) -> f64 {
        self.rise.iter().flatten().fold(0.0, |m, &v| m.max(v))
    }

    pub fn max_fall(&self) -> f64 {
        self.fall.iter().flatten().fold(0.0, |m, &v| m.max(v))
    }
}

pub fn classify_process(model: &CredalModel, x: &AdaptedProcess) -> ProcessClass {
    classify_with_tolerance(model, x, TOL)
}

pub fn classify_with_tolerance(model: &CredalModel, x: &AdaptedProcess, tol: f64) -> ProcessClass {
    let space = model.space();
    let n = x.end() - x.start() + 1;
    let mut rise = vec![vec![0.0; n]; n];
    let mut fall = vec![vec![0.0; n]; n];
    for t in x.times() {
        let levels = model.backward(x.at(t), t);
        for s in x.start()..=t {
            let (i, j) = (s - x.start(), t - x.start());
            for (k, node) in space.level(s).enumerate() {
                if !model.node_reachable(node) {
                    continue;
                }
                let d = levels[s][k] - x.at(s)[k];
                rise[i][j] = f64::max(rise[i][j], d);
                fall[i][j] = f64::max(fall[i][j], -d);
            }
        }
    }
    let class = ProcessClass {
        kind: ProcessKind::None,
        start: x.start(),
        rise,
        fall,
        tolerance: tol,
    };
    let sub = class.max_fall() <= tol;
    let sup = class.max_rise() <= tol;
    let kind = match (sub, sup) {
        (true, true) => ProcessKind::Martingale,
        (true, false) => ProcessKind::Submartingale,
        (false, true) => ProcessKind::Supermartingale,
        (false, false) => ProcessKind::None,
    };
    ProcessClass { kind, ..class }
}

/// Builds the process from leaf variables (rejecting non-adapted input) and classifies it.
pub fn classify_leaf_variables(
    model: &CredalModel,
    start: usize,
    vars: &[RandomVariable],
) -> Result<ProcessClass> {
    let p = AdaptedProcess::from_leaf_variables(model.space(), start, vars)?;
    Ok(classify_process(model, &p))
}

/// `S_0 = 0`, `S_j = Σ_{i<=j} (X_i − E(X_i))`; `steps[i-1]` must be `F_i`-measurable.
pub fn partial_sum_process(model: &CredalModel, steps: &[RandomVariable]) -> Result<AdaptedProcess> {
    let space = model.space();
    if steps.len() > space.depth() {
        return Err(Error::InvalidParameter(format!(
            "{} steps on a space of depth {}",
            steps.len(),
            space.depth()
        )));
    }
    let mut sums = vec![RandomVariable::constant(space, 0.0)];
    for (k, x) in steps.iter().enumerate() {
        if x.len() != space.leaf_count() {
            return Err(Error::LengthMismatch {
                what: "step",
                expected: space.leaf_count(),
                got: x.len(),
            });
        }
        let i = k + 1;
        if space.atom_values(x, i).is_none() {
            return Err(Error::NotAdapted { time: i });
        }
        let centered = x + (-model.upper_expectation(x));
        let next = &sums[k] + &centered;
        sums.push(next);
    }
    AdaptedProcess::from_leaf_variables(space, 0, &sums)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionalSamplingReport {
    pub kind: ProcessKind,
    /// Smallest `E_S(X_T)(ω) − X_S(ω)` over leaves of positive capacity.
    pub min_slack: f64,
    pub worst_leaf: usize,
    pub holds: bool,
}

/// Checks `X_S <= E_S(X_T)` for a submartingale `X` and stopping times `S <= T`.
pub fn optional_sampling_check(
    model: &CredalModel,
    x: &AdaptedProcess,
    s: &StoppingTime,
    t: &StoppingTime,
) -> Result<OptionalSamplingReport> {
    let space = model.space();
    if let Some(leaf) = (0..space.leaf_count()).find(|&l| s.at(l) > t.at(l)) {
        return Err(Error::StoppingOrder { leaf });
    }
    let class = classify_process(model, x);
    if !class.kind.is_submartingale() {
        return Err(Error::Classification {
            expected: "submartingale",
            class: Box::new(class),
        });
    }
    let xs = x.stopped(space, s)?;
    let xt = x.stopped(space, t)?;
    let rhs = model.conditional_at_stopping(&xt, s);
    let support = model.qs_support();
    let mut min_slack = f64::INFINITY;
    let mut worst_leaf = 0;
    for leaf in (0..space.leaf_count()).filter(|&l| support[l]) {
        let slack = rhs.get(leaf) - xs.get(leaf);
        if slack < min_slack {
            min_slack = slack;
            worst_leaf = leaf;
        }
    }
    Ok(OptionalSamplingReport {
        kind: class.kind,
        min_slack,
        worst_leaf,
        holds: min_slack >= -TOL,
    })
}

/// Registered convex functions for Jensen checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexFn {
    Identity,
    Square,
    Abs,
    PositivePart,
    /// `exp(x)` up to `x = 30`, continued by its tangent line beyond.
    ExpClipped,
    MaxWith(f64),
}

impl ConvexFn {
    pub const EXP_CLIP: f64 = 30.0;

    pub fn battery() -> Vec<ConvexFn> {
        vec![
            ConvexFn::Identity,
            ConvexFn::Square,
            ConvexFn::Abs,
            ConvexFn::PositivePart,
            ConvexFn::ExpClipped,
            ConvexFn::MaxWith(0.5),
            ConvexFn::MaxWith(-1.0),
        ]
    }

    /// Parses `identity`, `square`, `abs`, `pos`, `exp` or `max:<c>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let f = match name {
            "identity" => ConvexFn::Identity,
            "square" => ConvexFn::Square,
            "abs" => ConvexFn::Abs,
            "pos" => ConvexFn::PositivePart,
            "exp" => ConvexFn::ExpClipped,
            other => match other.strip_prefix("max:").map(str::parse::<f64>) {
                Some(Ok(c)) if c.is_finite() => ConvexFn::MaxWith(c),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "'{name}' is not a registered convex function"
                    )))
                }
            },
        };
        Ok(f)
    }

    pub fn name(&self) -> String {
        match self {
            ConvexFn::Identity => "identity".into(),
            ConvexFn::Square => "square".into(),
            ConvexFn::Abs => "abs".into(),
            ConvexFn::PositivePart => "pos".into(),
            ConvexFn::ExpClipped => "exp".into(),
            ConvexFn::MaxWith(c) => format!("max:{c}"),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ConvexFn::Identity => x,
            ConvexFn::Square => x * x,
            ConvexFn::Abs => x.abs(),
            ConvexFn::PositivePart => x.max(0.0),
            ConvexFn::ExpClipped => {
                if x <= Self::EXP_CLIP {
                    x.exp()
                } else {
                    Self::EXP_CLIP.exp() * (1.0 + x - Self::EXP_CLIP)
                }
            }
            ConvexFn::MaxWith(c) => x.max(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JensenReport {
    pub function: String,
    pub t: usize,
    /// `E_t(φ(X)) − φ(E_t(X))` per depth-`t` atom.
    pub slacks: Vec<f64>,
    pub min_slack: f64,
    pub holds: bool,
}

pub fn jensen_transform_check(
    model: &CredalModel,
    x: &RandomVariable,
    t: usize,
    phi: ConvexFn,
) -> Result<JensenReport> {
    let lhs = model.conditional_expectation(&x.map(|v| phi.apply(v)), t)?;
    let inner = model.conditional_expectation(x, t)?;
    let slacks: Vec<f64> = lhs
        .iter()
        .zip(&inner)
        .map(|(a, b)| a - phi.apply(*b))
        .collect();
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    // relative tolerance: φ(X) can be large (exp, squares)
    let holds = slacks
        .iter()
        .zip(&lhs)
        .all(|(s, l)| *s >= -TOL * (1.0 + l.abs()));
    Ok(JensenReport {
        function: phi.name(),
        t,
        slacks,
        min_slack,
        holds,
    })
}
