//! Peng independence, identical distribution, IID construction and the
//! event-approximation bound for finite credal sets.
//!
//! Independence is only certified relative to a finite battery of test
//! functions; every report carries the battery version and says so.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::credal::{CredalKernel, CredalModel, TOL};
use crate::error::{Error, Result};
use crate::tree::{Event, RandomVariable, TreeSpace};

/// Version tag of the built-in battery. Bump when terms are added.
pub const BATTERY_VERSION: &str = "battery-v1";

/// What the independence reports certify.
pub const BATTERY_SCOPE: &str = "battery-relative";

/// Largest indicator grid taken from attained values.
pub const MAX_GRID: usize = 8;

/// Common one-step law of an IID sequence: outcomes plus a kernel list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTemplate {
    outcomes: Vec<f64>,
    kernels: Vec<Vec<f64>>,
}

impl StepTemplate {
    pub fn new(outcomes: Vec<f64>, kernels: Vec<Vec<f64>>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Empty("outcomes"));
        }
        if let Some(i) = outcomes.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        // single-step space validates the kernels with the usual messages
        let space = TreeSpace::product(1, outcomes.len(), &outcomes)?;
        CredalKernel::uniform(&space, &kernels)?;
        Ok(StepTemplate { outcomes, kernels })
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn kernels(&self) -> &[Vec<f64>] {
        &self.kernels
    }

    pub fn arity(&self) -> usize {
        self.outcomes.len()
    }

    /// `E[f(X)]` for one step: the best kernel.
    pub fn upper(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.kernels
            .iter()
            .map(|p| p.iter().zip(&self.outcomes).map(|(q, &x)| q * f(x)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `-E[-f(X)]`.
    pub fn lower(&self, f: impl Fn(f64) -> f64) -> f64 {
        -self.upper(|x| -f(x))
    }

    pub fn upper_mean(&self) -> f64 {
        self.upper(|x| x)
    }

    pub fn lower_mean(&self) -> f64 {
        self.lower(|x| x)
    }

    pub fn is_mean_certain(&self, tol: f64) -> bool {
        (self.upper_mean() - self.lower_mean()).abs() <= tol
    }

    /// True when every kernel puts all mass on one value.
    pub fn is_degenerate(&self) -> bool {
        self.kernels.iter().all(|p| {
            let support: Vec<f64> = p
                .iter()
                .zip(&self.outcomes)
                .filter(|(q, _)| **q > 0.0)
                .map(|(_, &x)| x)
                .collect();
            support.windows(2).all(|w| w[0] == w[1])
        }) && {
            let m: Vec<f64> = self
                .kernels
                .iter()
                .map(|p| p.iter().zip(&self.outcomes).map(|(q, x)| q * x).sum())
                .collect();
            m.windows(2).all(|w| (w[0] - w[1]).abs() <= TOL)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.outcomes.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// A product model stamped from a template, with its step variables.
#[derive(Debug, Clone)]
pub struct IidModel {
    pub model: CredalModel,
    /// `steps[i]` is `X_{i+1}`.
    pub steps: Vec<RandomVariable>,
}

pub fn build_iid_model(template: &StepTemplate, n_steps: usize) -> Result<IidModel> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("an IID model needs at least one step".into()));
    }
    let space = TreeSpace::product(n_steps, template.arity(), &template.outcomes)?;
    let kernel = CredalKernel::uniform(&space, &template.kernels)?;
    let model = CredalModel::new(space, kernel)?;
    let steps = (1..=n_steps)
        .map(|i| model.space().step_variable(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(IidModel { model, steps })
}

/// One-argument test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SingleFn {
    Identity,
    Neg,
    Square,
    Cube,
    Abs,
    Pos,
    NegPart,
    IndicatorLe(f64),
    IndicatorGe(f64),
    /// `min(x, c)`
    ClipAbove(f64),
}

impl SingleFn {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            SingleFn::Identity => x,
            SingleFn::Neg => -x,
            SingleFn::Square => x * x,
            SingleFn::Cube => x * x * x,
            SingleFn::Abs => x.abs(),
            SingleFn::Pos => x.max(0.0),
            SingleFn::NegPart => (-x).max(0.0),
            SingleFn::IndicatorLe(c) => f64::from(u8::from(x <= c)),
            SingleFn::IndicatorGe(c) => f64::from(u8::from(x >= c)),
            SingleFn::ClipAbove(c) => x.min(c),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            SingleFn::Identity => "x".into(),
            SingleFn::Neg => "-x".into(),
            SingleFn::Square => "x^2".into(),
            SingleFn::Cube => "x^3".into(),
            SingleFn::Abs => "|x|".into(),
            SingleFn::Pos => "x+".into(),
            SingleFn::NegPart => "x-".into(),
            SingleFn::IndicatorLe(c) => format!("1{{x<={c}}}"),
            SingleFn::IndicatorGe(c) => format!("1{{x>={c}}}"),
            SingleFn::ClipAbove(c) => format!("min(x,{c})"),
        }
    }
}

/// Which scalar of the vector argument `x` a pair term looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feature {
    Coord(usize),
    Sum,
}

impl Feature {
    fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Feature::Coord(j) => x[j],
            Feature::Sum => x.iter().sum(),
        }
    }

    fn name(&self, arity: usize) -> String {
        match *self {
            Feature::Coord(_) if arity == 1 => "x".into(),
            Feature::Coord(j) => format!("x{}", j + 1),
            Feature::Sum => "sum(x)".into(),
        }
    }
}

/// Two-argument shapes `ψ(f, y)` where `f` is a feature of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PairFn {
    Product,
    NegProduct,
    ProductYSquared,
    ProductXSquared,
    PosTimesY,
    NegPartTimesY,
    SumSquared,
    DiffSquared,
    SumCubed,
    AbsSum,
    Max,
    IndicatorTimesY(f64),
    IndicatorTimesNegY(f64),
}

impl PairFn {
    pub fn apply(&self, f: f64, y: f64) -> f64 {
        match *self {
            PairFn::Product => f * y,
            PairFn::NegProduct => -f * y,
            PairFn::ProductYSquared => f * y * y,
            PairFn::ProductXSquared => f * f * y,
            PairFn::PosTimesY => f.max(0.0) * y,
            PairFn::NegPartTimesY => (-f).max(0.0) * y,
            PairFn::SumSquared => (f + y) * (f + y),
            PairFn::DiffSquared => (f - y) * (f - y),
            PairFn::SumCubed => (f + y).powi(3),
            PairFn::AbsSum => (f + y).abs(),
            PairFn::Max => f.max(y),
            PairFn::IndicatorTimesY(c) => if f <= c { y } else { 0.0 },
            PairFn::IndicatorTimesNegY(c) => if f <= c { -y } else { 0.0 },
        }
    }

    fn name(&self, f: &str) -> String {
        match *self {
            PairFn::Product => format!("{f}*y"),
            PairFn::NegProduct => format!("-{f}*y"),
            PairFn::ProductYSquared => format!("{f}*y^2"),
            PairFn::ProductXSquared => format!("{f}^2*y"),
            PairFn::PosTimesY => format!("{f}+*y"),
            PairFn::NegPartTimesY => format!("{f}-*y"),
            PairFn::SumSquared => format!("({f}+y)^2"),
            PairFn::DiffSquared => format!("({f}-y)^2"),
            PairFn::SumCubed => format!("({f}+y)^3"),
            PairFn::AbsSum => format!("|{f}+y|"),
            PairFn::Max => format!("max({f},y)"),
            PairFn::IndicatorTimesY(c) => format!("1{{{f}<={c}}}*y"),
            PairFn::IndicatorTimesNegY(c) => format!("-1{{{f}<={c}}}*y"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub feature: Feature,
    pub shape: PairFn,
}

impl PairTerm {
    pub fn apply(&self, x: &[f64], y: f64) -> f64 {
        self.shape.apply(self.feature.eval(x), y)
    }

    pub fn name(&self, arity: usize) -> String {
        self.shape.name(&self.feature.name(arity))
    }
}

/// A finite, versioned list of test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionBattery {
    pub version: String,
    pub single: Vec<SingleFn>,
    pub pair: Vec<PairTerm>,
}

impl TestFunctionBattery {
    pub fn empty() -> Self {
        TestFunctionBattery {
            version: BATTERY_VERSION.into(),
            single: Vec::new(),
            pair: Vec::new(),
        }
    }

    /// The standard battery for `x` of the given arity, with indicator
    /// thresholds at `grid`. Product terms come first, `x*y` leading.
    pub fn standard(arity: usize, grid: &[f64]) -> Self {
        let mut single = vec![
            SingleFn::Identity,
            SingleFn::Neg,
            SingleFn::Square,
            SingleFn::Cube,
            SingleFn::Abs,
            SingleFn::Pos,
            SingleFn::NegPart,
        ];
        for &g in grid {
            single.push(SingleFn::IndicatorLe(g));
            single.push(SingleFn::IndicatorGe(g));
            single.push(SingleFn::ClipAbove(g));
        }

        let mut features: Vec<Feature> = (0..arity.max(1)).map(Feature::Coord).collect();
        if arity > 1 {
            features.push(Feature::Sum);
        }
        let shapes = [
            PairFn::Product,
            PairFn::NegProduct,
            PairFn::ProductYSquared,
            PairFn::ProductXSquared,
            PairFn::PosTimesY,
            PairFn::NegPartTimesY,
            PairFn::SumSquared,
            PairFn::DiffSquared,
            PairFn::SumCubed,
            PairFn::AbsSum,
            PairFn::Max,
        ];
        let mut pair = Vec::new();
        for shape in shapes {
            for &feature in &features {
                pair.push(PairTerm { feature, shape });
            }
        }
        for &g in grid {
            for &feature in &features {
                pair.push(PairTerm { feature, shape: PairFn::IndicatorTimesY(g) });
                pair.push(PairTerm { feature, shape: PairFn::IndicatorTimesNegY(g) });
            }
        }
        TestFunctionBattery {
            version: BATTERY_VERSION.into(),
            single,
            pair,
        }
    }

    /// Standard battery with the indicator grid read off attained values.
    pub fn for_values(arity: usize, values: &[f64]) -> Self {
        Self::standard(arity, &value_grid(values, MAX_GRID))
    }
}

/// Sorted distinct values, thinned to at most `max` evenly spaced ones.
pub fn value_grid(values: &[f64], max: usize) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| x + 0.0).filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() <= max || max == 0 {
        return v;
    }
    (0..max)
        .map(|i| v[i * (v.len() - 1) / (max - 1).max(1)])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiEntry {
    pub phi: String,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
}

/// Outcome of a battery comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryReport {
    pub battery_version: String,
    pub scope: &'static str,
    pub entries: Vec<PhiEntry>,
    pub max_discrepancy: f64,
    /// First failing test function in battery order.
    pub witness: Option<String>,
    pub pass: bool,
}

impl BatteryReport {
    fn from_entries(version: &str, entries: Vec<PhiEntry>) -> Self {
        let max_discrepancy = entries.iter().fold(0.0, |m, e| f64::max(m, e.discrepancy));
        let witness = entries
            .iter()
            .find(|e| !(e.discrepancy <= TOL))
            .map(|e| e.phi.clone());
        BatteryReport {
            battery_version: version.to_string(),
            scope: BATTERY_SCOPE,
            pass: witness.is_none(),
            entries,
            max_discrepancy,
            witness,
        }
    }
}

/// Leaves grouped by the value of the vector `x`.
fn group_by_value(xs: &[RandomVariable], leaves: usize) -> Vec<(Vec<f64>, Vec<usize>)> {
    let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for leaf in 0..leaves {
        let point: Vec<f64> = xs.iter().map(|x| x.get(leaf) + 0.0).collect();
        let key: Vec<u64> = point.iter().map(|v| v.to_bits()).collect();
        let g = *index.entry(key).or_insert_with(|| {
            groups.push((point, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(leaf);
    }
    groups
}

fn check_lengths(model: &CredalModel, x: &RandomVariable) -> Result<()> {
    let n = model.space().leaf_count();
    if x.len() != n {
        return Err(Error::LengthMismatch {
            what: "random variable",
            expected: n,
            got: x.len(),
        });
    }
    Ok(())
}

/// Compare `E[φ(X,Y)]` with `E[φ̄(X)]`, `φ̄(x) = E[φ(x,Y)]`, for every pair
/// term of the battery.
///
/// `φ̄` is evaluated under the unconditional expectation, so the check
/// detects dependence of `Y`'s law on the value of `X`.
pub fn check_independence(
    model: &CredalModel,
    xs: &[RandomVariable],
    y: &RandomVariable,
    battery: &TestFunctionBattery,
) -> Result<BatteryReport> {
    if battery.pair.is_empty() {
        return Err(Error::Empty("battery"));
    }
    if xs.is_empty() {
        return Err(Error::Empty("X"));
    }
    for x in xs {
        check_lengths(model, x)?;
    }
    check_lengths(model, y)?;
    let leaves = model.space().leaf_count();
    let groups = group_by_value(xs, leaves);
    let arity = xs.len();
    let yv = y.values();

    let entries: Vec<PhiEntry> = battery
        .pair
        .par_iter()
        .map(|term| {
            let joint = RandomVariable::from_fn(model.space(), |leaf, _| {
                let point: Vec<f64> = xs.iter().map(|x| x.get(leaf)).collect();
                term.apply(&point, yv[leaf])
            });
            let lhs = model.upper_expectation(&joint);
            let mut bar = vec![0.0; leaves];
            for (point, members) in &groups {
                let fixed = RandomVariable::from_fn(model.space(), |leaf, _| term.apply(point, yv[leaf]));
                let v = model.upper_expectation(&fixed);
                for &leaf in members {
                    bar[leaf] = v;
                }
            }
            let rhs = model.upper_expectation(&RandomVariable::from_fn(model.space(), |l, _| bar[l]));
            PhiEntry {
                phi: term.name(arity),
                lhs,
                rhs,
                discrepancy: (lhs - rhs).abs(),
            }
        })
        .collect();
    Ok(BatteryReport::from_entries(&battery.version, entries))
}

/// Compare `E[φ(X)]` on one model with `E[φ(Y)]` on another.
pub fn check_identical(
    model_a: &CredalModel,
    x: &RandomVariable,
    model_b: &CredalModel,
    y: &RandomVariable,
    battery: &TestFunctionBattery,
) -> Result<BatteryReport> {
    if battery.single.is_empty() {
        return Err(Error::Empty("battery"));
    }
    check_lengths(model_a, x)?;
    check_lengths(model_b, y)?;
    let entries = battery
        .single
        .par_iter()
        .map(|phi| {
            let lhs = model_a.upper_expectation(&x.map(|v| phi.apply(v)));
            let rhs = model_b.upper_expectation(&y.map(|v| phi.apply(v)));
            PhiEntry {
                phi: phi.name(),
                lhs,
                rhs,
                discrepancy: (lhs - rhs).abs(),
            }
        })
        .collect();
    Ok(BatteryReport::from_entries(&battery.version, entries))
}

/// Battery result for one `F_n` event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventCheck {
    pub event: String,
    pub max_discrepancy: f64,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomValue {
    pub atom: String,
    pub capacity: f64,
    pub conditional: f64,
}

/// Independence of `X` from `F_n`: the definition through indicator pairs,
/// and the consequence `E_n(X) = E(X)` on charged atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiltrationReport {
    pub n: usize,
    pub battery_version: String,
    pub scope: &'static str,
    pub events: Vec<EventCheck>,
    pub definition_pass: bool,
    pub expectation: f64,
    pub atoms: Vec<AtomValue>,
    pub max_deviation: f64,
    pub lemma_pass: bool,
    pub pass: bool,
}

/// Atoms used singly, and the number whose pairwise unions are also tested.
const FILTRATION_ATOMS: usize = 16;
const FILTRATION_PAIR_ATOMS: usize = 8;

pub fn check_independent_of_filtration(
    model: &CredalModel,
    x: &RandomVariable,
    n: usize,
    battery: &TestFunctionBattery,
) -> Result<FiltrationReport> {
    let space = model.space();
    if n >= space.depth() {
        return Err(Error::InvalidParameter(format!(
            "filtration index {n} must be below the depth {}",
            space.depth()
        )));
    }
    check_lengths(model, x)?;

    let level: Vec<usize> = space.level(n).collect();
    let mut events: Vec<(String, Event)> = Vec::new();
    for &a in level.iter().take(FILTRATION_ATOMS) {
        events.push((space.label(a), Event::from_nodes(space, &[a])));
    }
    let k = level.len().min(FILTRATION_PAIR_ATOMS);
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = (level[i], level[j]);
            events.push((
                format!("{}|{}", space.label(a), space.label(b)),
                Event::from_nodes(space, &[a, b]),
            ));
        }
    }

    let mut checks = Vec::with_capacity(events.len());
    for (name, event) in &events {
        let r = check_independence(model, &[event.indicator()], x, battery)?;
        checks.push(EventCheck {
            event: name.clone(),
            max_discrepancy: r.max_discrepancy,
            witness: r.witness,
        });
    }
    let definition_pass = checks.iter().all(|c| c.witness.is_none());

    let expectation = model.upper_expectation(x);
    let cond = model.conditional_expectation(x, n)?;
    let mut atoms = Vec::with_capacity(level.len());
    let mut max_deviation: f64 = 0.0;
    for (i, &a) in level.iter().enumerate() {
        let capacity = model.capacity(&Event::from_nodes(space, &[a]));
        if capacity > 0.0 {
            max_deviation = max_deviation.max((cond[i] - expectation).abs());
        }
        atoms.push(AtomValue {
            atom: space.label(a),
            capacity,
            conditional: cond[i],
        });
    }
    let lemma_pass = max_deviation <= TOL;
    Ok(FiltrationReport {
        n,
        battery_version: battery.version.clone(),
        scope: BATTERY_SCOPE,
        events: checks,
        definition_pass,
        expectation,
        atoms,
        max_deviation,
        lemma_pass,
        pass: definition_pass && lemma_pass,
    })
}

/// `μ = Σ_θ P_θ` over all pure strategies, per leaf, in closed form.
///
/// Summing the path product over every choice vector factorises: nodes off
/// the path contribute their kernel count, nodes on it the column sum of
/// the chosen child, so `μ(leaf) = N · Π (Σ_k p_k(edge)) / K_node`.
pub fn strategy_sum_measure(model: &CredalModel) -> Result<Vec<f64>> {
    let space = model.space();
    let mut total = 1.0f64;
    for node in 0..space.node_count() {
        if !space.is_leaf(node) {
            total *= model.kernels_at(node).len() as f64;
        }
    }
    if !total.is_finite() {
        return Err(Error::TooManyStrategies {
            count: u128::MAX,
            limit: u128::MAX,
        });
    }
    let mut weight = vec![0.0; space.node_count()];
    weight[0] = total;
    for node in 0..space.node_count() {
        if space.is_leaf(node) {
            continue;
        }
        let kernels = model.kernels_at(node);
        let k = kernels.len() as f64;
        for (i, c) in space.children(node).enumerate() {
            let col: f64 = kernels.iter().map(|p| p[i]).sum();
            weight[c] = weight[node] * col / k;
        }
    }
    Ok(space.level(space.depth()).map(|n| weight[n]).collect())
}

/// The approximating event of the bound `V(B_n △ B) ≤ μ(B_n △ B)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventApproximation {
    pub n: usize,
    #[serde(skip)]
    pub approximation: Event,
    pub atoms_taken: Vec<String>,
    /// `V(B_n △ B)`
    pub capacity_error: f64,
    /// `μ(B_n △ B)`, unnormalised
    pub mu_error: f64,
    /// `μ(Ω)`, the number of pure strategies
    pub mu_total: f64,
    pub bound_holds: bool,
}

pub fn approximate_event(model: &CredalModel, b: &Event, n: usize) -> Result<EventApproximation> {
    let space = model.space();
    if b.members().len() != space.leaf_count() {
        return Err(Error::LengthMismatch {
            what: "event",
            expected: space.leaf_count(),
            got: b.members().len(),
        });
    }
    if n > space.depth() {
        return Err(Error::InvalidParameter(format!(
            "approximation level {n} exceeds the depth {}",
            space.depth()
        )));
    }
    let mu = strategy_sum_measure(model)?;
    let mut nodes = Vec::new();
    let mut taken = Vec::new();
    for a in space.level(n) {
        let (mut inside, mut outside) = (0.0, 0.0);
        for leaf in space.leaf_span(a) {
            if b.contains(leaf) {
                inside += mu[leaf];
            } else {
                outside += mu[leaf];
            }
        }
        // a B-atom with zero μ-mass is still taken, so B ∈ F_n gives B_n = B
        let whole = outside == 0.0 && space.leaf_span(a).any(|l| b.contains(l));
        if inside > outside || whole {
            nodes.push(a);
            taken.push(space.label(a));
        }
    }
    let approx = Event::from_nodes(space, &nodes);
    let diff = approx.symmetric_difference(space, b);
    let capacity_error = model.capacity(&diff);
    let mu_error: f64 = (0..space.leaf_count())
        .filter(|&l| diff.contains(l))
        .map(|l| mu[l])
        .sum();
    Ok(EventApproximation {
        n,
        approximation: approx,
        atoms_taken: taken,
        capacity_error,
        mu_error,
        mu_total: mu.iter().sum(),
        bound_holds: capacity_error <= mu_error + TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m4() -> IidModel {
        let t = StepTemplate::new(vec![1.0, -1.0], vec![vec![0.4, 0.6], vec![0.6, 0.4]]).unwrap();
        build_iid_model(&t, 2).unwrap()
    }

    fn m3() -> IidModel {
        let t = StepTemplate::new(
            vec![-1.0, 0.0, 1.0],
            vec![vec![0.25, 0.5, 0.25], vec![0.5, 0.0, 0.5]],
        )
        .unwrap();
        build_iid_model(&t, 2).unwrap()
    }

    fn m2() -> CredalModel {
        CredalModel::uniform(2, &[1.0, 0.0], &[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap()
    }

    fn history_dependent() -> CredalModel {
        let space = TreeSpace::product(2, 2, &[1.0, 0.0]).unwrap();
        let kernel = CredalKernel::from_fn(&space, |node| match node {
            0 => vec![vec![0.5, 0.5]],
            1 => vec![vec![0.3, 0.7]],
            _ => vec![vec![0.6, 0.4]],
        })
        .unwrap();
        CredalModel::new(space, kernel).unwrap()
    }

    #[test]
    fn iid_construction_matches_direct_models() {
        let direct = CredalModel::uniform(2, &[1.0, -1.0], &[vec![0.4, 0.6], vec![0.6, 0.4]]).unwrap();
        assert_eq!(m4().model.fingerprint(), direct.fingerprint());
        let iid = m3();
        assert_eq!(iid.steps.len(), 2);
        assert_eq!(iid.steps[1].values(), &[-1.0, 0.0, 1.0, -1.0, 0.0, 1.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn single_step_model() {
        let t = StepTemplate::new(vec![1.0, 0.0], vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let iid = build_iid_model(&t, 1).unwrap();
        assert!((iid.model.upper_expectation(&iid.steps[0]) - 0.6).abs() < 1e-12);
        assert!((t.upper_mean() - 0.6).abs() < 1e-12);
        assert!((t.lower_mean() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn template_validation() {
        assert!(StepTemplate::new(vec![], vec![]).is_err());
        assert!(StepTemplate::new(vec![1.0, 0.0], vec![vec![0.5]]).is_err());
        assert!(StepTemplate::new(vec![1.0, 0.0], vec![vec![0.5, 0.6]]).is_err());
        assert!(build_iid_model(&StepTemplate::new(vec![0.0, 1.0], vec![vec![0.5, 0.5]]).unwrap(), 30).is_err());
    }

    #[test]
    fn iid_steps_are_independent() {
        let iid = m3();
        let battery = TestFunctionBattery::for_values(1, &[-1.0, 0.0, 1.0]);
        let r = check_independence(&iid.model, &iid.steps[..1], &iid.steps[1], &battery).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.scope, "battery-relative");
        assert!(r.max_discrepancy <= 1e-12);
    }

    #[test]
    fn history_dependence_is_caught_by_product() {
        let model = history_dependent();
        let x1 = model.space().step_variable(1).unwrap();
        let x2 = model.space().step_variable(2).unwrap();
        let battery = TestFunctionBattery::for_values(1, &[0.0, 1.0]);
        let r = check_independence(&model, &[x1], &x2, &battery).unwrap();
        assert!(!r.pass);
        assert_eq!(r.witness.as_deref(), Some("x*y"));
        let first = &r.entries[0];
        assert!((first.lhs - 0.15).abs() < 1e-12);
        assert!((first.rhs - 0.225).abs() < 1e-12);
    }

    #[test]
    fn constant_is_independent() {
        let iid = m4();
        let c = RandomVariable::constant(iid.model.space(), 2.5);
        let battery = TestFunctionBattery::for_values(1, &[1.0, -1.0]);
        assert!(check_independence(&iid.model, &iid.steps[..1], &c, &battery).unwrap().pass);
        assert_eq!(
            check_independence(&iid.model, &iid.steps[..1], &c, &TestFunctionBattery::empty()),
            Err(Error::Empty("battery"))
        );
    }

    #[test]
    fn identical_distribution() {
        let iid = m4();
        let battery = TestFunctionBattery::for_values(1, &[1.0, -1.0]);
        let r = check_identical(&iid.model, &iid.steps[0], &iid.model, &iid.steps[1], &battery).unwrap();
        assert!(r.pass);

        let fair = build_iid_model(&StepTemplate::new(vec![1.0, -1.0], vec![vec![0.5, 0.5]]).unwrap(), 1).unwrap();
        let r = check_identical(&iid.model, &iid.steps[0], &fair.model, &fair.steps[0], &battery).unwrap();
        assert!(!r.pass);
        assert_eq!(r.witness.as_deref(), Some("x"));
        assert!((r.entries[0].lhs - 0.2).abs() < 1e-12);
        assert!(r.entries[0].rhs.abs() < 1e-12);
    }

    #[test]
    fn filtration_independence() {
        let iid = m4();
        let battery = TestFunctionBattery::for_values(1, &[1.0, -1.0]);
        let r = check_independent_of_filtration(&iid.model, &iid.steps[1], 1, &battery).unwrap();
        assert!(r.pass, "{r:?}");

        // centred product against F_1: E_1 is 0 on H and 0.48 on T
        let xbar: Vec<RandomVariable> = iid.steps.iter().map(|x| x.map(|v| v - 0.2)).collect();
        let prod = &xbar[0] * &xbar[1];
        let r = check_independent_of_filtration(&iid.model, &prod, 1, &battery).unwrap();
        assert!(!r.lemma_pass);
        assert!(r.atoms[0].conditional.abs() < 1e-12);
        assert!((r.atoms[1].conditional - 0.48).abs() < 1e-12);

        let c = RandomVariable::constant(iid.model.space(), 1.0);
        assert!(check_independent_of_filtration(&iid.model, &c, 1, &battery).unwrap().pass);
        assert!(check_independent_of_filtration(&iid.model, &c, 2, &battery).is_err());
    }

    #[test]
    fn strategy_sum_matches_enumeration() {
        for model in [m2(), m3().model, history_dependent()] {
            let closed = strategy_sum_measure(&model).unwrap();
            let mut brute = vec![0.0; model.space().leaf_count()];
            for m in model.enumerate_measures().unwrap() {
                for (b, p) in brute.iter_mut().zip(m.leaf_probs()) {
                    *b += p;
                }
            }
            for (a, b) in closed.iter().zip(&brute) {
                assert!((a - b).abs() < 1e-9, "{closed:?} vs {brute:?}");
            }
        }
    }

    #[test]
    fn approximation_on_m2() {
        let model = m2();
        let space = model.space();
        let b = Event::from_leaves(space, &[0]).unwrap();
        let r = approximate_event(&model, &b, 1).unwrap();
        assert!(r.approximation.is_empty());
        assert!((r.capacity_error - 0.36).abs() < 1e-12);
        assert!((r.mu_error - 1.62).abs() < 1e-12);
        assert!((r.mu_total - 8.0).abs() < 1e-12);
        assert!(r.bound_holds);

        // B already in F_1, and Ω
        let h = Event::from_leaves(space, &[0, 1]).unwrap();
        let r = approximate_event(&model, &h, 1).unwrap();
        assert_eq!(r.approximation, h);
        assert_eq!((r.capacity_error, r.mu_error), (0.0, 0.0));
        let all = Event::full(space);
        for n in 0..=2 {
            let r = approximate_event(&model, &all, n).unwrap();
            assert_eq!(r.approximation.len(), 4);
            assert_eq!(r.capacity_error, 0.0);
        }
    }

    #[test]
    fn grid_thinning() {
        assert_eq!(value_grid(&[3.0, 1.0, 1.0, -0.0, 0.0], 8), vec![0.0, 1.0, 3.0]);
        let many: Vec<f64> = (0..100).map(f64::from).collect();
        let g = value_grid(&many, 8);
        assert_eq!(g.len(), 8);
        assert_eq!((g[0], g[7]), (0.0, 99.0));
    }
}
