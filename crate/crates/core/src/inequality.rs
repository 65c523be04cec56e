//! Doob's and Kolmogorov's inequalities as fully evaluated chains.
//!
//! Every term is computed on its own (capacities through the maximizing
//! strategy of the event indicator, moments through backward induction), so
//! equality cases and diagnostic failures stay visible in the report.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::credal::{CredalModel, TOL};
use crate::distribution::{check_independent_of_filtration, TestFunctionBattery};
use crate::error::{Error, Result};
use crate::martingale::{classify_process, partial_sum_process, ProcessKind};
use crate::tree::{AdaptedProcess, Event, RandomVariable};

/// Strategy choices are only embedded in reports for trees up to this size.
pub const WITNESS_NODE_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainTerm {
    pub name: String,
    pub value: f64,
}

/// `lhs <= rhs` between two terms of a chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// Diagnostic bounds are reported but do not enter the verdict.
    pub diagnostic: bool,
}

impl BoundCheck {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        BoundCheck {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            holds: slack >= -TOL,
            diagnostic: false,
        }
    }
}

/// A Θ element attaining a capacity term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyWitness {
    pub term: String,
    /// Probability of the event under the witnessing law.
    pub value: f64,
    /// Kernel index per node, omitted on large trees.
    pub choices: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub inequality: String,
    pub parameter: f64,
    pub terms: Vec<ChainTerm>,
    pub bounds: Vec<BoundCheck>,
    pub verdict: bool,
    pub witnesses: Vec<StrategyWitness>,
    pub fingerprint: String,
    pub notes: Vec<String>,
    pub extras: BTreeMap<String, f64>,
}

impl InequalityReport {
    fn new(name: &str, model: &CredalModel, parameter: f64) -> Self {
        InequalityReport {
            inequality: name.to_string(),
            parameter,
            terms: Vec::new(),
            bounds: Vec::new(),
            verdict: true,
            witnesses: Vec::new(),
            fingerprint: model.fingerprint(),
            notes: Vec::new(),
            extras: BTreeMap::new(),
        }
    }

    fn term(&mut self, name: &str, value: f64) -> f64 {
        self.terms.push(ChainTerm {
            name: name.to_string(),
            value,
        });
        value
    }

    fn bound(&mut self, check: BoundCheck) {
        self.bounds.push(check);
    }

    fn finish(mut self) -> Self {
        self.verdict = self.bounds.iter().all(|b| b.holds || b.diagnostic);
        self
    }

    /// Values of the chain terms in order.
    pub fn values(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.value).collect()
    }

    pub fn term_value(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    pub fn bound_named(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

fn witness(model: &CredalModel, term: &str, event: &Event, upper: bool) -> StrategyWitness {
    let ind = event.indicator();
    let m = if upper {
        model.maximizing_strategy(&ind)
    } else {
        model.minimizing_strategy(&ind)
    };
    let choices = (model.space().node_count() <= WITNESS_NODE_LIMIT).then(|| m.choices().to_vec());
    StrategyWitness {
        term: term.to_string(),
        value: m.probability(event),
        choices,
    }
}

fn check_parameter(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Times `1..=n` of the chain, clipped to the process window.
fn chain_times(x: &AdaptedProcess) -> Result<(usize, usize)> {
    let first = x.start().max(1);
    if x.end() < first {
        return Err(Error::InvalidParameter(
            "the process needs at least one time j >= 1".into(),
        ));
    }
    Ok((first, x.end()))
}

/// Leafwise `fold` of `X_j` over `first..=last`.
fn running(
    model: &CredalModel,
    x: &AdaptedProcess,
    first: usize,
    last: usize,
    init: f64,
    f: impl Fn(f64, f64) -> f64,
) -> RandomVariable {
    let space = model.space();
    let mut acc = vec![init; space.leaf_count()];
    for j in first..=last {
        let xj = x.at_leaves(space, j);
        for (a, v) in acc.iter_mut().zip(xj.values()) {
            *a = f(*a, *v);
        }
    }
    RandomVariable::new(acc).expect("finite process values")
}

fn require_kind(model: &CredalModel, x: &AdaptedProcess, martingale: bool) -> Result<()> {
    let class = classify_process(model, x);
    let ok = if martingale {
        class.kind == ProcessKind::Martingale
    } else {
        class.kind.is_submartingale()
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Classification {
            expected: if martingale { "martingale" } else { "submartingale" },
            class: Box::new(class),
        })
    }
}

/// `λV(A) ≤ E(1_A X_n) ≤ E(X_n⁺) ≤ E(|X_n|)` with `A = {max_j X_j ≥ λ}`.
pub fn doob_submartingale_max(
    model: &CredalModel,
    x: &AdaptedProcess,
    lambda: f64,
) -> Result<InequalityReport> {
    check_parameter("lambda", lambda)?;
    require_kind(model, x, false)?;
    let (first, n) = chain_times(x)?;
    let space = model.space();
    let max = running(model, x, first, n, f64::NEG_INFINITY, f64::max);
    let a = Event::from_predicate(space, |leaf, _| max.get(leaf) >= lambda);
    let xn = x.at_leaves(space, n);

    let mut r = InequalityReport::new("doob-submartingale-max", model, lambda);
    let t0 = r.term("lambda*V(A)", lambda * model.capacity(&a));
    let t1 = r.term("E(1_A X_n)", model.upper_expectation(&xn.restrict(&a)));
    let t2 = r.term("E(X_n+)", model.upper_expectation(&xn.positive_part()));
    let t3 = r.term("E(|X_n|)", model.upper_expectation(&xn.abs()));
    r.bound(BoundCheck::new("lambda*V(A) <= E(1_A X_n)", t0, t1));
    r.bound(BoundCheck::new("E(1_A X_n) <= E(X_n+)", t1, t2));
    r.bound(BoundCheck::new("E(X_n+) <= E(|X_n|)", t2, t3));
    r.witnesses.push(witness(model, "V(A)", &a, true));
    Ok(r.finish())
}

/// `λv(M) ≤ E(X_n) − E(X_1) + E(−1_M X_n) ≤ E(X_n) − E(X_1) + E(X_n⁻)`
/// with `M = {min_j X_j ≤ −λ}`.
pub fn doob_submartingale_min(
    model: &CredalModel,
    x: &AdaptedProcess,
    lambda: f64,
) -> Result<InequalityReport> {
    check_parameter("lambda", lambda)?;
    require_kind(model, x, false)?;
    let (first, n) = chain_times(x)?;
    let space = model.space();
    let min = running(model, x, first, n, f64::INFINITY, f64::min);
    let m = Event::from_predicate(space, |leaf, _| min.get(leaf) <= -lambda);
    let xn = x.at_leaves(space, n);
    let x1 = x.at_leaves(space, first);
    let drift = model.upper_expectation(&xn) - model.upper_expectation(&x1);

    let mut r = InequalityReport::new("doob-submartingale-min", model, lambda);
    let t0 = r.term("lambda*v(M)", lambda * model.lower_capacity(&m));
    let t1 = r.term(
        "E(X_n)-E(X_1)+E(-1_M X_n)",
        drift + model.upper_expectation(&(-&xn).restrict(&m)),
    );
    let t2 = r.term(
        "E(X_n)-E(X_1)+E(X_n-)",
        drift + model.upper_expectation(&xn.negative_part()),
    );
    r.bound(BoundCheck::new("lambda*v(M) <= E(X_n)-E(X_1)+E(-1_M X_n)", t0, t1));
    r.bound(BoundCheck::new("E(-1_M X_n) <= E(X_n-)", t1, t2));
    r.extras.insert("E(X_n)-E(X_1)".into(), drift);
    r.witnesses.push(witness(model, "v(M)", &m, false));
    Ok(r.finish())
}

/// Both chains of the martingale corollary, `A = {max_j |X_j| ≥ λ}`:
/// `V(A) ≤ E(1_A|X_n|)/λ ≤ E|X_n|/λ` and `V(A) ≤ E(X_n²)/λ²`.
pub fn doob_martingale(model: &CredalModel, x: &AdaptedProcess, lambda: f64) -> Result<InequalityReport> {
    check_parameter("lambda", lambda)?;
    require_kind(model, x, true)?;
    let (first, n) = chain_times(x)?;
    let space = model.space();
    let max = running(model, x, first, n, 0.0, |a, v| a.max(v.abs()));
    let a = Event::from_predicate(space, |leaf, _| max.get(leaf) >= lambda);
    let xn = x.at_leaves(space, n);

    let mut r = InequalityReport::new("doob-martingale", model, lambda);
    let v = r.term("V(A)", model.capacity(&a));
    let t1 = r.term("E(1_A|X_n|)/lambda", model.upper_expectation(&xn.abs().restrict(&a)) / lambda);
    let t2 = r.term("E(|X_n|)/lambda", model.upper_expectation(&xn.abs()) / lambda);
    let t3 = r.term(
        "E(X_n^2)/lambda^2",
        model.upper_expectation(&(&xn * &xn)) / (lambda * lambda),
    );
    r.bound(BoundCheck::new("(i) V(A) <= E(1_A|X_n|)/lambda", v, t1));
    r.bound(BoundCheck::new("(i) E(1_A|X_n|)/lambda <= E(|X_n|)/lambda", t1, t2));
    r.bound(BoundCheck::new("(ii) V(A) <= E(X_n^2)/lambda^2", v, t3));
    r.witnesses.push(witness(model, "V(A)", &a, true));
    Ok(r.finish())
}

/// Kolmogorov's inequality for centred partial sums `S_j = Σ (X_i − E(X_i))`:
/// `V(max|S_j| ≥ ε) ≤ E(S_n²)/ε² ≤ Σ E(X̄_i²)/ε²`.
///
/// Each `X_i` must pass the battery test of independence from `F_{i−1}`.
/// The second bound is only enforced when every step is mean-certain;
/// otherwise it is labelled diagnostic.
pub fn kolmogorov_inequality(
    model: &CredalModel,
    steps: &[RandomVariable],
    epsilon: f64,
    battery: Option<&TestFunctionBattery>,
) -> Result<InequalityReport> {
    check_parameter("epsilon", epsilon)?;
    if steps.is_empty() {
        return Err(Error::Empty("steps"));
    }
    let space = model.space();
    let sums = partial_sum_process(model, steps)?;
    for (k, x) in steps.iter().enumerate().skip(1) {
        let default;
        let battery = match battery {
            Some(b) => b,
            None => {
                default = TestFunctionBattery::for_values(1, x.values());
                &default
            }
        };
        let report = check_independent_of_filtration(model, x, k, battery)?;
        if !report.pass {
            let reason = match report.events.iter().find(|e| e.witness.is_some()) {
                Some(e) => format!(
                    "event {} fails on {}",
                    e.event,
                    e.witness.as_deref().unwrap_or("?")
                ),
                None => format!(
                    "E_{k}(X) deviates from E(X) by {:.3e}",
                    report.max_deviation
                ),
            };
            return Err(Error::NotIndependent { step: k + 1, reason });
        }
    }

    let n = steps.len();
    let means: Vec<(f64, f64)> = steps
        .iter()
        .map(|x| (model.upper_expectation(x), -model.upper_expectation(&-x)))
        .collect();
    let mean_certain = means.iter().all(|(u, l)| (u - l).abs() <= TOL);
    let centred: Vec<RandomVariable> = steps
        .iter()
        .zip(&means)
        .map(|(x, (u, _))| x + (-u))
        .collect();

    let max = running(model, &sums, 1, n, 0.0, |a, v| a.max(v.abs()));
    let a = Event::from_predicate(space, |leaf, _| max.get(leaf) >= epsilon);
    let sn = sums.at_leaves(space, n);
    let e_sn2 = model.upper_expectation(&(&sn * &sn));
    let var_sum: f64 = centred.iter().map(|x| model.upper_expectation(&(x * x))).sum();
    let eps2 = epsilon * epsilon;

    let mut r = InequalityReport::new("kolmogorov", model, epsilon);
    let t0 = r.term("V(max|S_j| >= eps)", model.capacity(&a));
    let t1 = r.term("E(S_n^2)/eps^2", e_sn2 / eps2);
    let t2 = r.term("sum E(Xbar_i^2)/eps^2", var_sum / eps2);
    r.bound(BoundCheck::new("bound-1", t0, t1));
    let mut b2 = BoundCheck::new("bound-2", t1, t2);
    b2.diagnostic = !mean_certain;
    r.bound(b2);
    r.witnesses.push(witness(model, "V(max|S_j| >= eps)", &a, true));

    r.extras.insert("E(S_n^2)".into(), e_sn2);
    r.extras.insert("sum E(Xbar_i^2)".into(), var_sum);
    r.extras.insert("mean_certain".into(), if mean_certain { 1.0 } else { 0.0 });
    for i in 0..n {
        for j in i + 1..n {
            let prod = &centred[i] * &centred[j];
            r.extras.insert(
                format!("E(Xbar_{}*Xbar_{})", i + 1, j + 1),
                model.upper_expectation(&prod),
            );
            r.extras.insert(
                format!("E(-Xbar_{}*Xbar_{})", i + 1, j + 1),
                model.upper_expectation(&-&prod),
            );
        }
    }
    if !mean_certain {
        r.notes.push(
            "mean-uncertain steps: bound-2 is reported as a diagnostic only".into(),
        );
    }
    Ok(r.finish())
}
