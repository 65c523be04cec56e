//! Seminorms, uniform integrability, the `L_b^p` tail test and dominated
//! convergence on finite models.
//!
//! On a fixed finite model every variable is in `L_b^p` and every finite
//! family is uniformly integrable, so the functions here return the full
//! curves and profiles; failures only show up when a family is tracked
//! across a sequence of growing models.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::credal::{CredalModel, TOL};
use crate::error::{Error, Result};
use crate::tree::{Event, RandomVariable};

/// ε values of the ε–δ table.
pub const EPSILONS: [f64; 2] = [0.1, 0.01];

/// Largest level whose atoms generate the ε–δ events.
pub const TABLE_MAX_ATOMS: usize = 16;

/// Events in the table are unions of at most this many atoms.
pub const TABLE_MAX_UNION: usize = 3;

/// Integer thresholds of a tail profile before the grid turns geometric.
pub const PROFILE_LINEAR_LIMIT: u64 = 4096;

/// Exponent of a seminorm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!("exponent must be >= 1, got {p}")))
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad exponent {t:?}")))?;
                Exponent::new(p)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

/// `‖X‖_p = E(|X|^p)^{1/p}`; for `p = ∞` the largest `|X|` on the
/// quasi-sure support.
pub fn seminorm(model: &CredalModel, x: &RandomVariable, p: Exponent) -> f64 {
    match p {
        Exponent::Finite(p) => {
            let a = x.abs();
            let e = if p == 1.0 {
                model.upper_expectation(&a)
            } else {
                model.upper_expectation(&a.powf(p))
            };
            e.max(0.0).powf(1.0 / p)
        }
        Exponent::Infinity => model
            .qs_support()
            .iter()
            .zip(x.values())
            .filter(|(s, _)| **s)
            .fold(0.0, |m, (_, v)| m.max(v.abs())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub cutoff: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonDelta {
    pub epsilon: f64,
    /// Largest tabulated capacity below which every event passes.
    pub delta: f64,
    pub events_checked: usize,
    /// Event of least capacity with `sup E(1_A|X|) >= ε`.
    pub worst_event: Option<String>,
    pub pass: bool,
}

/// Uniform-integrability certificate for a finite family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UiReport {
    pub family_size: usize,
    /// `c ↦ sup_X E(|X| 1_{|X|>=c})` on the attained values, then 0 beyond.
    pub curve: Vec<CurvePoint>,
    /// `sup_X E|X|`
    pub bound: f64,
    pub table: Vec<EpsilonDelta>,
    pub curve_nonincreasing: bool,
    pub uniformly_integrable: bool,
}

impl UiReport {
    /// Curve value at an arbitrary cutoff (step function, right-continuous in c).
    pub fn curve_at(&self, c: f64) -> f64 {
        self.curve
            .iter()
            .find(|p| p.cutoff >= c)
            .map_or(0.0, |p| p.value)
    }
}

fn tail_sup(model: &CredalModel, family: &[RandomVariable], c: f64) -> f64 {
    family
        .par_iter()
        .map(|x| model.upper_expectation(&x.abs().map(|v| if v >= c { v } else { 0.0 })))
        .reduce(|| 0.0, f64::max)
}

/// Unions of up to [`TABLE_MAX_UNION`] atoms from the deepest level with at
/// most [`TABLE_MAX_ATOMS`] nodes.
fn table_events(model: &CredalModel) -> Vec<(String, Event)> {
    let space = model.space();
    let t = (0..=space.depth())
        .rev()
        .find(|&t| space.level_len(t) <= TABLE_MAX_ATOMS)
        .unwrap_or(0);
    let atoms: Vec<usize> = space.level(t).collect();
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(
        model: &CredalModel,
        atoms: &[usize],
        from: usize,
        pick: &mut Vec<usize>,
        out: &mut Vec<(String, Event)>,
    ) {
        if !pick.is_empty() {
            let space = model.space();
            let name = pick.iter().map(|&a| space.label(a)).collect::<Vec<_>>().join("|");
            out.push((name, Event::from_nodes(space, pick)));
        }
        if pick.len() == TABLE_MAX_UNION {
            return;
        }
        for i in from..atoms.len() {
            pick.push(atoms[i]);
            rec(model, atoms, i + 1, pick, out);
            pick.pop();
        }
    }
    rec(model, &atoms, 0, &mut pick, &mut out);
    out
}

pub fn ui_check(model: &CredalModel, family: &[RandomVariable]) -> Result<UiReport> {
    if family.is_empty() {
        return Err(Error::Empty("family"));
    }
    let leaves = model.space().leaf_count();
    for x in family {
        if x.len() != leaves {
            return Err(Error::LengthMismatch {
                what: "family member",
                expected: leaves,
                got: x.len(),
            });
        }
    }
    let mut cutoffs: Vec<f64> = family
        .iter()
        .flat_map(|x| x.values().iter().map(|v| v.abs()))
        .filter(|&v| v > 0.0)
        .collect();
    cutoffs.sort_by(f64::total_cmp);
    cutoffs.dedup();
    let top = cutoffs.last().copied().unwrap_or(0.0);
    let mut curve: Vec<CurvePoint> = cutoffs
        .iter()
        .map(|&c| CurvePoint {
            cutoff: c,
            value: tail_sup(model, family, c),
        })
        .collect();
    curve.push(CurvePoint {
        cutoff: top + 1.0,
        value: 0.0,
    });
    let curve_nonincreasing = curve.windows(2).all(|w| w[1].value <= w[0].value + TOL);

    let bound = family
        .par_iter()
        .map(|x| model.upper_expectation(&x.abs()))
        .reduce(|| 0.0, f64::max);

    let events = table_events(model);
    let rows: Vec<(f64, f64)> = events
        .par_iter()
        .map(|(_, a)| {
            let cap = model.capacity(a);
            let worst = family
                .iter()
                .map(|x| model.upper_expectation(&x.abs().restrict(a)))
                .fold(0.0, f64::max);
            (cap, worst)
        })
        .collect();
    let table = EPSILONS
        .iter()
        .map(|&eps| {
            let bad = rows
                .iter()
                .enumerate()
                .filter(|(_, (_, w))| *w >= eps)
                .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0));
            let (delta, worst_event, pass) = match bad {
                None => (1.0, None, true),
                Some((i, (cap, _))) => {
                    // largest tabulated capacity strictly below the first bad one
                    let below = rows
                        .iter()
                        .map(|r| r.0)
                        .filter(|c| c < cap)
                        .fold(0.0, f64::max);
                    let delta = if below > 0.0 { below } else { cap / 2.0 };
                    (delta, Some(events[i].0.clone()), *cap > 0.0)
                }
            };
            EpsilonDelta {
                epsilon: eps,
                delta,
                events_checked: rows.len(),
                worst_event,
                pass,
            }
        })
        .collect::<Vec<_>>();

    let uniformly_integrable =
        bound.is_finite() && table.iter().all(|r| r.pass) && curve.last().map_or(true, |p| p.value == 0.0);
    Ok(UiReport {
        family_size: family.len(),
        curve,
        bound,
        table,
        curve_nonincreasing,
        uniformly_integrable,
    })
}

/// Pointwise bound behind the convex-hull corollary: for a mixture
/// `Y = Σ w_k X_k`, `E(|Y| 1_{|Y|>=c}) ≤ 2 sup_k E(|X_k| 1_{|X_k|>=c/2})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullCheck {
    pub weights: Vec<f64>,
    pub mixture: UiReport,
    /// `(c, mixture tail, 2·family tail at c/2)` per mixture cutoff.
    pub comparisons: Vec<(f64, f64, f64)>,
    pub holds: bool,
}

pub fn convex_hull_check(
    model: &CredalModel,
    family: &[RandomVariable],
    weights: &[f64],
) -> Result<HullCheck> {
    if weights.len() != family.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: family.len(),
            got: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("weights must be a probability vector".into()));
    }
    let mut mix = RandomVariable::constant(model.space(), 0.0);
    for (x, &w) in family.iter().zip(weights) {
        mix = &mix + &(x * w);
    }
    let mixture = ui_check(model, std::slice::from_ref(&mix))?;
    let comparisons: Vec<(f64, f64, f64)> = mixture
        .curve
        .iter()
        .map(|p| (p.cutoff, p.value, 2.0 * tail_sup(model, family, p.cutoff / 2.0)))
        .collect();
    let holds = comparisons.iter().all(|(_, m, b)| *m <= b + TOL) && mixture.uniformly_integrable;
    Ok(HullCheck {
        weights: weights.to_vec(),
        mixture,
        comparisons,
        holds,
    })
}

/// `n ↦ E(|X|^p 1_{|X|>n})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProfile {
    pub p: f64,
    pub thresholds: Vec<u64>,
    pub values: Vec<f64>,
    /// The profile reaches zero, i.e. `X ∈ L_b^p`.
    pub member: bool,
}

impl TailProfile {
    pub fn at(&self, n: u64) -> f64 {
        match self.thresholds.binary_search(&n) {
            Ok(i) => self.values[i],
            // between grid points the profile is bracketed; report the left value
            Err(0) => self.values.first().copied().unwrap_or(0.0),
            Err(i) => self.values[i - 1],
        }
    }
}

pub fn lb_tail_test(model: &CredalModel, x: &RandomVariable, p: f64) -> Result<TailProfile> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent must be >= 1, got {p}")));
    }
    let a = x.abs();
    let top = a.max_abs().ceil() as u64;
    let mut thresholds: Vec<u64> = (0..=top.min(PROFILE_LINEAR_LIMIT)).collect();
    let mut t = PROFILE_LINEAR_LIMIT;
    while t < top {
        t = t.saturating_mul(2).min(top);
        thresholds.push(t);
    }
    let values: Vec<f64> = thresholds
        .par_iter()
        .map(|&n| {
            let n = n as f64;
            model.upper_expectation(&a.map(|v| if v > n { v.powf(p) } else { 0.0 }))
        })
        .collect();
    let member = values.last().map_or(true, |&v| v == 0.0);
    Ok(TailProfile {
        p,
        thresholds,
        values,
        member,
    })
}

/// Evaluated dominated-convergence sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominatedReport {
    /// `E|X_n − X|`
    pub l1_errors: Vec<f64>,
    /// `V(X_n ≠ X)`
    pub capacities: Vec<f64>,
    /// `2‖Y‖_∞ V(X_n ≠ X)`, an upper bound for `E|X_n − X|`
    pub capacity_bounds: Vec<f64>,
    pub bound_ok: bool,
    /// `L_b^1` profile of the dominating variable.
    pub dominating_profile: TailProfile,
    /// The errors are nonincreasing over the second half of the sequence.
    pub monotone_tail: bool,
    pub tolerance: f64,
    pub converged: bool,
}

/// `|X_n| <= Y` (and `|X| <= Y`) on the quasi-sure support, then the L¹
/// errors. Domination failures report the index (`0` for the limit) and leaf.
pub fn dominated_convergence_check(
    model: &CredalModel,
    xs: &[RandomVariable],
    x: &RandomVariable,
    y: &RandomVariable,
    tol: f64,
) -> Result<DominatedReport> {
    if xs.is_empty() {
        return Err(Error::Empty("sequence"));
    }
    let support = model.qs_support();
    let dominated = |index: usize, v: &RandomVariable| -> Result<()> {
        for (leaf, ok) in support.iter().enumerate() {
            if *ok && v.get(leaf).abs() > y.get(leaf) + TOL {
                return Err(Error::DominationViolated { index, leaf });
            }
        }
        Ok(())
    };
    dominated(0, x)?;
    for (i, xn) in xs.iter().enumerate() {
        dominated(i + 1, xn)?;
    }
    let y_inf = seminorm(model, y, Exponent::Infinity);
    let space = model.space();
    let rows: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|xn| {
            let diff = (xn - x).abs();
            let e = model.upper_expectation(&diff);
            let a = Event::from_predicate(space, |leaf, _| diff.get(leaf) > 0.0);
            (e, model.capacity(&a))
        })
        .collect();
    let l1_errors: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let capacities: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let capacity_bounds: Vec<f64> = capacities.iter().map(|c| 2.0 * y_inf * c).collect();
    let bound_ok = l1_errors
        .iter()
        .zip(&capacity_bounds)
        .all(|(e, b)| *e <= b + TOL);
    let half = l1_errors.len() / 2;
    let monotone_tail = l1_errors[half..].windows(2).all(|w| w[1] <= w[0] + TOL);
    let last = *l1_errors.last().expect("non-empty");
    Ok(DominatedReport {
        dominating_profile: lb_tail_test(model, y, 1.0)?,
        converged: monotone_tail && last <= tol,
        l1_errors,
        capacities,
        capacity_bounds,
        bound_ok,
        monotone_tail,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credal::CredalKernel;
    use crate::tree::TreeSpace;

    fn m1() -> CredalModel {
        CredalModel::uniform(1, &[1.0, 0.0], &[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap()
    }

    /// `X_k = k·1_{B_k}`, `B_k` = first k steps are H.
    fn leading_heads(depth: usize) -> (CredalModel, Vec<RandomVariable>) {
        let model = CredalModel::uniform(depth, &[1.0, 0.0], &[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let fam = (1..=depth)
            .map(|k| {
                RandomVariable::from_fn(model.space(), |_, o| {
                    if o[..k].iter().all(|&v| v == 1.0) {
                        k as f64
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        (model, fam)
    }

    #[test]
    fn seminorm_examples() {
        let model = m1();
        let h = RandomVariable::new(vec![1.0, 0.0]).unwrap();
        assert!((seminorm(&model, &h, Exponent::Finite(1.0)) - 0.6).abs() < 1e-12);
        assert!((seminorm(&model, &h, Exponent::Finite(2.0)) - 0.6f64.sqrt()).abs() < 1e-12);
        let c = RandomVariable::constant(model.space(), -3.0);
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.5), Exponent::Infinity] {
            assert!((seminorm(&model, &c, p) - 3.0).abs() < 1e-12);
        }
        assert!(Exponent::new(0.5).is_err());
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);

        let space = TreeSpace::product(1, 2, &[1.0, 0.0]).unwrap();
        let kernel = CredalKernel::uniform(&space, &[vec![1.0, 0.0]]).unwrap();
        let degenerate = CredalModel::new(space, kernel).unwrap();
        let x = RandomVariable::new(vec![5.0, 99.0]).unwrap();
        assert_eq!(seminorm(&degenerate, &x, Exponent::Infinity), 5.0);
    }

    #[test]
    fn ui_curve_for_leading_heads() {
        let (model, fam) = leading_heads(6);
        let r = ui_check(&model, &fam).unwrap();
        for c in 1..=6 {
            let expected = (c..=6).map(|k| k as f64 * 0.6f64.powi(k)).fold(0.0, f64::max);
            assert!((r.curve_at(c as f64) - expected).abs() < 1e-12, "c = {c}");
        }
        assert_eq!(r.curve.last().unwrap().value, 0.0);
        assert!(r.curve_nonincreasing);
        assert!(r.uniformly_integrable);
        assert!((r.bound - 0.72).abs() < 1e-12);
        assert_eq!(r.table.len(), 2);
        assert_eq!(r.table[0].events_checked, 16 + 120 + 560);
    }

    #[test]
    fn ui_singleton_and_errors() {
        let model = m1();
        let x = RandomVariable::new(vec![2.0, -1.0]).unwrap();
        let r = ui_check(&model, std::slice::from_ref(&x)).unwrap();
        assert!((r.bound - model.upper_expectation(&x.abs())).abs() < 1e-12);
        assert!(r.uniformly_integrable);
        assert_eq!(ui_check(&model, &[]).unwrap_err(), Error::Empty("family"));
    }

    #[test]
    fn convex_hull_stays_ui() {
        let (model, fam) = leading_heads(5);
        for w in [vec![0.2; 5], vec![0.5, 0.0, 0.0, 0.0, 0.5], vec![0.0, 0.1, 0.6, 0.3, 0.0]] {
            let r = convex_hull_check(&model, &fam, &w).unwrap();
            assert!(r.holds, "{w:?}");
        }
        assert!(convex_hull_check(&model, &fam, &[0.5; 5]).is_err());
    }

    #[test]
    fn tail_profiles() {
        let model = m1();
        let h = RandomVariable::new(vec![1.0, 0.0]).unwrap();
        let t = lb_tail_test(&model, &h, 1.0).unwrap();
        assert_eq!(t.thresholds, vec![0, 1]);
        assert!((t.values[0] - 0.6).abs() < 1e-12);
        assert_eq!(t.values[1], 0.0);
        assert!(t.member);

        let z = RandomVariable::constant(model.space(), 0.0);
        assert!(lb_tail_test(&model, &z, 2.0).unwrap().values.iter().all(|&v| v == 0.0));

        let (model, fam) = leading_heads(5);
        for (k, x) in fam.iter().enumerate() {
            let m = (k + 1) as u64;
            let t = lb_tail_test(&model, x, 1.0).unwrap();
            for n in 0..m {
                assert!((t.at(n) - m as f64 * 0.6f64.powi(m as i32)).abs() < 1e-12);
            }
            assert_eq!(t.at(m), 0.0);
        }
    }

    #[test]
    fn dominated_convergence_examples() {
        let (model, fam) = leading_heads(4);
        let x = fam[1].clone();
        let y = x.abs();
        let xs: Vec<RandomVariable> = (1..=50).map(|n| &x * (1.0 - 1.0 / n as f64)).collect();
        let r = dominated_convergence_check(&model, &xs, &x, &y, 0.05).unwrap();
        let ex = model.upper_expectation(&x.abs());
        for (n, e) in r.l1_errors.iter().enumerate() {
            assert!((e - ex / (n + 1) as f64).abs() < 1e-12);
        }
        assert!(r.converged && r.bound_ok);

        // X_n = X off A_n, A_n = n leading heads
        let x = RandomVariable::from_fn(model.space(), |_, o| o.iter().sum());
        let y = RandomVariable::constant(model.space(), 4.0);
        let xs: Vec<RandomVariable> = (1..=4)
            .map(|n| {
                RandomVariable::from_fn(model.space(), |leaf, o| {
                    if o[..n].iter().all(|&v| v == 1.0) { 0.0 } else { x.get(leaf) }
                })
            })
            .collect();
        let r = dominated_convergence_check(&model, &xs, &x, &y, 1.0).unwrap();
        assert!(r.bound_ok);
        assert!((r.capacities[3] - 0.6f64.powi(4)).abs() < 1e-12);

        let a = RandomVariable::from_fn(model.space(), |_, o| o[0]);
        let xs: Vec<RandomVariable> = (1..=3).map(|n| &a * n as f64).collect();
        let y = RandomVariable::constant(model.space(), 1.5);
        let err = dominated_convergence_check(&model, &xs, &a, &y, 0.1).unwrap_err();
        assert_eq!(err, Error::DominationViolated { index: 2, leaf: 0 });
    }
}
