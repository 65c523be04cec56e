//! Seeded random generators for models, processes, stopping times and
//! step templates. Property tests and the acceptance suite draw from these,
//! so every randomized instance is reproducible from its seed.
//!
//! Submartingales come from two recipes:
//! (a) `E_t(X) + A_t` with `A` adapted, nonnegative and nondecreasing, and
//! (b) `φ(E_t(X))` for convex `φ` from the Jensen battery.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::credal::{CredalKernel, CredalModel};
use crate::distribution::StepTemplate;
use crate::martingale::ConvexFn;
use crate::tree::{AdaptedProcess, Event, NodeId, RandomVariable, StoppingTime, TreeSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size limits for [`random_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelShape {
    pub max_depth: usize,
    pub max_branching: usize,
    pub max_kernels: usize,
    /// Outcomes are drawn from `[-value_range, value_range]`.
    pub value_range: f64,
    /// Upper bound on the pure-strategy count; `None` for no bound.
    pub max_strategies: Option<u128>,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            max_depth: 4,
            max_branching: 3,
            max_kernels: 3,
            value_range: 5.0,
            max_strategies: Some(10_000),
        }
    }
}

/// Two-decimal value in `[-r, r]`; the grid keeps ties and zeros common.
pub fn random_value<R: Rng>(rng: &mut R, r: f64) -> f64 {
    (rng.gen_range(-r..=r) * 100.0).round() / 100.0
}

/// A probability vector of the given width; entries are zero with
/// probability `zero_prob`, but at least one entry is positive.
pub fn random_kernel<R: Rng>(rng: &mut R, width: usize, zero_prob: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..width)
        .map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[rng.gen_range(0..width)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// A random tree with per-node branching and a random kernel list at each
/// node. With a strategy budget, kernel lists are trimmed at random nodes
/// until the pure-strategy count fits.
pub fn random_model<R: Rng>(rng: &mut R, shape: &ModelShape) -> CredalModel {
    let depth = rng.gen_range(1..=shape.max_depth);
    let space = TreeSpace::from_fn(depth, |_| {
        let b = rng.gen_range(1..=shape.max_branching);
        (0..b).map(|_| random_value(rng, shape.value_range)).collect()
    })
    .expect("small tree");
    let mut counts: Vec<usize> = (0..space.node_count())
        .map(|n| if space.is_leaf(n) { 0 } else { rng.gen_range(1..=shape.max_kernels) })
        .collect();
    if let Some(budget) = shape.max_strategies {
        let total = |c: &[usize]| c.iter().filter(|&&k| k > 1).fold(1u128, |a, &k| a.saturating_mul(k as u128));
        while total(&counts) > budget {
            let multi: Vec<usize> = (0..counts.len()).filter(|&n| counts[n] > 1).collect();
            let n = *multi.choose(rng).expect("count above one");
            counts[n] -= 1;
        }
    }
    let kernel = CredalKernel::from_fn(&space, |node| {
        let width = space.children(node).len();
        (0..counts[node]).map(|_| random_kernel(rng, width, 0.15)).collect()
    })
    .expect("valid kernels");
    CredalModel::new(space, kernel).expect("valid model")
}

pub fn random_variable<R: Rng>(rng: &mut R, space: &TreeSpace, r: f64) -> RandomVariable {
    RandomVariable::from_fn(space, |_, _| random_value(rng, r))
}

/// An `F_t`-measurable variable: one random value per depth-`t` atom.
pub fn random_measurable<R: Rng>(rng: &mut R, space: &TreeSpace, t: usize, r: f64) -> RandomVariable {
    let vals: Vec<f64> = (0..space.level_len(t)).map(|_| random_value(rng, r)).collect();
    space.lift(t, &vals)
}

pub fn random_event<R: Rng>(rng: &mut R, space: &TreeSpace) -> Event {
    let p = rng.gen_range(0.1..0.9);
    Event::from_predicate(space, |_, _| rng.gen_bool(p))
}

/// An event in `F_t`: a random union of depth-`t` atoms.
pub fn random_measurable_event<R: Rng>(rng: &mut R, space: &TreeSpace, t: usize) -> Event {
    let nodes: Vec<NodeId> = space.level(t).filter(|_| rng.gen_bool(0.5)).collect();
    Event::from_nodes(space, &nodes)
}

/// A family of 1 to `max_len` random events.
pub fn random_event_family<R: Rng>(rng: &mut R, space: &TreeSpace, max_len: usize) -> Vec<Event> {
    let m = rng.gen_range(1..=max_len);
    (0..m).map(|_| random_event(rng, space)).collect()
}

/// Recipe (a): `E_t(X) + A_t`, with `A_0 = 0` and nonnegative adapted increments.
pub fn drift_submartingale<R: Rng>(rng: &mut R, model: &CredalModel) -> AdaptedProcess {
    let space = model.space();
    let x = random_variable(rng, space, 5.0);
    let m = model.conditional_process(&x);
    let mut levels: Vec<Vec<f64>> = vec![vec![0.0]];
    for t in 1..=space.depth() {
        let prev = &levels[t - 1];
        let lvl: Vec<f64> = space
            .level(t)
            .map(|node| {
                let parent = space.parent(node).expect("non-root");
                let inc = if rng.gen_bool(0.5) { 0.0 } else { random_value(rng, 2.0).abs() };
                prev[space.level_offset(parent)] + inc
            })
            .collect();
        levels.push(lvl);
    }
    let drift = AdaptedProcess::from_levels(space, 0, levels).expect("adapted by construction");
    m.add(&drift).expect("same times")
}

/// Recipe (b): `φ(E_t(X))` for a random convex `φ` from the battery.
pub fn convex_submartingale<R: Rng>(rng: &mut R, model: &CredalModel) -> AdaptedProcess {
    let space = model.space();
    let x = random_variable(rng, space, 3.0);
    let phi = *ConvexFn::battery().choose(rng).expect("battery");
    model.conditional_process(&x).map(|v| phi.apply(v))
}

/// Either recipe, restricted to times `1..=D` half of the time.
pub fn random_submartingale<R: Rng>(rng: &mut R, model: &CredalModel) -> AdaptedProcess {
    let p = if rng.gen_bool(0.5) {
        drift_submartingale(rng, model)
    } else {
        convex_submartingale(rng, model)
    };
    let d = model.space().depth();
    if d >= 1 && rng.gen_bool(0.5) {
        p.window(1, d).expect("in range")
    } else {
        p
    }
}

/// `E_t(X)` for a random `X`: a martingale by the tower property.
pub fn random_martingale<R: Rng>(rng: &mut R, model: &CredalModel) -> AdaptedProcess {
    let x = random_variable(rng, model.space(), 5.0);
    model.conditional_process(&x)
}

fn antichain_below<R: Rng>(rng: &mut R, space: &TreeSpace, node: NodeId, stop: f64, out: &mut Vec<NodeId>) {
    if space.is_leaf(node) || rng.gen_bool(stop) {
        out.push(node);
    } else {
        for c in space.children(node) {
            antichain_below(rng, space, c, stop, out);
        }
    }
}

pub fn random_stopping_time<R: Rng>(rng: &mut R, space: &TreeSpace) -> StoppingTime {
    let mut nodes = Vec::new();
    let stop = rng.gen_range(0.1..0.6);
    antichain_below(rng, space, 0, stop, &mut nodes);
    StoppingTime::from_antichain(space, &nodes).expect("antichain")
}

/// Stopping times `S <= T`: `T` refines `S`'s antichain inside each subtree.
pub fn random_stopping_pair<R: Rng>(rng: &mut R, space: &TreeSpace) -> (StoppingTime, StoppingTime) {
    let s = random_stopping_time(rng, space);
    let stop = rng.gen_range(0.1..0.6);
    let mut nodes = Vec::new();
    for &n in s.nodes() {
        antichain_below(rng, space, n, stop, &mut nodes);
    }
    let t = StoppingTime::from_antichain(space, &nodes).expect("antichain");
    (s, t)
}

/// A random IID step template: 2 to 3 outcomes, 1 to 3 kernels.
pub fn random_template<R: Rng>(rng: &mut R) -> StepTemplate {
    let arity = rng.gen_range(2..=3);
    let outcomes: Vec<f64> = (0..arity).map(|_| random_value(rng, 5.0)).collect();
    let k = rng.gen_range(1..=3);
    let kernels = (0..k).map(|_| random_kernel(rng, arity, 0.1)).collect();
    StepTemplate::new(outcomes, kernels).expect("valid template")
}

/// A template whose kernels share one mean: each extra kernel is the base
/// kernel moved along a direction orthogonal to both `1` and the outcomes.
pub fn random_mean_certain_template<R: Rng>(rng: &mut R) -> StepTemplate {
    let arity = rng.gen_range(3..=4);
    let mut outcomes: Vec<f64> = Vec::new();
    while outcomes.len() < arity {
        let v = random_value(rng, 5.0);
        if outcomes.iter().all(|&o| (o - v).abs() > 0.05) {
            outcomes.push(v);
        }
    }
    let base = random_kernel(rng, arity, 0.0);
    // project a random vector off span{1, x}
    let ones = vec![1.0 / (arity as f64).sqrt(); arity];
    let mean = outcomes.iter().sum::<f64>() / arity as f64;
    let xc: Vec<f64> = outcomes.iter().map(|o| o - mean).collect();
    let xn = xc.iter().map(|v| v * v).sum::<f64>().sqrt();
    let xu: Vec<f64> = xc.iter().map(|v| v / xn).collect();
    let k = rng.gen_range(1..=3);
    let mut kernels = vec![base.clone()];
    while kernels.len() < k {
        let mut d: Vec<f64> = (0..arity).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for u in [&ones, &xu] {
            let dot: f64 = d.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            d.iter_mut().zip(u.iter()).for_each(|(a, b)| *a -= dot * b);
        }
        // largest step keeping base + s·d nonnegative
        let smax = base
            .iter()
            .zip(&d)
            .filter(|(_, &dj)| dj < 0.0)
            .map(|(p, dj)| -p / dj)
            .fold(f64::INFINITY, f64::min);
        if !smax.is_finite() || smax <= 0.0 {
            continue;
        }
        let s = rng.gen_range(0.2..=1.0) * smax;
        let p: Vec<f64> = base.iter().zip(&d).map(|(p, dj)| (p + s * dj).max(0.0)).collect();
        let total: f64 = p.iter().sum();
        kernels.push(p.iter().map(|v| v / total).collect());
    }
    StepTemplate::new(outcomes, kernels).expect("valid template")
}
