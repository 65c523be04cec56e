//! The sublinear expectation on a tree.
//!
//! Each non-leaf node carries a finite list of probability vectors over its
//! children. The credal set Θ is every pasting of one choice per node, so it
//! is rectangular and the upper expectation, together with all of its
//! conditional versions, comes out of a single backward induction:
//! `value(node) = max_k Σ_c p_k(c) · value(c)`.
//!
//! [`CredalModel::enumerate_measures`] lists the pure strategies explicitly;
//! it is the brute-force oracle the induction is checked against.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tree::{AdaptedProcess, Event, NodeId, RandomVariable, StoppingTime, TreeSpace};

/// Absolute tolerance on the sum of a kernel's probabilities.
pub const KERNEL_SUM_TOL: f64 = 1e-12;

/// Comparison tolerance for expectations.
pub const TOL: f64 = 1e-9;

/// Limit for [`CredalModel::enumerate_measures`].
pub const MAX_ENUMERATED_STRATEGIES: u128 = 1_000_000;

/// Candidate transition laws per node; leaves carry an empty list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CredalKernel {
    sets: Vec<Vec<Vec<f64>>>,
}

impl CredalKernel {
    /// The same kernel list at every non-leaf node.
    pub fn uniform(space: &TreeSpace, kernels: &[Vec<f64>]) -> Result<Self> {
        Self::from_fn(space, |_| kernels.to_vec())
    }

    pub fn from_fn<F>(space: &TreeSpace, mut kernels_at: F) -> Result<Self>
    where
        F: FnMut(NodeId) -> Vec<Vec<f64>>,
    {
        let mut sets = Vec::with_capacity(space.node_count());
        for node in 0..space.node_count() {
            if space.is_leaf(node) {
                sets.push(Vec::new());
                continue;
            }
            let list = kernels_at(node);
            validate_kernel_list(space, node, &list)?;
            sets.push(list);
        }
        Ok(CredalKernel { sets })
    }

    pub fn at(&self, node: NodeId) -> &[Vec<f64>] {
        &self.sets[node]
    }
}

fn validate_kernel_list(space: &TreeSpace, node: NodeId, list: &[Vec<f64>]) -> Result<()> {
    let bad = |reason: String| Error::InvalidKernel {
        node: space.label(node),
        reason,
    };
    if list.is_empty() {
        return Err(bad("empty kernel list".into()));
    }
    let width = space.children(node).len();
    for (k, p) in list.iter().enumerate() {
        if p.len() != width {
            return Err(bad(format!(
                "kernel {k} has {} entries for {width} children",
                p.len()
            )));
        }
        if p.iter().any(|&q| !q.is_finite() || q < 0.0) {
            return Err(bad(format!("kernel {k} has a negative or non-finite entry")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > KERNEL_SUM_TOL {
            return Err(bad(format!("kernel {k} sums to {sum}")));
        }
    }
    Ok(())
}

/// A finite filtered space equipped with a rectangular credal set.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalModel {
    space: TreeSpace,
    kernel: CredalKernel,
    strategy_count: Option<u128>,
}

impl CredalModel {
    pub fn new(space: TreeSpace, kernel: CredalKernel) -> Result<Self> {
        if kernel.sets.len() != space.node_count() {
            return Err(Error::LengthMismatch {
                what: "kernel",
                expected: space.node_count(),
                got: kernel.sets.len(),
            });
        }
        for node in 0..space.node_count() {
            if space.is_leaf(node) {
                if !kernel.sets[node].is_empty() {
                    return Err(Error::InvalidKernel {
                        node: space.label(node),
                        reason: "leaves carry no kernel".into(),
                    });
                }
            } else {
                validate_kernel_list(&space, node, &kernel.sets[node])?;
            }
        }
        let strategy_count = kernel
            .sets
            .iter()
            .filter(|s| !s.is_empty())
            .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128));
        Ok(CredalModel {
            space,
            kernel,
            strategy_count,
        })
    }

    /// Product space with the same kernel list at every node.
    pub fn uniform(depth: usize, outcomes: &[f64], kernels: &[Vec<f64>]) -> Result<Self> {
        let space = TreeSpace::product(depth, outcomes.len(), outcomes)?;
        let kernel = CredalKernel::uniform(&space, kernels)?;
        Self::new(space, kernel)
    }

    pub fn space(&self) -> &TreeSpace {
        &self.space
    }

    pub fn kernel(&self) -> &CredalKernel {
        &self.kernel
    }

    pub fn kernels_at(&self, node: NodeId) -> &[Vec<f64>] {
        self.kernel.at(node)
    }

    /// Number of pure strategies, `None` when it does not fit in `u128`.
    pub fn strategy_count(&self) -> Option<u128> {
        self.strategy_count
    }

    fn check_len(&self, x: &RandomVariable) {
        assert_eq!(
            x.len(),
            self.space.leaf_count(),
            "random variable does not match the space"
        );
    }

    /// Backward induction from per-node `values` at depth `t` up to the root.
    /// Returns the value of every node at depths `0..=t`, level by level.
    pub fn backward(&self, values: &[f64], t: usize) -> Vec<Vec<f64>> {
        self.backward_impl(values, t, None)
    }

    fn backward_impl(
        &self,
        values: &[f64],
        t: usize,
        mut argmax: Option<&mut Vec<u32>>,
    ) -> Vec<Vec<f64>> {
        assert_eq!(values.len(), self.space.level_len(t));
        let mut levels = vec![Vec::new(); t + 1];
        levels[t] = values.to_vec();
        for s in (0..t).rev() {
            let below_start = self.space.level(s + 1).start;
            let below = &levels[s + 1];
            let current: Vec<f64> = self
                .space
                .level(s)
                .map(|node| {
                    let ch = self.space.children(node);
                    let child_vals = &below[ch.start - below_start..ch.end - below_start];
                    let (best, k) = best_kernel(self.kernel.at(node), child_vals);
                    if let Some(a) = argmax.as_deref_mut() {
                        a[node] = k as u32;
                    }
                    best
                })
                .collect();
            levels[s] = current;
        }
        levels
    }

    /// `E_t(X)` for every `t`, as a martingale-shaped process on `0..=D`.
    pub fn conditional_process(&self, x: &RandomVariable) -> AdaptedProcess {
        self.check_len(x);
        let levels = self.backward(x.values(), self.space.depth());
        AdaptedProcess::from_levels(&self.space, 0, levels).expect("levels match the space")
    }

    pub fn upper_expectation(&self, x: &RandomVariable) -> f64 {
        self.check_len(x);
        self.backward(x.values(), self.space.depth())[0][0]
    }

    /// `-E[-X]`.
    pub fn conjugate_expectation(&self, x: &RandomVariable) -> f64 {
        -self.upper_expectation(&-x)
    }

    /// Upper capacity `V(A) = E[1_A]`.
    pub fn capacity(&self, event: &Event) -> f64 {
        self.upper_expectation(&event.indicator())
    }

    /// Lower capacity `v(A) = -E[-1_A]`.
    pub fn lower_capacity(&self, event: &Event) -> f64 {
        self.conjugate_expectation(&event.indicator())
    }

    pub fn capacity_pair(&self, event: &Event) -> (f64, f64) {
        (self.capacity(event), self.lower_capacity(event))
    }

    /// `E_t(X)`, one value per depth-`t` node.
    pub fn conditional_expectation(&self, x: &RandomVariable, t: usize) -> Result<Vec<f64>> {
        self.check_len(x);
        if t > self.space.depth() {
            return Err(Error::InvalidParameter(format!(
                "time {t} beyond depth {}",
                self.space.depth()
            )));
        }
        let mut levels = self.backward(x.values(), self.space.depth());
        Ok(levels.swap_remove(t))
    }

    /// `E_t(X)` lifted back to the leaves.
    pub fn conditional_variable(&self, x: &RandomVariable, t: usize) -> Result<RandomVariable> {
        let vals = self.conditional_expectation(x, t)?;
        Ok(self.space.lift(t, &vals))
    }

    /// `E_s(X_t)` for a process value at time `t >= s`, per depth-`s` node.
    pub fn conditional_of_level(&self, values: &[f64], t: usize, s: usize) -> Vec<f64> {
        assert!(s <= t);
        let mut levels = self.backward(values, t);
        levels.swap_remove(s)
    }

    /// `E_T(X)(ω) = E_{T(ω)}(X)(ω)`.
    pub fn conditional_at_stopping(&self, x: &RandomVariable, tau: &StoppingTime) -> RandomVariable {
        self.check_len(x);
        let levels = self.backward(x.values(), self.space.depth());
        let mut out = vec![0.0; self.space.leaf_count()];
        for &node in tau.nodes() {
            let v = levels[self.space.node_depth(node)][self.space.level_offset(node)];
            out[self.space.leaf_span(node)].fill(v);
        }
        RandomVariable::new(out).expect("finite")
    }

    /// A maximizing pure strategy for `E[X]`; ties go to the lowest kernel index.
    pub fn maximizing_strategy(&self, x: &RandomVariable) -> StrategyMeasure {
        self.check_len(x);
        let mut choices = vec![0u32; self.space.node_count()];
        self.backward_impl(x.values(), self.space.depth(), Some(&mut choices));
        StrategyMeasure::from_choices(self, choices)
    }

    /// A minimizing pure strategy for `E[X]` (maximizer of `E[-X]`).
    pub fn minimizing_strategy(&self, x: &RandomVariable) -> StrategyMeasure {
        self.maximizing_strategy(&-x)
    }

    /// Every pure strategy, in mixed-radix order over the non-leaf nodes.
    pub fn enumerate_measures(&self) -> Result<Vec<StrategyMeasure>> {
        let count = self.strategy_count.unwrap_or(u128::MAX);
        if count > MAX_ENUMERATED_STRATEGIES {
            return Err(Error::TooManyStrategies {
                count,
                limit: MAX_ENUMERATED_STRATEGIES,
            });
        }
        let internal: Vec<NodeId> = (0..self.space.node_count())
            .filter(|&n| !self.space.is_leaf(n))
            .collect();
        let mut choices = vec![0u32; self.space.node_count()];
        let mut out = Vec::with_capacity(count as usize);
        loop {
            out.push(StrategyMeasure::from_choices(self, choices.clone()));
            // increment the mixed-radix counter, last node fastest
            let mut i = internal.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                let node = internal[i];
                choices[node] += 1;
                if (choices[node] as usize) < self.kernel.at(node).len() {
                    break;
                }
                choices[node] = 0;
            }
        }
    }

    /// Leaves of positive upper probability (the quasi-sure support).
    pub fn qs_support(&self) -> Vec<bool> {
        let n = self.space.node_count();
        let mut reach = vec![false; n];
        reach[0] = true;
        for node in 0..n {
            if !reach[node] || self.space.is_leaf(node) {
                continue;
            }
            let ch = self.space.children(node);
            for (i, c) in ch.enumerate() {
                reach[c] = self.kernel.at(node).iter().any(|p| p[i] > 0.0);
            }
        }
        self.space
            .level(self.space.depth())
            .map(|node| reach[node])
            .collect()
    }

    /// Whether `node` has positive upper probability.
    pub fn node_reachable(&self, node: NodeId) -> bool {
        let mut cur = node;
        while let Some(p) = self.space.parent(cur) {
            let i = self.space.child_index(cur);
            if !self.kernel.at(p).iter().any(|k| k[i] > 0.0) {
                return false;
            }
            cur = p;
        }
        true
    }

    /// Content hash of the space and kernels.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"sublex-model-v1");
        h.update((self.space.depth() as u64).to_le_bytes());
        for node in 0..self.space.node_count() {
            h.update((self.space.children(node).len() as u64).to_le_bytes());
            h.update(self.space.edge_value(node).to_bits().to_le_bytes());
            let set = self.kernel.at(node);
            h.update((set.len() as u64).to_le_bytes());
            for p in set {
                for q in p {
                    h.update(q.to_bits().to_le_bytes());
                }
            }
        }
        h.finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn best_kernel(kernels: &[Vec<f64>], child_vals: &[f64]) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (k, p) in kernels.iter().enumerate() {
        let v: f64 = p.iter().zip(child_vals).map(|(a, b)| a * b).sum();
        if v > best {
            best = v;
            arg = k;
        }
    }
    (best, arg)
}

/// One element of Θ: a kernel index per node and the leaf law it induces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyMeasure {
    choices: Vec<u32>,
    leaf_probs: Vec<f64>,
}

impl StrategyMeasure {
    /// `choices[node]` is ignored at leaves.
    pub fn from_choices(model: &CredalModel, choices: Vec<u32>) -> Self {
        let space = model.space();
        let mut prob = vec![0.0; space.node_count()];
        prob[0] = 1.0;
        for node in 0..space.node_count() {
            if space.is_leaf(node) {
                continue;
            }
            let p = &model.kernels_at(node)[choices[node] as usize];
            for (i, c) in space.children(node).enumerate() {
                prob[c] = prob[node] * p[i];
            }
        }
        let leaf_probs = prob[space.level(space.depth())].to_vec();
        StrategyMeasure {
            choices,
            leaf_probs,
        }
    }

    /// The strategy picking kernel `k` (clamped to the available range) everywhere.
    pub fn constant(model: &CredalModel, k: u32) -> Self {
        let choices = (0..model.space().node_count())
            .map(|n| {
                let len = model.kernels_at(n).len() as u32;
                if len == 0 {
                    0
                } else {
                    k.min(len - 1)
                }
            })
            .collect();
        Self::from_choices(model, choices)
    }

    pub fn choices(&self) -> &[u32] {
        &self.choices
    }

    pub fn leaf_probs(&self) -> &[f64] {
        &self.leaf_probs
    }

    /// Linear expectation `Σ p(ω) X(ω)`.
    pub fn expectation(&self, x: &RandomVariable) -> f64 {
        self.leaf_probs
            .iter()
            .zip(x.values())
            .map(|(p, v)| p * v)
            .sum()
    }

    pub fn probability(&self, event: &Event) -> f64 {
        self.leaf_probs
            .iter()
            .zip(event.members())
            .filter(|(_, &b)| b)
            .map(|(p, _)| p)
            .sum()
    }
}

/// An explicit finite set of leaf laws, not necessarily rectangular.
///
/// Conditional expectations are taken atom by atom as the supremum of the
/// Bayesian conditionals over laws charging the atom. Without rectangularity
/// the tower property `E_s ∘ E_t = E_s` generally fails; see
/// [`MeasureSet::tower_defect`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSet {
    laws: Vec<Vec<f64>>,
}

impl MeasureSet {
    pub fn new(space: &TreeSpace, laws: Vec<Vec<f64>>) -> Result<Self> {
        if laws.is_empty() {
            return Err(Error::Empty("measure set"));
        }
        for (k, p) in laws.iter().enumerate() {
            if p.len() != space.leaf_count() {
                return Err(Error::LengthMismatch {
                    what: "leaf law",
                    expected: space.leaf_count(),
                    got: p.len(),
                });
            }
            let sum: f64 = p.iter().sum();
            if p.iter().any(|&q| q < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "law {k} is not a probability vector"
                )));
            }
        }
        Ok(MeasureSet { laws })
    }

    pub fn from_strategies(measures: &[StrategyMeasure]) -> Self {
        MeasureSet {
            laws: measures.iter().map(|m| m.leaf_probs.clone()).collect(),
        }
    }

    pub fn laws(&self) -> &[Vec<f64>] {
        &self.laws
    }

    pub fn upper_expectation(&self, x: &RandomVariable) -> f64 {
        self.laws
            .iter()
            .map(|p| p.iter().zip(x.values()).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Atom-wise supremum of conditional expectations at depth `t`, lifted to leaves.
    /// Atoms no law charges get the plain maximum of `X` over the atom.
    pub fn conditional_variable(&self, space: &TreeSpace, x: &RandomVariable, t: usize) -> RandomVariable {
        let mut out = vec![0.0; space.leaf_count()];
        for node in space.level(t) {
            let span = space.leaf_span(node);
            let mut best = f64::NEG_INFINITY;
            for p in &self.laws {
                let mass: f64 = p[span.clone()].iter().sum();
                if mass > 0.0 {
                    let v: f64 = p[span.clone()]
                        .iter()
                        .zip(&x.values()[span.clone()])
                        .map(|(a, b)| a * b)
                        .sum();
                    best = best.max(v / mass);
                }
            }
            if best == f64::NEG_INFINITY {
                best = x.values()[span.clone()]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
            }
            out[span].fill(best);
        }
        RandomVariable::new(out).expect("finite")
    }

    /// `E(E_t(X)) − E(X)`; zero for rectangular sets.
    pub fn tower_defect(&self, space: &TreeSpace, x: &RandomVariable, t: usize) -> f64 {
        let inner = self.conditional_variable(space, x, t);
        self.upper_expectation(&inner) - self.upper_expectation(x)
    }
}

/// Lemma-4.1-style separation test for `F_t`-measurable `X`, `Y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    /// `E((X+c)1_A) = E((Y+c)1_A)` held for every tested `A ∈ F_t`.
    pub all_events_agree: bool,
    /// `X = Y` on every leaf of positive upper probability.
    pub equal_qs: bool,
    pub events_tested: usize,
}

/// Tests `E((X+c)1_A) = E((Y+c)1_A)` over every union of depth-`t` atoms
/// (at most 2^16 of them) and compares with quasi-sure equality of `X`, `Y`.
pub fn separation_check(
    model: &CredalModel,
    x: &RandomVariable,
    y: &RandomVariable,
    t: usize,
    c: f64,
) -> Result<SeparationReport> {
    let space = model.space();
    let xs = space.atom_values(x, t).ok_or(Error::NotAdapted { time: t })?;
    let ys = space.atom_values(y, t).ok_or(Error::NotAdapted { time: t })?;
    let atoms: Vec<NodeId> = space.level(t).collect();
    if atoms.len() > 16 {
        return Err(Error::InvalidParameter(format!(
            "{} atoms at depth {t}; at most 16 supported",
            atoms.len()
        )));
    }
    let xc = x + c;
    let yc = y + c;
    let mut agree = true;
    let total = 1usize << atoms.len();
    for mask in 0..total {
        let chosen: Vec<NodeId> = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &n)| n)
            .collect();
        let a = Event::from_nodes(space, &chosen);
        let lhs = model.upper_expectation(&xc.restrict(&a));
        let rhs = model.upper_expectation(&yc.restrict(&a));
        if (lhs - rhs).abs() > TOL {
            agree = false;
            break;
        }
    }
    let equal_qs = atoms
        .iter()
        .enumerate()
        .all(|(i, &n)| !model.node_reachable(n) || (xs[i] - ys[i]).abs() <= TOL);
    Ok(SeparationReport {
        all_events_agree: agree,
        equal_qs,
        events_tested: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1() -> CredalModel {
        CredalModel::uniform(1, &[1.0, 0.0], &[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap()
    }

    fn m2() -> CredalModel {
        CredalModel::uniform(2, &[1.0, 0.0], &[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap()
    }

    fn heads(model: &CredalModel) -> RandomVariable {
        RandomVariable::from_fn(model.space(), |_, x| x.iter().sum())
    }

    #[test]
    fn m1_upper_lower_and_capacities() {
        let m = m1();
        let h = m.space().step_variable(1).unwrap();
        assert!((m.upper_expectation(&h) - 0.6).abs() < 1e-12);
        assert!((m.conjugate_expectation(&h) - 0.3).abs() < 1e-12);
        let a = Event::from_predicate(m.space(), |_, x| x[0] == 1.0);
        let (v_up, v_low) = m.capacity_pair(&a);
        assert!((v_up - 0.6).abs() < 1e-12 && (v_low - 0.3).abs() < 1e-12);
        assert_eq!(m.capacity_pair(&Event::full(m.space())), (1.0, 1.0));
        assert_eq!(m.capacity_pair(&Event::empty(m.space())), (0.0, 0.0));
        assert!((m.capacity(&a) + m.lower_capacity(&a.complement()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constants_are_preserved() {
        let m = m2();
        let c = RandomVariable::constant(m.space(), -2.5);
        assert_eq!(m.upper_expectation(&c), -2.5);
        assert_eq!(m.conjugate_expectation(&c), -2.5);
    }

    #[test]
    fn m2_head_count() {
        let m = m2();
        let x = heads(&m);
        assert!((m.upper_expectation(&x) - 1.2).abs() < 1e-12);
        let e1 = m.conditional_expectation(&x, 1).unwrap();
        assert!((e1[0] - 1.6).abs() < 1e-12 && (e1[1] - 0.6).abs() < 1e-12);
        assert_eq!(m.conditional_expectation(&x, 2).unwrap(), x.values());
        let lifted = m.conditional_variable(&x, 1).unwrap();
        assert!((m.upper_expectation(&lifted) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn stopping_conditioning() {
        let m = m2();
        let s = m.space();
        let x = heads(&m);
        let t0 = StoppingTime::constant(s, 0).unwrap();
        let e = m.conditional_at_stopping(&x, &t0);
        assert!(e.values().iter().all(|v| (v - 1.2).abs() < 1e-12));
        let td = StoppingTime::constant(s, 2).unwrap();
        assert_eq!(m.conditional_at_stopping(&x, &td), x);
        let mixed = StoppingTime::from_values(s, &[1, 1, 2, 2]).unwrap().unwrap();
        let e = m.conditional_at_stopping(&x, &mixed);
        assert!((e.get(0) - 1.6).abs() < 1e-12 && (e.get(1) - 1.6).abs() < 1e-12);
        assert_eq!(&e.values()[2..], &x.values()[2..]);
    }

    #[test]
    fn enumeration_oracle_on_m1_and_m2() {
        assert_eq!(m1().enumerate_measures().unwrap().len(), 2);
        let m = m2();
        let all = m.enumerate_measures().unwrap();
        assert_eq!(all.len(), 8);
        let x = heads(&m);
        let best = all
            .iter()
            .map(|t| t.expectation(&x))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - 1.2).abs() < 1e-12);
        for t in &all {
            let s: f64 = t.leaf_probs().iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(t.expectation(&x) <= m.upper_expectation(&x) + TOL);
        }
    }

    #[test]
    fn expectation_under_single_measure() {
        let m = m1();
        let theta = StrategyMeasure::constant(&m, 0);
        let h = m.space().step_variable(1).unwrap();
        assert!((theta.expectation(&h) - 0.3).abs() < 1e-15);
        let y = RandomVariable::new(vec![2.0, -1.0]).unwrap();
        let combo = &(&h * 2.0) + &(&y * -3.0);
        let lhs = theta.expectation(&combo);
        let rhs = 2.0 * theta.expectation(&h) - 3.0 * theta.expectation(&y);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn maximizer_ties_take_lowest_index() {
        let m = CredalModel::uniform(1, &[1.0, 0.0], &[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let x = m.space().step_variable(1).unwrap();
        assert_eq!(m.maximizing_strategy(&x).choices()[0], 0);
        let m = m2();
        let x = heads(&m);
        let theta = m.maximizing_strategy(&x);
        assert!((theta.expectation(&x) - 1.2).abs() < 1e-12);
        assert_eq!(theta.choices()[0], 1);
    }

    #[test]
    fn enumeration_guard() {
        let m = CredalModel::uniform(
            5,
            &[0.0, 1.0],
            &[vec![0.1, 0.9], vec![0.2, 0.8], vec![0.5, 0.5]],
        )
        .unwrap();
        assert!(matches!(
            m.enumerate_measures(),
            Err(Error::TooManyStrategies { .. })
        ));
    }

    #[test]
    fn kernel_validation_names_node() {
        let space = TreeSpace::product(1, 2, &[1.0, 0.0]).unwrap();
        let err = CredalKernel::uniform(&space, &[vec![0.5, 0.4]]).unwrap_err();
        match err {
            Error::InvalidKernel { node, .. } => assert_eq!(node, "root"),
            e => panic!("unexpected {e:?}"),
        }
        assert!(CredalKernel::uniform(&space, &[]).is_err());
    }

    #[test]
    fn degenerate_kernel_support() {
        let m = CredalModel::uniform(2, &[1.0, 0.0], &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.qs_support(), vec![true, false, false, false]);
        let leaf = Event::from_leaves(m.space(), &[3]).unwrap();
        assert_eq!(m.capacity(&leaf), 0.0);
    }

    #[test]
    fn non_rectangular_set_breaks_tower() {
        // two laws on a depth-2 binary tree that are not closed under pasting
        let space = TreeSpace::product(2, 2, &[1.0, 0.0]).unwrap();
        let p = vec![0.45, 0.45, 0.05, 0.05];
        let q = vec![0.1, 0.0, 0.45, 0.45];
        let set = MeasureSet::new(&space, vec![p, q]).unwrap();
        let x = Event::from_leaves(&space, &[0]).unwrap().indicator();
        // E(1_HH) = 0.45 but pasting q's conditional onto p's root law gives 0.9
        let defect = set.tower_defect(&space, &x, 1);
        assert!((defect - 0.45).abs() < 1e-12, "defect {defect}");

        let m = m2();
        let rect = MeasureSet::from_strategies(&m.enumerate_measures().unwrap());
        let x = heads(&m);
        assert!(rect.tower_defect(m.space(), &x, 1).abs() < 1e-12);
    }

    #[test]
    fn separation_on_m2() {
        let m = m2();
        let s = m.space();
        let x = s.lift(1, &[1.0, 2.0]);
        let y = s.lift(1, &[1.0, 2.0]);
        let r = separation_check(&m, &x, &y, 1, 0.0).unwrap();
        assert!(r.all_events_agree && r.equal_qs);
        let z = s.lift(1, &[1.0, 2.5]);
        let r = separation_check(&m, &x, &z, 1, 0.0).unwrap();
        assert!(!r.all_events_agree && !r.equal_qs);
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        assert_eq!(m2().fingerprint(), m2().fingerprint());
        assert_ne!(m1().fingerprint(), m2().fingerprint());
    }
}
