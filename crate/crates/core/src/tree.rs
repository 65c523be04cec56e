//! Finite sample spaces as rooted trees.
//!
//! A [`TreeSpace`] of depth `D` encodes the sample space (its leaves), the
//! filtration `F_0 ⊂ … ⊂ F_D` (the atoms of `F_t` are the subtrees hanging
//! off the depth-`t` nodes) and the outcome carried by each edge. Nodes are
//! numbered breadth first with children in order, so the leaves below any
//! node always form a contiguous range of leaf indices.
//!
//! Random variables live on leaves, adapted processes on nodes. Conversions
//! between the two are explicit.

use std::ops::{Add, Mul, Neg, Range, Sub};

use serde::Serialize;

use crate::error::{Error, Result};

/// Upper bound on the number of leaves a space may have.
pub const MAX_LEAVES: u128 = 10_000_000;

/// Tolerance used when deciding whether a real-valued variable is constant on an atom.
pub const MEASURABILITY_TOL: f64 = 1e-12;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSpace {
    depth: usize,
    parent: Vec<NodeId>,
    children: Vec<Range<NodeId>>,
    node_depth: Vec<usize>,
    child_index: Vec<usize>,
    edge_value: Vec<f64>,
    levels: Vec<Range<NodeId>>,
    leaf_span: Vec<Range<usize>>,
}

impl TreeSpace {
    /// Uniform tree where every node has `outcomes.len()` children and edge
    /// `k` carries `outcomes[k]`.
    pub fn product(depth: usize, branching: usize, outcomes: &[f64]) -> Result<Self> {
        if branching == 0 {
            return Err(Error::InvalidSpace("branching must be at least 1".into()));
        }
        if outcomes.len() != branching {
            return Err(Error::LengthMismatch {
                what: "outcomes",
                expected: branching,
                got: outcomes.len(),
            });
        }
        if let Some(i) = outcomes.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        let leaves = (branching as u128).checked_pow(depth as u32);
        match leaves {
            Some(l) if l <= MAX_LEAVES => {}
            _ => {
                return Err(Error::SpaceTooLarge {
                    leaves: leaves.unwrap_or(u128::MAX),
                    limit: MAX_LEAVES,
                })
            }
        }
        Self::from_fn(depth, |_| outcomes.to_vec())
    }

    /// Builds a tree level by level. `outcomes_at(path)` returns the edge
    /// outcomes of the children of the node reached by `path` (a list of
    /// child indices from the root). Every leaf sits at depth `depth`.
    pub fn from_fn<F>(depth: usize, mut outcomes_at: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        let mut parent = vec![usize::MAX];
        let mut children = Vec::new();
        let mut node_depth = vec![0];
        let mut child_index = vec![0];
        let mut edge_value = vec![0.0];
        let mut levels = vec![0..1];
        let mut paths: Vec<Vec<usize>> = vec![Vec::new()];

        for t in 0..depth {
            let level = levels[t].clone();
            let mut next_paths = Vec::new();
            let next_start = parent.len();
            for (offset, node) in level.clone().enumerate() {
                let path = &paths[offset];
                let outcomes = outcomes_at(path);
                if outcomes.is_empty() {
                    return Err(Error::InvalidSpace(format!(
                        "node {} has no children",
                        format_path(path)
                    )));
                }
                if let Some(i) = outcomes.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { index: i });
                }
                let first = parent.len();
                for (k, v) in outcomes.into_iter().enumerate() {
                    parent.push(node);
                    node_depth.push(t + 1);
                    child_index.push(k);
                    edge_value.push(v);
                    let mut p = path.clone();
                    p.push(k);
                    next_paths.push(p);
                }
                children.push(first..parent.len());
                if (parent.len() - next_start) as u128 > MAX_LEAVES {
                    return Err(Error::SpaceTooLarge {
                        leaves: (parent.len() - next_start) as u128,
                        limit: MAX_LEAVES,
                    });
                }
            }
            levels.push(next_start..parent.len());
            paths = next_paths;
        }
        let n = parent.len();
        let leaf_start = levels[depth].start;
        children.resize(n, n..n);

        let mut leaf_span = vec![0..0; n];
        for node in (0..n).rev() {
            leaf_span[node] = if node >= leaf_start {
                let i = node - leaf_start;
                i..i + 1
            } else {
                let ch = &children[node];
                leaf_span[ch.start].start..leaf_span[ch.end - 1].end
            };
        }

        Ok(TreeSpace {
            depth,
            parent,
            children,
            node_depth,
            child_index,
            edge_value,
            levels,
            leaf_span,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[self.depth].len()
    }

    /// Nodes at depth `t`, i.e. the atoms of `F_t`.
    pub fn level(&self, t: usize) -> Range<NodeId> {
        self.levels[t].clone()
    }

    pub fn level_len(&self, t: usize) -> usize {
        self.levels[t].len()
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.node_depth[node] == self.depth
    }

    pub fn children(&self, node: NodeId) -> Range<NodeId> {
        self.children[node].clone()
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        (node != 0).then(|| self.parent[node])
    }

    pub fn node_depth(&self, node: NodeId) -> usize {
        self.node_depth[node]
    }

    /// Position of `node` among its siblings.
    pub fn child_index(&self, node: NodeId) -> usize {
        self.child_index[node]
    }

    /// Outcome on the edge leading into `node` (0 for the root).
    pub fn edge_value(&self, node: NodeId) -> f64 {
        self.edge_value[node]
    }

    pub fn leaf_node(&self, leaf: usize) -> NodeId {
        self.levels[self.depth].start + leaf
    }

    /// Leaves below `node`, as a range of leaf indices.
    pub fn leaf_span(&self, node: NodeId) -> Range<usize> {
        self.leaf_span[node].clone()
    }

    /// Offset of `node` inside its level.
    pub fn level_offset(&self, node: NodeId) -> usize {
        node - self.levels[self.node_depth[node]].start
    }

    pub fn ancestor_at(&self, leaf: usize, t: usize) -> NodeId {
        let mut node = self.leaf_node(leaf);
        for _ in t..self.depth {
            node = self.parent[node];
        }
        node
    }

    /// Child indices from the root to `node`.
    pub fn path(&self, node: NodeId) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.node_depth[node]);
        let mut cur = node;
        while cur != 0 {
            path.push(self.child_index[cur]);
            cur = self.parent[cur];
        }
        path.reverse();
        path
    }

    /// Human-readable label, e.g. `"0.1"`; the root is `"root"`.
    pub fn label(&self, node: NodeId) -> String {
        if node == 0 {
            "root".to_string()
        } else {
            format_path(&self.path(node))
        }
    }

    pub fn node_by_path(&self, path: &[usize]) -> Option<NodeId> {
        let mut node = 0;
        for &k in path {
            let ch = self.children(node);
            if k >= ch.len() {
                return None;
            }
            node = ch.start + k;
        }
        Some(node)
    }

    /// Edge outcomes along the path to a leaf, `(X_1, …, X_D)`.
    pub fn outcomes(&self, leaf: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.depth];
        let mut node = self.leaf_node(leaf);
        for t in (0..self.depth).rev() {
            out[t] = self.edge_value[node];
            node = self.parent[node];
        }
        out
    }

    /// The step variable `X_i` (outcome of the edge at depth `i`), `1 <= i <= D`.
    pub fn step_variable(&self, i: usize) -> Result<RandomVariable> {
        if i == 0 || i > self.depth {
            return Err(Error::InvalidParameter(format!(
                "step index {i} outside 1..={}",
                self.depth
            )));
        }
        let values = (0..self.leaf_count())
            .map(|leaf| self.edge_value[self.ancestor_at(leaf, i)])
            .collect();
        Ok(RandomVariable(values))
    }

    /// Values per depth-`t` node when `x` is `F_t`-measurable, `None` otherwise.
    pub fn atom_values(&self, x: &RandomVariable, t: usize) -> Option<Vec<f64>> {
        self.level(t)
            .map(|node| {
                let span = self.leaf_span(node);
                let v = x.0[span.start];
                x.0[span]
                    .iter()
                    .all(|&w| close(v, w))
                    .then_some(v)
            })
            .collect()
    }

    /// Smallest `t` such that `x` is `F_t`-measurable.
    pub fn measurability_level(&self, x: &RandomVariable) -> usize {
        (0..=self.depth)
            .find(|&t| self.atom_values(x, t).is_some())
            .unwrap_or(self.depth)
    }

    /// Lifts per-node values at depth `t` to a leaf-indexed variable.
    pub fn lift(&self, t: usize, values: &[f64]) -> RandomVariable {
        let mut out = vec![0.0; self.leaf_count()];
        for (node, &v) in self.level(t).zip(values) {
            out[self.leaf_span(node)].fill(v);
        }
        RandomVariable(out)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MEASURABILITY_TOL * (1.0 + a.abs().max(b.abs()))
}

pub(crate) fn format_path(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".to_string();
    }
    path.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// A set of leaves together with its measurability level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    members: Vec<bool>,
    level: usize,
}

impl Event {
    pub fn new(space: &TreeSpace, members: Vec<bool>) -> Result<Self> {
        if members.len() != space.leaf_count() {
            return Err(Error::LengthMismatch {
                what: "event",
                expected: space.leaf_count(),
                got: members.len(),
            });
        }
        let level = event_level(space, &members);
        Ok(Event { members, level })
    }

    /// `{ω : predicate(leaf, (X_1(ω), …, X_D(ω)))}`.
    pub fn from_predicate<F>(space: &TreeSpace, mut predicate: F) -> Self
    where
        F: FnMut(usize, &[f64]) -> bool,
    {
        let members: Vec<bool> = (0..space.leaf_count())
            .map(|leaf| predicate(leaf, &space.outcomes(leaf)))
            .collect();
        let level = event_level(space, &members);
        Event { members, level }
    }

    pub fn from_leaves(space: &TreeSpace, leaves: &[usize]) -> Result<Self> {
        let mut members = vec![false; space.leaf_count()];
        for &l in leaves {
            *members.get_mut(l).ok_or_else(|| {
                Error::InvalidParameter(format!("leaf {l} out of range"))
            })? = true;
        }
        Event::new(space, members)
    }

    /// Union of the subtrees below `nodes`.
    pub fn from_nodes(space: &TreeSpace, nodes: &[NodeId]) -> Self {
        let mut members = vec![false; space.leaf_count()];
        for &n in nodes {
            members[space.leaf_span(n)].fill(true);
        }
        let level = event_level(space, &members);
        Event { members, level }
    }

    pub fn full(space: &TreeSpace) -> Self {
        Event {
            members: vec![true; space.leaf_count()],
            level: 0,
        }
    }

    pub fn empty(space: &TreeSpace) -> Self {
        Event {
            members: vec![false; space.leaf_count()],
            level: 0,
        }
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, leaf: usize) -> bool {
        self.members[leaf]
    }

    /// Smallest `t` with the event a union of depth-`t` subtrees.
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Event {
            members: self.members.iter().map(|b| !b).collect(),
            level: self.level,
        }
    }

    fn combine(&self, space: &TreeSpace, other: &Event, f: impl Fn(bool, bool) -> bool) -> Self {
        let members: Vec<bool> = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let level = event_level(space, &members);
        Event { members, level }
    }

    pub fn union(&self, space: &TreeSpace, other: &Event) -> Self {
        self.combine(space, other, |a, b| a || b)
    }

    pub fn intersection(&self, space: &TreeSpace, other: &Event) -> Self {
        self.combine(space, other, |a, b| a && b)
    }

    pub fn difference(&self, space: &TreeSpace, other: &Event) -> Self {
        self.combine(space, other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, space: &TreeSpace, other: &Event) -> Self {
        self.combine(space, other, |a, b| a != b)
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !a || b)
    }

    pub fn indicator(&self) -> RandomVariable {
        RandomVariable(
            self.members
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

fn event_level(space: &TreeSpace, members: &[bool]) -> usize {
    // uniform[node] = whether the event is constant on the node's subtree
    let n = space.node_count();
    let mut uniform = vec![true; n];
    let mut worst = 0;
    for node in (0..n).rev() {
        if space.is_leaf(node) {
            continue;
        }
        let span = space.leaf_span(node);
        let first = members[span.start];
        let ok = space.children(node).all(|c| uniform[c])
            && members[span].iter().all(|&b| b == first);
        uniform[node] = ok;
        if !ok {
            worst = worst.max(space.node_depth(node) + 1);
        }
    }
    worst
}

/// A real-valued function on the leaves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomVariable(Vec<f64>);

impl RandomVariable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(RandomVariable(values))
    }

    /// Checks the length against `space` as well.
    pub fn on(space: &TreeSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.leaf_count() {
            return Err(Error::LengthMismatch {
                what: "random variable",
                expected: space.leaf_count(),
                got: values.len(),
            });
        }
        Self::new(values)
    }

    pub fn constant(space: &TreeSpace, c: f64) -> Self {
        RandomVariable(vec![c; space.leaf_count()])
    }

    pub fn from_fn<F>(space: &TreeSpace, mut f: F) -> Self
    where
        F: FnMut(usize, &[f64]) -> f64,
    {
        RandomVariable(
            (0..space.leaf_count())
                .map(|leaf| f(leaf, &space.outcomes(leaf)))
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, leaf: usize) -> f64 {
        self.0[leaf]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        RandomVariable(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &RandomVariable, f: impl Fn(f64, f64) -> f64) -> Self {
        RandomVariable(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(0.0))
    }

    pub fn powf(&self, p: f64) -> Self {
        self.map(|v| v.powf(p))
    }

    /// `1_A · X`.
    pub fn restrict(&self, event: &Event) -> Self {
        RandomVariable(
            self.0
                .iter()
                .zip(event.members())
                .map(|(&v, &b)| if b { v } else { 0.0 })
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dominates(&self, other: &RandomVariable) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl Add for &RandomVariable {
    type Output = RandomVariable;
    fn add(self, rhs: &RandomVariable) -> RandomVariable {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &RandomVariable {
    type Output = RandomVariable;
    fn sub(self, rhs: &RandomVariable) -> RandomVariable {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &RandomVariable {
    type Output = RandomVariable;
    fn mul(self, rhs: &RandomVariable) -> RandomVariable {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &RandomVariable {
    type Output = RandomVariable;
    fn mul(self, rhs: f64) -> RandomVariable {
        self.map(|v| v * rhs)
    }
}

impl Add<f64> for &RandomVariable {
    type Output = RandomVariable;
    fn add(self, rhs: f64) -> RandomVariable {
        self.map(|v| v + rhs)
    }
}

impl Neg for &RandomVariable {
    type Output = RandomVariable;
    fn neg(self) -> RandomVariable {
        self.map(|v| -v)
    }
}

/// Node-indexed process `X_t`, `t = start..=end`; `levels[k]` holds the
/// values at time `start + k`, one per depth-`(start + k)` node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptedProcess {
    start: usize,
    levels: Vec<Vec<f64>>,
}

impl AdaptedProcess {
    pub fn from_levels(space: &TreeSpace, start: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Empty("process"));
        }
        let end = start + levels.len() - 1;
        if end > space.depth() {
            return Err(Error::InvalidParameter(format!(
                "process runs to time {end} but the space has depth {}",
                space.depth()
            )));
        }
        for (k, lv) in levels.iter().enumerate() {
            let want = space.level_len(start + k);
            if lv.len() != want {
                return Err(Error::LengthMismatch {
                    what: "process level",
                    expected: want,
                    got: lv.len(),
                });
            }
            if let Some(index) = lv.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(AdaptedProcess { start, levels })
    }

    /// Builds a process from leaf-indexed variables; `vars[k]` must be
    /// `F_{start+k}`-measurable.
    pub fn from_leaf_variables(
        space: &TreeSpace,
        start: usize,
        vars: &[RandomVariable],
    ) -> Result<Self> {
        let mut levels = Vec::with_capacity(vars.len());
        for (k, v) in vars.iter().enumerate() {
            let t = start + k;
            if t > space.depth() {
                return Err(Error::InvalidParameter(format!(
                    "time {t} beyond depth {}",
                    space.depth()
                )));
            }
            levels.push(
                space
                    .atom_values(v, t)
                    .ok_or(Error::NotAdapted { time: t })?,
            );
        }
        Self::from_levels(space, start, levels)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.start + self.levels.len() - 1
    }

    pub fn times(&self) -> Range<usize> {
        self.start..self.end() + 1
    }

    /// Values at time `t`, one per depth-`t` node.
    pub fn at(&self, t: usize) -> &[f64] {
        &self.levels[t - self.start]
    }

    pub fn value(&self, space: &TreeSpace, t: usize, node: NodeId) -> f64 {
        self.at(t)[space.level_offset(node)]
    }

    pub fn at_leaves(&self, space: &TreeSpace, t: usize) -> RandomVariable {
        space.lift(t, self.at(t))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        AdaptedProcess {
            start: self.start,
            levels: self
                .levels
                .iter()
                .map(|lv| lv.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    /// Pointwise sum with another process on the same times.
    pub fn add(&self, other: &AdaptedProcess) -> Result<Self> {
        if self.start != other.start || self.levels.len() != other.levels.len() {
            return Err(Error::InvalidParameter("process time ranges differ".into()));
        }
        Ok(AdaptedProcess {
            start: self.start,
            levels: self
                .levels
                .iter()
                .zip(&other.levels)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        })
    }

    /// Restriction to times `from..=to`.
    pub fn window(&self, from: usize, to: usize) -> Result<Self> {
        if from < self.start || to > self.end() || from > to {
            return Err(Error::InvalidParameter(format!(
                "window {from}..={to} outside {}..={}",
                self.start,
                self.end()
            )));
        }
        Ok(AdaptedProcess {
            start: from,
            levels: self.levels[from - self.start..=to - self.start].to_vec(),
        })
    }

    /// `X_T` as a leaf variable.
    pub fn stopped(&self, space: &TreeSpace, tau: &StoppingTime) -> Result<RandomVariable> {
        let mut out = Vec::with_capacity(space.leaf_count());
        for leaf in 0..space.leaf_count() {
            let t = tau.at(leaf);
            if !self.times().contains(&t) {
                return Err(Error::InvalidParameter(format!(
                    "stopping time value {t} outside process range {}..={}",
                    self.start,
                    self.end()
                )));
            }
            out.push(self.value(space, t, space.ancestor_at(leaf, t)));
        }
        Ok(RandomVariable(out))
    }
}

/// A stopping time stored as an antichain of nodes covering every leaf once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StoppingTime {
    nodes: Vec<NodeId>,
    leaf_depth: Vec<usize>,
}

impl StoppingTime {
    /// Checks whether `tau` (leaf → time) is a stopping time. Out-of-range
    /// values are an error; an anticipating rule yields `Ok(None)`.
    pub fn from_values(space: &TreeSpace, tau: &[usize]) -> Result<Option<Self>> {
        if tau.len() != space.leaf_count() {
            return Err(Error::LengthMismatch {
                what: "stopping time",
                expected: space.leaf_count(),
                got: tau.len(),
            });
        }
        if let Some(leaf) = tau.iter().position(|&v| v > space.depth()) {
            return Err(Error::StoppingOutOfRange {
                leaf,
                value: tau[leaf],
                depth: space.depth(),
            });
        }
        let mut nodes = Vec::new();
        let mut leaf = 0;
        while leaf < tau.len() {
            let t = tau[leaf];
            let node = space.ancestor_at(leaf, t);
            let span = space.leaf_span(node);
            if span.start != leaf || tau[span.clone()].iter().any(|&s| s != t) {
                return Ok(None);
            }
            nodes.push(node);
            leaf = span.end;
        }
        Ok(Some(StoppingTime {
            nodes,
            leaf_depth: tau.to_vec(),
        }))
    }

    pub fn from_antichain(space: &TreeSpace, nodes: &[NodeId]) -> Result<Self> {
        let mut leaf_depth = vec![usize::MAX; space.leaf_count()];
        for &node in nodes {
            if node >= space.node_count() {
                return Err(Error::InvalidParameter(format!("node {node} out of range")));
            }
            for leaf in space.leaf_span(node) {
                if leaf_depth[leaf] != usize::MAX {
                    return Err(Error::InvalidAntichain { leaf });
                }
                leaf_depth[leaf] = space.node_depth(node);
            }
        }
        if let Some(leaf) = leaf_depth.iter().position(|&d| d == usize::MAX) {
            return Err(Error::InvalidAntichain { leaf });
        }
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable_by_key(|&n| space.leaf_span(n).start);
        Ok(StoppingTime { nodes, leaf_depth })
    }

    pub fn constant(space: &TreeSpace, t: usize) -> Result<Self> {
        if t > space.depth() {
            return Err(Error::StoppingOutOfRange {
                leaf: 0,
                value: t,
                depth: space.depth(),
            });
        }
        Ok(StoppingTime {
            nodes: space.level(t).collect(),
            leaf_depth: vec![t; space.leaf_count()],
        })
    }

    /// `inf{j >= from : hit(X_j)} ∧ cap`.
    pub fn first_entry(
        space: &TreeSpace,
        process: &AdaptedProcess,
        from: usize,
        cap: usize,
        hit: impl Fn(f64) -> bool,
    ) -> Result<Self> {
        if from < process.start() || cap > process.end() || from > cap {
            return Err(Error::InvalidParameter(format!(
                "first entry window {from}..={cap} outside process range {}..={}",
                process.start(),
                process.end()
            )));
        }
        let tau: Vec<usize> = (0..space.leaf_count())
            .map(|leaf| {
                (from..cap)
                    .find(|&j| hit(process.value(space, j, space.ancestor_at(leaf, j))))
                    .unwrap_or(cap)
            })
            .collect();
        Ok(Self::from_values(space, &tau)?.expect("first entry times are stopping times"))
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn values(&self) -> &[usize] {
        &self.leaf_depth
    }

    pub fn at(&self, leaf: usize) -> usize {
        self.leaf_depth[leaf]
    }

    pub fn max_value(&self) -> usize {
        self.leaf_depth.iter().copied().max().unwrap_or(0)
    }

    pub fn min_value(&self) -> usize {
        self.leaf_depth.iter().copied().min().unwrap_or(0)
    }

    pub fn le(&self, other: &StoppingTime) -> bool {
        self.leaf_depth
            .iter()
            .zip(&other.leaf_depth)
            .all(|(a, b)| a <= b)
    }

    pub fn min(&self, space: &TreeSpace, other: &StoppingTime) -> Self {
        let tau: Vec<usize> = self
            .leaf_depth
            .iter()
            .zip(&other.leaf_depth)
            .map(|(&a, &b)| a.min(b))
            .collect();
        Self::from_values(space, &tau)
            .ok()
            .flatten()
            .expect("minimum of stopping times is a stopping time")
    }

    /// Whether `event` belongs to `F_T`, i.e. is a union of antichain subtrees.
    pub fn is_measurable(&self, space: &TreeSpace, event: &Event) -> bool {
        self.nodes.iter().all(|&n| {
            let span = space.leaf_span(n);
            let first = event.contains(span.start);
            span.into_iter().all(|l| event.contains(l) == first)
        })
    }
}
