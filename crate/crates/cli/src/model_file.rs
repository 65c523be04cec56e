//! JSON model and template files.
//!
//! A model file declares a product tree (depth, outcome values), a global
//! kernel list applied at every node, optional per-node overrides keyed by
//! node label (`"root"`, `"0"`, `"1.0"`, ...), and named variables,
//! processes, events, stopping times and check configurations. Every name
//! is resolved when the file is loaded.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sublex::distribution::StepTemplate;
use sublex::martingale::partial_sum_process;
use sublex::{AdaptedProcess, CredalKernel, CredalModel, Event, RandomVariable, StoppingTime, TreeSpace};

use crate::error::{CliError, Result};

pub const MODEL_SCHEMA: &str = "sublex-model/1";
pub const TEMPLATE_SCHEMA: &str = "sublex-template/1";

/// Kernel sums within this distance of one are renormalized.
pub const FILE_KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: String,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching: Option<usize>,
    pub outcomes: Vec<f64>,
    pub kernels: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub variables: BTreeMap<String, VarDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub processes: BTreeMap<String, ProcessDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub events: BTreeMap<String, EventDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stopping_times: BTreeMap<String, StoppingDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub checks: BTreeMap<String, CheckDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateFile {
    pub schema: String,
    pub outcomes: Vec<f64>,
    pub kernels: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VarDef {
    /// `X_i`
    Step(usize),
    /// `X_1 + … + X_n`
    Sum(usize),
    Values(Vec<f64>),
    Constant(f64),
    Indicator(String),
    Add(Vec<String>),
    Mul(Vec<String>),
    Scale { of: String, by: f64 },
    Shift { of: String, by: f64 },
    Apply { of: String, f: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessDef {
    /// `S_0 = 0, S_j = Σ_{i<=j} X_i`, centred by `E(X_i)` unless `centered` is false.
    PartialSums {
        #[serde(default)]
        steps: Option<usize>,
        #[serde(default = "yes")]
        centered: bool,
    },
    /// `t ↦ E_t(X)`
    Conditional(String),
    Variables { start: usize, of: Vec<String> },
    Levels { start: usize, values: Vec<Vec<f64>> },
    Apply { of: String, f: String },
    Window { of: String, from: usize, to: usize },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EventDef {
    Predicate { var: String, op: String, value: f64 },
    Leaves(Vec<usize>),
    Nodes(Vec<String>),
    Complement(String),
    Union(Vec<String>),
    Intersection(Vec<String>),
    All,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StoppingDef {
    Constant(usize),
    /// `inf{j >= from : X_j op value} ∧ cap`
    FirstEntry {
        process: String,
        op: String,
        value: f64,
        #[serde(default)]
        from: Option<usize>,
        #[serde(default)]
        cap: Option<usize>,
    },
    Values(Vec<usize>),
    Nodes(Vec<String>),
}

/// Stored parameters for `check --config NAME`; flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDef {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_s: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// A parsed model with every named object built.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub file: ModelFile,
    pub model: CredalModel,
    pub variables: BTreeMap<String, RandomVariable>,
    pub processes: BTreeMap<String, AdaptedProcess>,
    pub events: BTreeMap<String, Event>,
    pub stopping_times: BTreeMap<String, StoppingTime>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn schema_of(path: &Path, text: &str) -> Result<String> {
    #[derive(Deserialize)]
    struct Probe {
        schema: Option<String>,
    }
    let probe: Probe = parse_json(path, text)?;
    probe.schema.ok_or_else(|| CliError::Schema {
        location: format!("{}: schema", path.display()),
        message: format!("missing field; expected {MODEL_SCHEMA:?} or {TEMPLATE_SCHEMA:?}"),
    })
}

pub fn parse_model(path: &Path) -> Result<LoadedModel> {
    let text = read(path)?;
    let schema = schema_of(path, &text)?;
    if schema != MODEL_SCHEMA {
        return Err(CliError::Schema {
            location: "schema".into(),
            message: format!("expected {MODEL_SCHEMA:?}, found {schema:?}"),
        });
    }
    let file: ModelFile = parse_json(path, &text)?;
    load(file)
}

/// A step template from either a template file or a model file without
/// per-node overrides.
pub fn parse_template(path: &Path) -> Result<StepTemplate> {
    let text = read(path)?;
    let (outcomes, kernels) = match schema_of(path, &text)?.as_str() {
        TEMPLATE_SCHEMA => {
            let f: TemplateFile = parse_json(path, &text)?;
            (f.outcomes, f.kernels)
        }
        MODEL_SCHEMA => {
            let f: ModelFile = parse_json(path, &text)?;
            if !f.overrides.is_empty() {
                return Err(CliError::Schema {
                    location: "overrides".into(),
                    message: "a simulation template needs one kernel list for every step".into(),
                });
            }
            (f.outcomes, f.kernels)
        }
        other => {
            return Err(CliError::Schema {
                location: "schema".into(),
                message: format!("expected {TEMPLATE_SCHEMA:?} or {MODEL_SCHEMA:?}, found {other:?}"),
            })
        }
    };
    let kernels = normalize_list("kernels", "every step", &kernels)?;
    StepTemplate::new(outcomes, kernels).map_err(|e| CliError::engine("template", e))
}

fn normalize_list(location: &str, node: &str, list: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if list.is_empty() {
        return Err(CliError::Kernel {
            location: location.into(),
            node: node.into(),
            reason: "empty kernel list".into(),
        });
    }
    list.iter()
        .enumerate()
        .map(|(k, p)| {
            let bad = |reason: String| CliError::Kernel {
                location: format!("{location}[{k}]"),
                node: node.into(),
                reason,
            };
            if p.iter().any(|q| !q.is_finite() || *q < 0.0) {
                return Err(bad("negative or non-finite entry".into()));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > FILE_KERNEL_TOL {
                return Err(bad(format!("entries sum to {sum}, not 1 within {FILE_KERNEL_TOL:e}")));
            }
            if (sum - 1.0).abs() > sublex::credal::KERNEL_SUM_TOL {
                Ok(p.iter().map(|q| q / sum).collect())
            } else {
                Ok(p.clone())
            }
        })
        .collect()
}

fn parse_label(space: &TreeSpace, label: &str) -> Option<usize> {
    let node = parse_label_any(space, label)?;
    // reject non-canonical spellings such as "01"
    (space.label(node) == label).then_some(node)
}

pub fn load(file: ModelFile) -> Result<LoadedModel> {
    if let Some(b) = file.branching {
        if b != file.outcomes.len() {
            return Err(CliError::Schema {
                location: "branching".into(),
                message: format!("{b} does not match the {} outcome values", file.outcomes.len()),
            });
        }
    }
    if file.depth == 0 {
        return Err(CliError::Schema {
            location: "depth".into(),
            message: "must be at least 1".into(),
        });
    }
    let space = TreeSpace::product(file.depth, file.outcomes.len(), &file.outcomes)
        .map_err(|e| CliError::engine("space", e))?;
    let global = normalize_list("kernels", "root (global template)", &file.kernels)?;
    let mut per_node: HashMap<usize, Vec<Vec<f64>>> = HashMap::new();
    for (label, list) in &file.overrides {
        let location = format!("overrides.{label:?}");
        let node = parse_label(&space, label).filter(|&n| !space.is_leaf(n)).ok_or_else(|| CliError::Schema {
            location: location.clone(),
            message: "not an internal node label".into(),
        })?;
        per_node.insert(node, normalize_list(&location, label, list)?);
    }
    let kernel = CredalKernel::from_fn(&space, |node| per_node.get(&node).unwrap_or(&global).clone())
        .map_err(|e| match e {
            sublex::Error::InvalidKernel { node, reason } => CliError::Kernel {
                location: "kernels".into(),
                node,
                reason,
            },
            e => CliError::engine("kernels", e),
        })?;
    let model = CredalModel::new(space, kernel).map_err(|e| CliError::engine("model", e))?;

    let mut r = Resolver {
        file: &file,
        model: &model,
        variables: BTreeMap::new(),
        processes: BTreeMap::new(),
        events: BTreeMap::new(),
        stopping_times: BTreeMap::new(),
        stack: Vec::new(),
    };
    for name in file.variables.keys() {
        r.variable(&format!("variables.{name}"), name)?;
    }
    for name in file.events.keys() {
        r.event(&format!("events.{name}"), name)?;
    }
    for name in file.processes.keys() {
        r.process(&format!("processes.{name}"), name)?;
    }
    for name in file.stopping_times.keys() {
        r.stopping(&format!("stopping_times.{name}"), name)?;
    }
    for (name, c) in &file.checks {
        let loc = format!("checks.{name}");
        if let Some(p) = &c.process {
            r.process(&loc, p)?;
        }
        for v in c.var.iter().chain(c.other.iter()).chain(c.dominator.iter()).chain(c.vars.iter().flatten()) {
            r.variable(&loc, v)?;
        }
        for e in c.event.iter().chain(c.events.iter().flatten()) {
            r.event(&loc, e)?;
        }
        for s in c.stop_s.iter().chain(c.stop_t.iter()) {
            r.stopping(&loc, s)?;
        }
    }
    let (variables, processes, events, stopping_times) = (r.variables, r.processes, r.events, r.stopping_times);
    Ok(LoadedModel {
        file,
        model,
        variables,
        processes,
        events,
        stopping_times,
    })
}

struct Resolver<'a> {
    file: &'a ModelFile,
    model: &'a CredalModel,
    variables: BTreeMap<String, RandomVariable>,
    processes: BTreeMap<String, AdaptedProcess>,
    events: BTreeMap<String, Event>,
    stopping_times: BTreeMap<String, StoppingTime>,
    stack: Vec<(&'static str, String)>,
}

/// Pointwise functions accepted by `apply`.
pub fn pointwise(name: &str) -> Option<fn(f64) -> f64> {
    Some(match name {
        "identity" => |x| x,
        "square" => |x| x * x,
        "cube" => |x| x * x * x,
        "abs" => f64::abs,
        "pos" => |x: f64| x.max(0.0),
        "negpart" => |x: f64| (-x).max(0.0),
        "neg" => |x: f64| -x,
        "exp" => f64::exp,
        _ => return None,
    })
}

pub fn comparison(op: &str) -> Option<fn(f64, f64) -> bool> {
    Some(match op {
        ">=" => |a, b| a >= b,
        ">" => |a, b| a > b,
        "<=" => |a, b| a <= b,
        "<" => |a, b| a < b,
        "==" => |a, b| a == b,
        "!=" => |a, b| a != b,
        _ => return None,
    })
}

impl Resolver<'_> {
    fn enter(&mut self, location: &str, kind: &'static str, name: &str) -> Result<()> {
        if self.stack.iter().any(|(k, n)| *k == kind && n == name) {
            return Err(CliError::Cycle {
                location: location.into(),
                kind,
                name: name.into(),
            });
        }
        self.stack.push((kind, name.to_string()));
        Ok(())
    }

    fn schema(location: &str, message: impl Into<String>) -> CliError {
        CliError::Schema {
            location: location.into(),
            message: message.into(),
        }
    }

    fn engine(location: &str, e: sublex::Error) -> CliError {
        CliError::engine(location, e)
    }

    fn variable(&mut self, location: &str, name: &str) -> Result<RandomVariable> {
        if let Some(v) = self.variables.get(name) {
            return Ok(v.clone());
        }
        let def = self.file.variables.get(name).ok_or_else(|| CliError::Unresolved {
            location: location.into(),
            kind: "variable",
            name: name.into(),
        })?;
        self.enter(location, "variable", name)?;
        let loc = format!("variables.{name}");
        let space = self.model.space();
        let v = match def {
            VarDef::Step(i) => space.step_variable(*i).map_err(|e| Self::engine(&loc, e))?,
            VarDef::Sum(n) => {
                if *n > space.depth() {
                    return Err(Self::schema(&loc, format!("sum of {n} steps on depth {}", space.depth())));
                }
                RandomVariable::from_fn(space, |_, o| o[..*n].iter().sum())
            }
            VarDef::Values(v) => RandomVariable::on(space, v.clone()).map_err(|e| Self::engine(&loc, e))?,
            VarDef::Constant(c) => RandomVariable::constant(space, *c),
            VarDef::Indicator(e) => self.event(&loc, e)?.indicator(),
            VarDef::Add(names) | VarDef::Mul(names) => {
                if names.is_empty() {
                    return Err(Self::schema(&loc, "empty operand list"));
                }
                let add = matches!(def, VarDef::Add(_));
                let mut acc = self.variable(&loc, &names[0])?;
                for n in &names[1..] {
                    let next = self.variable(&loc, n)?;
                    acc = if add { &acc + &next } else { &acc * &next };
                }
                acc
            }
            VarDef::Scale { of, by } => &self.variable(&loc, of)? * *by,
            VarDef::Shift { of, by } => &self.variable(&loc, of)? + *by,
            VarDef::Apply { of, f } => {
                let f = pointwise(f).ok_or_else(|| Self::schema(&loc, format!("unknown function {f:?}")))?;
                self.variable(&loc, of)?.map(f)
            }
        };
        if v.values().iter().any(|x| !x.is_finite()) {
            return Err(Self::schema(&loc, "non-finite values"));
        }
        self.stack.pop();
        self.variables.insert(name.into(), v.clone());
        Ok(v)
    }

    fn event(&mut self, location: &str, name: &str) -> Result<Event> {
        if let Some(e) = self.events.get(name) {
            return Ok(e.clone());
        }
        let def = self.file.events.get(name).ok_or_else(|| CliError::Unresolved {
            location: location.into(),
            kind: "event",
            name: name.into(),
        })?;
        self.enter(location, "event", name)?;
        let loc = format!("events.{name}");
        let space = self.model.space();
        let e = match def {
            EventDef::Predicate { var, op, value } => {
                let cmp = comparison(op).ok_or_else(|| Self::schema(&loc, format!("unknown operator {op:?}")))?;
                let x = self.variable(&loc, var)?;
                Event::from_predicate(space, |leaf, _| cmp(x.get(leaf), *value))
            }
            EventDef::Leaves(l) => Event::from_leaves(space, l).map_err(|e| Self::engine(&loc, e))?,
            EventDef::Nodes(labels) => {
                let nodes = labels
                    .iter()
                    .map(|l| parse_label_any(space, l).ok_or_else(|| Self::schema(&loc, format!("unknown node {l:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                Event::from_nodes(space, &nodes)
            }
            EventDef::Complement(n) => self.event(&loc, n)?.complement(),
            EventDef::Union(names) | EventDef::Intersection(names) => {
                let union = matches!(def, EventDef::Union(_));
                let mut acc = if union { Event::empty(space) } else { Event::full(space) };
                for n in names {
                    let next = self.event(&loc, n)?;
                    acc = if union {
                        acc.union(space, &next)
                    } else {
                        acc.intersection(space, &next)
                    };
                }
                acc
            }
            EventDef::All => Event::full(space),
            EventDef::None => Event::empty(space),
        };
        self.stack.pop();
        self.events.insert(name.into(), e.clone());
        Ok(e)
    }

    fn process(&mut self, location: &str, name: &str) -> Result<AdaptedProcess> {
        if let Some(p) = self.processes.get(name) {
            return Ok(p.clone());
        }
        let def = self.file.processes.get(name).ok_or_else(|| CliError::Unresolved {
            location: location.into(),
            kind: "process",
            name: name.into(),
        })?;
        self.enter(location, "process", name)?;
        let loc = format!("processes.{name}");
        let space = self.model.space();
        let p = match def {
            ProcessDef::PartialSums { steps, centered } => {
                let n = steps.unwrap_or(space.depth());
                if n == 0 || n > space.depth() {
                    return Err(Self::schema(&loc, format!("steps must lie in 1..={}", space.depth())));
                }
                let xs: Vec<RandomVariable> = (1..=n).map(|i| space.step_variable(i).expect("in range")).collect();
                if *centered {
                    partial_sum_process(self.model, &xs).map_err(|e| Self::engine(&loc, e))?
                } else {
                    let mut sums = vec![RandomVariable::constant(space, 0.0)];
                    for x in &xs {
                        let next = &sums[sums.len() - 1] + x;
                        sums.push(next);
                    }
                    AdaptedProcess::from_leaf_variables(space, 0, &sums).map_err(|e| Self::engine(&loc, e))?
                }
            }
            ProcessDef::Conditional(v) => {
                let x = self.variable(&loc, v)?;
                self.model.conditional_process(&x)
            }
            ProcessDef::Variables { start, of } => {
                let vars = of.iter().map(|v| self.variable(&loc, v)).collect::<Result<Vec<_>>>()?;
                AdaptedProcess::from_leaf_variables(space, *start, &vars).map_err(|e| Self::engine(&loc, e))?
            }
            ProcessDef::Levels { start, values } => {
                AdaptedProcess::from_levels(space, *start, values.clone()).map_err(|e| Self::engine(&loc, e))?
            }
            ProcessDef::Apply { of, f } => {
                let f = pointwise(f).ok_or_else(|| Self::schema(&loc, format!("unknown function {f:?}")))?;
                self.process(&loc, of)?.map(f)
            }
            ProcessDef::Window { of, from, to } => {
                self.process(&loc, of)?.window(*from, *to).map_err(|e| Self::engine(&loc, e))?
            }
        };
        self.stack.pop();
        self.processes.insert(name.into(), p.clone());
        Ok(p)
    }

    fn stopping(&mut self, location: &str, name: &str) -> Result<StoppingTime> {
        if let Some(s) = self.stopping_times.get(name) {
            return Ok(s.clone());
        }
        let def = self.file.stopping_times.get(name).ok_or_else(|| CliError::Unresolved {
            location: location.into(),
            kind: "stopping time",
            name: name.into(),
        })?;
        let loc = format!("stopping_times.{name}");
        let space = self.model.space();
        let s = match def {
            StoppingDef::Constant(t) => StoppingTime::constant(space, *t).map_err(|e| Self::engine(&loc, e))?,
            StoppingDef::FirstEntry {
                process,
                op,
                value,
                from,
                cap,
            } => {
                let cmp = comparison(op).ok_or_else(|| Self::schema(&loc, format!("unknown operator {op:?}")))?;
                let p = self.process(&loc, process)?;
                let from = from.unwrap_or(p.start());
                let cap = cap.unwrap_or(p.end());
                let v = *value;
                StoppingTime::first_entry(space, &p, from, cap, |x| cmp(x, v)).map_err(|e| Self::engine(&loc, e))?
            }
            StoppingDef::Values(v) => StoppingTime::from_values(space, v)
                .map_err(|e| Self::engine(&loc, e))?
                .ok_or_else(|| Self::schema(&loc, "not a stopping time: {T <= t} is not F_t-measurable"))?,
            StoppingDef::Nodes(labels) => {
                let nodes = labels
                    .iter()
                    .map(|l| parse_label_any(space, l).ok_or_else(|| Self::schema(&loc, format!("unknown node {l:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                StoppingTime::from_antichain(space, &nodes).map_err(|e| Self::engine(&loc, e))?
            }
        };
        self.stopping_times.insert(name.into(), s.clone());
        Ok(s)
    }
}

/// Any node label, leaves included.
fn parse_label_any(space: &TreeSpace, label: &str) -> Option<usize> {
    if label == "root" {
        return Some(0);
    }
    let path: Option<Vec<usize>> = label.split('.').map(|p| p.parse().ok()).collect();
    space.node_by_path(&path?)
}

/// The file for a model on a product space; fails for other trees.
pub fn write_model(model: &CredalModel) -> Result<ModelFile> {
    let space = model.space();
    let not_product = || CliError::Argument("only product spaces can be written as model files".into());
    let root_children = space.children(0);
    let outcomes: Vec<f64> = root_children.clone().map(|c| space.edge_value(c)).collect();
    for node in 0..space.node_count() {
        if space.is_leaf(node) {
            continue;
        }
        let vals: Vec<f64> = space.children(node).map(|c| space.edge_value(c)).collect();
        if vals.len() != outcomes.len() || vals.iter().zip(&outcomes).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(not_product());
        }
    }
    let global = model.kernels_at(0).to_vec();
    let mut overrides = BTreeMap::new();
    for node in 0..space.node_count() {
        if !space.is_leaf(node) && model.kernels_at(node) != global.as_slice() {
            overrides.insert(space.label(node), model.kernels_at(node).to_vec());
        }
    }
    Ok(ModelFile {
        schema: MODEL_SCHEMA.into(),
        depth: space.depth(),
        branching: Some(outcomes.len()),
        outcomes,
        kernels: global,
        overrides,
        variables: BTreeMap::new(),
        processes: BTreeMap::new(),
        events: BTreeMap::new(),
        stopping_times: BTreeMap::new(),
        checks: BTreeMap::new(),
    })
}

pub fn to_json(file: &ModelFile) -> String {
    serde_json::to_string_pretty(file).expect("model files serialize") + "\n"
}
