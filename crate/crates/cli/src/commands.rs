use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sublex::credal::TOL;
use sublex::distribution::{
    approximate_event, build_iid_model, check_identical, check_independence, BatteryReport, StepTemplate,
    TestFunctionBattery,
};
use sublex::inequality::{
    doob_martingale, doob_submartingale_max, doob_submartingale_min, kolmogorov_inequality, InequalityReport,
};
use sublex::integrability::{dominated_convergence_check, lb_tail_test, ui_check};
use sublex::lln::{
    borel_cantelli_bound, cluster_diagnostic, mean_certain_slln, series_convergence_check,
    truncation_condition_check, weighted_slln_check, BandSource, ConvergenceVerdict, Normalizer, ScenarioStrategy,
    SimulationConfig, Trajectory, TruncationVerdict, Weights,
};
use sublex::martingale::{classify_with_tolerance, jensen_transform_check, optional_sampling_check, ConvexFn};
use sublex::{AdaptedProcess, Event, RandomVariable, StoppingTime};

use crate::error::{CliError, Result};
use crate::model_file::{parse_model, parse_template, to_json, write_model, CheckDef, LoadedModel};
use crate::report::{to_value, RunReport, Status};

#[derive(Debug, Parser)]
#[command(name = "sublex", version, about = "Sublinear expectations on finite trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper expectation of a variable, or capacity of an event.
    Expect(ExpectArgs),
    /// Conditional expectation E_t(X) on the depth-t atoms.
    Cond(CondArgs),
    /// Classify a process as (sub/super)martingale.
    Classify(ClassifyArgs),
    /// Verify an inequality or structural property.
    Check(CheckArgs),
    /// Seeded strong-law simulations.
    Simulate(SimulateArgs),
    /// Write the canonical form of a model file.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model file (sublex-model/1).
    #[arg(long)]
    pub model: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExpectArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, conflicts_with = "event", required_unless_present = "event")]
    pub var: Option<String>,
    #[arg(long)]
    pub event: Option<String>,
}

#[derive(Debug, Args)]
pub struct CondArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub var: String,
    #[arg(long)]
    pub t: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub process: String,
    #[arg(long, default_value_t = TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    DoobMax,
    DoobMin,
    DoobMart,
    Kolmogorov,
    OptionalSampling,
    Jensen,
    Independence,
    Identical,
    Ui,
    Tail,
    Dct,
    BorelCantelli,
    ApproxEvent,
}

impl CheckKind {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub kind: CheckKind,
    #[command(flatten)]
    pub common: Common,
    /// Take defaults from a named entry of the model's `checks`.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub process: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub var: Option<String>,
    /// Comma-separated variable names.
    #[arg(long, value_delimiter = ',')]
    pub vars: Option<Vec<String>>,
    #[arg(long)]
    pub other: Option<String>,
    /// Model holding `--other` (identical distribution); defaults to `--model`.
    #[arg(long)]
    pub other_model: Option<PathBuf>,
    #[arg(long)]
    pub event: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub events: Option<Vec<String>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub stop_s: Option<String>,
    #[arg(long)]
    pub stop_t: Option<String>,
    #[arg(long)]
    pub dominator: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Slln,
    Weighted,
    Series,
    Cluster,
    Truncation,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub kind: SimKind,
    /// Template (sublex-template/1) or model file without overrides.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 32)]
    pub reps: usize,
    /// Defaults to steps/10.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Normaliser: n, sqrt, log, pow:ALPHA or custom:FILE (whitespace-separated values).
    #[arg(long, default_value = "n")]
    pub bn: String,
    /// Series weights: 1, harmonic or pow:ALPHA.
    #[arg(long, default_value = "harmonic")]
    pub weights: String,
    /// Strategy list, e.g. "const:0,periodic:0,1/10,adv:up" or "default".
    #[arg(long)]
    pub strategies: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write sampled trajectories as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Points per trajectory when --csv is given.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs, prints, and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn out_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Expect(a) => a.common.out.as_deref(),
        Command::Cond(a) => a.common.out.as_deref(),
        Command::Classify(a) => a.common.out.as_deref(),
        Command::Check(a) => a.common.out.as_deref(),
        Command::Simulate(a) => a.out.as_deref(),
        Command::Export(a) => a.out.as_deref(),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Output {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs a command; precondition failures still produce a report.
pub fn execute(cmd: &Command) -> Result<i32> {
    if let Command::Export(a) = cmd {
        let m = parse_model(&a.model)?;
        let mut file = write_model(&m.model)?;
        file.variables = m.file.variables;
        file.processes = m.file.processes;
        file.events = m.file.events;
        file.stopping_times = m.file.stopping_times;
        file.checks = m.file.checks;
        emit(&to_json(&file), a.out.as_deref())?;
        return Ok(0);
    }
    let start = Instant::now();
    let mut report = RunReport::new(command_name(cmd));
    match dispatch(cmd, &mut report) {
        Ok(()) => {}
        Err(CliError::Engine { context, source }) if source.is_precondition() => {
            if let sublex::Error::Classification { class, .. } = &source {
                report.result = json!({ "classification": to_value(class) });
            }
            report.error = Some(format!("{context}: {source}"));
            report.set_status(Status::PreconditionFailed);
            eprintln!("precondition failed: {context}: {source}");
        }
        Err(e) => return Err(e),
    }
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    emit(&report.to_json(), out_path(cmd))?;
    Ok(report.exit_code)
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Expect(_) => "expect".into(),
        Command::Cond(_) => "cond".into(),
        Command::Classify(_) => "classify".into(),
        Command::Check(a) => format!("check {}", a.kind.name()),
        Command::Simulate(a) => format!(
            "simulate {}",
            a.kind.to_possible_value().expect("named").get_name()
        ),
        Command::Export(_) => "export".into(),
    }
}

fn load(report: &mut RunReport, path: &Path) -> Result<LoadedModel> {
    let m = parse_model(path)?;
    report.model = Some(path.display().to_string());
    report.fingerprint = Some(m.model.fingerprint());
    Ok(m)
}

fn dispatch(cmd: &Command, report: &mut RunReport) -> Result<()> {
    match cmd {
        Command::Expect(a) => {
            let m = load(report, &a.common.model)?;
            if let Some(name) = &a.var {
                let x = variable(&m, name)?;
                report.param("var", name);
                let upper = m.model.upper_expectation(&x);
                let lower = m.model.conjugate_expectation(&x);
                let witness = m.model.maximizing_strategy(&x);
                report.result = json!({
                    "upper": upper,
                    "lower": lower,
                    "mean_certain": (upper - lower).abs() <= TOL,
                    "witness_value": witness.expectation(&x),
                });
            } else if let Some(name) = &a.event {
                let e = event(&m, name)?;
                report.param("event", name);
                let (upper, lower) = m.model.capacity_pair(&e);
                report.result = json!({ "capacity": upper, "lower_capacity": lower });
            }
            Ok(())
        }
        Command::Cond(a) => {
            let m = load(report, &a.common.model)?;
            let x = variable(&m, &a.var)?;
            report.param("var", &a.var);
            report.param("t", a.t);
            let values = m
                .model
                .conditional_expectation(&x, a.t)
                .map_err(|e| CliError::engine("cond", e))?;
            let space = m.model.space();
            let atoms: Vec<Value> = space
                .level(a.t)
                .zip(&values)
                .map(|(node, v)| json!({ "atom": space.label(node), "value": v }))
                .collect();
            report.result = json!({ "t": a.t, "atoms": atoms });
            Ok(())
        }
        Command::Classify(a) => {
            let m = load(report, &a.common.model)?;
            let x = process(&m, &a.process)?;
            report.param("process", &a.process);
            report.param("tol", a.tol);
            report.result = to_value(classify_with_tolerance(&m.model, &x, a.tol));
            Ok(())
        }
        Command::Check(a) => check(a, report),
        Command::Simulate(a) => simulate(a, report),
        Command::Export(_) => unreachable!("handled in execute"),
    }
}

fn lookup<'a, T>(map: &'a std::collections::BTreeMap<String, T>, kind: &'static str, name: &str) -> Result<&'a T> {
    map.get(name).ok_or_else(|| CliError::Unresolved {
        location: "command line".into(),
        kind,
        name: name.into(),
    })
}

fn variable(m: &LoadedModel, name: &str) -> Result<RandomVariable> {
    lookup(&m.variables, "variable", name).cloned()
}

fn event(m: &LoadedModel, name: &str) -> Result<Event> {
    lookup(&m.events, "event", name).cloned()
}

fn process(m: &LoadedModel, name: &str) -> Result<AdaptedProcess> {
    lookup(&m.processes, "process", name).cloned()
}

fn stopping(m: &LoadedModel, name: &str) -> Result<StoppingTime> {
    lookup(&m.stopping_times, "stopping time", name).cloned()
}

fn need<T: Clone>(v: &Option<T>, flag: &str, kind: CheckKind) -> Result<T> {
    v.clone()
        .ok_or_else(|| CliError::Argument(format!("check {} needs --{flag}", kind.name())))
}

/// Command-line values override the stored configuration.
fn merged(a: &CheckArgs, m: &LoadedModel) -> Result<CheckDef> {
    let mut c = match &a.config {
        Some(name) => {
            let c = lookup(&m.file.checks, "check", name)?.clone();
            if c.kind != a.kind.name() {
                return Err(CliError::Argument(format!(
                    "check {name:?} is a {} check, not {}",
                    c.kind,
                    a.kind.name()
                )));
            }
            c
        }
        None => CheckDef {
            kind: a.kind.name(),
            ..Default::default()
        },
    };
    macro_rules! over {
        ($($f:ident),*) => { $( if a.$f.is_some() { c.$f = a.$f.clone(); } )* };
    }
    over!(process, lambda, eps, var, vars, other, event, events, n, t, phi, p, stop_s, stop_t, dominator, tol);
    Ok(c)
}

fn eng(kind: CheckKind) -> impl Fn(sublex::Error) -> CliError {
    move |e| CliError::engine(format!("check {}", kind.name()), e)
}

/// Re-derives bound verdicts at a caller tolerance.
fn retolerate(r: &mut InequalityReport, tol: f64) {
    for b in &mut r.bounds {
        b.holds = b.slack >= -tol;
    }
    r.verdict = r.bounds.iter().all(|b| b.holds || b.diagnostic);
}

fn retolerate_battery(r: &mut BatteryReport, tol: f64) {
    r.witness = r.entries.iter().find(|e| !(e.discrepancy <= tol)).map(|e| e.phi.clone());
    r.pass = r.witness.is_none();
}

fn battery_for(arity: usize, vars: &[&RandomVariable]) -> TestFunctionBattery {
    let values: Vec<f64> = vars.iter().flat_map(|v| v.values().iter().copied()).collect();
    TestFunctionBattery::for_values(arity, &values)
}

fn check(a: &CheckArgs, report: &mut RunReport) -> Result<()> {
    let m = load(report, &a.common.model)?;
    let c = merged(a, &m)?;
    let kind = a.kind;
    let tol = c.tol.unwrap_or(TOL);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::Argument("--tol must be nonnegative".into()));
    }
    if let Some(name) = &a.config {
        report.param("config", name);
    }
    report.param("tol", tol);
    let model = &m.model;
    let e = eng(kind);
    let (result, pass): (Value, bool) = match kind {
        CheckKind::DoobMax | CheckKind::DoobMin | CheckKind::DoobMart => {
            let name = need(&c.process, "process", kind)?;
            let lambda = need(&c.lambda, "lambda", kind)?;
            report.param("process", &name);
            report.param("lambda", lambda);
            let x = process(&m, &name)?;
            let mut r = match kind {
                CheckKind::DoobMax => doob_submartingale_max(model, &x, lambda),
                CheckKind::DoobMin => doob_submartingale_min(model, &x, lambda),
                _ => doob_martingale(model, &x, lambda),
            }
            .map_err(&e)?;
            retolerate(&mut r, tol);
            (to_value(&r), r.verdict)
        }
        CheckKind::Kolmogorov => {
            let eps = need(&c.eps, "eps", kind)?;
            let steps: Vec<RandomVariable> = match &c.vars {
                Some(names) => names.iter().map(|n| variable(&m, n)).collect::<Result<_>>()?,
                None => (1..=model.space().depth())
                    .map(|i| model.space().step_variable(i).expect("in range"))
                    .collect(),
            };
            report.param("eps", eps);
            report.param("vars", c.vars.clone().unwrap_or_else(|| vec!["steps".into()]));
            let mut r = kolmogorov_inequality(model, &steps, eps, None).map_err(&e)?;
            retolerate(&mut r, tol);
            (to_value(&r), r.verdict)
        }
        CheckKind::OptionalSampling => {
            let name = need(&c.process, "process", kind)?;
            let (s_name, t_name) = (need(&c.stop_s, "stop-s", kind)?, need(&c.stop_t, "stop-t", kind)?);
            report.param("process", &name);
            report.param("stop_s", &s_name);
            report.param("stop_t", &t_name);
            let mut r = optional_sampling_check(model, &process(&m, &name)?, &stopping(&m, &s_name)?, &stopping(&m, &t_name)?)
                .map_err(&e)?;
            r.holds = r.min_slack >= -tol;
            (to_value(&r), r.holds)
        }
        CheckKind::Jensen => {
            let name = need(&c.var, "var", kind)?;
            let t = need(&c.t, "t", kind)?;
            let x = variable(&m, &name)?;
            let phis = match &c.phi {
                Some(p) => vec![ConvexFn::from_name(p).map_err(&e)?],
                None => ConvexFn::battery(),
            };
            report.param("var", &name);
            report.param("t", t);
            report.param("phi", phis.iter().map(|p| p.name()).collect::<Vec<_>>());
            let mut rows = Vec::new();
            let mut all = true;
            for phi in phis {
                let mut r = jensen_transform_check(model, &x, t, phi).map_err(&e)?;
                let lhs = model
                    .conditional_expectation(&x.map(|v| phi.apply(v)), t)
                    .map_err(&e)?;
                r.holds = r.slacks.iter().zip(&lhs).all(|(s, l)| *s >= -tol * (1.0 + l.abs()));
                all &= r.holds;
                rows.push(r);
            }
            (to_value(&rows), all)
        }
        CheckKind::Independence => {
            let xs_names = need(&c.vars, "vars", kind)?;
            let y_name = need(&c.var, "var", kind)?;
            let xs: Vec<RandomVariable> = xs_names.iter().map(|n| variable(&m, n)).collect::<Result<_>>()?;
            let y = variable(&m, &y_name)?;
            report.param("vars", &xs_names);
            report.param("var", &y_name);
            let mut refs: Vec<&RandomVariable> = xs.iter().collect();
            refs.push(&y);
            let battery = battery_for(xs.len(), &refs);
            let mut r = check_independence(model, &xs, &y, &battery).map_err(&e)?;
            retolerate_battery(&mut r, tol);
            (to_value(&r), r.pass)
        }
        CheckKind::Identical => {
            let x_name = need(&c.var, "var", kind)?;
            let y_name = need(&c.other, "other", kind)?;
            let x = variable(&m, &x_name)?;
            let other = match &a.other_model {
                Some(p) => {
                    report.param("other_model", p.display().to_string());
                    parse_model(p)?
                }
                None => m.clone(),
            };
            let y = variable(&other, &y_name)?;
            report.param("var", &x_name);
            report.param("other", &y_name);
            let battery = battery_for(1, &[&x, &y]);
            let mut r = check_identical(model, &x, &other.model, &y, &battery).map_err(&e)?;
            retolerate_battery(&mut r, tol);
            (to_value(&r), r.pass)
        }
        CheckKind::Ui => {
            let names = match (&c.vars, &c.var) {
                (Some(v), _) => v.clone(),
                (None, Some(v)) => vec![v.clone()],
                _ => return Err(CliError::Argument("check ui needs --vars".into())),
            };
            let family: Vec<RandomVariable> = names.iter().map(|n| variable(&m, n)).collect::<Result<_>>()?;
            report.param("vars", &names);
            let r = ui_check(model, &family).map_err(&e)?;
            (to_value(&r), r.uniformly_integrable)
        }
        CheckKind::Tail => {
            let name = need(&c.var, "var", kind)?;
            let p = c.p.unwrap_or(1.0);
            report.param("var", &name);
            report.param("p", p);
            let r = lb_tail_test(model, &variable(&m, &name)?, p).map_err(&e)?;
            (to_value(&r), r.member)
        }
        CheckKind::Dct => {
            let names = need(&c.vars, "vars", kind)?;
            let lim = need(&c.var, "var", kind)?;
            let dom = need(&c.dominator, "dominator", kind)?;
            let xs: Vec<RandomVariable> = names.iter().map(|n| variable(&m, n)).collect::<Result<_>>()?;
            report.param("vars", &names);
            report.param("var", &lim);
            report.param("dominator", &dom);
            let r = dominated_convergence_check(model, &xs, &variable(&m, &lim)?, &variable(&m, &dom)?, tol)
                .map_err(&e)?;
            (to_value(&r), r.converged && r.bound_ok)
        }
        CheckKind::BorelCantelli => {
            let names = need(&c.events, "events", kind)?;
            let evs: Vec<Event> = names.iter().map(|n| event(&m, n)).collect::<Result<_>>()?;
            report.param("events", &names);
            let mut r = borel_cantelli_bound(model, &evs).map_err(&e)?;
            r.holds = r.tails.iter().all(|(_, u, s)| *u <= s + tol);
            (to_value(&r), r.holds)
        }
        CheckKind::ApproxEvent => {
            let name = need(&c.event, "event", kind)?;
            let n = need(&c.n, "n", kind)?;
            report.param("event", &name);
            report.param("n", n);
            let mut r = approximate_event(model, &event(&m, &name)?, n).map_err(&e)?;
            r.bound_holds = r.capacity_error <= r.mu_error + tol;
            (to_value(&r), r.bound_holds)
        }
    };
    report.result = result;
    report.set_status(Status::from_pass(pass));
    Ok(())
}

fn normalizer(spec: &str, steps: usize) -> Result<Normalizer> {
    if let Some(path) = spec.strip_prefix("custom:") {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })?;
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| CliError::Argument(format!("{path}: bad number {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() < steps {
            return Err(CliError::Argument(format!(
                "{path}: {} values for {steps} steps",
                values.len()
            )));
        }
        return Ok(Normalizer::Custom(values));
    }
    spec.parse().map_err(|e: sublex::Error| CliError::Argument(e.to_string()))
}

fn template_fingerprint(t: &StepTemplate) -> Result<String> {
    build_iid_model(t, 1)
        .map(|m| m.model.fingerprint())
        .map_err(|e| CliError::engine("template", e))
}

fn write_csv(path: &Path, trajectories: &[Trajectory]) -> Result<()> {
    let fail = |e: csv::Error| CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["strategy", "replication", "n", "S", "S_over_b"]).map_err(fail)?;
    for t in trajectories {
        for (n, s, sb) in &t.points {
            w.write_record([
                t.strategy.clone(),
                t.replication.to_string(),
                n.to_string(),
                s.to_string(),
                sb.to_string(),
            ])
            .map_err(fail)?;
        }
    }
    w.flush().map_err(|e| CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn verdict_status(v: &ConvergenceVerdict) -> Status {
    if v.diagnostic {
        Status::Diagnostic
    } else {
        Status::from_pass(v.pass)
    }
}

fn simulate(a: &SimulateArgs, report: &mut RunReport) -> Result<()> {
    let template = parse_template(&a.model)?;
    report.model = Some(a.model.display().to_string());
    report.fingerprint = Some(template_fingerprint(&template)?);
    let ctx = format!("simulate {}", a.kind.to_possible_value().expect("named").get_name());
    let e = |err: sublex::Error| CliError::engine(ctx.clone(), err);

    if a.kind == SimKind::Truncation {
        let r = truncation_condition_check(&BandSource::Template(template), None).map_err(e)?;
        let status = match r.verdict {
            TruncationVerdict::Finite | TruncationVerdict::FiniteTrend => Status::from_pass(r.tail_bound_holds),
            TruncationVerdict::DivergentTrend => Status::Violation,
            TruncationVerdict::Inconclusive => Status::Diagnostic,
        };
        report.result = to_value(&r);
        report.set_status(status);
        return Ok(());
    }

    let strategies = match &a.strategies {
        Some(s) => Some(ScenarioStrategy::parse_list(s, template.kernels().len()).map_err(|err| CliError::Argument(err.to_string()))?),
        None => None,
    };
    let default_tol = if a.kind == SimKind::Series { 0.05 } else { 0.02 };
    let config = SimulationConfig {
        steps: a.steps,
        replications: a.reps,
        seed: a.seed,
        strategies,
        normalizer: normalizer(&a.bn, a.steps)?,
        tolerance: a.tol.unwrap_or(default_tol),
        burn_in: a.burn_in.unwrap_or((a.steps / 10).max(1)),
        threads: a.threads,
        trajectory_points: if a.csv.is_some() { a.points } else { 0 },
    };
    report.seed = Some(a.seed);
    report.param("steps", config.steps);
    report.param("replications", config.replications);
    report.param("burn_in", config.burn_in);
    report.param("tolerance", config.tolerance);
    report.param("bn", config.normalizer.to_string());
    report.param(
        "strategies",
        config
            .strategies
            .clone()
            .unwrap_or_else(|| ScenarioStrategy::default_battery(template.kernels().len()))
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>(),
    );

    let (result, status, trajectories) = match a.kind {
        SimKind::Slln | SimKind::Weighted => {
            let v = if a.kind == SimKind::Slln && config.normalizer == Normalizer::Linear {
                mean_certain_slln(&template, &config)
            } else {
                weighted_slln_check(&template, &config)
            }
            .map_err(e)?;
            (to_value(&v), verdict_status(&v), v.trajectories)
        }
        SimKind::Series => {
            let w: Weights = a.weights.parse().map_err(|err: sublex::Error| CliError::Argument(err.to_string()))?;
            report.param("weights", w.to_string());
            let v = series_convergence_check(&template, &w, &config).map_err(e)?;
            (to_value(&v), verdict_status(&v), v.trajectories)
        }
        SimKind::Cluster => {
            let r = cluster_diagnostic(&template, &config).map_err(e)?;
            let status = Status::from_pass(r.pass);
            let t = r.verdict.trajectories.clone();
            (to_value(&r), status, t)
        }
        SimKind::Truncation => unreachable!("handled above"),
    };
    if let Some(path) = &a.csv {
        write_csv(path, &trajectories)?;
    }
    report.result = result;
    report.set_status(status);
    Ok(())
}
