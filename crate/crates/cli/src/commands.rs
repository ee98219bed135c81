//! Command implementations. Each takes a validated scenario and produces a
//! [`Report`]; nothing here prints or exits.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use waysim::asymmetry::{
    holevo_asymmetry, is_classically_asymmetric, is_perfectly_asymmetric, measurement_orbit, orbit,
};
use waysim::noprog::{min_program_dimension, noprog_check, program_feasibility_with, Verdict};
use waysim::simulate::{
    exact_programmed_measurement, optimize_simulation_with, orbit_dimension_bound, simulation_residual,
    verify_duality_with, Mode, SimulationResult, COVARIANTIZE_SLACK,
};
use waysim::symmetry::is_symmetric;
use waysim::{Certificate, Execution, ProjectiveObservable, ProjectiveRep, SimulationInstance, SolverOptions};

use crate::report::{povm_json, Report, Status};
use crate::scenario::{load_scenario, Scenario, Violation};

/// Residual below which a simulation or programming task counts as exact.
pub const EXACT_EPSILON: f64 = 1e-6;

/// Default tolerance for the boolean predicates (symmetry, orthogonality,
/// target distinctness).
pub const DEFAULT_PREDICATE_TOL: f64 = 1e-9;

/// Environment variable naming a JSON file of solver options, used for
/// scenarios that carry no `solver` block.
pub const SOLVER_OPTIONS_ENV: &str = "WAYSIM_SOLVER_OPTIONS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    CheckSymmetry,
    Orbit,
    Bound,
    Simulate,
    Duality,
    Noprog,
    Validate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::CheckSymmetry => "check-symmetry",
            Command::Orbit => "orbit",
            Command::Bound => "bound",
            Command::Simulate => "simulate",
            Command::Duality => "duality",
            Command::Noprog => "noprog",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeChoice {
    Symmetric,
    Covariant,
    Both,
}

impl ModeChoice {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeChoice::Symmetric => vec![Mode::SymmetricSingle],
            ModeChoice::Covariant => vec![Mode::CovariantAllG],
            ModeChoice::Both => vec![Mode::SymmetricSingle, Mode::CovariantAllG],
        }
    }
}

/// Command-line overrides of individual solver fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverOverrides {
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub gap_tol: Option<f64>,
    pub restarts: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub mode: Option<ModeChoice>,
    pub predicate_tol: f64,
    /// Options from [`SOLVER_OPTIONS_ENV`], if any.
    pub base_solver: Option<SolverOptions>,
    pub overrides: SolverOverrides,
    pub exec: Execution,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            mode: None,
            predicate_tol: DEFAULT_PREDICATE_TOL,
            base_solver: None,
            overrides: SolverOverrides::default(),
            exec: Execution::default(),
            timings: false,
        }
    }
}

impl RunOptions {
    /// Built-in defaults, then the environment file, then the scenario's own
    /// block, then flags.
    pub fn solver_for(&self, scenario: &Scenario) -> SolverOptions {
        let mut opts = match (&scenario.file.solver, &self.base_solver) {
            (Some(s), _) => s.clone(),
            (None, Some(b)) => b.clone(),
            (None, None) => SolverOptions::default(),
        };
        let o = &self.overrides;
        if let Some(v) = o.seed {
            opts.seed = v;
        }
        if let Some(v) = o.max_iter {
            opts.max_iter = v;
        }
        if let Some(v) = o.gap_tol {
            opts.gap_tol = v;
        }
        if let Some(v) = o.restarts {
            opts.restarts = v;
        }
        opts
    }
}

/// Reads the solver options file named by [`SOLVER_OPTIONS_ENV`], if set.
pub fn solver_options_from_env() -> Result<Option<SolverOptions>, Violation> {
    let Ok(path) = std::env::var(SOLVER_OPTIONS_ENV) else {
        return Ok(None);
    };
    let bad = |message: String| Violation { path: SOLVER_OPTIONS_ENV.into(), kind: "ArgumentError".into(), message };
    let text = std::fs::read_to_string(&path).map_err(|e| bad(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map(Some).map_err(|e| bad(format!("{path}: {e}")))
}

struct Timer {
    enabled: bool,
    spans: BTreeMap<String, f64>,
}

impl Timer {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            self.spans.insert(name.into(), start.elapsed().as_secs_f64() * 1e3);
        }
        out
    }
}

type Outcome = Result<Status, Violation>;

fn missing(field: &str, command: Command) -> Violation {
    Violation { path: field.into(), kind: "SchemaError".into(), message: format!("required by {}", command.as_str()) }
}

fn lib_error(path: &str, e: waysim::Error) -> Violation {
    Violation { path: path.into(), kind: e.kind().into(), message: e.to_string() }
}

/// Loads the scenario at `path` and runs `command` on it. Loading problems
/// become an error report rather than a Rust error.
pub fn run_path(command: Command, path: &Path, opts: &RunOptions) -> Report {
    let fallback_name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match load_scenario(path) {
        Ok(s) => run(command, &s, opts),
        Err(e) => Report::failed(command.as_str(), &fallback_name, "", e.violations()),
    }
}

pub fn run(command: Command, scenario: &Scenario, opts: &RunOptions) -> Report {
    let mut report = Report::new(command.as_str(), scenario.name(), &scenario.digest());
    let mut timer = Timer { enabled: opts.timings, spans: BTreeMap::new() };
    let outcome = match command {
        Command::Validate => validate(scenario, &mut report),
        Command::CheckSymmetry => check_symmetry(scenario, opts, &mut report, &mut timer),
        Command::Orbit => orbit_report(scenario, opts, &mut report, &mut timer),
        Command::Bound => bound(scenario, &mut report, &mut timer),
        Command::Simulate => simulate(scenario, opts, &mut report, &mut timer),
        Command::Duality => duality(scenario, opts, &mut report, &mut timer),
        Command::Noprog => noprog(scenario, opts, &mut report, &mut timer),
    };
    match outcome {
        Ok(status) => report.set_status(status),
        Err(v) => {
            report.errors.push(v);
            report.set_status(Status::Error);
        }
    }
    if opts.timings {
        report.timings_ms = Some(timer.spans);
    }
    report
}

fn instance(s: &Scenario, command: Command) -> Result<SimulationInstance, Violation> {
    let rep_s = s.rep_s.clone().ok_or_else(|| missing("rep_s", command))?;
    let rep_a = s.rep_a.clone().ok_or_else(|| missing("rep_a", command))?;
    let target = s.target.clone().ok_or_else(|| missing("target", command))?;
    let resource = s.resource_state.clone().ok_or_else(|| missing("resource_state", command))?;
    SimulationInstance::new(rep_s, rep_a, target, resource).map_err(|e| lib_error("$", e))
}

fn certificate_json(c: &Certificate) -> Value {
    serde_json::to_value(c).expect("certificate serializes")
}

fn result_json(r: &SimulationResult) -> Value {
    json!({
        "mode": r.mode.as_str(),
        "epsilon": r.epsilon,
        "exact_tol": EXACT_EPSILON,
        "simulable": r.epsilon <= EXACT_EPSILON,
        "certificate": certificate_json(&r.certificate),
        "povm": povm_json(&r.povm),
    })
}

fn validate(s: &Scenario, report: &mut Report) -> Outcome {
    let present: Vec<&str> = [
        ("group", s.group.is_some()),
        ("rep_s", s.rep_s.is_some()),
        ("rep_a", s.rep_a.is_some()),
        ("system_state", s.system_state.is_some()),
        ("resource_state", s.resource_state.is_some()),
        ("target", s.target.is_some()),
        ("programs", s.programs.is_some()),
        ("solver", s.file.solver.is_some()),
    ]
    .into_iter()
    .filter_map(|(k, p)| p.then_some(k))
    .collect();
    report.sections.insert(
        "validation".into(),
        json!({
            "valid": true,
            "fields": present,
            "group": s.group.as_ref().map(|g| json!({ "name": g.name(), "order": g.order() })),
            "dim_s": s.rep_s.as_ref().map(ProjectiveRep::dim),
            "dim_a": s.rep_a.as_ref().map(ProjectiveRep::dim),
            "programs": s.programs.as_ref().map(Vec::len),
        }),
    );
    Ok(Status::Pass)
}

fn observable_symmetry(obs: &ProjectiveObservable, rep: &ProjectiveRep, tol: f64) -> Result<Value, Violation> {
    let mut worst = json!(null);
    let mut deviation = -1.0;
    for (label, p) in obs.outcomes() {
        let c = is_symmetric(p, rep, tol).map_err(|e| lib_error("target", e))?;
        if c.deviation > deviation {
            deviation = c.deviation;
            worst = json!({ "label": label, "element": c.worst_element });
        }
    }
    Ok(json!({ "symmetric": deviation <= tol, "deviation": deviation, "worst": worst, "tolerance": tol }))
}

fn check_symmetry(s: &Scenario, opts: &RunOptions, report: &mut Report, timer: &mut Timer) -> Outcome {
    let tol = opts.predicate_tol;
    let mut section = serde_json::Map::new();
    timer.time("check-symmetry", || -> Result<(), Violation> {
        if let Some(rep) = &s.rep_s {
            if let Some(t) = &s.target {
                section.insert("target".into(), observable_symmetry(t, rep, tol)?);
            }
            if let Some(st) = &s.system_state {
                let c = is_symmetric(st.matrix(), rep, tol).map_err(|e| lib_error("system_state", e))?;
                section.insert("system_state".into(), serde_json::to_value(c).expect("serializes"));
            }
        }
        if let (Some(rep), Some(st)) = (&s.rep_a, &s.resource_state) {
            let c = is_symmetric(st.matrix(), rep, tol).map_err(|e| lib_error("resource_state", e))?;
            section.insert("resource_state".into(), serde_json::to_value(c).expect("serializes"));
        }
        Ok(())
    })?;
    if section.is_empty() {
        return Err(missing("rep_s", Command::CheckSymmetry));
    }
    report.sections.insert("symmetry".into(), Value::Object(section));
    Ok(Status::Completed)
}

fn orbit_report(s: &Scenario, opts: &RunOptions, report: &mut Report, timer: &mut Timer) -> Outcome {
    let tol = opts.predicate_tol;
    let mut section = serde_json::Map::new();
    timer.time("orbit", || -> Result<(), Violation> {
        if let (Some(rep), Some(st)) = (&s.rep_a, &s.resource_state) {
            let err = |e| lib_error("resource_state", e);
            let perfect = is_perfectly_asymmetric(st, rep, tol).map_err(err)?;
            let classical = is_classically_asymmetric(st, rep, tol).map_err(err)?;
            let holevo = holevo_asymmetry(st, rep).map_err(err)?;
            section.insert(
                "resource_state".into(),
                json!({
                    "perfect": perfect,
                    "classical": classical,
                    "holevo_bits": holevo,
                }),
            );
        }
        if let Some(rep) = &s.rep_s {
            if let Some(t) = &s.target {
                let o = measurement_orbit(t, rep).map_err(|e| lib_error("target", e))?;
                section.insert(
                    "target".into(),
                    json!({ "orbit_classes": o.num_classes(), "group_order": rep.order(), "partition": o.partition }),
                );
            }
            if let Some(st) = &s.system_state {
                let o = orbit(st.matrix(), rep).map_err(|e| lib_error("system_state", e))?;
                let holevo = holevo_asymmetry(st, rep).map_err(|e| lib_error("system_state", e))?;
                section.insert(
                    "system_state".into(),
                    json!({ "orbit_classes": o.num_classes(), "partition": o.partition, "holevo_bits": holevo }),
                );
            }
        }
        Ok(())
    })?;
    if section.is_empty() {
        return Err(missing("resource_state", Command::Orbit));
    }
    report.sections.insert("orbit".into(), Value::Object(section));
    Ok(Status::Completed)
}

fn bound(s: &Scenario, report: &mut Report, timer: &mut Timer) -> Outcome {
    let inst = instance(s, Command::Bound)?;
    let b = timer.time("bound", || orbit_dimension_bound(&inst)).map_err(|e| lib_error("target", e))?;
    let status = if b.passes { Status::Pass } else { Status::NoGo };
    report.sections.insert("bound".into(), serde_json::to_value(&b).expect("serializes"));
    Ok(status)
}

fn simulate(s: &Scenario, opts: &RunOptions, report: &mut Report, timer: &mut Timer) -> Outcome {
    let inst = instance(s, Command::Simulate)?;
    let mut simulable = false;

    let exact = timer.time("exact", || exact_programmed_measurement(&inst));
    let exact_applies = match exact {
        Ok(povm) => {
            let residual = simulation_residual(&povm, inst.resource(), inst.target()).map_err(|e| lib_error("$", e))?;
            let rep_sa = inst.rep_sa().map_err(|e| lib_error("$", e))?;
            let mut symmetry_deviation: f64 = 0.0;
            for (_, e) in povm.effects() {
                let c = is_symmetric(e, &rep_sa, opts.predicate_tol).map_err(|e| lib_error("$", e))?;
                symmetry_deviation = symmetry_deviation.max(c.deviation);
            }
            simulable |= residual <= EXACT_EPSILON;
            report.sections.insert(
                "exact".into(),
                json!({
                    "applicable": true,
                    "residual": residual,
                    "exact_tol": EXACT_EPSILON,
                    "completeness_residual": povm.completeness_residual(),
                    "projectivity_residual": povm.projectivity_residual(),
                    "symmetry_deviation": symmetry_deviation,
                    "povm": povm_json(&povm),
                }),
            );
            true
        }
        Err(waysim::Error::NotPerfectlyAsymmetric { overlap, free_orbit }) => {
            report.sections.insert(
                "exact".into(),
                json!({
                    "applicable": false,
                    "reason": "resource is not perfectly asymmetric",
                    "worst_overlap": overlap,
                    "free_orbit": free_orbit,
                }),
            );
            false
        }
        Err(e) => return Err(lib_error("$", e)),
    };

    let modes = match (opts.mode, exact_applies) {
        (Some(m), _) => m.modes(),
        (None, true) => Vec::new(),
        (None, false) => vec![Mode::SymmetricSingle],
    };
    if !modes.is_empty() {
        let solver = opts.solver_for(s);
        let mut results = serde_json::Map::new();
        for mode in modes {
            let r = timer
                .time(mode.as_str(), || optimize_simulation_with(&inst, mode, &solver, opts.exec))
                .map_err(|e| lib_error("$", e))?;
            simulable |= r.epsilon <= EXACT_EPSILON;
            results.insert(mode.as_str().into(), result_json(&r));
        }
        report.sections.insert("optimized".into(), Value::Object(results));
        report.sections.insert("solver".into(), serde_json::to_value(&solver).expect("serializes"));
    }
    report.sections.insert("verdict".into(), json!({ "simulable": simulable, "exact_tol": EXACT_EPSILON }));
    Ok(if simulable { Status::Pass } else { Status::NoGo })
}

fn duality(s: &Scenario, opts: &RunOptions, report: &mut Report, timer: &mut Timer) -> Outcome {
    let inst = instance(s, Command::Duality)?;
    let solver = opts.solver_for(s);
    let d = timer.time("duality", || verify_duality_with(&inst, &solver, opts.exec)).map_err(|e| lib_error("$", e))?;
    report.sections.insert(
        "duality".into(),
        json!({
            "epsilon_symmetric": d.epsilon_sym,
            "epsilon_covariant": d.epsilon_cov,
            "epsilon_covariantized": d.epsilon_covariantized,
            "difference": d.difference,
            "duality_tol": d.duality_tol,
            "covariantize_slack": COVARIANTIZE_SLACK,
            "certified": d.certified,
            "pass": d.pass,
            "symmetric": result_json(&d.symmetric),
            "covariant": result_json(&d.covariant),
        }),
    );
    report.sections.insert("solver".into(), serde_json::to_value(&solver).expect("serializes"));
    Ok(if d.pass { Status::Pass } else { Status::Fail })
}

fn noprog(s: &Scenario, opts: &RunOptions, report: &mut Report, timer: &mut Timer) -> Outcome {
    let pairs = s.programs.as_ref().ok_or_else(|| missing("programs", Command::Noprog))?;
    let solver = opts.solver_for(s);
    let tol = opts.predicate_tol;
    let mut programmable = true;

    let targets: Vec<ProjectiveObservable> = pairs.iter().map(|p| p.target.clone()).collect();
    let needed = min_program_dimension(&targets, tol);
    let program_dim = pairs[0].program.dim();
    report.sections.insert(
        "program_dimension".into(),
        json!({
            "distinct_targets": needed,
            "program_dim": program_dim,
            "passes": program_dim >= needed,
            "tolerance": tol,
        }),
    );

    if pairs.len() == 2 {
        let check = timer.time("check", || noprog_check(pairs, tol)).map_err(|e| lib_error("programs", e))?;
        programmable &= check.verdict != Verdict::ExactImpossible;
        report.sections.insert("check".into(), serde_json::to_value(&check).expect("serializes"));
    }

    let f = timer
        .time("feasibility", || program_feasibility_with(pairs, &solver, opts.exec))
        .map_err(|e| lib_error("programs", e))?;
    programmable &= f.epsilon <= EXACT_EPSILON;
    report.sections.insert(
        "feasibility".into(),
        json!({
            "epsilon": f.epsilon,
            "exact_tol": EXACT_EPSILON,
            "certificate": certificate_json(&f.certificate),
            "povm": povm_json(&f.povm),
        }),
    );
    report.sections.insert("solver".into(), serde_json::to_value(&solver).expect("serializes"));
    report.sections.insert("verdict".into(), json!({ "programmable": programmable }));
    Ok(if programmable { Status::Pass } else { Status::NoGo })
}
