//! Scenario files: a versioned JSON description of a group, its
//! representations, states, target observable, optional program family and
//! solver options. Complex numbers are `[re, im]` pairs and matrices are lists
//! of rows.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use waysim::grouprep::{
    charge_rep, dihedral_rep_2d, direct_sum, make_cyclic, make_dihedral, pauli_rep, regular_rep, trivial_rep,
    FiniteGroup, ProjectiveRep,
};
use waysim::noprog::ProgramPair;
use waysim::{ComplexMatrix, ProjectiveObservable, QState, SolverOptions, C64};

pub const SCENARIO_VERSION: &str = "1";

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic {
        n: usize,
    },
    Dihedral {
        n: usize,
    },
    Cayley {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        table: Vec<Vec<usize>>,
        #[serde(default)]
        identity: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RepSpec {
    Trivial {
        dim: usize,
    },
    Charge {
        charges: Vec<i64>,
    },
    Regular,
    Dihedral2d,
    Pauli,
    DirectSum {
        blocks: Vec<RepSpec>,
    },
    Matrices {
        matrices: Vec<Matrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cocycle_tol: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Unit vector; not renormalized.
    Pure {
        amplitudes: Vec<Complex>,
    },
    Density {
        matrix: Matrix,
    },
    Basis {
        dim: usize,
        index: usize,
    },
    MaximallyMixed {
        dim: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSpec {
    pub label: String,
    pub projector: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    Projectors {
        outcomes: Vec<OutcomeSpec>,
    },
    /// Spectral decomposition; outcomes are labelled by eigenvalue.
    Hermitian {
        matrix: Matrix,
    },
    /// Rank-one projectors onto orthonormal `vectors`.
    Basis {
        labels: Vec<String>,
        vectors: Vec<Vec<Complex>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramSpec {
    pub program: StateSpec,
    pub target: ObservableSpec,
}

/// The file as written on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep_s: Option<RepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep_a: Option<RepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource_state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<ObservableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub programs: Option<Vec<ProgramSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOptions>,
}

/// One problem found while loading, located by a JSON-style field path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub path: String,
    pub kind: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.path, self.kind, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario is invalid ({} violation{})", .0.len(), if .0.len() == 1 { "" } else { "s" })]
    Invalid(Vec<Violation>),
}

impl ScenarioError {
    pub fn violations(&self) -> Vec<Violation> {
        match self {
            ScenarioError::Io { path, source } => {
                vec![Violation { path: "$".into(), kind: "IoError".into(), message: format!("{path}: {source}") }]
            }
            ScenarioError::Invalid(v) => v.clone(),
        }
    }
}

/// A fully validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub group: Option<Arc<FiniteGroup>>,
    pub rep_s: Option<ProjectiveRep>,
    pub rep_a: Option<ProjectiveRep>,
    pub system_state: Option<QState>,
    pub resource_state: Option<QState>,
    pub target: Option<ProjectiveObservable>,
    pub programs: Option<Vec<ProgramPair>>,
    pub solver: SolverOptions,
}

impl Scenario {
    pub fn name(&self) -> &str {
        self.file.name.as_deref().unwrap_or("unnamed")
    }

    /// SHA-256 of the canonical JSON form (sorted keys, no whitespace).
    pub fn digest(&self) -> String {
        digest(&self.file)
    }
}

pub fn digest(file: &ScenarioFile) -> String {
    let canonical = serde_json::to_value(file).expect("scenario serializes");
    let bytes = serde_json::to_vec(&canonical).expect("JSON value serializes");
    hex::encode(Sha256::digest(&bytes))
}

struct Collector {
    violations: Vec<Violation>,
}

impl Collector {
    fn push(&mut self, path: &str, err: waysim::Error) {
        self.violations.push(Violation { path: path.into(), kind: err.kind().into(), message: err.to_string() });
    }

    fn schema(&mut self, path: &str, message: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), kind: "SchemaError".into(), message: message.into() });
    }

    fn check<T>(&mut self, path: &str, r: waysim::Result<T>) -> Option<T> {
        r.map_err(|e| self.push(path, e)).ok()
    }
}

fn complex(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

fn matrix(m: &Matrix) -> waysim::Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = m.iter().map(|r| r.iter().map(complex).collect()).collect();
    ComplexMatrix::from_rows(&rows)
}

pub fn build_group(spec: &GroupSpec) -> waysim::Result<FiniteGroup> {
    match spec {
        GroupSpec::Cyclic { n } => make_cyclic(*n),
        GroupSpec::Dihedral { n } => make_dihedral(*n),
        GroupSpec::Cayley { name, table, identity } => {
            FiniteGroup::new(name.clone().unwrap_or_else(|| format!("G{}", table.len())), table.clone(), *identity)
        }
    }
}

pub fn build_rep(spec: &RepSpec, group: &Arc<FiniteGroup>) -> waysim::Result<ProjectiveRep> {
    match spec {
        RepSpec::Trivial { dim } => trivial_rep(group.clone(), *dim),
        RepSpec::Charge { charges } => charge_rep(group.clone(), charges),
        RepSpec::Regular => regular_rep(group.clone()),
        RepSpec::Dihedral2d => dihedral_rep_2d(group.clone()),
        RepSpec::Pauli => pauli_rep(group.clone()),
        RepSpec::DirectSum { blocks } => {
            let mut iter = blocks.iter();
            let first = iter.next().ok_or_else(|| waysim::Error::Argument("direct sum has no blocks".into()))?;
            iter.try_fold(build_rep(first, group)?, |acc, b| direct_sum(&acc, &build_rep(b, group)?))
        }
        RepSpec::Matrices { matrices, cocycle_tol } => {
            let mats = matrices.iter().map(matrix).collect::<waysim::Result<Vec<_>>>()?;
            match cocycle_tol {
                Some(tol) => ProjectiveRep::with_tolerance(group.clone(), mats, *tol),
                None => ProjectiveRep::new(group.clone(), mats),
            }
        }
    }
}

pub fn build_state(spec: &StateSpec) -> waysim::Result<QState> {
    match spec {
        StateSpec::Pure { amplitudes } => QState::pure(&amplitudes.iter().map(complex).collect::<Vec<_>>()),
        StateSpec::Density { matrix: m } => QState::new(matrix(m)?),
        StateSpec::Basis { dim, index } => {
            if *index >= *dim {
                return Err(waysim::Error::State(format!("basis index {index} out of range for dimension {dim}")));
            }
            Ok(QState::basis(*dim, *index))
        }
        StateSpec::MaximallyMixed { dim } => {
            if *dim == 0 {
                return Err(waysim::Error::State("dimension must be positive".into()));
            }
            Ok(QState::maximally_mixed(*dim))
        }
    }
}

pub fn build_observable(spec: &ObservableSpec) -> waysim::Result<ProjectiveObservable> {
    match spec {
        ObservableSpec::Projectors { outcomes } => ProjectiveObservable::new(
            outcomes
                .iter()
                .map(|o| Ok((o.label.clone(), matrix(&o.projector)?)))
                .collect::<waysim::Result<Vec<_>>>()?,
        ),
        ObservableSpec::Hermitian { matrix: m } => ProjectiveObservable::from_hermitian(&matrix(m)?),
        ObservableSpec::Basis { labels, vectors } => {
            let d = vectors.len();
            if vectors.iter().any(|v| v.len() != d) {
                return Err(waysim::Error::Dimension(format!("basis needs {d} vectors of length {d}")));
            }
            let u = ComplexMatrix::from_fn(d, |r, c| complex(&vectors[c][r]));
            ProjectiveObservable::from_basis(&u, labels)
        }
    }
}

fn check_dim(c: &mut Collector, path: &str, what: &str, got: usize, want: usize) -> bool {
    if got != want {
        c.push(path, waysim::Error::Dimension(format!("{what} has dimension {got}, expected {want}")));
        return false;
    }
    true
}

/// Validates a parsed file, collecting every violation rather than stopping
/// at the first.
pub fn validate(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
    let mut c = Collector { violations: Vec::new() };
    if file.version != SCENARIO_VERSION {
        c.schema("version", format!("unsupported version {:?}, expected {SCENARIO_VERSION:?}", file.version));
    }

    let group = file.group.as_ref().and_then(|g| c.check("group", build_group(g))).map(Arc::new);
    let rep = |path: &str, spec: &Option<RepSpec>, c: &mut Collector| match (spec, &group) {
        (None, _) => None,
        (Some(_), None) => {
            if file.group.is_none() {
                c.schema(path, "representation given without a group");
            }
            None
        }
        (Some(s), Some(g)) => c.check(path, build_rep(s, g)),
    };
    let rep_s = rep("rep_s", &file.rep_s, &mut c);
    let rep_a = rep("rep_a", &file.rep_a, &mut c);

    let system_state = file.system_state.as_ref().and_then(|s| c.check("system_state", build_state(s)));
    let resource_state = file.resource_state.as_ref().and_then(|s| c.check("resource_state", build_state(s)));
    let target = file.target.as_ref().and_then(|t| c.check("target", build_observable(t)));

    let mut dims_ok = true;
    if let (Some(r), Some(t)) = (&rep_s, &target) {
        dims_ok &= check_dim(&mut c, "target", "target", t.dim(), r.dim());
    }
    if let (Some(r), Some(s)) = (&rep_s, &system_state) {
        dims_ok &= check_dim(&mut c, "system_state", "system state", s.dim(), r.dim());
    }
    if let (Some(r), Some(s)) = (&rep_a, &resource_state) {
        dims_ok &= check_dim(&mut c, "resource_state", "resource state", s.dim(), r.dim());
    }

    let programs = file.programs.as_ref().map(|specs| {
        let mut pairs = Vec::new();
        for (i, p) in specs.iter().enumerate() {
            let program = c.check(&format!("programs[{i}].program"), build_state(&p.program));
            let target = c.check(&format!("programs[{i}].target"), build_observable(&p.target));
            if let (Some(program), Some(target)) = (program, target) {
                pairs.push((i, ProgramPair::new(program, target)));
            }
        }
        if let Some((_, first)) = pairs.first() {
            let (ds, da) = (first.target.dim(), first.program.dim());
            let labels: Vec<String> = first.target.labels().into_iter().map(String::from).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            for (i, p) in &pairs[1..] {
                check_dim(&mut c, &format!("programs[{i}].target"), "program target", p.target.dim(), ds);
                check_dim(&mut c, &format!("programs[{i}].program"), "program", p.program.dim(), da);
                if let Err(e) = p.target.aligned_to(&refs) {
                    c.push(&format!("programs[{i}].target"), e);
                }
            }
        }
        if specs.is_empty() {
            c.schema("programs", "program family is empty");
        }
        pairs.into_iter().map(|(_, p)| p).collect::<Vec<_>>()
    });

    let mut solver = file.solver.clone().unwrap_or_default();
    if let Some(path) = solver_path_check(&solver) {
        c.schema(path.0, path.1);
        solver = SolverOptions::default();
    }

    if !c.violations.is_empty() || !dims_ok {
        return Err(ScenarioError::Invalid(c.violations));
    }
    Ok(Scenario { file, group, rep_s, rep_a, system_state, resource_state, target, programs, solver })
}

fn solver_path_check(opts: &SolverOptions) -> Option<(&'static str, String)> {
    let positive = |x: f64| x.is_finite() && x > 0.0;
    if !positive(opts.gap_tol) {
        return Some(("solver.gap_tol", format!("must be positive, got {}", opts.gap_tol)));
    }
    if !positive(opts.duality_tol) {
        return Some(("solver.duality_tol", format!("must be positive, got {}", opts.duality_tol)));
    }
    if opts.max_iter == 0 {
        return Some(("solver.max_iter", "must be positive".into()));
    }
    None
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let kind = if inner.is_syntax() || inner.is_eof() { "ParseError" } else { "SchemaError" };
        ScenarioError::Invalid(vec![Violation {
            path: if path.is_empty() || path == "." { "$".into() } else { path },
            kind: kind.into(),
            message: inner.to_string(),
        }])
    })?;
    validate(file)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text)
}

/// Pretty-printed JSON of the file form, with a trailing newline.
pub fn to_json(file: &ScenarioFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("scenario serializes");
    s.push('\n');
    s
}

pub fn save_scenario(file: &ScenarioFile, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, to_json(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z2: &str = r#"{
        "version": "1",
        "name": "z2",
        "group": {"kind": "cyclic", "n": 2},
        "rep_s": {"kind": "charge", "charges": [0, 1]},
        "rep_a": {"kind": "charge", "charges": [0, 1]},
        "resource_state": {"kind": "pure", "amplitudes": [[0.7071067811865476, 0], [0.7071067811865476, 0]]},
        "target": {"kind": "basis", "labels": ["+", "-"],
                   "vectors": [[[0.7071067811865476, 0], [0.7071067811865476, 0]],
                               [[0.7071067811865476, 0], [-0.7071067811865476, 0]]]}
    }"#;

    #[test]
    fn minimal_scenario_loads() {
        let s = parse_scenario(Z2).unwrap();
        assert_eq!(s.group.unwrap().order(), 2);
        assert_eq!(s.target.unwrap().labels(), vec!["+", "-"]);
        assert_eq!(s.solver, SolverOptions::default());
    }

    #[test]
    fn bad_trace_is_reported_at_the_state() {
        let text = Z2.replace("[[0.7071067811865476, 0], [0.7071067811865476, 0]]},", "[[1, 0], [1, 0]]},");
        let err = parse_scenario(&text).unwrap_err().violations();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].path, "resource_state");
        assert_eq!(err[0].kind, "StateError");
    }

    #[test]
    fn every_violation_is_listed() {
        let text = Z2
            .replace("\"version\": \"1\"", "\"version\": \"7\"")
            .replace("[[0.7071067811865476, 0], [0.7071067811865476, 0]]},", "[[1, 0], [1, 0]]},")
            .replace("\"charges\": [0, 1]}", "\"charges\": [0, 1, 1]}");
        let paths: Vec<String> = parse_scenario(&text).unwrap_err().violations().into_iter().map(|v| v.path).collect();
        assert!(paths.contains(&"version".to_string()));
        assert!(paths.contains(&"resource_state".to_string()));
        assert!(paths.contains(&"target".to_string()));
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let text = Z2.replace("\"kind\": \"cyclic\", \"n\": 2", "\"kind\": \"cyclic\", \"order\": 2");
        let v = parse_scenario(&text).unwrap_err().violations();
        assert_eq!(v[0].kind, "SchemaError");
        assert!(v[0].path.starts_with("group"), "{}", v[0].path);
        let v = parse_scenario("{ not json").unwrap_err().violations();
        assert_eq!(v[0].kind, "ParseError");
    }

    #[test]
    fn save_then_load_keeps_the_digest() {
        let s = parse_scenario(Z2).unwrap();
        let again = parse_scenario(&to_json(&s.file)).unwrap();
        assert_eq!(s.digest(), again.digest());
        assert_eq!(s.digest().len(), 64);
    }
}
