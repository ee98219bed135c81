//! Programmable measurements: one joint device whose induced system
//! measurement is chosen by the ancilla's program state. Distinct projective
//! measurements need orthogonal programs; non-orthogonal ones force an error
//! bounded below by a discrimination argument.

use serde::Serialize;

use crate::engine::{minimize_worst_deviation, Certificate, ProgramConstraint, SolverOptions};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matcore::{herm_eig, root_fidelity, Povm, ProjectiveObservable, QState, C64};
use crate::symmetry::hermitian_basis;

/// A program state and the measurement it should select.
#[derive(Clone, Debug)]
pub struct ProgramPair {
    pub program: QState,
    pub target: ProjectiveObservable,
}

impl ProgramPair {
    pub fn new(program: QState, target: ProjectiveObservable) -> Self {
        Self { program, target }
    }
}

#[derive(Clone, Debug)]
pub struct Feasibility {
    pub epsilon: f64,
    pub povm: Povm,
    pub certificate: Certificate,
}

fn check_family(pairs: &[ProgramPair]) -> Result<(usize, usize, Vec<String>)> {
    let first = pairs.first().ok_or_else(|| Error::Argument("empty program family".into()))?;
    let (ds, da) = (first.target.dim(), first.program.dim());
    let labels: Vec<String> = first.target.labels().into_iter().map(String::from).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    for (i, p) in pairs.iter().enumerate() {
        if p.target.dim() != ds || p.program.dim() != da {
            return Err(Error::Argument(format!(
                "pair {i} has dimensions ({}, {}), expected ({ds}, {da})",
                p.target.dim(),
                p.program.dim()
            )));
        }
        p.target
            .aligned_to(&refs)
            .map_err(|_| Error::Argument(format!("pair {i} has a different outcome label set")))?;
    }
    Ok((ds, da, labels))
}

/// Smallest worst-case error `max_{i,k} ||Tr_a[Ẽ_k (I ⊗ ρ_i)] − Π_k^(i)||_∞`
/// over all joint POVMs.
pub fn program_feasibility(pairs: &[ProgramPair], opts: &SolverOptions) -> Result<Feasibility> {
    program_feasibility_with(pairs, opts, Execution::default())
}

pub fn program_feasibility_with(pairs: &[ProgramPair], opts: &SolverOptions, exec: Execution) -> Result<Feasibility> {
    let (ds, da, labels) = check_family(pairs)?;
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let constraints = pairs
        .iter()
        .map(|p| {
            Ok(ProgramConstraint { ancilla_state: p.program.matrix().clone(), targets: p.target.aligned_to(&refs)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let sol = minimize_worst_deviation(ds, da, &labels, &constraints, &hermitian_basis(ds * da), opts, exec)?;
    Ok(Feasibility { epsilon: sol.epsilon, povm: sol.povm, certificate: sol.certificate })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ExactImpossible,
    PossiblyExact,
}

/// Product states `|u⟩|φ₁⟩` and `|v⟩|φ₂⟩` that an exact device would
/// discriminate perfectly: `u` lies in outcome `label_u` of the first target,
/// `v` in outcome `label_v ≠ label_u` of the second.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub u: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    pub label_u: String,
    pub label_v: String,
    pub state_overlap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoProgReport {
    pub verdict: Verdict,
    /// Largest projector difference between the two targets.
    pub target_distance: f64,
    pub targets_distinct: bool,
    /// `Tr(ρ₁ ρ₂)`.
    pub program_overlap: f64,
    /// Root fidelity of the programs; `|⟨φ₁|φ₂⟩|` for pure programs.
    pub c: f64,
    /// Largest overlap between eigenvectors of differently labelled projectors.
    pub s: f64,
    /// Lower bound on the worst-case programming error.
    pub bound: f64,
    pub witness: Option<Witness>,
    /// At least one program is mixed.
    pub mixed_programs: bool,
    pub heuristic: bool,
    pub tolerance: f64,
}

/// Lower bound `(1 − √(1 − (c s)²)) / 2` on the error of any device that
/// programs both targets: it would discriminate the witness product states,
/// whose overlap is `c s`, with success `1 − ε`.
pub fn approx_bound(program_overlap: f64, state_overlap: f64) -> Result<f64> {
    let in_unit = |x: f64| (0.0..=1.0 + 1e-12).contains(&x);
    if !in_unit(program_overlap) {
        return Err(Error::Argument(format!("program overlap {program_overlap} outside [0, 1]")));
    }
    if !in_unit(state_overlap) || state_overlap <= 0.0 {
        return Err(Error::Argument(format!("state overlap {state_overlap} outside (0, 1]")));
    }
    let x = (program_overlap * state_overlap).min(1.0);
    // Same value as (1 − √(1 − x²))/2 without cancellation for small x.
    Ok(x * x / (2.0 * (1.0 + (1.0 - x * x).sqrt())))
}

fn to_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Largest `||Π_k Π'_k'||_∞` over `k ≠ k'`, with the maximizing unit vectors
/// `u ∈ range Π_k` and `v = Π'_k' u / ||Π'_k' u||`.
fn opposite_overlap(a: &ProjectiveObservable, b: &ProjectiveObservable) -> Result<Option<Witness>> {
    let mut best: Option<Witness> = None;
    for (la, pa) in a.outcomes() {
        for (lb, pb) in b.outcomes() {
            if la == lb {
                continue;
            }
            let m = &(pa * pb) * pa;
            let eig = herm_eig(&m.hermitian_part())?;
            let top = eig.values[0].max(0.0);
            if best.as_ref().is_some_and(|w| top.sqrt() <= w.state_overlap) || top <= 0.0 {
                continue;
            }
            let u = eig.vector(0);
            let pu = pb.mat_vec(&u);
            let norm = pu.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let v: Vec<C64> = pu.iter().map(|z| z / norm).collect();
            best = Some(Witness {
                u: to_pairs(&u),
                v: to_pairs(&v),
                label_u: la.clone(),
                label_v: lb.clone(),
                state_overlap: norm,
            });
        }
    }
    Ok(best)
}

/// Decides whether two program pairs could possibly be realized exactly.
pub fn noprog_check(pairs: &[ProgramPair], tol: f64) -> Result<NoProgReport> {
    if pairs.len() != 2 {
        return Err(Error::Argument(format!("the check compares exactly two pairs, got {}", pairs.len())));
    }
    check_family(pairs)?;
    let (p1, p2) = (&pairs[0], &pairs[1]);
    let target_distance = p1.target.distance(&p2.target).expect("aligned label sets");
    let targets_distinct = target_distance > tol;
    let program_overlap = p1.program.matrix().trace_product(p2.program.matrix()).re;
    let c = root_fidelity(&p1.program, &p2.program)?.min(1.0);
    let mixed_programs = !(p1.program.is_pure(tol) && p2.program.is_pure(tol));
    let witness = if targets_distinct { opposite_overlap(&p1.target, &p2.target)? } else { None };
    let s = witness.as_ref().map_or(0.0, |w| w.state_overlap);
    let bound = if s > 0.0 { approx_bound(c, s.min(1.0))? } else { 0.0 };
    let impossible = targets_distinct && program_overlap > tol;
    Ok(NoProgReport {
        verdict: if impossible { Verdict::ExactImpossible } else { Verdict::PossiblyExact },
        target_distance,
        targets_distinct,
        program_overlap,
        c,
        s,
        bound,
        witness,
        mixed_programs,
        heuristic: mixed_programs,
        tolerance: tol,
    })
}

/// Number of pairwise-distinct measurements in `targets`, i.e. the smallest
/// program dimension that could select all of them exactly.
pub fn min_program_dimension(targets: &[ProjectiveObservable], tol: f64) -> usize {
    let mut reps: Vec<&ProjectiveObservable> = Vec::new();
    for t in targets {
        if !reps.iter().any(|r| r.distance(t).is_some_and(|d| d <= tol)) {
            reps.push(t);
        }
    }
    reps.len()
}
