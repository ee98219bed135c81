//! States and observables as asymmetry resources: group orbits, their
//! orthogonality and commutativity structure, and information carried by the
//! encoding `g ↦ U(g) ρ U(g)†`.

use serde::Serialize;

use crate::engine::{maximize_success, SolverOptions};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::grouprep::ProjectiveRep;
use crate::matcore::{entropy_of_spectrum, herm_eigenvalues, trace_norm, ComplexMatrix, ProjectiveObservable, QState};
use crate::symmetry::twirl_with;

/// Two orbit elements closer than this (entrywise) are the same element.
pub const ORBIT_EQ_TOL: f64 = 1e-9;

/// Partition of group elements by equal orbit images.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitPartition {
    /// Classes in order of first appearance; each lists group elements ascending.
    pub classes: Vec<Vec<usize>>,
    /// Class index of each group element.
    pub class_of: Vec<usize>,
    /// Elements mapping the base to itself.
    pub stabilizer: Vec<usize>,
}

impl OrbitPartition {
    fn build(n: usize, identity: usize, same: impl Fn(usize, usize) -> bool) -> Self {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut class_of = vec![0; n];
        for g in 0..n {
            match classes.iter().position(|c| same(c[0], g)) {
                Some(k) => {
                    classes[k].push(g);
                    class_of[g] = k;
                }
                None => {
                    class_of[g] = classes.len();
                    classes.push(vec![g]);
                }
            }
        }
        let stabilizer = classes[class_of[identity]].clone();
        Self { classes, class_of, stabilizer }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Every group element gives a distinct image.
    pub fn is_free(&self) -> bool {
        self.classes.len() == self.class_of.len()
    }

    pub fn representatives(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c[0]).collect()
    }
}

/// The encoding `{U(g) x U(g)†}` of the group by an operator.
#[derive(Clone, Debug)]
pub struct OrbitEncoding {
    pub base: ComplexMatrix,
    /// Indexed by group element; the identity entry is `base` itself.
    pub elements: Vec<ComplexMatrix>,
    pub partition: OrbitPartition,
}

impl OrbitEncoding {
    pub fn num_classes(&self) -> usize {
        self.partition.num_classes()
    }

    pub fn stabilizer(&self) -> &[usize] {
        &self.partition.stabilizer
    }
}

pub fn orbit(x: &ComplexMatrix, rep: &ProjectiveRep) -> Result<OrbitEncoding> {
    orbit_with(x, rep, Execution::default())
}

pub fn orbit_with(x: &ComplexMatrix, rep: &ProjectiveRep, exec: Execution) -> Result<OrbitEncoding> {
    if x.dim() != rep.dim() {
        return Err(Error::Dimension(format!(
            "operator of dimension {} against a representation of dimension {}",
            x.dim(),
            rep.dim()
        )));
    }
    let identity = rep.group().identity();
    let elements =
        map_indexed(rep.order(), exec, |g| if g == identity { x.clone() } else { x.conjugate_by(rep.matrix(g)) });
    let partition =
        OrbitPartition::build(rep.order(), identity, |a, b| (&elements[a] - &elements[b]).max_abs() <= ORBIT_EQ_TOL);
    Ok(OrbitEncoding { base: x.clone(), elements, partition })
}

/// Orbit `{U(g) O U(g)†}` of a projective measurement; two elements coincide
/// when every labelled projector does.
#[derive(Clone, Debug)]
pub struct MeasurementOrbit {
    pub elements: Vec<ProjectiveObservable>,
    pub partition: OrbitPartition,
}

impl MeasurementOrbit {
    pub fn num_classes(&self) -> usize {
        self.partition.num_classes()
    }
}

pub fn measurement_orbit(target: &ProjectiveObservable, rep: &ProjectiveRep) -> Result<MeasurementOrbit> {
    if target.dim() != rep.dim() {
        return Err(Error::Dimension(format!(
            "observable of dimension {} against a representation of dimension {}",
            target.dim(),
            rep.dim()
        )));
    }
    let identity = rep.group().identity();
    let elements: Vec<ProjectiveObservable> = (0..rep.order())
        .map(|g| if g == identity { target.clone() } else { target.conjugate_by(rep.matrix(g)) })
        .collect();
    let partition = OrbitPartition::build(rep.order(), identity, |a, b| {
        elements[a].distance(&elements[b]).is_some_and(|d| d <= ORBIT_EQ_TOL)
    });
    Ok(MeasurementOrbit { elements, partition })
}

/// Hilbert-Schmidt inner products `Tr(σ_g σ_h)` over the whole orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramMatrix {
    pub size: usize,
    pub entries: Vec<Vec<f64>>,
}

impl GramMatrix {
    pub fn from_orbit(orbit: &OrbitEncoding) -> Self {
        let n = orbit.elements.len();
        let mut entries = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a..n {
                let v = orbit.elements[a].trace_product(&orbit.elements[b]).re;
                entries[a][b] = v;
                entries[b][a] = v;
            }
        }
        Self { size: n, entries }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = ComplexMatrix::from_real_rows(&self.entries).expect("square Gram matrix");
        *herm_eigenvalues(&m).expect("symmetric Gram matrix").last().unwrap()
    }
}

/// Verdict of [`is_perfectly_asymmetric`]. Pairwise orthogonality and a free
/// orbit are reported separately; the state is perfectly asymmetric only if
/// both hold.
#[derive(Clone, Debug, Serialize)]
pub struct PerfectAsymmetry {
    pub perfectly_asymmetric: bool,
    pub pairwise_orthogonal: bool,
    pub free_orbit: bool,
    pub orbit_classes: usize,
    pub group_order: usize,
    /// Pair of class representatives with the largest overlap `Tr(σ_g σ_h)`.
    pub worst_pair: Option<(usize, usize)>,
    pub worst_overlap: f64,
    pub tolerance: f64,
    pub gram: GramMatrix,
}

pub fn is_perfectly_asymmetric(rho: &QState, rep: &ProjectiveRep, tol: f64) -> Result<PerfectAsymmetry> {
    let orb = orbit(rho.matrix(), rep)?;
    let gram = GramMatrix::from_orbit(&orb);
    let reps = orb.partition.representatives();
    let mut worst_pair = None;
    let mut worst_overlap: f64 = 0.0;
    for (i, &a) in reps.iter().enumerate() {
        for &b in &reps[i + 1..] {
            let v = gram.entries[a][b].abs();
            if worst_pair.is_none() || v > worst_overlap {
                worst_overlap = v;
                worst_pair = Some((a, b));
            }
        }
    }
    let pairwise_orthogonal = worst_overlap <= tol;
    let free_orbit = orb.partition.is_free();
    // A singleton orbit has no pairs; report the self-overlap so callers see why.
    if worst_pair.is_none() {
        worst_overlap = gram.entries[0][0];
    }
    Ok(PerfectAsymmetry {
        perfectly_asymmetric: pairwise_orthogonal && free_orbit,
        pairwise_orthogonal,
        free_orbit,
        orbit_classes: orb.num_classes(),
        group_order: rep.order(),
        worst_pair,
        worst_overlap,
        tolerance: tol,
        gram,
    })
}

/// Verdict of [`is_classically_asymmetric`].
#[derive(Clone, Debug, Serialize)]
pub struct ClassicalAsymmetry {
    pub classical: bool,
    pub worst_pair: Option<(usize, usize)>,
    /// `max ||[σ_g, σ_h]||` (entrywise).
    pub worst_commutator: f64,
    pub tolerance: f64,
}

pub fn is_classically_asymmetric(rho: &QState, rep: &ProjectiveRep, tol: f64) -> Result<ClassicalAsymmetry> {
    let orb = orbit(rho.matrix(), rep)?;
    let reps = orb.partition.representatives();
    let mut worst_pair = None;
    let mut worst: f64 = 0.0;
    for (i, &a) in reps.iter().enumerate() {
        for &b in &reps[i + 1..] {
            let c = orb.elements[a].commutator(&orb.elements[b]).max_abs();
            if worst_pair.is_none() || c > worst {
                worst = c;
                worst_pair = Some((a, b));
            }
        }
    }
    Ok(ClassicalAsymmetry { classical: worst <= tol, worst_pair, worst_commutator: worst, tolerance: tol })
}

/// Holevo quantity of the uniform orbit ensemble, `S(twirl(ρ)) − S(ρ)`, in bits.
pub fn holevo_asymmetry(rho: &QState, rep: &ProjectiveRep) -> Result<f64> {
    let avg = twirl_with(rho.matrix(), rep, Execution::Sequential)?;
    let s_avg = entropy_of_spectrum(&herm_eigenvalues(&avg.hermitian_part())?);
    let s_rho = entropy_of_spectrum(&herm_eigenvalues(rho.matrix())?);
    Ok((s_avg - s_rho).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminationMethod {
    Trivial,
    Helstrom,
    Semidefinite,
}

/// Optimal success probability for discriminating an ensemble.
#[derive(Clone, Debug, Serialize)]
pub struct Discrimination {
    pub success: f64,
    pub method: DiscriminationMethod,
    /// Certified bound on `optimum − success` (0 for closed forms).
    pub gap: f64,
}

/// Certified gap required of the semidefinite route.
pub const DISCRIMINATION_GAP: f64 = 1e-5;

/// Two states use the Helstrom formula; more use the measurement-design SDP.
pub fn discrimination_success(states: &[QState], priors: &[f64]) -> Result<Discrimination> {
    if states.is_empty() || states.len() != priors.len() {
        return Err(Error::Argument(format!("{} states with {} priors", states.len(), priors.len())));
    }
    if priors.iter().any(|&p| p.is_nan() || p < 0.0) {
        return Err(Error::Argument("priors must be nonnegative".into()));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Argument(format!("priors sum to {total}, expected 1")));
    }
    let dim = states[0].dim();
    if states.iter().any(|s| s.dim() != dim) {
        return Err(Error::Dimension("states have different dimensions".into()));
    }
    match states.len() {
        1 => Ok(Discrimination { success: 1.0, method: DiscriminationMethod::Trivial, gap: 0.0 }),
        2 => {
            let diff = &states[0].matrix().scale_real(priors[0]) - &states[1].matrix().scale_real(priors[1]);
            let success = 0.5 * (1.0 + trace_norm(&diff.hermitian_part())?);
            Ok(Discrimination { success, method: DiscriminationMethod::Helstrom, gap: 0.0 })
        }
        _ => {
            let mats: Vec<ComplexMatrix> = states.iter().map(|s| s.matrix().clone()).collect();
            let sol = maximize_success(&mats, priors, &SolverOptions::default())?;
            if !sol.certificate.certified || sol.certificate.duality_gap_bound > DISCRIMINATION_GAP {
                return Err(Error::Numerical(format!(
                    "discrimination solve not certified (gap bound {:.3e})",
                    sol.certificate.duality_gap_bound
                )));
            }
            Ok(Discrimination {
                success: sol.success,
                method: DiscriminationMethod::Semidefinite,
                gap: sol.certificate.duality_gap_bound,
            })
        }
    }
}
