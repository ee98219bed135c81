//! Symmetric simulation of asymmetric measurements from a resource state.
//!
//! A joint POVM `{Ẽ_k}` on system ⊗ ancilla, fed the resource `ρ_a`, induces
//! the system effects `E_k = Tr_a[Ẽ_k (I ⊗ ρ_a)]`. The simulation is exact when
//! these equal the target projectors; otherwise its error is
//! `max_k ||E_k − Π_k||_∞`, the worst outcome-probability deviation over all
//! system states.

use serde::{Deserialize, Serialize};

use crate::asymmetry::{is_perfectly_asymmetric, measurement_orbit, ORBIT_EQ_TOL};
use crate::engine::{minimize_worst_deviation, Certificate, ProgramConstraint, SolverOptions};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::grouprep::{tensor_rep, ProjectiveRep};
use crate::matcore::{
    contract_ancilla, herm_eig, kron, op_norm, tol, ComplexMatrix, Povm, ProjectiveObservable, QState,
};
use crate::symmetry::{commutant_basis, hermitian_basis, twirl_with};

/// Two orbit states are orthogonal when their overlap is below this.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// Relative eigenvalue cutoff defining the support of a resource state.
pub const SUPPORT_REL_TOL: f64 = 1e-9;

/// Tolerance for symmetry of the exact construction.
pub const EXACT_SYMMETRY_TOL: f64 = tol::EIGEN;

#[derive(Clone, Debug)]
pub struct SimulationInstance {
    rep_s: ProjectiveRep,
    rep_a: ProjectiveRep,
    target: ProjectiveObservable,
    resource: QState,
}

impl SimulationInstance {
    pub fn new(
        rep_s: ProjectiveRep,
        rep_a: ProjectiveRep,
        target: ProjectiveObservable,
        resource: QState,
    ) -> Result<Self> {
        if !rep_s.shares_group(&rep_a) {
            return Err(Error::Representation("system and ancilla representations act on different groups".into()));
        }
        if target.dim() != rep_s.dim() {
            return Err(Error::Dimension(format!(
                "target of dimension {} against a system representation of dimension {}",
                target.dim(),
                rep_s.dim()
            )));
        }
        if resource.dim() != rep_a.dim() {
            return Err(Error::Dimension(format!(
                "resource of dimension {} against an ancilla representation of dimension {}",
                resource.dim(),
                rep_a.dim()
            )));
        }
        Ok(Self { rep_s, rep_a, target, resource })
    }

    pub fn rep_s(&self) -> &ProjectiveRep {
        &self.rep_s
    }

    pub fn rep_a(&self) -> &ProjectiveRep {
        &self.rep_a
    }

    pub fn target(&self) -> &ProjectiveObservable {
        &self.target
    }

    pub fn resource(&self) -> &QState {
        &self.resource
    }

    pub fn dim_s(&self) -> usize {
        self.rep_s.dim()
    }

    pub fn dim_a(&self) -> usize {
        self.rep_a.dim()
    }

    pub fn rep_sa(&self) -> Result<ProjectiveRep> {
        tensor_rep(&self.rep_s, &self.rep_a)
    }

    pub fn labels(&self) -> Vec<String> {
        self.target.labels().into_iter().map(String::from).collect()
    }

    /// The pair `(U_a(g) ρ_a U_a(g)†, U_s(g) O_s U_s(g)†)`.
    pub fn conjugated_pair(&self, g: usize) -> (QState, ProjectiveObservable) {
        (self.resource.conjugate_by(self.rep_a.matrix(g)), self.target.conjugate_by(self.rep_s.matrix(g)))
    }

    /// Distinct conjugated pairs over the whole group, in order of first appearance.
    pub fn orbit_pairs(&self) -> Vec<(QState, ProjectiveObservable)> {
        let mut out: Vec<(QState, ProjectiveObservable)> = Vec::new();
        for g in 0..self.rep_s.order() {
            let (rho, obs) = self.conjugated_pair(g);
            let seen = out.iter().any(|(r, o)| {
                (r.matrix() - rho.matrix()).max_abs() <= ORBIT_EQ_TOL
                    && o.distance(&obs).is_some_and(|d| d <= ORBIT_EQ_TOL)
            });
            if !seen {
                out.push((rho, obs));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One symmetric joint measurement fed the resource itself.
    SymmetricSingle,
    /// Any joint measurement, required to work on every conjugated pair.
    CovariantAllG,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::SymmetricSingle => "symmetric-single",
            Mode::CovariantAllG => "covariant-all-g",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub mode: Mode,
    pub epsilon: f64,
    pub povm: Povm,
    pub certificate: Certificate,
}

fn split_dims(joint_dim: usize, dim_a: usize) -> Result<usize> {
    if dim_a == 0 || !joint_dim.is_multiple_of(dim_a) {
        return Err(Error::Dimension(format!(
            "joint dimension {joint_dim} does not factor over an ancilla of dimension {dim_a}"
        )));
    }
    Ok(joint_dim / dim_a)
}

/// Induced system POVM `E_k = Tr_a[Ẽ_k (I ⊗ ρ_a)]`.
pub fn effective_povm(joint: &Povm, rho_a: &QState) -> Result<Povm> {
    split_dims(joint.dim(), rho_a.dim())?;
    let effects = joint
        .effects()
        .iter()
        .map(|(l, e)| Ok((l.clone(), contract_ancilla(e, rho_a.matrix())?.hermitian_part())))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

fn aligned_targets(joint: &Povm, target: &ProjectiveObservable) -> Result<Vec<ComplexMatrix>> {
    target.aligned_to(&joint.labels())
}

/// `max_k ||E_k − Π_k||_∞` with effects and projectors matched by label.
pub fn simulation_residual(joint: &Povm, rho_a: &QState, target: &ProjectiveObservable) -> Result<f64> {
    let dim_s = split_dims(joint.dim(), rho_a.dim())?;
    if dim_s != target.dim() {
        return Err(Error::Dimension(format!(
            "joint system dimension {dim_s} against target dimension {}",
            target.dim()
        )));
    }
    let targets = aligned_targets(joint, target)?;
    let mut worst: f64 = 0.0;
    for ((_, e), p) in joint.effects().iter().zip(&targets) {
        let induced = contract_ancilla(e, rho_a.matrix())?;
        worst = worst.max(op_norm(&(&induced - p).hermitian_part())?);
    }
    Ok(worst)
}

/// Worst residual over all conjugated pairs of the instance.
pub fn covariant_residual(joint: &Povm, inst: &SimulationInstance) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in 0..inst.rep_s.order() {
        let (rho, obs) = inst.conjugated_pair(g);
        worst = worst.max(simulation_residual(joint, &rho, &obs)?);
    }
    Ok(worst)
}

fn support_projector(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(rho)?;
    let cutoff = SUPPORT_REL_TOL * eig.values[0].max(0.0);
    let mut p = ComplexMatrix::zeros(rho.dim());
    for (k, &l) in eig.values.iter().enumerate() {
        if l >= cutoff && l > 0.0 {
            p = &p + &ComplexMatrix::projector(&eig.vector(k));
        }
    }
    Ok(p)
}

/// The symmetric projective measurement that reads the group element off the
/// ancilla and measures the correspondingly rotated target. Requires a
/// perfectly asymmetric resource; the leftover ancilla subspace is assigned to
/// the first outcome.
pub fn exact_programmed_measurement(inst: &SimulationInstance) -> Result<Povm> {
    let pa = is_perfectly_asymmetric(&inst.resource, &inst.rep_a, ORTHOGONALITY_TOL)?;
    if !pa.perfectly_asymmetric {
        return Err(Error::NotPerfectlyAsymmetric { overlap: pa.worst_overlap, free_orbit: pa.free_orbit });
    }
    let (ds, da) = (inst.dim_s(), inst.dim_a());
    let mut rest = ComplexMatrix::identity(da);
    let mut effects: Vec<(String, ComplexMatrix)> =
        inst.target.outcomes().iter().map(|(l, _)| (l.clone(), ComplexMatrix::zeros(ds * da))).collect();
    for g in 0..inst.rep_a.order() {
        let p_g = support_projector(&inst.resource.matrix().conjugate_by(inst.rep_a.matrix(g)))?;
        rest = &rest - &p_g;
        let rotated = inst.target.conjugate_by(inst.rep_s.matrix(g));
        for ((_, e), (_, pi)) in effects.iter_mut().zip(rotated.outcomes()) {
            *e = &*e + &kron(pi, &p_g);
        }
    }
    effects[0].1 = &effects[0].1 + &kron(&ComplexMatrix::identity(ds), &rest);
    let effects = effects.into_iter().map(|(l, e)| (l, e.hermitian_part())).collect();
    Povm::new(effects)
}

/// Necessary condition for exact simulation: the ancilla must be at least as
/// large as the number of distinct measurements in the target's orbit. The
/// stricter count against the full group order is reported alongside.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitBound {
    pub orbit_classes: usize,
    pub ancilla_dim: usize,
    pub group_order: usize,
    pub passes: bool,
    pub passes_group_order: bool,
}

pub fn orbit_dimension_bound(inst: &SimulationInstance) -> Result<OrbitBound> {
    let orbit = measurement_orbit(&inst.target, &inst.rep_s)?;
    let orbit_classes = orbit.num_classes();
    let ancilla_dim = inst.dim_a();
    let group_order = inst.rep_s.order();
    Ok(OrbitBound {
        orbit_classes,
        ancilla_dim,
        group_order,
        passes: ancilla_dim >= orbit_classes,
        passes_group_order: ancilla_dim >= group_order,
    })
}

fn constraint(rho: &QState, obs: &ProjectiveObservable, labels: &[String]) -> Result<ProgramConstraint> {
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    Ok(ProgramConstraint { ancilla_state: rho.matrix().clone(), targets: obs.aligned_to(&refs)? })
}

pub fn optimize_simulation(inst: &SimulationInstance, mode: Mode, opts: &SolverOptions) -> Result<SimulationResult> {
    optimize_simulation_with(inst, mode, opts, Execution::default())
}

/// Minimal simulation error. Symmetric mode searches the commutant of the
/// joint representation against the resource alone; covariant mode searches
/// all joint POVMs against every conjugated pair. `exec` governs restarts.
pub fn optimize_simulation_with(
    inst: &SimulationInstance,
    mode: Mode,
    opts: &SolverOptions,
    exec: Execution,
) -> Result<SimulationResult> {
    let labels = inst.labels();
    let (basis, constraints) = match mode {
        Mode::SymmetricSingle => {
            let basis = commutant_basis(&inst.rep_sa()?);
            (basis, vec![constraint(&inst.resource, &inst.target, &labels)?])
        }
        Mode::CovariantAllG => {
            let constraints = inst
                .orbit_pairs()
                .iter()
                .map(|(rho, obs)| constraint(rho, obs, &labels))
                .collect::<Result<Vec<_>>>()?;
            (hermitian_basis(inst.dim_s() * inst.dim_a()), constraints)
        }
    };
    let sol = minimize_worst_deviation(inst.dim_s(), inst.dim_a(), &labels, &constraints, &basis, opts, exec)?;
    Ok(SimulationResult { mode, epsilon: sol.epsilon, povm: sol.povm, certificate: sol.certificate })
}

/// Solves independent instances, concurrently under [`Execution::Parallel`].
/// Each solve runs its own restarts sequentially.
pub fn optimize_many(
    instances: &[SimulationInstance],
    mode: Mode,
    opts: &SolverOptions,
    exec: Execution,
) -> Vec<Result<SimulationResult>> {
    map_slice(instances, exec, |inst| optimize_simulation_with(inst, mode, opts, Execution::Sequential))
}

/// Frame average `(1/|G|) Σ_g U(g)† Ẽ_k U(g)` of every effect.
pub fn covariantize(joint: &Povm, rep_sa: &ProjectiveRep) -> Result<Povm> {
    if joint.dim() != rep_sa.dim() {
        return Err(Error::Dimension(format!(
            "POVM of dimension {} against a representation of dimension {}",
            joint.dim(),
            rep_sa.dim()
        )));
    }
    // The sum runs over the whole group, so conjugating by U(g) or U(g)† is the same average.
    let effects = joint
        .effects()
        .iter()
        .map(|(l, e)| Ok((l.clone(), twirl_with(e, rep_sa, Execution::Sequential)?.hermitian_part())))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

/// Slack allowed between the covariantized residual and the covariant optimum.
pub const COVARIANTIZE_SLACK: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct DualityReport {
    pub epsilon_sym: f64,
    pub epsilon_cov: f64,
    /// Single-resource residual of the covariantized covariant optimum.
    pub epsilon_covariantized: f64,
    pub difference: f64,
    pub duality_tol: f64,
    pub certified: bool,
    pub pass: bool,
    pub symmetric: SimulationResult,
    pub covariant: SimulationResult,
    pub covariantized: Povm,
}

/// Solves both modes and checks that their optima agree and that averaging
/// the covariant optimum over the group yields a symmetric measurement at
/// least as good. A non-certified solve fails the check.
pub fn verify_duality(inst: &SimulationInstance, opts: &SolverOptions) -> Result<DualityReport> {
    verify_duality_with(inst, opts, Execution::default())
}

pub fn verify_duality_with(inst: &SimulationInstance, opts: &SolverOptions, exec: Execution) -> Result<DualityReport> {
    let symmetric = optimize_simulation_with(inst, Mode::SymmetricSingle, opts, exec)?;
    let covariant = optimize_simulation_with(inst, Mode::CovariantAllG, opts, exec)?;
    let covariantized = covariantize(&covariant.povm, &inst.rep_sa()?)?;
    let epsilon_covariantized = simulation_residual(&covariantized, &inst.resource, &inst.target)?;
    let difference = symmetric.epsilon - covariant.epsilon;
    let certified = symmetric.certificate.certified && covariant.certificate.certified;
    let pass = certified
        && difference.abs() <= opts.duality_tol
        && epsilon_covariantized <= covariant.epsilon + COVARIANTIZE_SLACK;
    Ok(DualityReport {
        epsilon_sym: symmetric.epsilon,
        epsilon_cov: covariant.epsilon,
        epsilon_covariantized,
        difference,
        duality_tol: opts.duality_tol,
        certified,
        pass,
        symmetric,
        covariant,
        covariantized,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::grouprep::{charge_rep, make_cyclic, trivial_rep};
    use crate::matcore::C64;
    use crate::symmetry::is_symmetric;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn ket(a: f64, b: f64) -> Vec<C64> {
        vec![C64::new(a, 0.0), C64::new(b, 0.0)]
    }

    fn x_measurement() -> ProjectiveObservable {
        ProjectiveObservable::new(vec![
            ("+".into(), ComplexMatrix::projector(&ket(H, H))),
            ("-".into(), ComplexMatrix::projector(&ket(H, -H))),
        ])
        .unwrap()
    }

    fn z_measurement() -> ProjectiveObservable {
        ProjectiveObservable::new(vec![
            ("+".into(), ComplexMatrix::real_diag(&[1.0, 0.0])),
            ("-".into(), ComplexMatrix::real_diag(&[0.0, 1.0])),
        ])
        .unwrap()
    }

    fn plus() -> QState {
        QState::pure(&ket(H, H)).unwrap()
    }

    fn instance(n: usize, target: ProjectiveObservable, resource: QState) -> SimulationInstance {
        let g = Arc::new(make_cyclic(n).unwrap());
        let rep = charge_rep(g, &[0, 1]).unwrap();
        SimulationInstance::new(rep.clone(), rep, target, resource).unwrap()
    }

    #[test]
    fn instance_validation() {
        let z2 = Arc::new(make_cyclic(2).unwrap());
        let z3 = Arc::new(make_cyclic(3).unwrap());
        let r2 = charge_rep(z2.clone(), &[0, 1]).unwrap();
        let r3 = charge_rep(z3, &[0, 1]).unwrap();
        assert!(matches!(
            SimulationInstance::new(r2.clone(), r3, x_measurement(), plus()),
            Err(Error::Representation(_))
        ));
        let r2_big = trivial_rep(z2, 3).unwrap();
        assert!(matches!(
            SimulationInstance::new(r2.clone(), r2_big, x_measurement(), plus()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn effective_povm_cases() {
        let rho = plus();
        let joint = Povm::new(
            z_measurement().outcomes().iter().map(|(l, p)| (l.clone(), kron(p, &ComplexMatrix::identity(2)))).collect(),
        )
        .unwrap();
        let eff = effective_povm(&joint, &rho).unwrap();
        assert!((&eff.effects()[0].1 - &ComplexMatrix::real_diag(&[1.0, 0.0])).max_abs() < 1e-15);

        // System-independent device: E_k = Tr(F_k ρ_a) I.
        let f0 = ComplexMatrix::real_diag(&[1.0, 0.0]);
        let f1 = ComplexMatrix::real_diag(&[0.0, 1.0]);
        let joint = Povm::new(vec![
            ("a".into(), kron(&ComplexMatrix::identity(2), &f0)),
            ("b".into(), kron(&ComplexMatrix::identity(2), &f1)),
        ])
        .unwrap();
        let eff = effective_povm(&joint, &rho).unwrap();
        assert!((&eff.effects()[0].1 - &ComplexMatrix::identity(2).scale_real(0.5)).max_abs() < 1e-15);

        assert!(matches!(effective_povm(&joint, &QState::maximally_mixed(3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn residual_cases() {
        let id4 = ComplexMatrix::identity(4);
        let constant = Povm::new(vec![("+".into(), id4.clone()), ("-".into(), ComplexMatrix::zeros(4))]).unwrap();
        assert_abs_diff_eq!(simulation_residual(&constant, &plus(), &z_measurement()).unwrap(), 1.0, epsilon = 1e-12);

        let half = Povm::new(vec![("+".into(), id4.scale_real(0.5)), ("-".into(), id4.scale_real(0.5))]).unwrap();
        assert_abs_diff_eq!(simulation_residual(&half, &plus(), &z_measurement()).unwrap(), 0.5, epsilon = 1e-12);

        let wrong = Povm::new(vec![("a".into(), id4.scale_real(0.5)), ("b".into(), id4.scale_real(0.5))]).unwrap();
        assert!(matches!(simulation_residual(&wrong, &plus(), &z_measurement()), Err(Error::Argument(_))));
    }

    #[test]
    fn exact_construction_on_z2() {
        let inst = instance(2, x_measurement(), plus());
        let joint = exact_programmed_measurement(&inst).unwrap();
        let pp = kron(&ComplexMatrix::projector(&ket(H, H)), &ComplexMatrix::projector(&ket(H, H)));
        let mm = kron(&ComplexMatrix::projector(&ket(H, -H)), &ComplexMatrix::projector(&ket(H, -H)));
        let expected = &pp + &mm;
        assert!((joint.effect("+").unwrap() - &expected).max_abs() < 1e-14);
        assert!((joint.effect("-").unwrap() - &(&ComplexMatrix::identity(4) - &expected)).max_abs() < 1e-14);
        assert!(joint.is_projective(1e-9));
        let rep_sa = inst.rep_sa().unwrap();
        for (_, e) in joint.effects() {
            assert!(is_symmetric(e, &rep_sa, EXACT_SYMMETRY_TOL).unwrap().symmetric);
        }
        assert!(simulation_residual(&joint, &plus(), &x_measurement()).unwrap() <= 1e-10);
        // Already symmetric: covariantizing is a fixed point.
        let cov = covariantize(&joint, &rep_sa).unwrap();
        assert!((cov.effect("+").unwrap() - joint.effect("+").unwrap()).max_abs() < 1e-10);
    }

    #[test]
    fn exact_construction_for_symmetric_target_and_failure() {
        let inst = instance(2, z_measurement(), plus());
        let joint = exact_programmed_measurement(&inst).unwrap();
        assert!(simulation_residual(&joint, &plus(), &z_measurement()).unwrap() <= 1e-10);

        let inst = instance(2, x_measurement(), QState::basis(2, 0));
        match exact_programmed_measurement(&inst) {
            Err(Error::NotPerfectlyAsymmetric { free_orbit, .. }) => assert!(!free_orbit),
            other => panic!("expected NotPerfectlyAsymmetric, got {other:?}"),
        }
    }

    #[test]
    fn orbit_bounds() {
        let b = orbit_dimension_bound(&instance(4, x_measurement(), plus())).unwrap();
        assert_eq!((b.orbit_classes, b.ancilla_dim, b.group_order, b.passes), (4, 2, 4, false));
        let b = orbit_dimension_bound(&instance(4, z_measurement(), plus())).unwrap();
        assert_eq!(b.orbit_classes, 1);
        assert!(b.passes);
        assert!(!b.passes_group_order);
    }

    #[test]
    fn z2_optimum_is_zero_in_both_modes() {
        let inst = instance(2, x_measurement(), plus());
        for mode in [Mode::SymmetricSingle, Mode::CovariantAllG] {
            let r = optimize_simulation(&inst, mode, &SolverOptions::default()).unwrap();
            assert!(r.epsilon <= 1e-6, "{mode:?}: {}", r.epsilon);
            assert!(r.certificate.certified, "{:?}", r.certificate);
            let recomputed = match mode {
                Mode::SymmetricSingle => simulation_residual(&r.povm, &plus(), &x_measurement()).unwrap(),
                Mode::CovariantAllG => covariant_residual(&r.povm, &inst).unwrap(),
            };
            assert_abs_diff_eq!(recomputed, r.epsilon, epsilon = 1e-8);
        }
    }

    #[test]
    fn symmetric_target_with_trivial_ancilla() {
        let g = Arc::new(make_cyclic(2).unwrap());
        let rep_s = charge_rep(g.clone(), &[0, 1]).unwrap();
        let rep_a = trivial_rep(g, 1).unwrap();
        let inst = SimulationInstance::new(rep_s, rep_a, z_measurement(), QState::maximally_mixed(1)).unwrap();
        let r = optimize_simulation(&inst, Mode::SymmetricSingle, &SolverOptions::default()).unwrap();
        assert!(r.epsilon <= 1e-6);
        let d = verify_duality(&inst, &SolverOptions::default()).unwrap();
        assert!(d.pass);
    }

    #[test]
    fn z4_duality_and_no_go() {
        let inst = instance(4, x_measurement(), plus());
        let d = verify_duality(&inst, &SolverOptions::default()).unwrap();
        assert!(d.pass, "{} vs {} ({})", d.epsilon_sym, d.epsilon_cov, d.epsilon_covariantized);
        assert!(d.epsilon_sym >= 1e-3);
    }

    #[test]
    fn batch_matches_single_solves() {
        let insts = vec![instance(2, x_measurement(), plus()), instance(4, x_measurement(), plus())];
        let opts = SolverOptions::default();
        let seq = optimize_many(&insts, Mode::SymmetricSingle, &opts, Execution::Sequential);
        let par = optimize_many(&insts, Mode::SymmetricSingle, &opts, Execution::Parallel);
        for (a, b) in seq.iter().zip(&par) {
            assert_eq!(a.as_ref().unwrap().epsilon, b.as_ref().unwrap().epsilon);
        }
    }
}
