use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waysim::grouprep::{charge_rep, make_cyclic, make_dihedral, regular_rep, tensor_rep, FiniteGroup};
use waysim::random::{random_instance, random_rank1_measurement, random_rep};
use waysim::simulate::{
    covariant_residual, exact_programmed_measurement, optimize_simulation, orbit_dimension_bound, simulation_residual,
    Mode, SimulationInstance,
};
use waysim::symmetry::is_symmetric;
use waysim::{QState, SolverOptions};

/// Instance whose resource is the basis state `|e⟩` of the regular
/// representation, which is perfectly asymmetric for every group.
fn regular_resource_instance(group: &Arc<FiniteGroup>, dim_s: usize, rng: &mut ChaCha8Rng) -> SimulationInstance {
    let rep_s = random_rep(group, dim_s, rng).unwrap();
    let rep_a = regular_rep(group.clone()).unwrap();
    let resource = QState::basis(group.order(), group.identity());
    SimulationInstance::new(rep_s, rep_a, random_rank1_measurement(dim_s, rng), resource).unwrap()
}

#[test]
fn perfectly_asymmetric_resources_simulate_every_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for group in [make_cyclic(3).unwrap(), make_dihedral(2).unwrap()].map(Arc::new) {
        for _ in 0..20 {
            let inst = regular_resource_instance(&group, 2, &mut rng);
            let r = optimize_simulation(&inst, Mode::SymmetricSingle, &SolverOptions::default()).unwrap();
            assert!(r.epsilon <= 1e-6, "{}: ε = {:e}", group.name(), r.epsilon);
        }
    }
}

#[test]
fn exact_construction_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for group in [make_cyclic(2).unwrap(), make_cyclic(4).unwrap(), make_dihedral(3).unwrap()].map(Arc::new) {
        for ds in 1..=3 {
            let inst = regular_resource_instance(&group, ds, &mut rng);
            let joint = exact_programmed_measurement(&inst).unwrap();
            assert!(joint.projectivity_residual() <= 1e-9);
            assert!(joint.completeness_residual() <= 1e-9);
            let rep_sa = tensor_rep(inst.rep_s(), inst.rep_a()).unwrap();
            for (_, e) in joint.effects() {
                assert!(is_symmetric(e, &rep_sa, 1e-9).unwrap().symmetric);
            }
            assert!(simulation_residual(&joint, inst.resource(), inst.target()).unwrap() <= 1e-10);
            // The construction also works for every conjugated pair.
            assert!(covariant_residual(&joint, &inst).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn failing_the_orbit_bound_leaves_a_positive_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut checked = 0;
    while checked < 8 {
        let n = [3, 4, 6][rng.random_range(0..3)];
        let group = Arc::new(make_cyclic(n).unwrap());
        let inst = random_instance(&group, 2, 2, &mut rng).unwrap();
        let bound = orbit_dimension_bound(&inst).unwrap();
        if bound.passes {
            continue;
        }
        checked += 1;
        let r = optimize_simulation(&inst, Mode::SymmetricSingle, &SolverOptions::default()).unwrap();
        assert!(r.epsilon >= 1e-4, "Z{n} with {} classes: ε = {:e}", bound.orbit_classes, r.epsilon);
    }
}

#[test]
fn reported_error_matches_the_returned_measurement() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let group = Arc::new(make_dihedral(3).unwrap());
    for _ in 0..4 {
        let inst = random_instance(&group, 2, 2, &mut rng).unwrap();
        let sym = optimize_simulation(&inst, Mode::SymmetricSingle, &SolverOptions::default()).unwrap();
        let recomputed = simulation_residual(&sym.povm, inst.resource(), inst.target()).unwrap();
        assert!((recomputed - sym.epsilon).abs() <= 1e-8);
        let cov = optimize_simulation(&inst, Mode::CovariantAllG, &SolverOptions::default()).unwrap();
        assert!((covariant_residual(&cov.povm, &inst).unwrap() - cov.epsilon).abs() <= 1e-8);
        for r in [&sym, &cov] {
            assert!(r.certificate.certified);
            assert!(r.povm.completeness_residual() <= 1e-9);
            assert!(r.povm.min_eigenvalue() >= -1e-9);
            let trace = &r.certificate.objective_trace;
            assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-12), "objective trace increased: {trace:?}");
        }
    }
}

#[test]
fn restarts_never_worsen_the_optimum() {
    let group = Arc::new(make_cyclic(4).unwrap());
    let rep = charge_rep(group, &[0, 1]).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [waysim::C64::new(h, 0.0), waysim::C64::new(h, 0.0)];
    let target = waysim::ProjectiveObservable::from_hermitian(
        &waysim::ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
    )
    .unwrap();
    let inst = SimulationInstance::new(rep.clone(), rep, target, QState::pure(&plus).unwrap()).unwrap();
    let single = optimize_simulation(&inst, Mode::SymmetricSingle, &SolverOptions::default()).unwrap();
    let opts = SolverOptions { restarts: 3, seed: 9, ..SolverOptions::default() };
    let multi = optimize_simulation(&inst, Mode::SymmetricSingle, &opts).unwrap();
    assert_eq!(multi.certificate.starts, 4);
    assert!((multi.epsilon - single.epsilon).abs() <= 1e-6);
}
