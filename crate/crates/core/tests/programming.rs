use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use waysim::grouprep::{make_cyclic, make_dihedral};
use waysim::matcore::C64;
use waysim::noprog::{approx_bound, noprog_check, program_feasibility, ProgramPair, Verdict};
use waysim::random::{random_instance, random_mixed_state, random_pure_state, random_rank1_measurement, random_vector};
use waysim::simulate::{optimize_simulation, Mode};
use waysim::{ProjectiveObservable, QState, SolverOptions};

fn relabel(obs: &ProjectiveObservable, labels: &[&str]) -> ProjectiveObservable {
    ProjectiveObservable::new(obs.outcomes().iter().zip(labels).map(|((_, p), l)| (l.to_string(), p.clone())).collect())
        .unwrap()
}

fn qubit_measurement(rng: &mut ChaCha8Rng) -> ProjectiveObservable {
    relabel(&random_rank1_measurement(2, rng), &["+", "-"])
}

#[test]
fn nonorthogonal_programs_respect_the_discrimination_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..10 {
        let pairs = [
            ProgramPair::new(random_pure_state(2, &mut rng), qubit_measurement(&mut rng)),
            ProgramPair::new(random_pure_state(2, &mut rng), qubit_measurement(&mut rng)),
        ];
        let check = noprog_check(&pairs, 1e-9).unwrap();
        assert_eq!(check.verdict, Verdict::ExactImpossible);
        let f = program_feasibility(&pairs, &SolverOptions::default()).unwrap();
        assert!(f.epsilon >= check.bound - 1e-6, "ε = {} below bound {}", f.epsilon, check.bound);
    }
}

#[test]
fn bound_also_holds_for_mixed_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..6 {
        let pairs = [
            ProgramPair::new(random_mixed_state(2, &mut rng), qubit_measurement(&mut rng)),
            ProgramPair::new(random_pure_state(2, &mut rng), qubit_measurement(&mut rng)),
        ];
        let check = noprog_check(&pairs, 1e-9).unwrap();
        assert!(check.heuristic);
        let f = program_feasibility(&pairs, &SolverOptions::default()).unwrap();
        assert!(f.epsilon >= check.bound - 1e-6);
    }
}

#[test]
fn orthogonal_programs_select_any_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for m in 2..=3 {
        let labels: Vec<String> = (0..3).map(|k| k.to_string()).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let pairs: Vec<ProgramPair> = (0..m)
            .map(|i| ProgramPair::new(QState::basis(m, i), relabel(&random_rank1_measurement(3, &mut rng), &refs)))
            .collect();
        let f = program_feasibility(&pairs, &SolverOptions::default()).unwrap();
        assert!(f.epsilon <= 1e-6, "{m} programs: ε = {:e}", f.epsilon);
    }
}

#[test]
fn programming_the_orbit_equals_covariant_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for group in [make_cyclic(3).unwrap(), make_dihedral(2).unwrap(), make_cyclic(4).unwrap()].map(Arc::new) {
        let inst = random_instance(&group, 2, 2, &mut rng).unwrap();
        let pairs: Vec<ProgramPair> = (0..group.order())
            .map(|g| {
                let (rho, obs) = inst.conjugated_pair(g);
                ProgramPair::new(rho, obs)
            })
            .collect();
        let f = program_feasibility(&pairs, &SolverOptions::default()).unwrap();
        let cov = optimize_simulation(&inst, Mode::CovariantAllG, &SolverOptions::default()).unwrap();
        assert!((f.epsilon - cov.epsilon).abs() <= 1e-6, "{}: {} vs {}", group.name(), f.epsilon, cov.epsilon);
    }
}

#[test]
fn bound_is_monotone_on_a_grid() {
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    for &c in &grid {
        for w in grid[1..].windows(2) {
            assert!(approx_bound(c, w[0]).unwrap() <= approx_bound(c, w[1]).unwrap());
            assert!(approx_bound(w[0], c.max(0.05)).unwrap() <= approx_bound(w[1], c.max(0.05)).unwrap());
        }
    }
}

#[test]
fn witness_states_have_the_reported_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let pairs = [
        ProgramPair::new(QState::pure(&random_vector(2, &mut rng)).unwrap(), qubit_measurement(&mut rng)),
        ProgramPair::new(QState::pure(&random_vector(2, &mut rng)).unwrap(), qubit_measurement(&mut rng)),
    ];
    let r = noprog_check(&pairs, 1e-9).unwrap();
    let w = r.witness.unwrap();
    let u: Vec<C64> = w.u.iter().map(|&[a, b]| C64::new(a, b)).collect();
    let v: Vec<C64> = w.v.iter().map(|&[a, b]| C64::new(a, b)).collect();
    let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
    assert!((overlap.norm() - r.s).abs() <= 1e-10);
    // u is certain to give label_u on target 1; v never gives label_u on target 2.
    let p1 = pairs[0].target.projector(&w.label_u).unwrap();
    let p2 = pairs[1].target.projector(&w.label_u).unwrap();
    let expect = |p: &waysim::ComplexMatrix, x: &[C64]| -> f64 {
        x.iter().zip(p.mat_vec(x)).map(|(a, b)| (a.conj() * b).re).sum()
    };
    assert!((expect(p1, &u) - 1.0).abs() <= 1e-10);
    assert!(expect(p2, &v).abs() <= 1e-10);
}
