//! Seeded sampling of unitaries, states and measurements.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grouprep::{charge_rep, dihedral_rep_2d, direct_sum, make_dihedral, FiniteGroup, ProjectiveRep};
use crate::matcore::{ComplexMatrix, ProjectiveObservable, QState, C64};
use crate::simulate::SimulationInstance;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(dim, |r, c| cols[c][r])
}

/// Uniformly random unit vector.
pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QState {
    QState::pure(&random_vector(dim, rng)).expect("unit vector")
}

/// Random full-rank mixed state `G G† / Tr(G G†)`.
pub fn random_mixed_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QState {
    let g = ComplexMatrix::from_fn(dim, |_, _| gaussian(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    QState::new(m.scale_real(1.0 / tr).hermitian_part()).expect("positive matrix")
}

/// Measurement in a Haar-random orthonormal basis, labelled `"0"`, `"1"`, ...
pub fn random_rank1_measurement<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ProjectiveObservable {
    let u = random_unitary(dim, rng);
    let labels: Vec<String> = (0..dim).map(|k| k.to_string()).collect();
    ProjectiveObservable::from_basis(&u, &labels).expect("orthonormal basis")
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| gaussian(rng)).hermitian_part()
}

/// Random linear representation of a cyclic or dihedral group in a random
/// basis: cyclic groups get random charges, dihedral groups a random direct
/// sum of the trivial, sign and two-dimensional irreducibles.
pub fn random_rep<R: Rng + ?Sized>(group: &Arc<FiniteGroup>, dim: usize, rng: &mut R) -> Result<ProjectiveRep> {
    if dim == 0 {
        return Err(Error::Argument("representation dimension must be positive".into()));
    }
    let n = group.order();
    let diagonal = if group.is_standard_cyclic() {
        let charges: Vec<i64> = (0..dim).map(|_| rng.random_range(0..n as i64)).collect();
        charge_rep(group.clone(), &charges)?
    } else if n.is_multiple_of(2) && n >= 4 && **group == make_dihedral(n / 2)? {
        let half = n / 2;
        let one_dim = |sign: bool| {
            let m = (0..n).map(|x| ComplexMatrix::real_diag(&[if sign && x >= half { -1.0 } else { 1.0 }])).collect();
            ProjectiveRep::new(group.clone(), m)
        };
        let mut rep: Option<ProjectiveRep> = None;
        let mut left = dim;
        while left > 0 {
            let block = match (left >= 2, rng.random_range(0..3)) {
                (true, 0) => dihedral_rep_2d(group.clone())?,
                (_, 1) => one_dim(true)?,
                _ => one_dim(false)?,
            };
            left -= block.dim();
            rep = Some(match rep {
                None => block,
                Some(r) => direct_sum(&r, &block)?,
            });
        }
        rep.expect("positive dimension")
    } else {
        return Err(Error::Argument(format!("no random representations for {}", group.name())));
    };
    let v = random_unitary(dim, rng);
    let matrices = diagonal.matrices().iter().map(|u| u.conjugate_by(&v)).collect();
    ProjectiveRep::new(group.clone(), matrices)
}

/// Instance with random representations, a random rank-one target and a
/// random pure resource.
pub fn random_instance<R: Rng + ?Sized>(
    group: &Arc<FiniteGroup>,
    dim_s: usize,
    dim_a: usize,
    rng: &mut R,
) -> Result<SimulationInstance> {
    let rep_s = random_rep(group, dim_s, rng)?;
    let rep_a = random_rep(group, dim_a, rng)?;
    let target = random_rank1_measurement(dim_s, rng);
    let resource = random_pure_state(dim_a, rng);
    SimulationInstance::new(rep_s, rep_a, target, resource)
}
