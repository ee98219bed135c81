//! Group averaging, symmetry predicates and the commutant of a representation.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, tree_sum, Execution};
use crate::grouprep::ProjectiveRep;
use crate::matcore::{ComplexMatrix, C64, ZERO};

/// Singular-value cutoff for the commutator null space, relative to the
/// largest singular value but never below this absolute value. Commutators
/// with unitaries are O(1), so a scalar representation (all singular values at
/// rounding level) still yields the full operator space.
pub const NULLSPACE_REL_TOL: f64 = 1e-10;
/// Norm below which a Gram-Schmidt residual is treated as dependent.
const GRAM_SCHMIDT_DROP: f64 = 1e-8;

fn check_dim(x: &ComplexMatrix, rep: &ProjectiveRep) -> Result<()> {
    if x.dim() != rep.dim() {
        return Err(Error::Dimension(format!(
            "operator of dimension {} against a representation of dimension {}",
            x.dim(),
            rep.dim()
        )));
    }
    Ok(())
}

/// `(1/|G|) Σ_g U(g) x U(g)†`.
pub fn twirl(x: &ComplexMatrix, rep: &ProjectiveRep) -> Result<ComplexMatrix> {
    twirl_with(x, rep, Execution::default())
}

/// [`twirl`] with an explicit execution strategy. The sum is a pairwise tree
/// in element order, so the result does not depend on `exec`.
pub fn twirl_with(x: &ComplexMatrix, rep: &ProjectiveRep, exec: Execution) -> Result<ComplexMatrix> {
    check_dim(x, rep)?;
    let terms = map_indexed(rep.order(), exec, |g| x.conjugate_by(rep.matrix(g)));
    Ok(tree_sum(terms).scale_real(1.0 / rep.order() as f64))
}

/// Outcome of [`is_symmetric`].
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    /// Element maximizing `||U(g) x U(g)† − x||`.
    pub worst_element: usize,
    pub deviation: f64,
    pub tolerance: f64,
}

/// Tests `U(g) x U(g)† = x` for every `g`, entrywise within `tol`.
pub fn is_symmetric(x: &ComplexMatrix, rep: &ProjectiveRep, tol: f64) -> Result<SymmetryCheck> {
    check_dim(x, rep)?;
    let mut worst_element = rep.group().identity();
    let mut deviation: f64 = 0.0;
    for (g, u) in rep.matrices().iter().enumerate() {
        let d = (&x.conjugate_by(u) - x).max_abs();
        if d > deviation {
            deviation = d;
            worst_element = g;
        }
    }
    Ok(SymmetryCheck { symmetric: deviation <= tol, worst_element, deviation, tolerance: tol })
}

/// Largest commutator `||[B, U(g)]||` over the group; zero for commutant elements.
pub fn commutation_defect(x: &ComplexMatrix, rep: &ProjectiveRep) -> f64 {
    rep.matrices().iter().map(|u| x.commutator(u).max_abs()).fold(0.0, f64::max)
}

/// Hilbert-Schmidt orthonormal Hermitian basis of `{B : [B, U(g)] = 0 ∀g}`.
///
/// The null space of `x ↦ (U(g)x − xU(g))` over a generating set is found by
/// SVD; each complex null vector is split into Hermitian and anti-Hermitian
/// parts and the pieces are re-orthonormalized.
pub fn commutant_basis(rep: &ProjectiveRep) -> Vec<ComplexMatrix> {
    let d = rep.dim();
    let n = d * d;
    let mut gens = rep.group().generators();
    if gens.is_empty() {
        gens.push(rep.group().identity());
    }
    let mut stacked = DMatrix::<C64>::zeros(gens.len() * n, n);
    for col in 0..n {
        let unit = ComplexMatrix::unit(d, col / d, col % d);
        for (b, &g) in gens.iter().enumerate() {
            let comm = unit.commutator(rep.matrix(g));
            for (k, z) in comm.as_slice().iter().enumerate() {
                stacked[(b * n + k, col)] = -*z;
            }
        }
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = NULLSPACE_REL_TOL * sigma_max.max(1.0);

    let mut candidates = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            let m = ComplexMatrix::from_fn(d, |r, c| v_t[(i, r * d + c)].conj());
            candidates.push(m.hermitian_part());
            candidates.push(m.antihermitian_part());
        }
    }
    orthonormalize_hermitian(candidates)
}

/// Modified Gram-Schmidt (two passes) under the real inner product
/// `Re Tr(A† B)`, dropping dependent vectors.
pub(crate) fn orthonormalize_hermitian(candidates: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for mut v in candidates {
        for _ in 0..2 {
            for b in &basis {
                let c = b.hs_inner(&v).re;
                v = &v - &b.scale_real(c);
            }
        }
        let norm = v.frobenius_norm();
        if norm > GRAM_SCHMIDT_DROP {
            basis.push(v.scale_real(1.0 / norm).hermitian_part());
        }
    }
    basis
}

/// Orthonormal basis of all `d × d` Hermitian matrices: diagonal units, then
/// `(|j⟩⟨k| + |k⟩⟨j|)/√2` and `i(|k⟩⟨j| − |j⟩⟨k|)/√2` for `j < k`.
pub fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<ComplexMatrix> = (0..d).map(|j| ComplexMatrix::unit(d, j, j)).collect();
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = ComplexMatrix::zeros(d);
            sym[(j, k)] = C64::new(s, 0.0);
            sym[(k, j)] = C64::new(s, 0.0);
            out.push(sym);
            let mut anti = ComplexMatrix::zeros(d);
            anti[(j, k)] = C64::new(0.0, -s);
            anti[(k, j)] = C64::new(0.0, s);
            out.push(anti);
        }
    }
    out
}

/// Matrix of the twirl as a superoperator on row-major vectorized operators.
pub fn twirl_superoperator(rep: &ProjectiveRep) -> ComplexMatrix {
    let d = rep.dim();
    let n = d * d;
    let mut out = ComplexMatrix::zeros(n);
    for col in 0..n {
        let image = twirl_with(&ComplexMatrix::unit(d, col / d, col % d), rep, Execution::Sequential).unwrap();
        for (row, &z) in image.as_slice().iter().enumerate() {
            if z != ZERO {
                out[(row, col)] = z;
            }
        }
    }
    out
}

/// Coefficients of `x` along an orthonormal Hermitian basis and the resynthesized operator.
pub fn expand_in_basis(x: &ComplexMatrix, basis: &[ComplexMatrix]) -> (Vec<C64>, ComplexMatrix) {
    let coeffs: Vec<C64> = basis.iter().map(|b| b.hs_inner(x)).collect();
    let mut out = ComplexMatrix::zeros(x.dim());
    for (c, b) in coeffs.iter().zip(basis) {
        out = &out + &b.scale(*c);
    }
    (coeffs, out)
}
