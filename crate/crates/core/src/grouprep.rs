//! Finite groups given by Cayley tables, and their projective unitary
//! representations.
//!
//! Dihedral elements are encoded as `index = rotation + n * flip`, standing for
//! `r^rotation f^flip`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{kron, tol, ComplexMatrix, C64, ONE, ZERO};

/// Groups up to this order get an exhaustive associativity check.
pub const ASSOCIATIVITY_CHECK_MAX_ORDER: usize = 64;

/// A finite group presented by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    cayley: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validates the table: identity row/column, Latin square, associativity.
    pub fn new(name: impl Into<String>, cayley: Vec<Vec<usize>>, identity: usize) -> Result<Self> {
        let order = cayley.len();
        if order == 0 {
            return Err(Error::Group("empty Cayley table".into()));
        }
        if identity >= order {
            return Err(Error::Group(format!("identity index {identity} out of range for order {order}")));
        }
        for (g, row) in cayley.iter().enumerate() {
            if row.len() != order {
                return Err(Error::Group(format!("row {g} has length {}, expected {order}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= order) {
                return Err(Error::Group(format!("row {g} contains out-of-range element {bad}")));
            }
        }
        for g in 0..order {
            if cayley[identity][g] != g || cayley[g][identity] != g {
                return Err(Error::Group(format!("element {identity} does not act as identity on {g}")));
            }
        }
        for g in 0..order {
            let mut row_seen = vec![false; order];
            let mut col_seen = vec![false; order];
            for h in 0..order {
                row_seen[cayley[g][h]] = true;
                col_seen[cayley[h][g]] = true;
            }
            if row_seen.contains(&false) {
                return Err(Error::Group(format!("row {g} is not a permutation")));
            }
            if col_seen.contains(&false) {
                return Err(Error::Group(format!("column {g} is not a permutation")));
            }
        }
        if order <= ASSOCIATIVITY_CHECK_MAX_ORDER {
            for a in 0..order {
                for b in 0..order {
                    let ab = cayley[a][b];
                    for c in 0..order {
                        if cayley[ab][c] != cayley[a][cayley[b][c]] {
                            return Err(Error::Group(format!("associativity fails for ({a}, {b}, {c})")));
                        }
                    }
                }
            }
        }
        let inverses = (0..order).map(|g| (0..order).find(|&h| cayley[g][h] == identity).unwrap()).collect();
        Ok(Self { name: name.into(), cayley, identity, inverses })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.cayley.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.cayley[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|g| (0..n).all(|h| self.cayley[g][h] == self.cayley[h][g]))
    }

    /// True when the table is literally `(i + j) mod n` with identity 0.
    pub fn is_standard_cyclic(&self) -> bool {
        let n = self.order();
        self.identity == 0 && (0..n).all(|i| (0..n).all(|j| self.cayley[i][j] == (i + j) % n))
    }

    /// The subgroup generated by `gens`, as a sorted element list.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut members = vec![false; self.order()];
        members[self.identity] = true;
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !members[y] {
                    members[y] = true;
                    frontier.push(y);
                }
            }
        }
        (0..self.order()).filter(|&g| members[g]).collect()
    }

    /// A generating set built greedily in element order.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = self.generated_subgroup(&gens);
        for g in 0..self.order() {
            if span.binary_search(&g).is_err() {
                gens.push(g);
                span = self.generated_subgroup(&gens);
            }
        }
        gens
    }
}

/// `Z_n` with `cayley[i][j] = (i + j) mod n`.
pub fn make_cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::Argument("cyclic group order must be at least 1".into()));
    }
    let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
    FiniteGroup::new(format!("Z{n}"), table, 0)
}

/// Dihedral group of order `2n`: `r^n = f^2 = e`, `f r f = r^-1`.
pub fn make_dihedral(n: usize) -> Result<FiniteGroup> {
    if n < 2 {
        return Err(Error::Argument("dihedral group needs n >= 2".into()));
    }
    let order = 2 * n;
    let table = (0..order).map(|x| (0..order).map(|y| dihedral_mul(n, x, y)).collect()).collect();
    FiniteGroup::new(format!("D{n}"), table, 0)
}

fn dihedral_mul(n: usize, x: usize, y: usize) -> usize {
    let (a, b) = (x % n, x / n);
    let (c, d) = (y % n, y / n);
    // r^a f^b r^c f^d = r^(a ± c) f^(b xor d)
    let rot = if b == 0 { (a + c) % n } else { (a + n - c) % n };
    rot + n * (b ^ d)
}

/// Per-pair cocycle phase and closure diagnostics for a representation.
#[derive(Clone, Debug, Serialize)]
pub struct RepValidation {
    pub valid: bool,
    /// `ω(g, h)` with `U(g)U(h) = ω(g, h) U(gh)`, as `[re, im]`.
    pub cocycle: Vec<Vec<[f64; 2]>>,
    /// All `ω` equal to 1 within the tolerance.
    pub trivial_cocycle: bool,
    pub worst_closure_deviation: f64,
    pub worst_unitarity_deviation: f64,
    pub identity_deviation: f64,
    pub non_unitary: Vec<(usize, f64)>,
    pub closure_failures: Vec<(usize, usize, f64)>,
    pub tolerance: f64,
}

impl RepValidation {
    pub fn omega(&self, g: usize, h: usize) -> C64 {
        let [re, im] = self.cocycle[g][h];
        C64::new(re, im)
    }

    fn summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.non_unitary.is_empty() {
            parts.push(format!("non-unitary elements {:?}", self.non_unitary.iter().map(|p| p.0).collect::<Vec<_>>()));
        }
        if !self.closure_failures.is_empty() {
            let pairs: Vec<_> = self.closure_failures.iter().take(8).map(|&(g, h, _)| (g, h)).collect();
            parts.push(format!("closure fails for pairs {pairs:?} (worst {:.3e})", self.worst_closure_deviation));
        }
        if self.identity_deviation > self.tolerance {
            parts.push(format!("identity not mapped to a phase ({:.3e})", self.identity_deviation));
        }
        parts.join("; ")
    }
}

/// A map `g ↦ U(g)` that is multiplicative up to phase.
#[derive(Clone, Debug)]
pub struct ProjectiveRep {
    group: Arc<FiniteGroup>,
    dim: usize,
    matrices: Vec<ComplexMatrix>,
    cocycle_tol: f64,
}

impl ProjectiveRep {
    /// Validated construction with the default cocycle tolerance.
    pub fn new(group: Arc<FiniteGroup>, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(group, matrices, tol::EIGEN)
    }

    pub fn with_tolerance(group: Arc<FiniteGroup>, matrices: Vec<ComplexMatrix>, cocycle_tol: f64) -> Result<Self> {
        let rep = Self::unvalidated(group, matrices)?;
        let rep = Self { cocycle_tol, ..rep };
        let report = validate_rep(&rep);
        if !report.valid {
            return Err(Error::Representation(report.summary()));
        }
        Ok(rep)
    }

    /// Checks shapes only; run [`validate_rep`] for the algebraic conditions.
    pub fn unvalidated(group: Arc<FiniteGroup>, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::Representation(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let dim = matrices[0].dim();
        if let Some((g, m)) = matrices.iter().enumerate().find(|(_, m)| m.dim() != dim) {
            return Err(Error::Representation(format!("matrix {g} has dimension {}, expected {dim}", m.dim())));
        }
        Ok(Self { group, dim, matrices, cocycle_tol: tol::EIGEN })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, g: usize) -> &ComplexMatrix {
        &self.matrices[g]
    }

    pub fn cocycle_tol(&self) -> f64 {
        self.cocycle_tol
    }

    /// Same abstract group (identical table and identity).
    pub fn shares_group(&self, other: &ProjectiveRep) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || *self.group == *other.group
    }
}

/// Checks unitarity and projective closure, extracting the cocycle.
pub fn validate_rep(rep: &ProjectiveRep) -> RepValidation {
    let g = &rep.group;
    let n = g.order();
    let tol = rep.cocycle_tol;
    let mut non_unitary = Vec::new();
    let mut worst_unitarity: f64 = 0.0;
    for (k, u) in rep.matrices.iter().enumerate() {
        let dev = u.unitarity_deviation();
        worst_unitarity = worst_unitarity.max(dev);
        if dev > tol {
            non_unitary.push((k, dev));
        }
    }

    let id = &rep.matrices[g.identity()];
    let id_phase = phase_against(id, &ComplexMatrix::identity(rep.dim));
    let identity_deviation = (id - &ComplexMatrix::identity(rep.dim).scale(id_phase)).max_abs();

    let mut cocycle = vec![vec![[1.0, 0.0]; n]; n];
    let mut closure_failures = Vec::new();
    let mut worst_closure: f64 = 0.0;
    let mut trivial = true;
    for a in 0..n {
        for b in 0..n {
            let prod = &rep.matrices[a] * &rep.matrices[b];
            let target = &rep.matrices[g.mul(a, b)];
            let omega = phase_against(&prod, target);
            let dev = (&prod - &target.scale(omega)).max_abs();
            worst_closure = worst_closure.max(dev);
            if dev > tol {
                closure_failures.push((a, b, dev));
            }
            if (omega - ONE).norm() > tol {
                trivial = false;
            }
            cocycle[a][b] = [omega.re, omega.im];
        }
    }
    let valid = non_unitary.is_empty() && closure_failures.is_empty() && identity_deviation <= tol;
    RepValidation {
        valid,
        cocycle,
        trivial_cocycle: valid && trivial,
        worst_closure_deviation: worst_closure,
        worst_unitarity_deviation: worst_unitarity,
        identity_deviation,
        non_unitary,
        closure_failures,
        tolerance: tol,
    }
}

/// Unit-modulus `ω` minimizing `||a − ω b||_F`: the phase of `Tr(b† a)`.
fn phase_against(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let overlap = b.hs_inner(a);
    if overlap.norm() < 1e-300 {
        ONE
    } else {
        overlap / overlap.norm()
    }
}

/// Every element represented by the identity matrix.
pub fn trivial_rep(group: Arc<FiniteGroup>, dim: usize) -> Result<ProjectiveRep> {
    if dim == 0 {
        return Err(Error::Argument("representation dimension must be positive".into()));
    }
    let n = group.order();
    ProjectiveRep::new(group, vec![ComplexMatrix::identity(dim); n])
}

/// `U(k) = diag(exp(2πi c_j k / n))` on the cyclic group `Z_n`.
pub fn charge_rep(group: Arc<FiniteGroup>, charges: &[i64]) -> Result<ProjectiveRep> {
    if !group.is_standard_cyclic() {
        return Err(Error::Argument(format!("charge representation needs a cyclic group, got {}", group.name())));
    }
    if charges.is_empty() {
        return Err(Error::Argument("charge list is empty".into()));
    }
    let n = group.order() as i64;
    let matrices = (0..n)
        .map(|k| {
            let phases: Vec<C64> = charges
                .iter()
                .map(|&c| {
                    // Reduce the exponent exactly before converting to an angle.
                    let m = (c * k).rem_euclid(n);
                    root_of_unity(m, n)
                })
                .collect();
            ComplexMatrix::diag(&phases)
        })
        .collect();
    ProjectiveRep::new(group, matrices)
}

/// `exp(2πi m / n)` with exact values on the real and imaginary axes.
fn root_of_unity(m: i64, n: i64) -> C64 {
    let m = m.rem_euclid(n);
    if 4 * m % n == 0 {
        match 4 * m / n {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    } else {
        C64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)
    }
}

/// Left-regular representation by permutation matrices: `U(g)|h⟩ = |gh⟩`.
pub fn regular_rep(group: Arc<FiniteGroup>) -> Result<ProjectiveRep> {
    let n = group.order();
    let matrices = (0..n)
        .map(|g| {
            let mut m = ComplexMatrix::zeros(n);
            for h in 0..n {
                m[(group.mul(g, h), h)] = ONE;
            }
            m
        })
        .collect();
    ProjectiveRep::new(group, matrices)
}

/// Two-dimensional rotation/reflection representation of the dihedral group
/// built by [`make_dihedral`].
pub fn dihedral_rep_2d(group: Arc<FiniteGroup>) -> Result<ProjectiveRep> {
    let n = group.order() / 2;
    if !group.order().is_multiple_of(2) || n < 2 || *group != make_dihedral(n)? {
        return Err(Error::Argument(format!("{} is not a standard dihedral group", group.name())));
    }
    let matrices = (0..2 * n)
        .map(|x| {
            let (rot, flip) = (x % n, x / n);
            let w = root_of_unity(rot as i64, n as i64);
            let r = ComplexMatrix::from_real_rows(&[vec![w.re, -w.im], vec![w.im, w.re]]).unwrap();
            if flip == 0 {
                r
            } else {
                &r * &ComplexMatrix::real_diag(&[1.0, -1.0])
            }
        })
        .collect();
    ProjectiveRep::new(group, matrices)
}

/// Pauli representation of the Klein four-group `D2`: `r ↦ X`, `f ↦ Z`,
/// `rf ↦ XZ`. Its cocycle is nontrivial because `X` and `Z` anticommute.
pub fn pauli_rep(group: Arc<FiniteGroup>) -> Result<ProjectiveRep> {
    if *group != make_dihedral(2)? {
        return Err(Error::Argument(format!("Pauli representation needs the Klein group D2, got {}", group.name())));
    }
    let x = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let z = ComplexMatrix::real_diag(&[1.0, -1.0]);
    let xz = &x * &z;
    ProjectiveRep::new(group, vec![ComplexMatrix::identity(2), x, z, xz])
}

/// `g ↦ U_s(g) ⊗ U_a(g)`; the cocycle is the product of the factors' cocycles.
pub fn tensor_rep(rep_s: &ProjectiveRep, rep_a: &ProjectiveRep) -> Result<ProjectiveRep> {
    if !rep_s.shares_group(rep_a) {
        return Err(Error::Argument(format!(
            "tensor product of representations of different groups ({} and {})",
            rep_s.group.name(),
            rep_a.group.name()
        )));
    }
    let matrices = rep_s.matrices.iter().zip(&rep_a.matrices).map(|(a, b)| kron(a, b)).collect();
    Ok(ProjectiveRep {
        group: rep_s.group.clone(),
        dim: rep_s.dim * rep_a.dim,
        matrices,
        cocycle_tol: rep_s.cocycle_tol.max(rep_a.cocycle_tol),
    })
}

/// Block-diagonal `U_1(g) ⊕ U_2(g)`. Both factors must carry the same cocycle.
pub fn direct_sum(rep_1: &ProjectiveRep, rep_2: &ProjectiveRep) -> Result<ProjectiveRep> {
    if !rep_1.shares_group(rep_2) {
        return Err(Error::Argument("direct sum of representations of different groups".into()));
    }
    let (d1, d2) = (rep_1.dim, rep_2.dim);
    let matrices = rep_1
        .matrices
        .iter()
        .zip(&rep_2.matrices)
        .map(|(a, b)| {
            ComplexMatrix::from_fn(d1 + d2, |r, c| match (r < d1, c < d1) {
                (true, true) => a[(r, c)],
                (false, false) => b[(r - d1, c - d1)],
                _ => ZERO,
            })
        })
        .collect();
    ProjectiveRep::with_tolerance(rep_1.group.clone(), matrices, rep_1.cocycle_tol.max(rep_2.cocycle_tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_groups() {
        assert!(make_cyclic(0).is_err());
        let z1 = make_cyclic(1).unwrap();
        assert_eq!(z1.order(), 1);
        let z4 = make_cyclic(4).unwrap();
        assert_eq!(z4.mul(1, 2), 3);
        assert_eq!(z4.mul(3, 3), 2);
        assert!(z4.is_abelian());
        assert_eq!(z4.generators(), vec![1]);
        // Construction already ran the exhaustive check; recheck independently.
        let z6 = make_cyclic(6).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                for c in 0..6 {
                    assert_eq!(z6.mul(z6.mul(a, b), c), z6.mul(a, z6.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn dihedral_groups() {
        assert!(make_dihedral(1).is_err());
        let klein = make_dihedral(2).unwrap();
        assert!(klein.is_abelian());
        for g in 0..4 {
            assert_eq!(klein.mul(g, g), 0, "element {g} is not self-inverse");
        }
        let d3 = make_dihedral(3).unwrap();
        let (r, f) = (1, 3);
        assert_ne!(d3.mul(f, r), d3.mul(r, f));
        // f r f = r^-1
        assert_eq!(d3.mul(d3.mul(f, r), f), d3.inv(r));
        let d4 = make_dihedral(4).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                for c in 0..8 {
                    assert_eq!(d4.mul(d4.mul(a, b), c), d4.mul(a, d4.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn invalid_tables_rejected() {
        assert!(FiniteGroup::new("bad", vec![vec![0, 1], vec![1, 1]], 0).is_err());
        assert!(FiniteGroup::new("bad", vec![vec![0, 1], vec![1, 0]], 1).is_err());
        // Latin square with identity but not associative (order 5 loop).
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(FiniteGroup::new("loop", loop5, 0).is_err());
    }

    #[test]
    fn inverses_of_builtin_groups() {
        let mut groups: Vec<FiniteGroup> = (1..=12).map(|n| make_cyclic(n).unwrap()).collect();
        groups.extend((2..=6).map(|n| make_dihedral(n).unwrap()));
        for g in &groups {
            for x in 0..g.order() {
                assert_eq!(g.mul(x, g.inv(x)), g.identity(), "{}", g.name());
            }
        }
    }

    #[test]
    fn charge_reps() {
        let z2 = Arc::new(make_cyclic(2).unwrap());
        let trivial = charge_rep(z2.clone(), &[0, 0]).unwrap();
        assert!(trivial.matrices().iter().all(|m| *m == ComplexMatrix::identity(2)));
        let zrep = charge_rep(z2, &[0, 1]).unwrap();
        assert_eq!(*zrep.matrix(1), ComplexMatrix::real_diag(&[1.0, -1.0]));

        let z4 = Arc::new(make_cyclic(4).unwrap());
        let s = charge_rep(z4, &[0, 1]).unwrap();
        let expected = ComplexMatrix::diag(&[ONE, C64::new(0.0, 1.0)]);
        assert!((s.matrix(1) - &expected).max_abs() < 1e-15);
        let report = validate_rep(&s);
        assert!(report.valid && report.trivial_cocycle);

        let d3 = Arc::new(make_dihedral(3).unwrap());
        assert!(matches!(charge_rep(d3, &[0, 1]), Err(Error::Argument(_))));
    }

    #[test]
    fn charge_rep_matrices_commute() {
        let z5 = Arc::new(make_cyclic(5).unwrap());
        let rep = charge_rep(z5, &[0, 2, -1, 3]).unwrap();
        for a in rep.matrices() {
            for b in rep.matrices() {
                assert!(a.commutator(b).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pauli_cocycle_is_nontrivial() {
        let klein = Arc::new(make_dihedral(2).unwrap());
        let rep = pauli_rep(klein.clone()).unwrap();
        let report = validate_rep(&rep);
        assert!(report.valid);
        assert!(!report.trivial_cocycle);
        // Independent oracle: phase of the entrywise ratio at a nonzero entry.
        for a in 0..4 {
            for b in 0..4 {
                let prod = rep.matrix(a) * rep.matrix(b);
                let target = rep.matrix(klein.mul(a, b));
                let (r, c) = (0..2)
                    .flat_map(|r| (0..2).map(move |c| (r, c)))
                    .find(|&(r, c)| target[(r, c)].norm() > 0.5)
                    .unwrap();
                let ratio = prod[(r, c)] / target[(r, c)];
                assert!((ratio - report.omega(a, b)).norm() < 1e-12, "pair ({a}, {b})");
            }
        }
        // X then Z versus Z then X differ by a sign.
        assert!((report.omega(1, 2) + report.omega(2, 1)).norm() < 1e-12);
    }

    #[test]
    fn non_unitary_rep_is_reported() {
        let z2 = Arc::new(make_cyclic(2).unwrap());
        let rep = ProjectiveRep::unvalidated(
            z2.clone(),
            vec![ComplexMatrix::identity(2), ComplexMatrix::real_diag(&[1.0, 0.5])],
        )
        .unwrap();
        let report = validate_rep(&rep);
        assert!(!report.valid);
        assert_eq!(report.non_unitary.len(), 1);
        assert_eq!(report.non_unitary[0].0, 1);
        assert!(
            ProjectiveRep::new(z2, vec![ComplexMatrix::identity(2), ComplexMatrix::real_diag(&[1.0, 0.5])]).is_err()
        );
    }

    #[test]
    fn closure_failure_is_listed() {
        let z3 = Arc::new(make_cyclic(3).unwrap());
        let z = ComplexMatrix::real_diag(&[1.0, -1.0]);
        let rep = ProjectiveRep::unvalidated(z3, vec![ComplexMatrix::identity(2), z.clone(), z]).unwrap();
        let report = validate_rep(&rep);
        assert!(!report.valid);
        assert!(!report.closure_failures.is_empty());
    }

    #[test]
    fn tensor_reps() {
        let z2 = Arc::new(make_cyclic(2).unwrap());
        let t = tensor_rep(&trivial_rep(z2.clone(), 2).unwrap(), &trivial_rep(z2.clone(), 3).unwrap()).unwrap();
        assert!(t.matrices().iter().all(|m| *m == ComplexMatrix::identity(6)));

        let zr = charge_rep(z2.clone(), &[0, 1]).unwrap();
        let zz = tensor_rep(&zr, &zr).unwrap();
        assert_eq!(*zz.matrix(1), ComplexMatrix::real_diag(&[1.0, -1.0, -1.0, 1.0]));

        let klein = Arc::new(make_dihedral(2).unwrap());
        let p = pauli_rep(klein).unwrap();
        let pp = tensor_rep(&p, &p).unwrap();
        let report = validate_rep(&pp);
        assert!(report.valid && report.trivial_cocycle);

        assert!(matches!(tensor_rep(&zr, &p), Err(Error::Argument(_))));
    }

    #[test]
    fn regular_and_dihedral_reps_validate() {
        for n in 2..=6 {
            let d = Arc::new(make_dihedral(n).unwrap());
            assert!(validate_rep(&regular_rep(d.clone()).unwrap()).trivial_cocycle);
            assert!(validate_rep(&dihedral_rep_2d(d).unwrap()).trivial_cocycle);
        }
        let z4 = Arc::new(make_cyclic(4).unwrap());
        assert!(dihedral_rep_2d(z4).is_err());
    }

    #[test]
    fn direct_sum_validates() {
        let d3 = Arc::new(make_dihedral(3).unwrap());
        let s = direct_sum(&dihedral_rep_2d(d3.clone()).unwrap(), &trivial_rep(d3, 1).unwrap()).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(validate_rep(&s).valid);
    }
}
