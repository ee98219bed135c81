//! Dense complex linear algebra and the validated operator types built on it.
//!
//! Composite spaces are always ordered system-first: an operator on
//! `H_s ⊗ H_a` is indexed as `i_s * dim_a + i_a`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance ladder shared by every module.
pub mod tol {
    /// Exact algebraic identities (Hermiticity, completeness, projector relations).
    pub const ALGEBRAIC: f64 = 1e-10;
    /// Outputs of the eigensolver and anything derived from a spectrum.
    pub const EIGEN: f64 = 1e-9;
    /// Sampled or optimized quantities.
    pub const OPTIMIZED: f64 = 1e-6;
}

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from a flat row-major entry list.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("matrix dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("matrix rows must all have length equal to the row count".into()));
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Outer product `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |r, c| u[r] * v[c].conj())
    }

    /// Matrix unit `|r⟩⟨c|`.
    pub fn unit(dim: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(r, c)] = ONE;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// Largest absolute entry; the `∞`-norm used for algebraic identity checks.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert-Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = ZERO;
        for r in 0..d {
            for c in 0..d {
                acc += self[(r, c)] * other[(c, r)];
            }
        }
        acc
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// `(M - M†) / (2i)`, which is Hermitian.
    pub fn antihermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |r, c| (self[(r, c)] - self[(c, r)].conj()) / (I * 2.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// `U† · self · U`.
    pub fn conjugate_by_adjoint(&self, u: &Self) -> Self {
        &(&u.adjoint() * self) * u
    }

    pub fn unitarity_deviation(&self) -> f64 {
        (&(&self.adjoint() * self) - &Self::identity(self.dim)).max_abs()
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim).map(|r| (0..self.dim).map(|c| self[(r, c)] * v[c]).sum()).collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::from_fn(m.nrows(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix addition");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix subtraction");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * d..(k + 1) * d];
                let dst = &mut out.data[r * d..(r + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Kronecker product; block `(i, j)` of the result is `a[i, j] · b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    ComplexMatrix::from_fn(da * db, |r, c| a[(r / db, c / db)] * b[(r % db, c % db)])
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Which tensor factor to keep in [`partial_trace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Ancilla,
}

/// Partial trace of an operator on `H_s ⊗ H_a`, keeping the selected factor.
pub fn partial_trace(m: &ComplexMatrix, dim_s: usize, dim_a: usize, keep: Subsystem) -> Result<ComplexMatrix> {
    if dim_s == 0 || dim_a == 0 || m.dim != dim_s * dim_a {
        return Err(Error::Dimension(format!("partial trace of a {0}x{0} matrix over {dim_s} x {dim_a}", m.dim)));
    }
    Ok(match keep {
        Subsystem::System => {
            ComplexMatrix::from_fn(dim_s, |r, c| (0..dim_a).map(|k| m[(r * dim_a + k, c * dim_a + k)]).sum())
        }
        Subsystem::Ancilla => {
            ComplexMatrix::from_fn(dim_a, |r, c| (0..dim_s).map(|k| m[(k * dim_a + r, k * dim_a + c)]).sum())
        }
    })
}

/// `Tr_a[m (I_s ⊗ sigma)]`: the system operator induced by an ancilla state.
pub fn contract_ancilla(m: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    let da = sigma.dim;
    if da == 0 || !m.dim.is_multiple_of(da) {
        return Err(Error::Dimension(format!(
            "cannot contract a {0}x{0} operator with a {da}-dimensional ancilla state",
            m.dim
        )));
    }
    let ds = m.dim / da;
    // (m (I ⊗ σ))[(r,i),(c,i)] = Σ_j m[(r,i),(c,j)] σ[j,i]
    Ok(ComplexMatrix::from_fn(ds, |r, c| {
        let mut acc = ZERO;
        for i in 0..da {
            for j in 0..da {
                acc += m[(r * da + i, c * da + j)] * sigma[(j, i)];
            }
        }
        acc
    }))
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda = ComplexMatrix::real_diag(&self.values);
        &(&self.vectors * &lambda) * &self.vectors.adjoint()
    }

    /// Groups eigenvalues closer than `tol` into spectral projectors,
    /// returned in descending eigenvalue order.
    pub fn spectral_projectors(&self, tol: f64) -> Vec<(f64, ComplexMatrix)> {
        let mut out: Vec<(f64, ComplexMatrix, usize)> = Vec::new();
        for (k, &lambda) in self.values.iter().enumerate() {
            let v = self.vector(k);
            let p = ComplexMatrix::projector(&v);
            match out.last_mut() {
                Some((mean, proj, count)) if (*mean - lambda).abs() <= tol => {
                    *mean = (*mean * *count as f64 + lambda) / (*count as f64 + 1.0);
                    *count += 1;
                    *proj = &*proj + &p;
                }
                _ => out.push((lambda, p, 1)),
            }
        }
        out.into_iter().map(|(l, p, _)| (l, p)).collect()
    }
}

/// Eigendecomposition of a Hermitian matrix (deviation ≤ 1e-9 accepted).
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let dev = h.hermiticity_deviation();
    if dev > tol::EIGEN {
        return Err(Error::Hermiticity(dev));
    }
    Ok(herm_eig_unchecked(&h.hermitian_part()))
}

pub(crate) fn herm_eig_unchecked(h: &ComplexMatrix) -> HermitianEigen {
    let d = h.dim;
    let eig = h.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(d, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn herm_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let dev = h.hermiticity_deviation();
    if dev > tol::EIGEN {
        return Err(Error::Hermiticity(dev));
    }
    let mut v: Vec<f64> = h.hermitian_part().to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// Operator (spectral) norm of a Hermitian matrix: `max |λ|`.
pub fn op_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(herm_eigenvalues(h)?.iter().fold(0.0, |m, l| m.max(l.abs())))
}

/// Trace norm of a Hermitian matrix: `Σ |λ|`.
pub fn trace_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(herm_eigenvalues(h)?.iter().map(|l| l.abs()).sum())
}

/// Eigenvalues below this threshold contribute nothing to the entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &QState) -> f64 {
    entropy_of_spectrum(&herm_eigenvalues(rho.matrix()).expect("validated state is Hermitian"))
}

pub(crate) fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&l| l >= ENTROPY_CUTOFF).map(|&l| -l * l.log2()).sum::<f64>().max(0.0)
}

/// Positive square root of a positive semidefinite matrix.
pub(crate) fn psd_sqrt(h: &ComplexMatrix) -> ComplexMatrix {
    let eig = herm_eig_unchecked(&h.hermitian_part());
    let roots: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    &(&eig.vectors * &ComplexMatrix::real_diag(&roots)) * &eig.vectors.adjoint()
}

/// Root fidelity `Tr |√ρ √σ|`, equal to `|⟨ψ|φ⟩|` for pure states.
pub fn root_fidelity(rho: &QState, sigma: &QState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension("fidelity of states with different dimensions".into()));
    }
    let sr = psd_sqrt(rho.matrix());
    let inner = &(&sr * sigma.matrix()) * &sr;
    let ev = herm_eigenvalues(&inner.hermitian_part())?;
    Ok(ev.iter().map(|&l| l.max(0.0).sqrt()).sum::<f64>().min(1.0))
}

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    matrix: ComplexMatrix,
}

impl QState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_deviation();
        if herm > tol::ALGEBRAIC {
            return Err(Error::State(format!("not Hermitian (max deviation {herm:.3e})")));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol::ALGEBRAIC {
            return Err(Error::State(format!("trace is {tr:.12}, expected 1")));
        }
        let min = *herm_eigenvalues(&matrix)?.last().unwrap();
        if min < -tol::ALGEBRAIC {
            return Err(Error::State(format!("not positive semidefinite (min eigenvalue {min:.3e})")));
        }
        Ok(Self { matrix: matrix.hermitian_part() })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector `ψ`.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::State("empty state vector".into()));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol::ALGEBRAIC {
            return Err(Error::State(format!("state vector has norm {norm:.12}, expected 1")));
        }
        let v: Vec<C64> = amplitudes.iter().map(|z| z / norm).collect();
        Ok(Self { matrix: ComplexMatrix::projector(&v) })
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩` for any nonzero vector.
    pub fn pure_normalized(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::State("cannot normalize a zero vector".into()));
        }
        let v: Vec<C64> = amplitudes.iter().map(|z| z / norm).collect();
        Self::pure(&v)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self { matrix: ComplexMatrix::unit(dim, k, k) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> QState {
        QState { matrix: self.matrix.conjugate_by(u).hermitian_part() }
    }
}

fn check_projector_family(dim: usize, outcomes: &[(String, ComplexMatrix)], what: &str) -> Result<()> {
    if outcomes.is_empty() {
        return Err(Error::Observable(format!("{what} has no outcomes")));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (label, p) in outcomes {
        if !seen.insert(label.as_str()) {
            return Err(Error::Observable(format!("duplicate outcome label {label:?}")));
        }
        if p.dim != dim {
            return Err(Error::Dimension(format!("projector {label:?} has dimension {}, expected {dim}", p.dim)));
        }
    }
    Ok(())
}

/// A projective measurement: labelled, mutually orthogonal projectors summing to identity.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveObservable {
    dim: usize,
    outcomes: Vec<(String, ComplexMatrix)>,
}

impl ProjectiveObservable {
    pub fn new(outcomes: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        let dim = outcomes.first().map(|(_, p)| p.dim).unwrap_or(0);
        check_projector_family(dim, &outcomes, "observable")?;
        let mut sum = ComplexMatrix::zeros(dim);
        for (j, (label, p)) in outcomes.iter().enumerate() {
            let herm = p.hermiticity_deviation();
            if herm > tol::ALGEBRAIC {
                return Err(Error::Observable(format!("projector {label:?} is not Hermitian ({herm:.3e})")));
            }
            let idem = (&(p * p) - p).max_abs();
            if idem > tol::ALGEBRAIC {
                return Err(Error::Observable(format!("projector {label:?} is not idempotent ({idem:.3e})")));
            }
            for (other, q) in &outcomes[j + 1..] {
                let overlap = (p * q).max_abs();
                if overlap > tol::ALGEBRAIC {
                    return Err(Error::Observable(format!(
                        "projectors {label:?} and {other:?} are not orthogonal ({overlap:.3e})"
                    )));
                }
            }
            sum = &sum + p;
        }
        let completeness = (&sum - &ComplexMatrix::identity(dim)).max_abs();
        if completeness > tol::ALGEBRAIC {
            return Err(Error::Observable(format!("projectors do not sum to identity ({completeness:.3e})")));
        }
        Ok(Self { dim, outcomes })
    }

    /// Spectral decomposition of a Hermitian matrix; labels are the eigenvalues
    /// formatted to six decimals, in descending order.
    pub fn from_hermitian(h: &ComplexMatrix) -> Result<Self> {
        let eig = herm_eig(h)?;
        let outcomes =
            eig.spectral_projectors(tol::EIGEN).into_iter().map(|(l, p)| (format_eigen_label(l), p)).collect();
        Self::new(outcomes)
    }

    /// Rank-one measurement in the orthonormal basis given by the columns of `u`.
    pub fn from_basis(u: &ComplexMatrix, labels: &[String]) -> Result<Self> {
        if labels.len() != u.dim {
            return Err(Error::Argument(format!("{} labels for a {}-outcome basis", labels.len(), u.dim)));
        }
        let outcomes =
            labels.iter().enumerate().map(|(k, l)| (l.clone(), ComplexMatrix::projector(&u.column(k)))).collect();
        Self::new(outcomes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[(String, ComplexMatrix)] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<&str> {
        self.outcomes.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn projector(&self, label: &str) -> Option<&ComplexMatrix> {
        self.outcomes.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    /// `U Π_k U†` for every outcome.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self {
            dim: self.dim,
            outcomes: self.outcomes.iter().map(|(l, p)| (l.clone(), p.conjugate_by(u).hermitian_part())).collect(),
        }
    }

    /// Projectors reordered to follow `labels`; errors unless the label sets coincide.
    pub fn aligned_to(&self, labels: &[&str]) -> Result<Vec<ComplexMatrix>> {
        if labels.len() != self.outcomes.len() {
            return Err(Error::Argument(format!(
                "outcome label sets differ in size ({} vs {})",
                labels.len(),
                self.outcomes.len()
            )));
        }
        labels
            .iter()
            .map(|l| {
                self.projector(l)
                    .cloned()
                    .ok_or_else(|| Error::Argument(format!("outcome label {l:?} missing from observable")))
            })
            .collect()
    }

    /// Largest entrywise deviation between projectors with matching labels;
    /// `None` if the label sets differ.
    pub fn distance(&self, other: &Self) -> Option<f64> {
        if self.dim != other.dim || self.outcomes.len() != other.outcomes.len() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for (l, p) in &self.outcomes {
            worst = worst.max((p - other.projector(l)?).max_abs());
        }
        Some(worst)
    }

    pub fn to_povm(&self) -> Povm {
        Povm { dim: self.dim, effects: self.outcomes.clone() }
    }

    /// `Σ_k λ_k Π_k` with `λ_k = k` (outcome index); a Hermitian matrix whose
    /// spectral projectors are this measurement.
    pub fn index_observable(&self) -> ComplexMatrix {
        self.outcomes
            .iter()
            .enumerate()
            .fold(ComplexMatrix::zeros(self.dim), |acc, (k, (_, p))| &acc + &p.scale_real(k as f64))
    }
}

pub(crate) fn format_eigen_label(l: f64) -> String {
    let l = if l.abs() < 5e-7 { 0.0 } else { l };
    format!("{l:+.6}")
}

/// Positive operator-valued measure with labelled effects.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<(String, ComplexMatrix)>,
}

/// Tolerance for POVM positivity and completeness.
pub const POVM_TOL: f64 = 1e-9;

impl Povm {
    pub fn new(effects: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        let dim = effects.first().map(|(_, p)| p.dim).unwrap_or(0);
        check_projector_family(dim, &effects, "POVM").map_err(|e| Error::Povm(e.to_string()))?;
        let povm = Self { dim, effects };
        povm.check()?;
        Ok(povm)
    }

    pub(crate) fn new_unchecked(effects: Vec<(String, ComplexMatrix)>) -> Self {
        let dim = effects[0].1.dim;
        Self { dim, effects }
    }

    fn check(&self) -> Result<()> {
        for (label, e) in &self.effects {
            let herm = e.hermiticity_deviation();
            if herm > POVM_TOL {
                return Err(Error::Povm(format!("effect {label:?} is not Hermitian ({herm:.3e})")));
            }
            let min = *herm_eigenvalues(e)?.last().unwrap();
            if min < -POVM_TOL {
                return Err(Error::Povm(format!("effect {label:?} has negative eigenvalue {min:.3e}")));
            }
        }
        let c = self.completeness_residual();
        if c > POVM_TOL {
            return Err(Error::Povm(format!("effects do not sum to identity ({c:.3e})")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[(String, ComplexMatrix)] {
        &self.effects
    }

    pub fn labels(&self) -> Vec<&str> {
        self.effects.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn effect(&self, label: &str) -> Option<&ComplexMatrix> {
        self.effects.iter().find(|(l, _)| l == label).map(|(_, e)| e)
    }

    pub fn completeness_residual(&self) -> f64 {
        let sum = self.effects.iter().fold(ComplexMatrix::zeros(self.dim), |acc, (_, e)| &acc + e);
        (&sum - &ComplexMatrix::identity(self.dim)).max_abs()
    }

    /// Smallest eigenvalue over all effects.
    pub fn min_eigenvalue(&self) -> f64 {
        self.effects
            .iter()
            .map(|(_, e)| *herm_eigenvalues(&e.hermitian_part()).unwrap().last().unwrap())
            .fold(f64::INFINITY, f64::min)
    }

    /// Worst of `||E² − E||` and `||E_j E_k||` (entrywise).
    pub fn projectivity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, (_, e)) in self.effects.iter().enumerate() {
            worst = worst.max((&(e * e) - e).max_abs());
            for (_, f) in &self.effects[j + 1..] {
                worst = worst.max((e * f).max_abs());
            }
        }
        worst
    }

    pub fn is_projective(&self, tol: f64) -> bool {
        self.projectivity_residual() <= tol
    }

    /// Outcome probabilities `Tr(E_k ρ)` in effect order.
    pub fn probabilities(&self, rho: &QState) -> Vec<f64> {
        self.effects.iter().map(|(_, e)| e.trace_product(rho.matrix()).re).collect()
    }
}
