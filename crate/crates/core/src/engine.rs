//! Convex engine shared by simulation, programming and discrimination.
//!
//! Every problem is posed as a linear objective over real coefficients `y`
//! subject to block linear matrix inequalities `F_b(y) = C_b + Σ_i y_i F_bi ⪰ 0`,
//! and solved with a log-det barrier path-following method (Newton centering
//! with backtracking, barrier weight grown geometrically). Each iterate is
//! strictly feasible, so every intermediate POVM is valid. After the last
//! centering the duality gap is bounded by `m / t`, where `m` is the total LMI
//! size, widened slightly when centering stopped short of the exact centre.
//!
//! The measurement-design layer builds the LMIs for
//!
//! ```text
//! minimize ε  s.t.  E_k ⪰ 0,  Σ_k E_k = I,
//!                   −ε I ⪯ Tr_a[E_k (I ⊗ σ_i)] − Π_k^(i) ⪯ ε I   for all i, k
//! ```
//!
//! with `E_k` confined to the span of a Hermitian basis. The basis is the
//! commutant for symmetric processing or all Hermitian matrices otherwise.
//! Completeness is eliminated by writing the last effect as `I − Σ_{k<K} E_k`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::matcore::{contract_ancilla, herm_eigenvalues, ComplexMatrix, Povm, C64};

/// One block `C + Σ_i y_i F_i` of a block-diagonal LMI.
#[derive(Clone, Debug)]
pub struct LmiBlock {
    pub constant: DMatrix<C64>,
    /// `(variable index, coefficient)`, at most one entry per variable.
    pub terms: Vec<(usize, DMatrix<C64>)>,
}

impl LmiBlock {
    pub fn size(&self) -> usize {
        self.constant.nrows()
    }

    pub fn evaluate(&self, y: &[f64]) -> DMatrix<C64> {
        let mut m = self.constant.clone();
        for (i, f) in &self.terms {
            if y[*i] != 0.0 {
                m.zip_apply(f, |a, b| *a += b * y[*i]);
            }
        }
        m
    }
}

/// `minimize cᵀy  s.t.  F_b(y) ⪰ 0` for every block.
#[derive(Clone, Debug)]
pub struct LmiProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
}

impl LmiProblem {
    /// Barrier parameter `m = Σ_b size_b`.
    pub fn barrier_degree(&self) -> usize {
        self.blocks.iter().map(LmiBlock::size).sum()
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().zip(y).map(|(c, v)| c * v).sum()
    }

    /// Smallest eigenvalue over all blocks at `y`.
    pub fn min_slack(&self, y: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let m = ComplexMatrix::from_nalgebra(&b.evaluate(y)).hermitian_part();
                *herm_eigenvalues(&m).unwrap().last().unwrap()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Barrier-method parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierOptions {
    /// Stop once the certified gap bound falls below this.
    pub gap_tol: f64,
    /// Factor applied to `t` after each centering.
    pub growth: f64,
    /// Cap on the total number of Newton steps.
    pub max_newton: usize,
    /// Centering stops when `λ² / 2` drops below this.
    pub centering_tol: f64,
    pub t_init: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-9, growth: 8.0, max_newton: 5000, centering_tol: 1e-10, t_init: 1.0 }
    }
}

/// Progress record of a barrier solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierTrace {
    pub newton_iterations: usize,
    pub outer_iterations: usize,
    /// Newton decrement `λ = sqrt(gᵀ H⁻¹ g)` at the last step.
    pub final_decrement: f64,
    /// Certified bound on `cᵀy − optimum` at termination.
    pub duality_gap_bound: f64,
    /// Objective `cᵀy` after each centering step.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

struct Factored {
    chol: Vec<Cholesky<C64, Dyn>>,
    log_det: f64,
}

fn factor(problem: &LmiProblem, y: &[f64]) -> Option<Factored> {
    let mut chol = Vec::with_capacity(problem.blocks.len());
    let mut log_det = 0.0;
    for b in &problem.blocks {
        let c = Cholesky::new(b.evaluate(y))?;
        for k in 0..b.size() {
            // A non-positive pivot shows up as a square root with a large imaginary part.
            let d = c.l_dirty()[(k, k)];
            if !d.re.is_finite() || d.re <= 0.0 || d.im.abs() > 1e-6 * d.re {
                return None;
            }
            log_det += 2.0 * d.re.ln();
        }
        chol.push(c);
    }
    Some(Factored { chol, log_det })
}

/// Gradient and Hessian of `−Σ log det F_b` at a factored point.
fn barrier_derivatives(problem: &LmiProblem, f: &Factored) -> (DVector<f64>, DMatrix<f64>) {
    let n = problem.num_vars;
    let mut grad = DVector::<f64>::zeros(n);
    let mut hess = DMatrix::<f64>::zeros(n, n);
    for (b, chol) in problem.blocks.iter().zip(&f.chol) {
        let s = b.size();
        // W_i = L⁻¹ F_i L⁻†, so Tr(F⁻¹F_i) = Tr W_i and Tr(F⁻¹F_i F⁻¹F_j) = ⟨W_i, W_j⟩.
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::<C64>::identity(s, s))
            .expect("Cholesky factor has a positive diagonal");
        let l_inv_adj = l_inv.adjoint();
        let nv = b.terms.len();
        let mut w = DMatrix::<f64>::zeros(2 * s * s, nv);
        for (col, (i, fi)) in b.terms.iter().enumerate() {
            let wi = &l_inv * fi * &l_inv_adj;
            let mut tr = 0.0;
            for r in 0..s {
                tr += wi[(r, r)].re;
            }
            grad[*i] -= tr;
            for (k, z) in wi.iter().enumerate() {
                w[(2 * k, col)] = z.re;
                w[(2 * k + 1, col)] = z.im;
            }
        }
        let hb = w.tr_mul(&w);
        for (a, (i, _)) in b.terms.iter().enumerate() {
            for (c, (j, _)) in b.terms.iter().enumerate() {
                hess[(*i, *j)] += hb[(a, c)];
            }
        }
    }
    (grad, hess)
}

/// Largest diagonal shift (relative to the unit diagonal of the scaled
/// Hessian) for which the computed decrement may still certify a gap; a larger
/// shift underestimates `gᵀ H⁻¹ g`.
const CERTIFYING_SHIFT: f64 = 1e-12;

/// Newton step `−H⁻¹ g` and the diagonal shift that was needed to factor `H`.
fn newton_direction(hess: DMatrix<f64>, grad: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    // Symmetric Jacobi scaling: late in the path the diagonal spans many orders of magnitude.
    let n = hess.nrows();
    let d: Vec<f64> = (0..n).map(|i| 1.0 / hess[(i, i)].abs().max(1e-300).sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| hess[(i, j)] * d[i] * d[j]);
    let g = DVector::from_fn(n, |i, _| grad[i] * d[i]);
    let mut shift = 0.0;
    for _ in 0..12 {
        let mut h = scaled.clone();
        for i in 0..n {
            h[(i, i)] += shift;
        }
        if let Some(c) = Cholesky::new(h) {
            let z = -c.solve(&g);
            if z.iter().all(|v| v.is_finite()) {
                return Some((DVector::from_fn(n, |i, _| z[i] * d[i]), shift));
            }
        }
        shift = if shift == 0.0 { 1e-14 } else { shift * 100.0 };
    }
    None
}

/// Squared Newton decrement below which a step without measurable progress
/// ends centering.
const STALL_DECREMENT_SQ: f64 = 1e-6;

/// Suboptimality bound `(m + λ(λ + √m)/(1 − λ)) / t` for a point whose Newton
/// decrement on the centering objective is `λ < 1`; reduces to `m / t` at the
/// exact centre.
fn gap_bound(m: f64, t: f64, lambda: f64) -> f64 {
    if lambda.is_nan() || lambda >= 1.0 {
        return f64::INFINITY;
    }
    (m + lambda * (lambda + m.sqrt()) / (1.0 - lambda)) / t
}

/// Newton decrement of `t cᵀy + barrier` at a factored point; infinite when
/// the Newton system cannot be solved.
fn decrement(problem: &LmiProblem, f: &Factored, c: &DVector<f64>, t: f64) -> f64 {
    let (bgrad, hess) = barrier_derivatives(problem, f);
    let grad = c * t + bgrad;
    match newton_direction(hess, &grad) {
        Some((dy, shift)) if shift <= CERTIFYING_SHIFT => (-grad.dot(&dy)).max(0.0).sqrt(),
        _ => f64::INFINITY,
    }
}

/// Path-following barrier solve from a strictly feasible `y0`.
pub fn solve_lmi(problem: &LmiProblem, y0: &[f64], opts: &BarrierOptions) -> Result<(Vec<f64>, BarrierTrace)> {
    if y0.len() != problem.num_vars || problem.objective.len() != problem.num_vars {
        return Err(Error::Dimension("LMI start point or objective has the wrong length".into()));
    }
    let mut y = DVector::from_column_slice(y0);
    let mut fac = factor(problem, y.as_slice())
        .ok_or_else(|| Error::Numerical("barrier start point is not strictly feasible".into()))?;
    let c = DVector::from_column_slice(&problem.objective);
    let m = problem.barrier_degree() as f64;
    let mut t = opts.t_init;
    let mut trace = BarrierTrace {
        newton_iterations: 0,
        outer_iterations: 0,
        final_decrement: f64::NAN,
        duality_gap_bound: f64::INFINITY,
        objective_trace: Vec::new(),
        converged: false,
    };

    // Set once `y` or `t` has changed since `final_decrement` was measured;
    // the gap bound must use the decrement at the point actually returned.
    let mut stale = true;
    'outer: loop {
        let mut centered = false;
        while trace.newton_iterations < opts.max_newton {
            let (bgrad, hess) = barrier_derivatives(problem, &fac);
            let grad = &c * t + bgrad;
            let Some((dy, shift)) = newton_direction(hess, &grad) else {
                break 'outer;
            };
            trace.newton_iterations += 1;
            let lambda_sq = (-grad.dot(&dy)).max(0.0);
            trace.final_decrement = if shift <= CERTIFYING_SHIFT { lambda_sq.sqrt() } else { f64::INFINITY };
            stale = false;
            if lambda_sq / 2.0 <= opts.centering_tol {
                centered = true;
                break;
            }
            // The bound holds at any iterate with λ < 1, so a nearly centred
            // point can certify the target gap without finishing centering.
            let bound = gap_bound(m, t, trace.final_decrement);
            if bound <= opts.gap_tol {
                trace.outer_iterations += 1;
                trace.objective_trace.push(c.dot(&y));
                trace.duality_gap_bound = bound;
                trace.converged = true;
                break 'outer;
            }
            let f0 = t * c.dot(&y) - fac.log_det;
            let mut alpha = 1.0;
            let mut accepted = None;
            let mut feasible_fallback = None;
            for _ in 0..80 {
                let trial = &y + &dy * alpha;
                if let Some(ft) = factor(problem, trial.as_slice()) {
                    let f1 = t * c.dot(&trial) - ft.log_det;
                    if f1 <= f0 - 0.25 * alpha * lambda_sq {
                        accepted = Some((trial, ft));
                        break;
                    }
                    if feasible_fallback.is_none() {
                        feasible_fallback = Some((trial, ft));
                    }
                }
                alpha *= 0.5;
            }
            match (accepted, feasible_fallback) {
                (Some((ny, nf)), _) => {
                    let f1 = t * c.dot(&ny) - nf.log_det;
                    y = ny;
                    fac = nf;
                    stale = true;
                    // Late in the path t·c and the barrier gradient cancel to rounding
                    // level; once steps stop paying off, accept the approximate centre.
                    if lambda_sq < STALL_DECREMENT_SQ && f0 - f1 <= 1e-13 * (1.0 + f0.abs()) {
                        centered = true;
                        break;
                    }
                }
                // Rounding can defeat the sufficient-decrease test once λ is tiny;
                // take the feasible step and treat the point as centered.
                (None, Some((ny, nf))) if lambda_sq < STALL_DECREMENT_SQ => {
                    y = ny;
                    fac = nf;
                    stale = true;
                    centered = true;
                    break;
                }
                _ => break 'outer,
            }
        }
        if stale {
            trace.final_decrement = decrement(problem, &fac, &c, t);
            stale = false;
        }
        if !centered {
            break;
        }
        trace.outer_iterations += 1;
        trace.objective_trace.push(c.dot(&y));
        trace.duality_gap_bound = gap_bound(m, t, trace.final_decrement);
        if trace.duality_gap_bound <= opts.gap_tol {
            trace.converged = true;
            break;
        }
        t *= opts.growth;
        // The decrement depends on t.
        stale = true;
    }
    if !trace.converged {
        if stale {
            trace.final_decrement = decrement(problem, &fac, &c, t);
        }
        trace.duality_gap_bound = gap_bound(m, t, trace.final_decrement);
        trace.converged = trace.duality_gap_bound <= opts.gap_tol;
    }
    Ok((y.as_slice().to_vec(), trace))
}

/// Options for the measurement-design solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub seed: u64,
    /// Cap on Newton steps per solve.
    pub max_iter: usize,
    /// Target duality gap.
    pub gap_tol: f64,
    /// Additional solves from random strictly feasible starts.
    pub restarts: usize,
    /// Agreement required between the symmetric and covariant optima.
    pub duality_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { seed: 0, max_iter: 5000, gap_tol: 1e-9, restarts: 0, duality_tol: 1e-4 }
    }
}

impl SolverOptions {
    pub fn barrier(&self) -> BarrierOptions {
        BarrierOptions { gap_tol: self.gap_tol, max_newton: self.max_iter, ..BarrierOptions::default() }
    }
}

/// Solver certificate attached to every optimized measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub iterations: usize,
    pub outer_iterations: usize,
    /// Newton decrement at termination (gradient norm in the local metric).
    pub final_gradient_norm: f64,
    pub duality_gap_bound: f64,
    pub objective_trace: Vec<f64>,
    /// `max |Σ_k E_k − I|` of the returned POVM.
    pub completeness_residual: f64,
    /// Smallest effect eigenvalue of the returned POVM.
    pub min_effect_eigenvalue: f64,
    /// Converged with `duality_gap_bound ≤ gap_tol`.
    pub certified: bool,
    /// Index of the start that produced the returned solution.
    pub best_start: usize,
    pub starts: usize,
}

/// One programming requirement: the ancilla prepared in `ancilla_state` must
/// make the device act as the projectors `targets` (aligned with the labels).
#[derive(Clone, Debug)]
pub struct ProgramConstraint {
    pub ancilla_state: ComplexMatrix,
    pub targets: Vec<ComplexMatrix>,
}

/// Optimal measurement found by [`minimize_worst_deviation`].
#[derive(Clone, Debug)]
pub struct DesignSolution {
    pub epsilon: f64,
    pub povm: Povm,
    pub certificate: Certificate,
}

/// `max_{i,k} ||Tr_a[E_k (I ⊗ σ_i)] − Π_k^(i)||` for effects aligned with the targets.
pub fn worst_deviation(effects: &[ComplexMatrix], constraints: &[ProgramConstraint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for c in constraints {
        if c.targets.len() != effects.len() {
            return Err(Error::Argument("effect and target counts differ".into()));
        }
        for (e, p) in effects.iter().zip(&c.targets) {
            let induced = contract_ancilla(e, &c.ancilla_state)?;
            worst = worst.max(crate::matcore::op_norm(&(&induced - p).hermitian_part())?);
        }
    }
    Ok(worst)
}

fn to_na(m: &ComplexMatrix) -> DMatrix<C64> {
    m.to_nalgebra()
}

struct Design {
    problem: LmiProblem,
    outcomes: usize,
    basis_len: usize,
    dim: usize,
}

impl Design {
    fn effects(&self, y: &[f64], basis: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
        let k_out = self.outcomes;
        let base = ComplexMatrix::identity(self.dim).scale_real(1.0 / k_out as f64);
        let mut effects = Vec::with_capacity(k_out);
        let mut last = base.clone();
        for k in 0..k_out - 1 {
            let mut e = base.clone();
            for (j, b) in basis.iter().enumerate() {
                let v = y[k * self.basis_len + j];
                if v != 0.0 {
                    e = &e + &b.scale_real(v);
                }
            }
            last = &last - &(&e - &base);
            effects.push(e.hermitian_part());
        }
        effects.push(last.hermitian_part());
        effects
    }
}

/// Builds the effect-positivity blocks `E_k ⪰ 0`; variables `k * nb + j` are
/// the coefficients of `E_k` along `basis[j]` relative to `I/K`.
fn effect_blocks(dim: usize, outcomes: usize, basis: &[ComplexMatrix]) -> Vec<LmiBlock> {
    let nb = basis.len();
    let base = to_na(&ComplexMatrix::identity(dim).scale_real(1.0 / outcomes as f64));
    let basis_na: Vec<DMatrix<C64>> = basis.iter().map(to_na).collect();
    let mut blocks = Vec::with_capacity(outcomes);
    for k in 0..outcomes {
        let terms = if k + 1 < outcomes {
            (0..nb).map(|j| (k * nb + j, basis_na[j].clone())).collect()
        } else {
            (0..(outcomes - 1) * nb).map(|v| (v, -basis_na[v % nb].clone())).collect()
        };
        blocks.push(LmiBlock { constant: base.clone(), terms });
    }
    blocks
}

/// Minimizes the worst-case deviation between the induced and target
/// measurements over POVMs whose effects lie in `span(basis) ∋ I`.
pub fn minimize_worst_deviation(
    dim_s: usize,
    dim_a: usize,
    labels: &[String],
    constraints: &[ProgramConstraint],
    basis: &[ComplexMatrix],
    opts: &SolverOptions,
    exec: Execution,
) -> Result<DesignSolution> {
    let dim = dim_s * dim_a;
    let k_out = labels.len();
    if k_out == 0 || constraints.is_empty() {
        return Err(Error::Argument("measurement design needs at least one outcome and one constraint".into()));
    }
    for c in constraints {
        if c.ancilla_state.dim() != dim_a || c.targets.len() != k_out || c.targets.iter().any(|p| p.dim() != dim_s) {
            return Err(Error::Dimension("program constraint does not match the design dimensions".into()));
        }
    }
    if basis.iter().any(|b| b.dim() != dim) {
        return Err(Error::Dimension("design basis has the wrong dimension".into()));
    }
    let nb = basis.len();
    let tau = (k_out - 1) * nb;
    let num_vars = tau + 1;

    let mut blocks = effect_blocks(dim, k_out, basis);
    let induced: Vec<Vec<DMatrix<C64>>> = constraints
        .iter()
        .map(|c| basis.iter().map(|b| to_na(&contract_ancilla(b, &c.ancilla_state).unwrap())).collect())
        .collect();
    let eye_s = DMatrix::<C64>::identity(dim_s, dim_s);
    let base_s = to_na(&ComplexMatrix::identity(dim_s).scale_real(1.0 / k_out as f64));
    for (ci, c) in constraints.iter().enumerate() {
        for (k, target) in c.targets.iter().enumerate() {
            // R = I/K − Π + (linear part)
            let r0 = &base_s - to_na(target);
            for sign in [1.0, -1.0] {
                // τ I − sign R ⪰ 0
                let mut terms: Vec<(usize, DMatrix<C64>)> = if k + 1 < k_out {
                    (0..nb).map(|j| (k * nb + j, &induced[ci][j] * C64::new(-sign, 0.0))).collect()
                } else {
                    (0..tau).map(|v| (v, &induced[ci][v % nb] * C64::new(sign, 0.0))).collect()
                };
                terms.push((tau, eye_s.clone()));
                blocks.push(LmiBlock { constant: &r0 * C64::new(-sign, 0.0), terms });
            }
        }
    }
    let mut objective = vec![0.0; num_vars];
    objective[tau] = 1.0;
    let design = Design { problem: LmiProblem { num_vars, objective, blocks }, outcomes: k_out, basis_len: nb, dim };

    let starts = opts.restarts + 1;
    let barrier = opts.barrier();
    let runs = map_indexed(starts, exec, |s| -> Result<(f64, Vec<ComplexMatrix>, BarrierTrace)> {
        let mut y0 = start_point(s, opts.seed, k_out, nb);
        let eff0 = design.effects(&y0, basis);
        y0[tau] = worst_deviation(&eff0, constraints)? + 1.0;
        let (y, trace) = solve_lmi(&design.problem, &y0, &barrier)?;
        let effects = design.effects(&y, basis);
        let eps = worst_deviation(&effects, constraints)?;
        Ok((eps, effects, trace))
    });
    let mut best: Option<(usize, f64, Vec<ComplexMatrix>, BarrierTrace)> = None;
    for (s, run) in runs.into_iter().enumerate() {
        let (eps, effects, trace) = run?;
        if best.as_ref().is_none_or(|b| eps < b.1) {
            best = Some((s, eps, effects, trace));
        }
    }
    let (best_start, epsilon, effects, trace) = best.unwrap();
    let povm = Povm::new_unchecked(labels.iter().cloned().zip(effects).collect());
    let certificate = certificate_for(&povm, trace, best_start, starts, opts.gap_tol);
    Ok(DesignSolution { epsilon, povm, certificate })
}

fn certificate_for(povm: &Povm, trace: BarrierTrace, best_start: usize, starts: usize, gap_tol: f64) -> Certificate {
    Certificate {
        iterations: trace.newton_iterations,
        outer_iterations: trace.outer_iterations,
        final_gradient_norm: trace.final_decrement,
        duality_gap_bound: trace.duality_gap_bound,
        certified: trace.converged && trace.duality_gap_bound <= gap_tol,
        objective_trace: trace.objective_trace,
        completeness_residual: povm.completeness_residual(),
        min_effect_eigenvalue: povm.min_eigenvalue(),
        best_start,
        starts,
    }
}

/// Start 0 is the centre `E_k = I/K`; later starts are seeded random interior
/// points with every effect at least `I/(2K)`.
fn start_point(start: usize, seed: u64, outcomes: usize, nb: usize) -> Vec<f64> {
    let mut y = vec![0.0; (outcomes - 1) * nb + 1];
    if start == 0 || outcomes < 2 {
        return y;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for v in y.iter_mut().take((outcomes - 1) * nb) {
        *v = StandardNormal.sample(&mut rng);
    }
    // ||Δ_k||_op ≤ ||y_k||_2 for an orthonormal basis.
    let total: f64 = (0..outcomes - 1).map(|k| y[k * nb..(k + 1) * nb].iter().map(|v| v * v).sum::<f64>().sqrt()).sum();
    if total > 0.0 {
        let scale = 1.0 / (2.0 * outcomes as f64 * total);
        for v in y.iter_mut() {
            *v *= scale;
        }
    }
    y
}

/// Optimal discrimination of `states` with `priors` over all POVMs.
pub struct DiscriminationSolution {
    pub success: f64,
    pub povm: Povm,
    pub certificate: Certificate,
}

pub fn maximize_success(
    states: &[ComplexMatrix],
    priors: &[f64],
    opts: &SolverOptions,
) -> Result<DiscriminationSolution> {
    let k_out = states.len();
    let dim = states[0].dim();
    let basis = crate::symmetry::hermitian_basis(dim);
    let nb = basis.len();
    let num_vars = (k_out - 1) * nb;
    let blocks = effect_blocks(dim, k_out, &basis);
    let last = k_out - 1;
    let mut objective = vec![0.0; num_vars];
    for k in 0..last {
        for (j, b) in basis.iter().enumerate() {
            let gain = priors[k] * b.trace_product(&states[k]).re - priors[last] * b.trace_product(&states[last]).re;
            objective[k * nb + j] = -gain;
        }
    }
    let design = Design { problem: LmiProblem { num_vars, objective, blocks }, outcomes: k_out, basis_len: nb, dim };
    let (y, trace) = solve_lmi(&design.problem, &vec![0.0; num_vars], &opts.barrier())?;
    let effects = design.effects(&y, &basis);
    let success = effects.iter().zip(states.iter().zip(priors)).map(|(e, (s, p))| p * e.trace_product(s).re).sum();
    let povm = Povm::new_unchecked(effects.into_iter().enumerate().map(|(k, e)| (k.to_string(), e)).collect());
    let certificate = certificate_for(&povm, trace, 0, 1, opts.gap_tol);
    Ok(DiscriminationSolution { success, povm, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::ONE;

    fn real(m: &[Vec<f64>]) -> DMatrix<C64> {
        ComplexMatrix::from_real_rows(m).unwrap().to_nalgebra()
    }

    #[test]
    fn scalar_lp_reaches_its_bound() {
        // minimize y subject to y ≥ 0.3 and 2 − y ≥ 0.
        let p = LmiProblem {
            num_vars: 1,
            objective: vec![1.0],
            blocks: vec![
                LmiBlock { constant: real(&[vec![-0.3]]), terms: vec![(0, real(&[vec![1.0]]))] },
                LmiBlock { constant: real(&[vec![2.0]]), terms: vec![(0, real(&[vec![-1.0]]))] },
            ],
        };
        let (y, trace) = solve_lmi(&p, &[1.0], &BarrierOptions::default()).unwrap();
        assert!(trace.converged);
        assert!((y[0] - 0.3).abs() < 1e-8, "{}", y[0]);
    }

    #[test]
    fn largest_eigenvalue_as_an_lmi() {
        // minimize t s.t. t I − A ⪰ 0 gives λ_max(A).
        let a = ComplexMatrix::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(0.5, 0.5), C64::new(0.0, 0.0)],
            vec![C64::new(0.5, -0.5), C64::new(-0.2, 0.0), C64::new(0.3, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.3, 0.0), C64::new(0.7, 0.0)],
        ])
        .unwrap();
        let p = LmiProblem {
            num_vars: 1,
            objective: vec![1.0],
            blocks: vec![LmiBlock { constant: -a.to_nalgebra(), terms: vec![(0, DMatrix::identity(3, 3))] }],
        };
        let (y, trace) = solve_lmi(&p, &[5.0], &BarrierOptions::default()).unwrap();
        let lmax = herm_eigenvalues(&a).unwrap()[0];
        assert!((y[0] - lmax).abs() < 1e-8);
        for w in trace.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn gap_bound_widens_with_the_decrement() {
        assert_eq!(gap_bound(3.0, 10.0, 0.0), 0.3);
        assert!(gap_bound(3.0, 10.0, 0.1) < gap_bound(3.0, 10.0, 0.2));
        assert_eq!(gap_bound(3.0, 10.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn reported_gap_bounds_the_true_gap_under_any_budget() {
        let p = LmiProblem {
            num_vars: 1,
            objective: vec![1.0],
            blocks: vec![
                LmiBlock { constant: real(&[vec![-0.3]]), terms: vec![(0, real(&[vec![1.0]]))] },
                LmiBlock { constant: real(&[vec![2.0]]), terms: vec![(0, real(&[vec![-1.0]]))] },
            ],
        };
        let a = ComplexMatrix::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(0.5, 0.5)],
            vec![C64::new(0.5, -0.5), C64::new(-0.2, 0.0)],
        ])
        .unwrap();
        let eig = LmiProblem {
            num_vars: 1,
            objective: vec![1.0],
            blocks: vec![LmiBlock { constant: -a.to_nalgebra(), terms: vec![(0, DMatrix::identity(2, 2))] }],
        };
        let lmax = herm_eigenvalues(&a).unwrap()[0];
        for max_newton in 1..60 {
            let opts = BarrierOptions { max_newton, ..BarrierOptions::default() };
            let (y, trace) = solve_lmi(&p, &[1.9], &opts).unwrap();
            assert!(
                y[0] - 0.3 <= trace.duality_gap_bound + 1e-15,
                "budget {max_newton}: {} > {}",
                y[0] - 0.3,
                trace.duality_gap_bound
            );
            let (y, trace) = solve_lmi(&eig, &[40.0], &opts).unwrap();
            assert!(
                y[0] - lmax <= trace.duality_gap_bound + 1e-12,
                "budget {max_newton}: {} > {}",
                y[0] - lmax,
                trace.duality_gap_bound
            );
        }
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let p = LmiProblem {
            num_vars: 1,
            objective: vec![1.0],
            blocks: vec![LmiBlock { constant: real(&[vec![-1.0]]), terms: vec![(0, real(&[vec![1.0]]))] }],
        };
        assert!(matches!(solve_lmi(&p, &[0.0], &BarrierOptions::default()), Err(Error::Numerical(_))));
    }

    #[test]
    fn random_starts_are_interior() {
        for s in 1..5 {
            let y = start_point(s, 11, 3, 4);
            let basis: Vec<ComplexMatrix> = crate::symmetry::hermitian_basis(2);
            let d = Design {
                problem: LmiProblem { num_vars: y.len(), objective: vec![0.0; y.len()], blocks: vec![] },
                outcomes: 3,
                basis_len: 4,
                dim: 2,
            };
            for e in d.effects(&y, &basis) {
                let min = *herm_eigenvalues(&e).unwrap().last().unwrap();
                assert!(min >= 1.0 / 6.0 - 1e-12);
            }
        }
    }

    #[test]
    fn helstrom_by_sdp() {
        let plus = ComplexMatrix::projector(&[ONE, ONE]).scale_real(0.5);
        let zero = ComplexMatrix::unit(2, 0, 0);
        let sol = maximize_success(&[zero, plus], &[0.5, 0.5], &SolverOptions::default()).unwrap();
        let expected = 0.5 * (1.0 + 0.5f64.sqrt());
        assert!((sol.success - expected).abs() < 1e-8);
        assert!(sol.certificate.certified);
    }
}
