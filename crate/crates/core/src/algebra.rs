//! Finite-dimensional *-subalgebras of operators and states restricted to them.
//!
//! An [`OperatorAlgebra`] is stored as a Hilbert–Schmidt orthonormal basis of
//! Hermitian matrices. Because the algebras are *-closed, a Hermitian basis
//! always exists, and restricted expectations on it are real for Hermitian
//! states.
//!
//! For a commutative unital algebra the minimal projections `P_k` carry the
//! whole structure: every element is `Σ λ_k P_k`, every restricted state is a
//! probability vector `p_k = φ(P_k)`, and the extremal restricted states are
//! the point masses `ξ_k(A) = Tr(P_k A) / Tr(P_k)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hs_inner, joint_eigenspaces, project_out, ComplexMatrix, C64, I, ZERO};
use crate::states::DensityState;
use crate::tolerance;

#[derive(Debug, Clone, Serialize)]
pub struct OperatorAlgebra {
    space_dim: usize,
    basis: Vec<ComplexMatrix>,
    unital: bool,
    commutative: bool,
}

impl OperatorAlgebra {
    /// All `space_dim x space_dim` matrices.
    pub fn full(space_dim: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut basis = Vec::with_capacity(space_dim * space_dim);
        for i in 0..space_dim {
            basis.push(ComplexMatrix::unit(space_dim, i, i));
        }
        for i in 0..space_dim {
            for j in i + 1..space_dim {
                let eij = ComplexMatrix::unit(space_dim, i, j);
                let eji = ComplexMatrix::unit(space_dim, j, i);
                basis.push((&eij + &eji).scale_real(s));
                basis.push((&eji - &eij).scale(I * s));
            }
        }
        Self { space_dim, basis, unital: true, commutative: space_dim == 1 }
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative
    }

    /// HS coordinates `Tr(E_k^dag A)` of `op` in the basis.
    pub fn coordinates(&self, op: &ComplexMatrix) -> Result<Vec<C64>> {
        self.check_dim(op)?;
        self.basis.iter().map(|e| hs_inner(e, op)).collect()
    }

    /// HS norm of the part of `op` outside the span.
    pub fn span_residual(&self, op: &ComplexMatrix) -> Result<f64> {
        self.check_dim(op)?;
        Ok(project_out(&self.basis, op)?.hs_norm())
    }

    pub fn contains(&self, op: &ComplexMatrix) -> Result<bool> {
        Ok(self.span_residual(op)? < tolerance::ALGEBRA)
    }

    /// Largest span residual over all basis products `E_j E_k`.
    pub fn product_closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                let r = project_out(&self.basis, &(a * b)).expect("basis dims agree").hs_norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Largest span residual over all adjoints `E_k^dag`.
    pub fn adjoint_closure_residual(&self) -> f64 {
        self.basis
            .iter()
            .map(|e| project_out(&self.basis, &e.adjoint()).expect("basis dims agree").hs_norm())
            .fold(0.0, f64::max)
    }

    /// Largest commutator entry over basis pairs.
    pub fn commutator_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, a) in self.basis.iter().enumerate() {
            for b in &self.basis[j + 1..] {
                worst = worst.max(a.commutator(b).max_abs());
            }
        }
        worst
    }

    fn check_dim(&self, op: &ComplexMatrix) -> Result<()> {
        if op.dim() != self.space_dim {
            return Err(Error::DimensionMismatch { expected: self.space_dim, found: op.dim() });
        }
        Ok(())
    }
}

/// Appends the Hermitian, normalized residual of `op` if it is independent.
fn push_hermitian(basis: &mut Vec<ComplexMatrix>, op: &ComplexMatrix) -> Result<bool> {
    let r = project_out(basis, op)?;
    let r = (&r + &r.adjoint()).scale_real(0.5);
    let norm = r.hs_norm();
    if norm < tolerance::LINEAR_DEPENDENCE {
        return Ok(false);
    }
    basis.push(r.scale_real(1.0 / norm));
    Ok(true)
}

/// Hermitian parts `(A + A^dag)/2` and `(A − A^dag)/2i`, which span the same
/// space as `{A, A^dag}`.
fn hermitian_parts(op: &ComplexMatrix) -> [ComplexMatrix; 2] {
    let adj = op.adjoint();
    [(op + &adj).scale_real(0.5), (op - &adj).scale(C64::new(0.0, -0.5))]
}

/// Smallest *-closed, product-closed span containing `generators` (and the
/// identity when requested).
///
/// Products of basis pairs are added round by round until the span stops
/// growing, capped at `space_dim²` elements. Only pairs involving an element
/// added in the previous round are formed.
pub fn generate_algebra(
    space_dim: usize,
    generators: &[ComplexMatrix],
    include_identity: bool,
) -> Result<OperatorAlgebra> {
    if let Some(g) = generators.iter().find(|g| g.dim() != space_dim) {
        return Err(Error::DimensionMismatch { expected: space_dim, found: g.dim() });
    }
    let cap = space_dim * space_dim;
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    if include_identity {
        push_hermitian(&mut basis, &ComplexMatrix::identity(space_dim))?;
    }
    for g in generators {
        for h in hermitian_parts(g) {
            push_hermitian(&mut basis, &h)?;
        }
    }

    let mut frontier = 0;
    for _round in 0..cap.max(1) {
        let end = basis.len();
        if frontier == end || end >= cap {
            break;
        }
        for k in frontier..end {
            for j in 0..=k {
                if basis.len() >= cap {
                    break;
                }
                let product = &basis[j] * &basis[k];
                for h in hermitian_parts(&product) {
                    push_hermitian(&mut basis, &h)?;
                }
            }
        }
        frontier = end;
    }

    let mut alg = OperatorAlgebra { space_dim, basis, unital: false, commutative: false };
    alg.unital = alg.contains(&ComplexMatrix::identity(space_dim))?;
    alg.commutative = alg.commutator_residual() < tolerance::ALGEBRA;
    Ok(alg)
}

/// Value of a restricted functional on an operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    InDomain(C64),
    /// The operator is not in the algebra. The functional is assigned zero
    /// there, but the caller can see that the query left the domain.
    OutOfDomain { value: C64, residual: f64 },
}

impl Evaluation {
    pub fn value(&self) -> C64 {
        match *self {
            Evaluation::InDomain(v) => v,
            Evaluation::OutOfDomain { value, .. } => value,
        }
    }

    pub fn in_domain(&self) -> bool {
        matches!(self, Evaluation::InDomain(_))
    }
}

/// A state known only through its expectations on an algebra.
#[derive(Debug, Clone)]
pub struct RestrictedState {
    algebra: Arc<OperatorAlgebra>,
    expectations: Vec<C64>,
}

impl RestrictedState {
    pub fn algebra(&self) -> &Arc<OperatorAlgebra> {
        &self.algebra
    }

    /// `φ(E_k)` for each basis element.
    pub fn expectations(&self) -> &[C64] {
        &self.expectations
    }

    pub fn evaluate(&self, op: &ComplexMatrix) -> Result<Evaluation> {
        let residual = self.algebra.span_residual(op)?;
        if residual >= tolerance::ALGEBRA {
            return Ok(Evaluation::OutOfDomain { value: ZERO, residual });
        }
        let coords = self.algebra.coordinates(op)?;
        Ok(Evaluation::InDomain(coords.iter().zip(&self.expectations).map(|(c, e)| c * e).sum()))
    }

    /// HS projection of the state onto the algebra, `Σ φ(E_k) E_k`. It
    /// reproduces every in-algebra expectation.
    pub fn projected_density(&self) -> ComplexMatrix {
        let n = self.algebra.space_dim;
        self.algebra
            .basis
            .iter()
            .zip(&self.expectations)
            .fold(ComplexMatrix::zeros(n), |acc, (e, x)| &acc + &e.scale(*x))
    }

    /// Largest difference between expectation vectors on the same algebra.
    pub fn max_difference(&self, other: &RestrictedState) -> f64 {
        assert!(Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra.basis == other.algebra.basis);
        self.expectations
            .iter()
            .zip(&other.expectations)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `φ_R(E_k) = Tr(ρ·E_k)`.
pub fn restrict_state(rho: &DensityState, alg: &Arc<OperatorAlgebra>) -> Result<RestrictedState> {
    if rho.dim() != alg.space_dim {
        return Err(Error::DimensionMismatch { expected: alg.space_dim, found: rho.dim() });
    }
    let expectations = alg
        .basis
        .iter()
        .map(|e| rho.expectation(e))
        .collect::<Result<Vec<_>>>()?;
    Ok(RestrictedState { algebra: Arc::clone(alg), expectations })
}

/// Minimal projections of a commutative unital algebra, found as the joint
/// eigenspaces of its Hermitian basis. Ordered by the first basis index in
/// their support.
pub fn minimal_projections(alg: &OperatorAlgebra) -> Result<Vec<ComplexMatrix>> {
    if !alg.commutative {
        return Err(Error::NonCommutative { residual: alg.commutator_residual() });
    }
    if !alg.unital {
        return Err(Error::NotUnital);
    }
    let spaces = joint_eigenspaces(&alg.basis, alg.space_dim, tolerance::EIGEN_CLUSTER)?;
    let mut projections: Vec<ComplexMatrix> = spaces.iter().map(|s| s.projector()).collect();
    let first_support = |p: &ComplexMatrix| (0..p.dim()).find(|&i| p.get(i, i).re > 1e-8).unwrap_or(p.dim());
    projections.sort_by_key(first_support);
    Ok(projections)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalOutcome {
    pub value: f64,
    pub probability: f64,
    pub projector: ComplexMatrix,
}

/// Probability distribution over the minimal projections of a commutative
/// algebra, labelled by the values of an observable.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalDistribution {
    outcomes: Vec<ClassicalOutcome>,
}

impl ClassicalDistribution {
    pub fn new(outcomes: Vec<ClassicalOutcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidProbabilities("no outcomes".into()));
        }
        let sum: f64 = outcomes.iter().map(|o| o.probability).sum();
        if outcomes.iter().any(|o| o.probability < -tolerance::STATE) || (sum - 1.0).abs() > tolerance::ALGEBRA {
            return Err(Error::InvalidProbabilities(format!(
                "outcome probabilities {:?} do not form a distribution",
                outcomes.iter().map(|o| o.probability).collect::<Vec<_>>()
            )));
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[ClassicalOutcome] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.probability).collect()
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.value).sum()
    }

    /// Probability of the outcome carrying `value`, summed over ties.
    pub fn probability_of(&self, value: f64) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| (o.value - value).abs() < tolerance::EIGEN_CLUSTER)
            .map(|o| o.probability)
            .sum()
    }
}

/// Classical form of a restricted state on a commutative algebra: outcome
/// `k` has probability `φ(P_k)` and carries the eigenvalue of
/// `value_observable` on the range of `P_k`.
pub fn classical_state(restricted: &RestrictedState, value_observable: &ComplexMatrix) -> Result<ClassicalDistribution> {
    let alg = restricted.algebra();
    if !alg.commutative {
        return Err(Error::NonCommutative { residual: alg.commutator_residual() });
    }
    let residual = alg.span_residual(value_observable)?;
    if residual >= tolerance::ALGEBRA {
        return Err(Error::OutsideAlgebra { residual });
    }
    let mut outcomes = Vec::new();
    for projector in minimal_projections(alg)? {
        let probability = restricted.evaluate(&projector)?.value().re;
        let value = ((value_observable * &projector).trace() / projector.trace()).re;
        outcomes.push(ClassicalOutcome { value, probability, projector });
    }
    outcomes.sort_by(|a, b| a.value.total_cmp(&b.value));
    ClassicalDistribution::new(outcomes)
}

/// True iff exactly one outcome has probability above `tol`.
pub fn is_extremal(dist: &ClassicalDistribution, tol: f64) -> bool {
    dist.outcomes.iter().filter(|o| o.probability > tol).count() == 1
}

/// Point-mass state `ξ(A) = Tr(P·A) / Tr(P)` of a minimal projection.
pub fn pointlike_state(alg: &Arc<OperatorAlgebra>, projector: &ComplexMatrix) -> Result<RestrictedState> {
    let rank = projector.trace().re;
    let expectations = alg
        .basis
        .iter()
        .map(|e| Ok((projector * e).trace() / rank))
        .collect::<Result<Vec<_>>>()?;
    Ok(RestrictedState { algebra: Arc::clone(alg), expectations })
}

/// Splits a restricted state on a commutative unital algebra into its
/// extremal components `Σ p_k ξ_k`. Components with zero weight are kept.
pub fn extremal_decomposition(restricted: &RestrictedState) -> Result<Vec<(f64, RestrictedState)>> {
    let alg = restricted.algebra();
    minimal_projections(alg)?
        .iter()
        .map(|p| {
            let weight = restricted.evaluate(p)?.value().re;
            Ok((weight, pointlike_state(alg, p)?))
        })
        .collect()
}

/// Largest `|Tr((ρ1 − ρ2)·E_k)|` over the algebra basis.
pub fn restriction_gap(rho1: &DensityState, rho2: &DensityState, alg: &OperatorAlgebra) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch { expected: rho1.dim(), found: rho2.dim() });
    }
    if rho1.dim() != alg.space_dim {
        return Err(Error::DimensionMismatch { expected: alg.space_dim, found: rho1.dim() });
    }
    let diff = rho1.matrix() - rho2.matrix();
    Ok(alg.basis.iter().map(|e| (&diff * e).trace().norm()).fold(0.0, f64::max))
}

/// Two states are indistinguishable to an observer holding `alg` when their
/// restrictions agree to within `tol`.
pub fn breuer_indistinguishable(rho1: &DensityState, rho2: &DensityState, alg: &OperatorAlgebra, tol: f64) -> Result<bool> {
    Ok(restriction_gap(rho1, rho2, alg)? < tol)
}
