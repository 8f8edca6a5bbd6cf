//! Pure vectors, density matrices, ensemble tables and doublet states.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, partial_trace, ComplexMatrix, SpaceSpec, C64, ONE, ZERO};
use crate::tolerance;

/// Unit vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C64>", into = "Vec<C64>")]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm_sq - 1.0).abs() > tolerance::STATE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm. Fails only on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

impl TryFrom<Vec<C64>> for PureState {
    type Error = Error;
    fn try_from(v: Vec<C64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PureState> for Vec<C64> {
    fn from(p: PureState) -> Self {
        p.amplitudes
    }
}

/// Residuals of the three density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityReport {
    pub hermiticity_residual: f64,
    pub trace_residual: f64,
    pub min_eigenvalue: f64,
    pub hermitian: bool,
    pub unit_trace: bool,
    pub positive: bool,
}

impl DensityReport {
    pub fn all_pass(&self) -> bool {
        self.hermitian && self.unit_trace && self.positive
    }
}

/// Checks Hermiticity, unit trace and positivity of a candidate density
/// matrix. Positivity is judged on the Hermitian part.
pub fn validate_density(matrix: &ComplexMatrix) -> DensityReport {
    let hermiticity_residual = matrix.hermiticity_residual();
    let trace = matrix.trace();
    let trace_residual = (trace - ONE).norm();
    let hermitian_part = (matrix + &matrix.adjoint()).scale_real(0.5);
    let min_eigenvalue = hermitian_eig(&hermitian_part)
        .map(|e| e.values[0])
        .unwrap_or(f64::NAN);
    DensityReport {
        hermiticity_residual,
        trace_residual,
        min_eigenvalue,
        hermitian: hermiticity_residual <= tolerance::STATE,
        unit_trace: trace_residual <= tolerance::STATE,
        positive: min_eigenvalue >= -tolerance::STATE,
    }
}

/// Statistical state on a labelled tensor-product space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityState {
    matrix: ComplexMatrix,
    spec: SpaceSpec,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix, spec: SpaceSpec) -> Result<Self> {
        if matrix.dim() != spec.total_dim() {
            return Err(Error::DimensionMismatch { expected: spec.total_dim(), found: matrix.dim() });
        }
        let report = validate_density(&matrix);
        if !report.all_pass() {
            return Err(Error::InvalidDensity(format!(
                "hermiticity residual {:e}, trace residual {:e}, min eigenvalue {:e}",
                report.hermiticity_residual, report.trace_residual, report.min_eigenvalue
            )));
        }
        Ok(Self { matrix, spec })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn validate(&self) -> DensityReport {
        validate_density(&self.matrix)
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `Tr(ρ·A)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        Ok((&self.matrix * op).trace())
    }

    /// Reduced state on the factor `keep`.
    pub fn reduce_to(&self, keep: &str) -> Result<DensityState> {
        let reduced = partial_trace(&self.matrix, &self.spec, keep)?;
        let dim = self.spec.factor_dim(keep)?;
        DensityState::new(reduced, SpaceSpec::single(keep, dim)?)
    }
}

/// `|ψ><ψ|`.
pub fn density_from_pure(psi: &PureState, spec: &SpaceSpec) -> Result<DensityState> {
    if psi.dim() != spec.total_dim() {
        return Err(Error::DimensionMismatch { expected: spec.total_dim(), found: psi.dim() });
    }
    let amps = psi.amplitudes();
    DensityState::new(ComplexMatrix::outer(amps, amps)?, spec.clone())
}

/// One row of an ensemble table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GemengeEntry {
    pub state: PureState,
    pub probability: f64,
}

/// Ensemble table `{Ψ_l; P_l}`. Entries need not be orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GemengeState {
    entries: Vec<GemengeEntry>,
}

impl GemengeState {
    pub fn new(entries: Vec<(PureState, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbabilities("empty table".into()));
        }
        if let Some((_, p)) = entries.iter().find(|(_, p)| *p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidProbabilities(format!("probability {p} is not a non-negative number")));
        }
        let sum: f64 = entries.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > tolerance::STATE {
            return Err(Error::InvalidProbabilities(format!("probabilities sum to {sum}")));
        }
        let dim = entries[0].0.dim();
        if let Some((s, _)) = entries.iter().find(|(s, _)| s.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
        }
        Ok(Self {
            entries: entries
                .into_iter()
                .map(|(state, probability)| GemengeEntry { state, probability })
                .collect(),
        })
    }

    pub fn entries(&self) -> &[GemengeEntry] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries[0].state.dim()
    }
}

/// `Σ P_l |Ψ_l><Ψ_l|`.
pub fn mix(gemenge: &GemengeState, spec: &SpaceSpec) -> Result<DensityState> {
    if gemenge.dim() != spec.total_dim() {
        return Err(Error::DimensionMismatch { expected: spec.total_dim(), found: gemenge.dim() });
    }
    let mut acc = ComplexMatrix::zeros(spec.total_dim());
    for entry in gemenge.entries() {
        let amps = entry.state.amplitudes();
        acc = &acc + &ComplexMatrix::outer(amps, amps)?.scale_real(entry.probability);
    }
    DensityState::new(acc, spec.clone())
}

/// Largest entry modulus of `a − b`.
pub fn state_distance(a: &DensityState, b: &DensityState) -> Result<f64> {
    if a.spec != b.spec {
        return Err(Error::SpecMismatch(format!("{:?} vs {:?}", a.spec.factors(), b.spec.factors())));
    }
    Ok(a.matrix.max_abs_diff(&b.matrix))
}

/// Pointer projector `|O_i><O_i|` in a pointer space of dimension `dim`.
pub fn pointer_projector(dim: usize, index: usize) -> ComplexMatrix {
    ComplexMatrix::unit(dim, index, index)
}

/// Individual state of one event: the dynamical density component and the
/// observer's definite pointer record.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubletState {
    phi_d: Arc<DensityState>,
    pointer: usize,
    projector: ComplexMatrix,
}

impl DoubletState {
    pub fn new(phi_d: Arc<DensityState>, pointer: usize, pointer_dim: usize) -> Result<Self> {
        if pointer >= pointer_dim {
            return Err(Error::InvalidModel(format!(
                "pointer index {pointer} outside a {pointer_dim}-state pointer space"
            )));
        }
        Ok(Self { phi_d, pointer, projector: pointer_projector(pointer_dim, pointer) })
    }

    pub fn phi_d(&self) -> &DensityState {
        &self.phi_d
    }

    pub fn shared_phi_d(&self) -> &Arc<DensityState> {
        &self.phi_d
    }

    pub fn pointer(&self) -> usize {
        self.pointer
    }

    pub fn phi_i(&self) -> &ComplexMatrix {
        &self.projector
    }
}

/// Ensemble doublet: the density component and the pointer distribution it
/// induces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticalDoublet {
    eta_d: DensityState,
    eta_i: Vec<f64>,
}

impl StatisticalDoublet {
    /// Derives the pointer distribution from `eta_d` by reducing onto the
    /// pointer factor.
    pub fn from_density(eta_d: DensityState, pointer_label: &str) -> Result<Self> {
        let eta_i = pointer_distribution(&eta_d, pointer_label)?;
        Ok(Self { eta_d, eta_i })
    }

    pub fn new(eta_d: DensityState, eta_i: Vec<f64>, pointer_label: &str) -> Result<Self> {
        let derived = pointer_distribution(&eta_d, pointer_label)?;
        if derived.len() != eta_i.len() {
            return Err(Error::DimensionMismatch { expected: derived.len(), found: eta_i.len() });
        }
        let sum: f64 = eta_i.iter().sum();
        if eta_i.iter().any(|p| *p < -tolerance::STATE) || (sum - 1.0).abs() > tolerance::STATE {
            return Err(Error::InvalidProbabilities(format!("pointer distribution {eta_i:?}")));
        }
        let worst = derived.iter().zip(&eta_i).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if worst > tolerance::STATE {
            return Err(Error::InvalidProbabilities(format!(
                "pointer distribution disagrees with density component by {worst:e}"
            )));
        }
        Ok(Self { eta_d, eta_i })
    }

    pub fn eta_d(&self) -> &DensityState {
        &self.eta_d
    }

    pub fn eta_i(&self) -> &[f64] {
        &self.eta_i
    }

    /// Largest disagreement between the stored distribution and the one
    /// recomputed from `eta_d`.
    pub fn consistency_residual(&self, pointer_label: &str) -> Result<f64> {
        let derived = pointer_distribution(&self.eta_d, pointer_label)?;
        Ok(derived.iter().zip(&self.eta_i).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// `Tr(ρ·(I ⊗ |O_i><O_i|))` for each pointer index, i.e. the diagonal of the
/// reduced pointer state.
pub fn pointer_distribution(rho: &DensityState, pointer_label: &str) -> Result<Vec<f64>> {
    let reduced = partial_trace(rho.matrix(), rho.spec(), pointer_label)?;
    Ok((0..reduced.dim()).map(|i| reduced.get(i, i).re).collect())
}
