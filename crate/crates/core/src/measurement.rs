//! The measuring-system model: a two-level system `S` coupled to an observer
//! `O` whose pointer has the states `O_0` (ready), `O_1` and `O_2`.
//!
//! The coupling is a unitary that writes the `S` eigenstate into the pointer,
//! `|s_i O_0> -> |s_i O_i>`. The default is the controlled permutation
//! `Σ_i |s_i><s_i| ⊗ Π_i` where `Π_1` swaps `O_0 <-> O_1` and `Π_2` swaps
//! `O_0 <-> O_2`. A constant Hamiltonian switched on over `[t0, t1]` is
//! recovered from it by the principal logarithm.

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{generate_algebra, OperatorAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{
    tensor_product, tensor_vector, unitary_from_hamiltonian, unitary_log, ComplexMatrix, SpaceSpec, C64, ONE,
    ZERO,
};
use crate::states::{density_from_pure, DensityState, PureState};
use crate::tolerance;

pub const SYSTEM: &str = "S";
pub const OBSERVER: &str = "O";
pub const SYSTEM_DIM: usize = 2;
pub const POINTER_DIM: usize = 3;

pub const DEFAULT_S_EIGENVALUES: [f64; 2] = [1.0, -1.0];
pub const DEFAULT_POINTER_EIGENVALUES: [f64; 3] = [0.0, 1.0, 2.0];

/// `[("S", 2), ("O", 3)]`.
pub fn ms_spec() -> SpaceSpec {
    SpaceSpec::new([(SYSTEM, SYSTEM_DIM), (OBSERVER, POINTER_DIM)]).expect("static layout is valid")
}

/// Index of `|s_{s+1} O_o>` in the product basis.
pub fn ms_index(s: usize, o: usize) -> usize {
    s * POINTER_DIM + o
}

fn check_ms_layout(spec: &SpaceSpec) -> Result<()> {
    let dims: Vec<usize> = spec.factors().iter().map(|f| f.dim).collect();
    if dims != [SYSTEM_DIM, POINTER_DIM] {
        return Err(Error::InvalidSpace(format!("expected a 2 x 3 layout, got dimensions {dims:?}")));
    }
    Ok(())
}

fn check_ms_state(rho: &DensityState) -> Result<()> {
    if rho.dim() != SYSTEM_DIM * POINTER_DIM {
        return Err(Error::DimensionMismatch { expected: SYSTEM_DIM * POINTER_DIM, found: rho.dim() });
    }
    check_ms_layout(rho.spec())
}

/// Controlled-permutation coupling that maps `|s_i O_0>` to `|s_i O_i>`.
pub fn default_coupling(spec: &SpaceSpec) -> Result<ComplexMatrix> {
    check_ms_layout(spec)?;
    let n = spec.total_dim();
    let mut u = ComplexMatrix::zeros(n);
    for s in 0..SYSTEM_DIM {
        // branch s+1 exchanges the ready state with pointer state s+1
        let target = s + 1;
        for o in 0..POINTER_DIM {
            let image = match o {
                0 => target,
                x if x == target => 0,
                x => x,
            };
            u.set(ms_index(s, image), ms_index(s, o), ONE);
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementModel {
    amplitudes: [C64; 2],
    s_eigenvalues: [f64; 2],
    pointer_eigenvalues: [f64; 3],
    spec: SpaceSpec,
    coupling: ComplexMatrix,
    t0: f64,
    t1: f64,
}

impl MeasurementModel {
    /// Model with default spectra, interaction window `[0, 1]` and the
    /// controlled-permutation coupling.
    pub fn new(a1: C64, a2: C64) -> Result<Self> {
        let norm_sq = a1.norm_sqr() + a2.norm_sqr();
        if (norm_sq - 1.0).abs() > tolerance::STATE {
            return Err(Error::NotNormalized { norm_sq });
        }
        let spec = ms_spec();
        let coupling = default_coupling(&spec)?;
        Ok(Self {
            amplitudes: [a1, a2],
            s_eigenvalues: DEFAULT_S_EIGENVALUES,
            pointer_eigenvalues: DEFAULT_POINTER_EIGENVALUES,
            spec,
            coupling,
            t0: 0.0,
            t1: 1.0,
        })
    }

    pub fn real(a1: f64, a2: f64) -> Result<Self> {
        Self::new(C64::new(a1, 0.0), C64::new(a2, 0.0))
    }

    pub fn with_s_eigenvalues(mut self, q: [f64; 2]) -> Result<Self> {
        if q.iter().any(|x| !x.is_finite()) || q[0] == q[1] {
            return Err(Error::InvalidModel(format!("system eigenvalues {q:?} must be finite and distinct")));
        }
        self.s_eigenvalues = q;
        Ok(self)
    }

    pub fn with_pointer_eigenvalues(mut self, q: [f64; 3]) -> Result<Self> {
        let distinct = q[0] != q[1] && q[0] != q[2] && q[1] != q[2];
        if q.iter().any(|x| !x.is_finite()) || !distinct {
            return Err(Error::InvalidModel(format!("pointer eigenvalues {q:?} must be finite and pairwise distinct")));
        }
        self.pointer_eigenvalues = q;
        Ok(self)
    }

    pub fn with_times(mut self, t0: f64, t1: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
            return Err(Error::InvalidModel(format!("interaction window [{t0}, {t1}] is not ordered")));
        }
        self.t0 = t0;
        self.t1 = t1;
        Ok(self)
    }

    /// Replaces the coupling. It must be unitary and record each `S`
    /// eigenstate in the matching pointer state.
    pub fn with_coupling(mut self, coupling: ComplexMatrix) -> Result<Self> {
        if coupling.dim() != self.spec.total_dim() {
            return Err(Error::DimensionMismatch { expected: self.spec.total_dim(), found: coupling.dim() });
        }
        let residual = coupling.unitarity_residual();
        if residual > tolerance::STRUCTURE_CHECK {
            return Err(Error::NotUnitary { residual });
        }
        for s in 0..SYSTEM_DIM {
            let column: Vec<C64> = (0..coupling.dim()).map(|i| coupling.get(i, ms_index(s, 0))).collect();
            let target = ms_index(s, s + 1);
            let off = column
                .iter()
                .enumerate()
                .map(|(i, z)| if i == target { (z - ONE).norm() } else { z.norm() })
                .fold(0.0, f64::max);
            if off > tolerance::STRUCTURE_CHECK {
                return Err(Error::InvalidModel(format!(
                    "coupling does not map |s{} O0> to |s{} O{}>",
                    s + 1,
                    s + 1,
                    s + 1
                )));
            }
        }
        self.coupling = coupling;
        Ok(self)
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.amplitudes
    }

    /// `(|a_1|², |a_2|²)`.
    pub fn branch_probabilities(&self) -> [f64; 2] {
        [self.amplitudes[0].norm_sqr(), self.amplitudes[1].norm_sqr()]
    }

    pub fn s_eigenvalues(&self) -> [f64; 2] {
        self.s_eigenvalues
    }

    pub fn pointer_eigenvalues(&self) -> [f64; 3] {
        self.pointer_eigenvalues
    }

    /// Pointer value recorded on branch `i` (1 or 2).
    pub fn pointer_value(&self, branch: usize) -> Result<f64> {
        check_branch(branch)?;
        Ok(self.pointer_eigenvalues[branch])
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    /// `D_12 = a_1^* a_2 + a_1 a_2^*`.
    pub fn interference_coefficient(&self) -> f64 {
        let [a1, a2] = self.amplitudes;
        (a1.conj() * a2 + a1 * a2.conj()).re
    }

    /// `Q ⊗ I_O`.
    pub fn system_observable(&self) -> ComplexMatrix {
        tensor_product(&ComplexMatrix::from_real_diagonal(&self.s_eigenvalues), &ComplexMatrix::identity(POINTER_DIM))
    }

    /// `I_S ⊗ Q_O`.
    pub fn pointer_observable(&self) -> ComplexMatrix {
        tensor_product(
            &ComplexMatrix::identity(SYSTEM_DIM),
            &ComplexMatrix::from_real_diagonal(&self.pointer_eigenvalues),
        )
    }

    /// The observer's effective algebra, generated by `I_S ⊗ Q_O` and the
    /// identity on the full space.
    pub fn observer_algebra(&self) -> Result<Arc<OperatorAlgebra>> {
        Ok(Arc::new(generate_algebra(self.spec.total_dim(), &[self.pointer_observable()], true)?))
    }

    /// Hamiltonian that produces the coupling over `[t0, t1]`.
    pub fn coupling_hamiltonian(&self) -> Result<ComplexMatrix> {
        coupling_hamiltonian(&self.coupling, self.t0, self.t1)
    }
}

fn check_branch(branch: usize) -> Result<()> {
    if branch == 1 || branch == 2 {
        Ok(())
    } else {
        Err(Error::InvalidBranch(branch))
    }
}

/// Constant Hermitian `H` with `exp(-iH(t1 − t0)) = coupling`, spectrum on
/// the principal branch.
pub fn coupling_hamiltonian(coupling: &ComplexMatrix, t0: f64, t1: f64) -> Result<ComplexMatrix> {
    if t1 < t0 {
        return Err(Error::InvalidModel(format!("interaction window [{t0}, {t1}] is not ordered")));
    }
    let duration = t1 - t0;
    if duration == 0.0 {
        let residual = coupling.max_abs_diff(&ComplexMatrix::identity(coupling.dim()));
        if residual > tolerance::STRUCTURE_CHECK {
            return Err(Error::DegenerateDuration);
        }
        return Ok(ComplexMatrix::zeros(coupling.dim()));
    }
    Ok(unitary_log(coupling)?.scale_real(1.0 / duration))
}

/// `(a_1|s_1> + a_2|s_2>) ⊗ |O_0>`.
pub fn initial_state(model: &MeasurementModel) -> PureState {
    let ready = [ONE, ZERO, ZERO];
    PureState::new(tensor_vector(&model.amplitudes, &ready)).expect("model amplitudes are normalized")
}

pub fn initial_density(model: &MeasurementModel) -> DensityState {
    density_from_pure(&initial_state(model), &model.spec).expect("initial state matches layout")
}

/// `ρ(t) = e^{-iHt} ρ e^{iHt}`, the closed-form solution of
/// `dρ/dt = -i[H, ρ]`.
pub fn liouville_evolve(rho: &DensityState, h: &ComplexMatrix, t: f64) -> Result<DensityState> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: h.dim() });
    }
    let u = unitary_from_hamiltonian(h, t)?;
    let evolved = &(&u * rho.matrix()) * &u.adjoint();
    let evolved = (&evolved + &evolved.adjoint()).scale_real(0.5);
    DensityState::new(evolved, rho.spec().clone())
}

/// Projector onto `U·Ψ_in = Σ a_i |s_i O_i>`.
pub fn final_pure_state(model: &MeasurementModel) -> DensityState {
    let psi = model.coupling.apply(initial_state(model).amplitudes());
    let psi = PureState::normalized(psi).expect("unitary image of a unit vector");
    density_from_pure(&psi, &model.spec).expect("final state matches layout")
}

/// `Σ |a_i|² |s_i O_i><s_i O_i|`.
pub fn final_mixed_state(model: &MeasurementModel) -> DensityState {
    let p = model.branch_probabilities();
    let mut m = ComplexMatrix::zeros(model.spec.total_dim());
    for (s, pk) in p.iter().enumerate() {
        let k = ms_index(s, s + 1);
        m.set(k, k, C64::new(*pk, 0.0));
    }
    DensityState::new(m, model.spec.clone()).expect("branch weights form a density")
}

/// `|s_i O_i><s_i O_i|` for branch `i` in {1, 2}.
pub fn individual_event_state(model: &MeasurementModel, branch: usize) -> Result<DensityState> {
    check_branch(branch)?;
    let k = ms_index(branch - 1, branch);
    DensityState::new(ComplexMatrix::unit(model.spec.total_dim(), k, k), model.spec.clone())
}

/// Cross-branch observable `|s_1><s_2| ⊗ |O_1><O_2| + h.c.`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceObservable {
    matrix: ComplexMatrix,
}

impl InterferenceObservable {
    pub fn new() -> Self {
        let n = SYSTEM_DIM * POINTER_DIM;
        let forward = ComplexMatrix::unit(n, ms_index(0, 1), ms_index(1, 2));
        Self { matrix: &forward + &forward.adjoint() }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl Default for InterferenceObservable {
    fn default() -> Self {
        Self::new()
    }
}

/// `Tr(ρ·B)`.
pub fn interference_expectation(rho: &DensityState) -> Result<f64> {
    check_ms_state(rho)?;
    Ok(rho.expectation(InterferenceObservable::new().matrix())?.re)
}

/// Partial trace over `S`.
pub fn observer_restricted_density(rho: &DensityState) -> Result<DensityState> {
    check_ms_state(rho)?;
    let observer = rho.spec().factors()[1].label.clone();
    rho.reduce_to(&observer)
}
