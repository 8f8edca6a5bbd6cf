//! Dense complex matrices, tensor-product layouts and Hermitian spectral
//! routines.
//!
//! Tensor products follow the Kronecker convention with the first factor as
//! the slow index, so in a `[("S", 2), ("O", 3)]` layout the basis vector
//! `|s_i O_j>` sits at index `3 * i + j`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix. Hermiticity and unitarity are checked on demand,
/// never assumed.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { data: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { data: DMatrix::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { data: DMatrix::from_fn(dim, dim, f) }
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// perfect square.
    pub fn from_row_major(entries: &[C64]) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() || dim == 0 {
            return Err(Error::InvalidSpace(format!(
                "{} entries do not form a non-empty square matrix",
                entries.len()
            )));
        }
        Ok(Self::from_fn(dim, |i, j| entries[i * dim + j]))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Result<Self> {
        if ket.len() != bra.len() {
            return Err(Error::DimensionMismatch { expected: ket.len(), found: bra.len() });
        }
        Ok(Self::from_fn(ket.len(), |i, j| ket[i] * bra[j].conj()))
    }

    /// `|e_i><e_j|` in dimension `dim`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[(i, j)] = ONE;
        m
    }

    pub fn from_nalgebra(data: DMatrix<C64>) -> Self {
        assert!(data.is_square(), "ComplexMatrix must be square");
        Self { data }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[(row, col)] = value;
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n * n).map(|k| self.data[(k / n, k % n)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { data: self.data.adjoint() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { data: &self.data * factor }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length must match matrix dimension");
        (0..n)
            .map(|i| (0..n).map(|j| self.data[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff on unequal dimensions");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Hilbert–Schmidt norm `sqrt(Tr(A^dag A))`.
    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { data: &self.data * &rhs.data }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { data: &self.data + &rhs.data }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { data: &self.data - &rhs.data }
    }
}

/// Serialized as a list of rows, each entry an `[re, im]` pair.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("matrix rows must form a non-empty square"));
        }
        Ok(Self::from_fn(n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
    }
}

/// One labelled tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor-product layout. The first factor is the slow index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSpec {
    factors: Vec<Factor>,
}

impl SpaceSpec {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor { label: label.into(), dim })
            .collect();
        if factors.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        for (k, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::InvalidSpace(format!("factor `{}` has dimension 0", f.label)));
            }
            if factors[..k].iter().any(|g| g.label == f.label) {
                return Err(Error::InvalidSpace(format!("duplicate label `{}`", f.label)));
            }
        }
        Ok(Self { factors })
    }

    /// Single-factor layout.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn factor_dim(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].dim)
    }

    /// Product of the dimensions of every factor after `position`.
    fn stride(&self, position: usize) -> usize {
        self.factors[position + 1..].iter().map(|f| f.dim).product()
    }
}

/// Kronecker product `a ⊗ b` with `a` as the slow index.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix { data: a.data.kronecker(&b.data) }
}

/// Kronecker product of vectors, first argument slow.
pub fn tensor_vector(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Traces out every factor except `keep`.
pub fn partial_trace(rho: &ComplexMatrix, spec: &SpaceSpec, keep: &str) -> Result<ComplexMatrix> {
    let total = spec.total_dim();
    if rho.dim() != total {
        return Err(Error::DimensionMismatch { expected: total, found: rho.dim() });
    }
    let pos = spec.position(keep)?;
    let kept = spec.factors[pos].dim;
    let stride = spec.stride(pos);

    let mut out = ComplexMatrix::zeros(kept);
    // every total index whose `keep` digit is zero anchors one environment configuration
    for base in (0..total).filter(|i| (i / stride).is_multiple_of(kept)) {
        for a in 0..kept {
            for b in 0..kept {
                let z = out.get(a, b) + rho.get(base + a * stride, base + b * stride);
                out.set(a, b, z);
            }
        }
    }
    Ok(out)
}

/// Hilbert–Schmidt inner product `Tr(a^dag b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    a.check_same_dim(b)?;
    Ok(a.data.iter().zip(b.data.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.dim()).map(|i| self.vectors.get(i, k)).collect()
    }

    /// `V f(Λ) V^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors.data;
        let mut scaled = v.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        ComplexMatrix { data: scaled * v.adjoint() }
    }
}

pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let residual = a.hermiticity_residual();
    if residual > tolerance::STRUCTURE_CHECK {
        return Err(Error::NotHermitian { residual });
    }
    let symmetrized = (&a.data + a.data.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(symmetrized);

    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// `exp(-i H t)` through the spectral decomposition of `H` (ħ = 1).
pub fn unitary_from_hamiltonian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.map_spectrum(|lambda| C64::from_polar(1.0, -lambda * t)))
}

/// Hermitian `K` with `exp(-iK) = u` and spectrum in `(-π, π]`.
///
/// The unitary is diagonalized through its commuting Hermitian parts
/// `(U + U^dag)/2` and `(U − U^dag)/2i`; the eigenvalue `-1` maps to `+π`.
pub fn unitary_log(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let residual = u.unitarity_residual();
    if residual > tolerance::STRUCTURE_CHECK {
        return Err(Error::NotUnitary { residual });
    }
    let adj = u.adjoint();
    let re = (u + &adj).scale_real(0.5);
    let im = (u - &adj).scale(C64::new(0.0, -0.5));
    let spaces = joint_eigenspaces(&[re, im], u.dim(), tolerance::EIGEN_CLUSTER)?;

    let mut k = ComplexMatrix::zeros(u.dim());
    for space in &spaces {
        let phase = C64::new(space.eigenvalues[0], space.eigenvalues[1]).arg();
        let mut generator = -phase;
        if generator <= -std::f64::consts::PI + tolerance::EIGEN_CLUSTER {
            generator = std::f64::consts::PI;
        }
        k = &k + &space.projector().scale_real(generator);
    }
    let k = (&k + &k.adjoint()).scale_real(0.5);

    let back = unitary_from_hamiltonian(&k, 1.0)?;
    let err = back.max_abs_diff(u);
    if err > tolerance::SPECTRAL_POST {
        return Err(Error::NotUnitary { residual: err });
    }
    Ok(k)
}

/// Modified Gram–Schmidt in the Hilbert–Schmidt inner product. Inputs whose
/// residual norm falls below the dependence threshold are dropped.
pub fn gram_schmidt_hs(ops: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let mut basis: Vec<ComplexMatrix> = Vec::with_capacity(ops.len());
    for op in ops {
        if let Some(first) = ops.first() {
            first.check_same_dim(op)?;
        }
        if let Some(e) = orthonormal_residual(&basis, op)? {
            basis.push(e);
        }
    }
    Ok(basis)
}

/// Removes the component of `op` in span(`basis`), assumed HS-orthonormal.
pub fn project_out(basis: &[ComplexMatrix], op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut r = op.clone();
    // two passes keep the residual orthogonal to working precision
    for _ in 0..2 {
        for e in basis {
            let c = hs_inner(e, &r)?;
            r.data -= &e.data * c;
        }
    }
    Ok(r)
}

/// Normalized residual of `op` against `basis`, or `None` if it is dependent.
pub(crate) fn orthonormal_residual(
    basis: &[ComplexMatrix],
    op: &ComplexMatrix,
) -> Result<Option<ComplexMatrix>> {
    let r = project_out(basis, op)?;
    let norm = r.hs_norm();
    if norm < tolerance::LINEAR_DEPENDENCE {
        return Ok(None);
    }
    Ok(Some(r.scale_real(1.0 / norm)))
}

/// Orthonormal columns spanning one joint eigenspace, with the eigenvalue of
/// each input operator on it.
#[derive(Debug, Clone)]
pub struct JointEigenspace {
    /// `dim x rank` isometry stored column by column.
    pub columns: Vec<Vec<C64>>,
    pub eigenvalues: Vec<f64>,
}

impl JointEigenspace {
    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    /// Orthogonal projector onto the eigenspace.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.columns[0].len();
        ComplexMatrix::from_fn(n, |i, j| self.columns.iter().map(|c| c[i] * c[j].conj()).sum())
    }
}

/// Simultaneous diagonalization of pairwise-commuting Hermitian matrices.
///
/// Starts from the whole space and splits each block by the spectrum of the
/// next operator compressed onto it; eigenvalues closer than `cluster_tol`
/// stay in one block. Commutation is the caller's responsibility.
pub fn joint_eigenspaces(ops: &[ComplexMatrix], dim: usize, cluster_tol: f64) -> Result<Vec<JointEigenspace>> {
    let mut blocks = vec![JointEigenspace {
        columns: (0..dim)
            .map(|k| (0..dim).map(|i| if i == k { ONE } else { ZERO }).collect())
            .collect(),
        eigenvalues: Vec::new(),
    }];
    for op in ops {
        if op.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
        }
        let mut refined = Vec::with_capacity(blocks.len());
        for block in blocks {
            let m = block.rank();
            // compress op onto the block: W^dag op W
            let images: Vec<Vec<C64>> = block.columns.iter().map(|c| op.apply(c)).collect();
            let compressed = ComplexMatrix::from_fn(m, |a, b| {
                block.columns[a].iter().zip(&images[b]).map(|(x, y)| x.conj() * y).sum()
            });
            let compressed = (&compressed + &compressed.adjoint()).scale_real(0.5);
            let eig = hermitian_eig(&compressed)?;

            let mut start = 0;
            while start < m {
                let mut end = start + 1;
                while end < m && eig.values[end] - eig.values[end - 1] <= cluster_tol {
                    end += 1;
                }
                let mean = eig.values[start..end].iter().sum::<f64>() / (end - start) as f64;
                let columns = (start..end)
                    .map(|k| {
                        (0..dim)
                            .map(|i| (0..m).map(|a| block.columns[a][i] * eig.vectors.get(a, k)).sum())
                            .collect()
                    })
                    .collect();
                let mut eigenvalues = block.eigenvalues.clone();
                eigenvalues.push(mean);
                refined.push(JointEigenspace { columns, eigenvalues });
                start = end;
            }
        }
        blocks = refined;
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(&[ZERO, ONE, ONE, ZERO]).unwrap()
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    fn ms_spec() -> SpaceSpec {
        SpaceSpec::new([("S", 2), ("O", 3)]).unwrap()
    }

    /// Naive four-index contraction over the S index of a (2,3) layout.
    fn trace_out_s_by_contraction(rho: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(3, |o, p| (0..2).map(|s| rho.get(s * 3 + o, s * 3 + p)).sum())
    }

    fn random_hermitian(dim: usize, seed: &[f64]) -> ComplexMatrix {
        let mut k = 0;
        let mut next = || {
            k += 1;
            seed[k % seed.len()] * (k as f64 * 0.7).sin()
        };
        let m = ComplexMatrix::from_fn(dim, |_, _| c(next(), next()));
        (&m + &m.adjoint()).scale_real(0.5)
    }

    fn hermitian_of_dim(d: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |v| {
            let m = ComplexMatrix::from_fn(d, |i, j| c(v[2 * (i * d + j)], v[2 * (i * d + j) + 1]));
            (&m + &m.adjoint()).scale_real(0.5)
        })
    }

    fn hermitian_strategy(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        (1..=max_dim).prop_flat_map(hermitian_of_dim)
    }

    fn density_strategy() -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-1.0f64..1.0, 72).prop_map(|v| {
            let a = ComplexMatrix::from_fn(6, |i, j| c(v[2 * (i * 6 + j)], v[2 * (i * 6 + j) + 1]));
            let p = &a * &a.adjoint();
            let tr = p.trace().re;
            p.scale_real(1.0 / tr)
        })
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let p = tensor_product(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(p, ComplexMatrix::identity(6));
    }

    #[test]
    fn tensor_of_diagonals() {
        let p = tensor_product(
            &ComplexMatrix::from_real_diagonal(&[1.0, 0.0]),
            &ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0]),
        );
        assert_eq!(p, ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn bit_flip_extension_is_involution() {
        let xi = tensor_product(&pauli_x(), &ComplexMatrix::identity(3));
        // X ⊗ I maps index 3s + o to 3(1-s) + o
        for s in 0..2 {
            for o in 0..3 {
                assert_eq!(xi.get(3 * (1 - s) + o, 3 * s + o), ONE);
            }
        }
        assert!((&xi * &xi).max_abs_diff(&ComplexMatrix::identity(6)) == 0.0);
    }

    #[test]
    fn partial_trace_of_entangled_projector() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = vec![ZERO; 6];
        psi[1] = c(h, 0.0); // |s1 O1>
        psi[5] = c(h, 0.0); // |s2 O2>
        let rho = ComplexMatrix::outer(&psi, &psi).unwrap();
        let r = partial_trace(&rho, &ms_spec(), "O").unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_of_mixture_matches_contraction() {
        let mut rho = ComplexMatrix::zeros(6);
        rho.set(1, 1, c(0.36, 0.0));
        rho.set(5, 5, c(0.64, 0.0));
        let r = partial_trace(&rho, &ms_spec(), "O").unwrap();
        let oracle = trace_out_s_by_contraction(&rho);
        assert!(r.max_abs_diff(&oracle) < 1e-15);
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 0.36, 0.64])) < 1e-15);
    }

    #[test]
    fn partial_trace_keeps_slow_factor() {
        let rs = ComplexMatrix::from_real_diagonal(&[0.25, 0.75]);
        let ro = ComplexMatrix::from_real_diagonal(&[0.5, 0.3, 0.2]);
        let rho = tensor_product(&rs, &ro);
        let kept = partial_trace(&rho, &ms_spec(), "S").unwrap();
        assert!(kept.max_abs_diff(&rs) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = ComplexMatrix::identity(6);
        assert_eq!(
            partial_trace(&rho, &ms_spec(), "E"),
            Err(Error::UnknownLabel("E".into()))
        );
        assert!(matches!(
            partial_trace(&ComplexMatrix::identity(4), &ms_spec(), "O"),
            Err(Error::DimensionMismatch { expected: 6, found: 4 })
        ));
    }

    #[test]
    fn space_spec_validation() {
        let s = ms_spec();
        assert_eq!(s.total_dim(), 6);
        assert!(SpaceSpec::new([("S", 2), ("S", 3)]).is_err());
        assert!(SpaceSpec::new([("S", 0)]).is_err());
    }

    #[test]
    fn hs_inner_examples() {
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(hs_inner(&i3, &i3).unwrap(), c(3.0, 0.0));
        let o1 = ComplexMatrix::unit(3, 1, 1);
        let o2 = ComplexMatrix::unit(3, 2, 2);
        assert_eq!(hs_inner(&o1, &o2).unwrap(), ZERO);
        // Tr(X^dag Z) by hand: X^dag Z = [[0,-1],[1,0]], trace 0
        let xz = &pauli_x().adjoint() * &pauli_z();
        assert_eq!(xz.trace(), ZERO);
        assert_eq!(hs_inner(&pauli_x(), &pauli_z()).unwrap(), ZERO);
        assert!(hs_inner(&i3, &ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn eig_examples() {
        let e = hermitian_eig(&ComplexMatrix::from_real_diagonal(&[2.0, 0.0, 1.0])).unwrap();
        assert_eq!(e.values.len(), 3);
        for (got, want) in e.values.iter().zip([0.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::unit(2, 0, 1);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_reconstructs_six_dim() {
        let a = random_hermitian(6, &[0.3, -1.2, 0.77, 2.1, -0.4]);
        let e = hermitian_eig(&a).unwrap();
        let back = e.map_spectrum(|l| c(l, 0.0));
        assert!(back.max_abs_diff(&a) < 1e-9);
        assert!(e.vectors.is_unitary(1e-9));
    }

    #[test]
    fn exponential_examples() {
        let h = random_hermitian(4, &[1.0, 0.2, -0.5]);
        assert!(unitary_from_hamiltonian(&h, 0.0).unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);

        let h = ComplexMatrix::from_real_diagonal(&[0.0, std::f64::consts::PI]);
        let u = unitary_from_hamiltonian(&h, 1.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, -1.0])) < 1e-15);

        let h = random_hermitian(5, &[0.9, -0.1, 0.45, 1.3]);
        let fwd = unitary_from_hamiltonian(&h, 0.8).unwrap();
        let back = unitary_from_hamiltonian(&h, -0.8).unwrap();
        assert!((&fwd * &back).max_abs_diff(&ComplexMatrix::identity(5)) < 1e-9);
        assert!(fwd.is_unitary(1e-9));
    }

    #[test]
    fn unitary_log_round_trip() {
        let h = random_hermitian(4, &[0.4, -0.9, 0.15, 0.6]);
        let u = unitary_from_hamiltonian(&h, 1.3).unwrap();
        let k = unitary_log(&u).unwrap();
        assert!(k.is_hermitian(1e-12));
        assert!(unitary_from_hamiltonian(&k, 1.0).unwrap().max_abs_diff(&u) < 1e-9);

        let k = unitary_log(&pauli_x()).unwrap();
        let e = hermitian_eig(&k).unwrap();
        assert!(e.values[0].abs() < 1e-12);
        assert!((e.values[1] - std::f64::consts::PI).abs() < 1e-12);

        assert!(unitary_log(&ComplexMatrix::identity(3)).unwrap().max_abs() < 1e-15);
        assert!(matches!(unitary_log(&ComplexMatrix::unit(2, 0, 1)), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn gram_schmidt_examples() {
        let b = gram_schmidt_hs(&[ComplexMatrix::identity(2)]).unwrap();
        assert_eq!(b.len(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(b[0].max_abs_diff(&ComplexMatrix::from_real_diagonal(&[h, h])) < 1e-15);

        let b = gram_schmidt_hs(&[ComplexMatrix::identity(2), ComplexMatrix::identity(2).scale_real(2.0)]).unwrap();
        assert_eq!(b.len(), 1);

        assert!(gram_schmidt_hs(&[]).unwrap().is_empty());
    }

    #[test]
    fn gram_schmidt_spans_all_two_by_two() {
        let x = pauli_x();
        let z = pauli_z();
        let xz = &x * &z;
        let b = gram_schmidt_hs(&[ComplexMatrix::identity(2), x, z, xz]).unwrap();
        assert_eq!(b.len(), 4);
        for (i, e) in b.iter().enumerate() {
            for (j, f) in b.iter().enumerate() {
                let want = if i == j { ONE } else { ZERO };
                assert!((hs_inner(e, f).unwrap() - want).norm() < 1e-12);
            }
        }
        // rank oracle: the 4x4 matrix of flattened entries is nonsingular
        let stacked = DMatrix::from_fn(4, 4, |r, k| b[k].entries()[r]);
        assert!(stacked.determinant().norm() > 1e-6);
    }

    #[test]
    fn joint_eigenspaces_group_degenerate_values() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 2.0]);
        let spaces = joint_eigenspaces(&[a], 3, 1e-8).unwrap();
        assert_eq!(spaces.len(), 2);
        assert_eq!(spaces[0].rank(), 2);
        assert!(spaces[0].projector().max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0])) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eig_reconstruction(a in hermitian_strategy(24)) {
            let e = hermitian_eig(&a).unwrap();
            prop_assert!(e.map_spectrum(|l| c(l, 0.0)).max_abs_diff(&a) < 1e-9);
            prop_assert!(e.vectors.is_unitary(1e-9));
            for k in 0..a.dim() {
                let v = e.vector(k);
                let av = a.apply(&v);
                for i in 0..a.dim() {
                    prop_assert!((av[i] - v[i] * e.values[k]).norm() < 1e-9);
                }
            }
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn evolution_group_law(h in hermitian_strategy(6), s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let us = unitary_from_hamiltonian(&h, s).unwrap();
            let ut = unitary_from_hamiltonian(&h, t).unwrap();
            let ust = unitary_from_hamiltonian(&h, s + t).unwrap();
            prop_assert!((&us * &ut).max_abs_diff(&ust) < 1e-8);
        }

        #[test]
        fn partial_trace_preserves_trace_and_positivity(rho in density_strategy()) {
            let spec = ms_spec();
            for keep in ["S", "O"] {
                let r = partial_trace(&rho, &spec, keep).unwrap();
                prop_assert!((r.trace() - rho.trace()).norm() < 1e-12);
                let e = hermitian_eig(&r).unwrap();
                prop_assert!(e.values[0] >= -1e-10);
            }
            prop_assert!(partial_trace(&rho, &spec, "O").unwrap().max_abs_diff(&trace_out_s_by_contraction(&rho)) < 1e-14);
        }

        #[test]
        fn tensor_then_trace_recovers_factor(a in hermitian_of_dim(2), b in hermitian_of_dim(3)) {
            let spec = ms_spec();
            let p = tensor_product(&a, &b);
            let kept_o = partial_trace(&p, &spec, "O").unwrap();
            prop_assert!(kept_o.max_abs_diff(&b.scale(a.trace())) < 1e-12);
            let kept_s = partial_trace(&p, &spec, "S").unwrap();
            prop_assert!(kept_s.max_abs_diff(&a.scale(b.trace())) < 1e-12);
        }
    }
}
