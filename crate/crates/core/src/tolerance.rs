//! Numeric tolerances shared by every module.

/// Input check for Hermiticity and unitarity (max entry of the residual).
pub const STRUCTURE_CHECK: f64 = 1e-10;

/// Post-condition bound on spectral outputs (eigen-relations, unitarity of results).
pub const SPECTRAL_POST: f64 = 1e-9;

/// Normalization and trace checks on states.
pub const STATE: f64 = 1e-10;

/// Residual HS-norm below which an operator is treated as linearly dependent.
pub const LINEAR_DEPENDENCE: f64 = 1e-10;

/// Closure residuals and commutator checks on operator algebras.
pub const ALGEBRA: f64 = 1e-9;

/// Eigenvalue clustering for joint diagonalization.
pub const EIGEN_CLUSTER: f64 = 1e-8;
