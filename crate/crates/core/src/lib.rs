//! Hermite-basis numerics for the space-time L^q functional of the free
//! Schrödinger evolution (the quantity whose supremum is the sharp Strichartz
//! constant).
//!
//! Everything is expanded over the orthonormal Hermite functions
//! `f_n = c_n H_n(x) e^{-x^2/2}`, where the free evolution acts diagonally up
//! to a phase and a rescaling. In that basis the functional becomes a resonant
//! six-fold sum over Gaussian-weighted Hermite integrals, and its critical
//! points, gradient/Hamiltonian flows, and Hessian spectra become finite
//! numerical objects.
//!
//! Module map:
//!
//! * [`hermite`] — Hermite polynomials, normalized Hermite functions, and the
//!   algebraic identities (scaling, derivative, free evolution) everything
//!   else consumes.
//! * [`linalg`] — multi-index encoding, dense/sparse symmetric matrices, and a
//!   symmetric eigensolver (Householder + implicit-shift QL, Jacobi fallback).
//! * [`quadrature`] — Gauss–Hermite rules built by Golub–Welsch.
//! * [`integrals`] — the Gaussian-weighted Hermite integrals: pair integrals
//!   G(m,n,q), six-fold Λ coefficients and their cached table, the 1d Hessian
//!   integrals I₁/I₂, and the d-dimensional I⁻.
//! * [`qmho`] — the exactly solvable harmonic-oscillator Rayleigh quotient
//!   used as a test scaffold with closed-form answers.
//! * [`flows`] — the functional S[α] on truncated coefficient vectors, its
//!   gradient and Hamiltonian flows, symmetry maps, and a direct space-time
//!   quadrature oracle.
//! * [`hessian`] — constrained Hessians at the Hermite critical points: the 1d
//!   block-plus-tail form at mode m and the sparse d-dimensional matrix at the
//!   Gaussian, with spectra and symmetry zero-mode checks.
//! * [`inequality`] — exact big-integer verification of the 1d binomial-sum
//!   inequality and numerical column-sum checks in dimension d.

pub mod flows;
pub mod hermite;
pub mod hessian;
pub mod inequality;
pub mod integrals;
pub mod linalg;
pub mod qmho;
pub mod quadrature;

/// Formats a float with 17 significant digits, enough to round-trip f64.
/// All CSV output goes through this so that golden files are bit-stable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
