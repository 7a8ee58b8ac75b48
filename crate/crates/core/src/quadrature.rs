//! Gauss–Hermite quadrature with weight `e^{-y^2}`, built by Golub–Welsch:
//! the nodes are the eigenvalues of the Jacobi matrix with off-diagonal
//! `β_k = √(k/2)`, the weights `√π` times the squared first eigenvector
//! components.
//!
//! A rule of size s integrates `p(y) e^{-y^2}` exactly for polynomials of
//! degree up to 2s-1. All spatial integrals in this crate reduce to that form
//! after a linear substitution.

use crate::linalg::{self, LinalgError};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature rule needs at least one node")]
    ZeroSize,
    #[error("eigensolver failed while building rule: {0}")]
    Eigen(#[from] LinalgError),
}

/// Nodes and weights of a Gauss–Hermite rule.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // ln of each weight, kept so integrands of the form f(y)·e^{c y²} can be
    // summed as exp(ln w + c y²)·f(y) without hitting 0·inf for large rules.
    ln_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_hermite(size: usize) -> Result<Self, QuadratureError> {
        if size == 0 {
            return Err(QuadratureError::ZeroSize);
        }
        let diag = vec![0.0; size];
        let offdiag: Vec<f64> = (1..size).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let (mut nodes, first) = linalg::tridiagonal_eigen_first_components(&diag, &offdiag)?;
        let ln_sqrt_pi = 0.5 * PI.ln();
        let mut ln_weights: Vec<f64> =
            first.iter().map(|v| ln_sqrt_pi + 2.0 * v.abs().ln()).collect();
        let mut weights: Vec<f64> = ln_weights.iter().map(|lw| lw.exp()).collect();

        // The Jacobi matrix is symmetric under y -> -y; enforce that symmetry
        // exactly on the computed rule so parity arguments hold to the bit.
        let n = size;
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[i] - nodes[j]);
            nodes[i] = x;
            nodes[j] = -x;
            let lw = 0.5 * (ln_weights[i] + ln_weights[j]);
            ln_weights[i] = lw;
            ln_weights[j] = lw;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(QuadratureRule { nodes, weights, ln_weights })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i f(y_i)`, approximating `∫ f(y) e^{-y^2} dy`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `Σ exp(ln w_i + c y_i²) f(y_i)`, approximating
    /// `∫ f(y) e^{(c-1) y^2} dy`. Needed when f itself carries a compensating
    /// Gaussian decay (normalized Hermite functions rather than bare
    /// polynomials); the exponent is assembled in log space so extreme nodes
    /// of large rules cannot produce 0·inf.
    pub fn integrate_scaled(&self, c: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&x, &lw)| (lw + c * x * x).exp() * f(x))
            .sum()
    }

    /// The per-node factors `exp(ln w_i + c y_i²)` used by
    /// [`integrate_scaled`](Self::integrate_scaled), for callers that sweep
    /// many integrands over one rule.
    pub fn scaled_weights(&self, c: f64) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&x, &lw)| (lw + c * x * x).exp())
            .collect()
    }
}
