//! The quantum-harmonic-oscillator Rayleigh quotient
//! `Q[α] = Σ λ_m α_m² / Σ α_m²` with `λ_m = 2m+1`, its gradient flow, and its
//! Hessian at the Hermite critical points. Every answer is known in closed
//! form, which makes this the scaffold the nonlinear machinery is checked
//! against: critical points are exactly the basis vectors, the flow is
//! monotone in Q, and the constrained Hessian at mode m is diagonal with
//! entries 4(k-m).
//!
//! Coefficients are real here; the quotient restricted to real sequences
//! already exhibits all the structure being exercised.

use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QmhoError {
    #[error("coefficient vector must not be identically zero")]
    ZeroVector,
    #[error("variation direction k = {0} coincides with the critical mode")]
    CriticalModeDirection(usize),
    #[error("step {step} too large: Q increased from {q_before} to {q_after} at step {at}")]
    StepTooLarge { step: f64, q_before: f64, q_after: f64, at: usize },
}

fn lambda(m: usize) -> f64 {
    (2 * m + 1) as f64
}

fn norm_sq(alpha: &[f64]) -> f64 {
    alpha.iter().map(|a| a * a).sum()
}

/// The Rayleigh quotient `Q[α] = Σ λ_m α_m² / Σ α_m²`; always >= λ_0 = 1.
pub fn qmho_functional(alpha: &[f64]) -> Result<f64, QmhoError> {
    let p = norm_sq(alpha);
    if p == 0.0 {
        return Err(QmhoError::ZeroVector);
    }
    let weighted: f64 = alpha.iter().enumerate().map(|(m, a)| lambda(m) * a * a).sum();
    Ok(weighted / p)
}

/// Right-hand side of the gradient flow,
/// `α̇_k = -2 (λ_k - Q[α]) α_k / Σ α_m²`.
/// Vanishes exactly when α is supported on a single mode.
pub fn qmho_gradient_rhs(alpha: &[f64]) -> Result<Vec<f64>, QmhoError> {
    let p = norm_sq(alpha);
    if p == 0.0 {
        return Err(QmhoError::ZeroVector);
    }
    let q = qmho_functional(alpha)?;
    Ok(alpha.iter().enumerate().map(|(k, a)| -2.0 * (lambda(k) - q) * a / p).collect())
}

/// Constrained-Hessian entry at the critical mode m in direction k:
/// diagonal `4(k-m)`, off-diagonal entries vanish by orthonormality.
/// The direction k = m is excluded (it is the constrained-away mode).
pub fn qmho_hessian_diag(m: usize, k: usize) -> Result<f64, QmhoError> {
    if k == m {
        return Err(QmhoError::CriticalModeDirection(k));
    }
    Ok(4.0 * (k as f64 - m as f64))
}

/// One row of a recorded trajectory.
#[derive(Debug, Clone, Copy)]
pub struct QmhoSample {
    pub step: usize,
    pub q: f64,
    pub norm: f64,
    /// First three coefficients, padded with zeros for short vectors.
    pub leading: [f64; 3],
}

fn leading_components(alpha: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (slot, &a) in out.iter_mut().zip(alpha.iter()) {
        *slot = a;
    }
    out
}

/// Explicit-Euler trajectory of the gradient flow with a monotonicity guard.
#[derive(Debug, Clone)]
pub struct QmhoTrajectory {
    pub samples: Vec<QmhoSample>,
    pub final_alpha: Vec<f64>,
}

impl QmhoTrajectory {
    pub fn final_q(&self) -> f64 {
        self.samples.last().expect("trajectory has at least the initial sample").q
    }

    /// CSV dump: step, Q, ‖α‖, leading components.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "step,Q,norm,alpha0,alpha1,alpha2")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                s.step,
                crate::fmt_f64(s.q),
                crate::fmt_f64(s.norm),
                crate::fmt_f64(s.leading[0]),
                crate::fmt_f64(s.leading[1]),
                crate::fmt_f64(s.leading[2])
            )?;
        }
        Ok(())
    }
}

/// Runs explicit Euler on the gradient flow. Q must be non-increasing along
/// the discrete trajectory; any increase means the step exceeded the
/// stability bound and is reported as an error rather than absorbed.
pub fn qmho_flow(alpha0: &[f64], step: f64, n_steps: usize) -> Result<QmhoTrajectory, QmhoError> {
    let mut alpha = alpha0.to_vec();
    let mut q = qmho_functional(&alpha)?;
    let mut samples =
        vec![QmhoSample { step: 0, q, norm: norm_sq(&alpha).sqrt(), leading: leading_components(&alpha) }];
    for i in 1..=n_steps {
        let rhs = qmho_gradient_rhs(&alpha)?;
        for (a, r) in alpha.iter_mut().zip(&rhs) {
            *a += step * r;
        }
        let q_next = qmho_functional(&alpha)?;
        // tiny float jitter near a fixed point is not a stability failure
        if q_next > q + 1e-13 * q.abs().max(1.0) {
            return Err(QmhoError::StepTooLarge { step, q_before: q, q_after: q_next, at: i });
        }
        q = q_next;
        samples.push(QmhoSample {
            step: i,
            q,
            norm: norm_sq(&alpha).sqrt(),
            leading: leading_components(&alpha),
        });
    }
    Ok(QmhoTrajectory { samples, final_alpha: alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn basis(n: usize, len: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        v[n] = 1.0;
        v
    }

    #[test]
    fn functional_examples() {
        assert_eq!(qmho_functional(&basis(0, 4)).unwrap(), 1.0);
        assert_eq!(qmho_functional(&basis(3, 4)).unwrap(), 7.0);
        let mixed = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
        assert_relative_eq!(qmho_functional(&mixed).unwrap(), 2.0, max_relative = 1e-15);
        assert_eq!(qmho_functional(&[0.0, 0.0]), Err(QmhoError::ZeroVector));
    }

    #[test]
    fn functional_scale_invariant() {
        let alpha = [0.3, -1.2, 0.05, 0.9];
        let scaled: Vec<f64> = alpha.iter().map(|a| 2.0 * a).collect();
        assert_relative_eq!(
            qmho_functional(&alpha).unwrap(),
            qmho_functional(&scaled).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn gradient_vanishes_on_basis_vectors() {
        for n in 0..6 {
            let rhs = qmho_gradient_rhs(&basis(n, 6)).unwrap();
            assert!(rhs.iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn gradient_signs_and_scaling() {
        let alpha = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
        let rhs = qmho_gradient_rhs(&alpha).unwrap();
        assert!(rhs[0] > 0.0 && rhs[1] < 0.0);
        // rhs scales like 1/c when α scales like c
        let scaled: Vec<f64> = alpha.iter().map(|a| 2.0 * a).collect();
        let rhs2 = qmho_gradient_rhs(&scaled).unwrap();
        for (r, r2) in rhs.iter().zip(&rhs2) {
            assert_relative_eq!(*r, 2.0 * r2, max_relative = 1e-13);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut state = 0xDEADBEEFCAFEu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let h = 1e-6;
        for _ in 0..100 {
            let alpha: Vec<f64> = (0..5).map(|_| next()).collect();
            if norm_sq(&alpha) < 1e-3 {
                continue;
            }
            let rhs = qmho_gradient_rhs(&alpha).unwrap();
            for k in 0..alpha.len() {
                let mut up = alpha.clone();
                up[k] += h;
                let mut down = alpha.clone();
                down[k] -= h;
                let fd = (qmho_functional(&up).unwrap() - qmho_functional(&down).unwrap())
                    / (2.0 * h);
                assert_abs_diff_eq!(rhs[k], -fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn hessian_diag_values() {
        assert_eq!(qmho_hessian_diag(0, 1).unwrap(), 4.0);
        assert_eq!(qmho_hessian_diag(2, 1).unwrap(), -4.0);
        assert_eq!(qmho_hessian_diag(3, 3), Err(QmhoError::CriticalModeDirection(3)));
    }

    #[test]
    fn hessian_negative_count_matches_mode() {
        // at mode m the directions k = 0..m-1 are exactly the negative ones
        for m in 0..8usize {
            let negatives = (0..12)
                .filter(|&k| k != m)
                .filter(|&k| qmho_hessian_diag(m, k).unwrap() < 0.0)
                .count();
            assert_eq!(negatives, m);
        }
    }

    #[test]
    fn flow_stationary_at_ground_state() {
        let traj = qmho_flow(&basis(0, 4), 1e-2, 50).unwrap();
        assert_eq!(traj.final_q(), 1.0);
        assert_eq!(traj.final_alpha, basis(0, 4));
    }

    #[test]
    fn flow_converges_to_ground_state() {
        let alpha0 = {
            let mut v = vec![1.0, 0.1, 0.1];
            let n = norm_sq(&v).sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            v
        };
        let traj = qmho_flow(&alpha0, 1e-2, 30_000).unwrap();
        assert_abs_diff_eq!(traj.final_q(), 1.0, epsilon = 1e-6);
        // Q decreases monotonically along the whole trajectory
        for pair in traj.samples.windows(2) {
            assert!(pair[1].q <= pair[0].q + 1e-13);
        }
    }

    #[test]
    fn flow_preserves_mode_support() {
        let mut alpha0 = vec![0.0; 8];
        alpha0[0] = 0.7;
        alpha0[1] = 0.4;
        alpha0[2] = -0.2;
        alpha0[3] = 0.5;
        let traj = qmho_flow(&alpha0, 5e-3, 2000).unwrap();
        for k in 4..8 {
            assert_eq!(traj.final_alpha[k], 0.0);
        }
    }

    #[test]
    fn oversized_step_detected() {
        // one huge Euler step throws the small mode-1 component across zero
        // and lands at larger Q
        let alpha0 = [1.0, 0.01];
        let err = qmho_flow(&alpha0, 60.0, 100).unwrap_err();
        assert!(matches!(err, QmhoError::StepTooLarge { .. }));
    }
}
