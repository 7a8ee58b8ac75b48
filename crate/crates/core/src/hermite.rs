//! Hermite polynomials (physicists' convention, `H_2(x) = 4x^2 - 2`),
//! orthonormal Hermite functions `f_n = c_n H_n e^{-x^2/2}`, and the handful
//! of identities the rest of the crate is built on: the scaling expansion of
//! `H_n(γx)`, the derivative identity for `f_n'`, and the diagonal action of
//! the free Schrödinger evolution.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

/// Largest mode number accepted by default. High enough for the big-n
/// inequality sweeps' cross-checks; low enough to keep factorial-growth
/// quantities inside f64 log space.
pub const DEFAULT_ORDER_CAP: usize = 4096;

#[derive(Debug, Error, PartialEq)]
pub enum HermiteError {
    #[error("Hermite order {order} exceeds cap {cap}")]
    OrderAboveCap { order: usize, cap: usize },
    #[error("normalization constant for order {0} is not representable in f64")]
    NormalizationOutOfRange(usize),
    #[error("scaling factor gamma must be nonzero")]
    ZeroGamma,
}

/// A validated Hermite mode number (polynomial degree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HermiteOrder(usize);

impl HermiteOrder {
    pub fn new(n: usize) -> Result<Self, HermiteError> {
        Self::with_cap(n, DEFAULT_ORDER_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self, HermiteError> {
        if n > cap {
            Err(HermiteError::OrderAboveCap { order: n, cap })
        } else {
            Ok(HermiteOrder(n))
        }
    }

    /// Constructor for orders that are already bounded by a table or
    /// truncation invariant elsewhere in the crate.
    pub(crate) fn trusted(n: usize) -> Self {
        debug_assert!(n <= DEFAULT_ORDER_CAP);
        HermiteOrder(n)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for HermiteOrder {
    type Error = HermiteError;
    fn try_from(n: usize) -> Result<Self, HermiteError> {
        HermiteOrder::new(n)
    }
}

/// Evaluates `H_n(x)` by the forward recurrence
/// `H_{n+1} = 2x H_n - 2n H_{n-1}`.
pub fn hermite_poly_eval(n: HermiteOrder, x: f64) -> f64 {
    let n = n.get();
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * (k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Log of the normalization constant `c_n = (√π 2^n n!)^{-1/2}`.
/// The `ln n!` sum is compensated so that exp() of the result stays within a
/// few ulp even at large n.
pub fn ln_normalization_c(n: HermiteOrder) -> f64 {
    let n = n.get();
    let mut ln_factorial = 0.0;
    let mut carry = 0.0;
    for k in 2..=n {
        let term = (k as f64).ln() - carry;
        let next = ln_factorial + term;
        carry = (next - ln_factorial) - term;
        ln_factorial = next;
    }
    -0.5 * (0.5 * PI.ln() + n as f64 * std::f64::consts::LN_2 + ln_factorial)
}

/// The normalization constant `c_n` making `∫ f_n f_m = δ_{nm}`.
///
/// While n! is representable (n <= 170) the value is formed directly as
/// `(π^{1/4} 2^{n/2} √(n!))^{-1}`, which keeps the 1e-14 invariant on
/// `c_n² √π 2^n n!`; past the factorial overflow point it switches to log
/// space. Fails only when even the log-space exponent leaves f64 range.
pub fn normalization_c(n: HermiteOrder) -> Result<f64, HermiteError> {
    let nv = n.get();
    if nv <= 170 {
        let mut factorial = 1.0f64;
        for k in 2..=nv {
            factorial *= k as f64;
        }
        return Ok((PI.powf(0.25) * 2f64.powf(nv as f64 / 2.0) * factorial.sqrt()).recip());
    }
    let ln_c = ln_normalization_c(n);
    // exp() underflows below about -745; treat that as a cap breach rather
    // than silently returning 0.
    if !(-745.0..=709.0).contains(&ln_c) {
        return Err(HermiteError::NormalizationOutOfRange(n.get()));
    }
    Ok(ln_c.exp())
}

/// Evaluates the orthonormal Hermite function `f_n(x) = c_n H_n(x) e^{-x^2/2}`.
///
/// Uses the recurrence on the normalized functions themselves,
/// `f_{n+1} = x √(2/(n+1)) f_n - √(n/(n+1)) f_{n-1}`,
/// which never forms the huge `H_n` and tiny `c_n` separately.
pub fn hermite_fn_eval(n: HermiteOrder, x: f64) -> f64 {
    let n = n.get();
    let f0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n == 0 {
        return f0;
    }
    let mut prev = f0;
    let mut cur = std::f64::consts::SQRT_2 * x * f0;
    for k in 1..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out` with `f_0(x), ..., f_{n_max}(x)` in one recurrence pass.
/// This is the hot path of every quadrature in the crate.
pub fn hermite_fn_column(n_max: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(n_max + 1);
    let f0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(f0);
    if n_max == 0 {
        return;
    }
    out.push(std::f64::consts::SQRT_2 * x * f0);
    for k in 1..n_max {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
}

/// Expansion of a rescaled Hermite polynomial over unscaled ones:
/// `H_n(γx) = Σ_i γ^{n-2i} (γ²-1)^i C(n,2i) (2i)!/i! · H_{n-2i}(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleExpansion {
    pub order: usize,
    pub gamma: f64,
    /// Map from degree `n - 2i` to the coefficient of `H_{n-2i}`.
    pub coefficients: BTreeMap<usize, f64>,
}

impl ScaleExpansion {
    /// Evaluates `Σ coeff · H_k(x)`; should reproduce `H_n(γx)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .map(|(&k, &c)| c * hermite_poly_eval(HermiteOrder::trusted(k), x))
            .sum()
    }
}

/// Builds the `H_n(γx)` expansion. The coefficient of `H_{n-2i}` is
/// `γ^{n-2i} (γ²-1)^i C(n,2i) (2i)!/i!`.
pub fn scale_expand(n: HermiteOrder, gamma: f64) -> Result<ScaleExpansion, HermiteError> {
    if gamma == 0.0 {
        return Err(HermiteError::ZeroGamma);
    }
    let n = n.get();
    let shift = gamma * gamma - 1.0;
    let mut coefficients = BTreeMap::new();
    // term(i) = C(n,2i) (2i)!/i!, grown multiplicatively:
    // term(i+1)/term(i) = (n-2i)(n-2i-1) / (i+1).
    let mut term = 1.0f64;
    for i in 0..=(n / 2) {
        let degree = n - 2 * i;
        coefficients.insert(degree, gamma.powi(degree as i32) * shift.powi(i as i32) * term);
        if degree >= 2 {
            term *= (degree * (degree - 1)) as f64 / (i + 1) as f64;
        }
    }
    Ok(ScaleExpansion { order: n, gamma, coefficients })
}

/// Coefficients `(√(m/2), -√((m+1)/2))` in the derivative identity
/// `f_m' = √(m/2) f_{m-1} - √((m+1)/2) f_{m+1}`.
pub fn derivative_coeffs(m: HermiteOrder) -> (f64, f64) {
    let m = m.get() as f64;
    ((m / 2.0).sqrt(), -((m + 1.0) / 2.0).sqrt())
}

/// The scalar multiplying mode `n` under the free evolution in dimension `d`:
/// `(1+2it)^{-d/2} ((1-2it)/(1+2it))^{n/2}`, where in dimension d the exponent
/// n is the total degree |k| of the tensor mode.
///
/// Computed in polar form, `(1+4t²)^{-d/4} e^{-i(d/2 + n) atan(2t)}`, which is
/// continuous in t (a principal-branch power would jump for odd n).
pub fn free_evolution_coeff(n: HermiteOrder, t: f64, d: u32) -> Complex64 {
    let n = n.get() as f64;
    let d = f64::from(d);
    let theta = (2.0 * t).atan();
    let modulus = (1.0 + 4.0 * t * t).powf(-d / 4.0);
    Complex64::from_polar(modulus, -(d / 2.0 + n) * theta)
}
