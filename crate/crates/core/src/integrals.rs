//! Gaussian-weighted Hermite integrals.
//!
//! Everything here reduces to `∫ p(ξ) e^{-aξ²} dξ` for a polynomial p, so two
//! independent evaluation routes exist:
//!
//! * the default quadrature route — substitute so the weight becomes `e^{-y²}`
//!   and apply a Gauss–Hermite rule large enough to be exact;
//! * the [`exact`] route — linearize the Hermite product into a single-H
//!   expansion with big-integer coefficients and integrate term by term with
//!   exact rational moments.
//!
//! The quadrature route is what the rest of the crate calls; the exact route
//! is the anti-bug control the tests hold it against.
//!
//! Integral inventory: the resonance time integral, the pair integrals
//! G(m,n,q), the six-fold Λ coefficients with their cached [`LambdaTable`],
//! the 1d Hessian integrals I₁/I₂ (time factor π/2 folded in), and the
//! d-dimensional I⁻.

use crate::hermite::{self, HermiteError, HermiteOrder};
use crate::linalg::MultiIndex;
use crate::quadrature::{QuadratureError, QuadratureRule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Read, Write};
use thiserror::Error;

/// Largest Λ-table order accepted by default (gradient cost grows like N^5).
pub const DEFAULT_LAMBDA_ORDER_CAP: usize = 16;

pub const LAMBDA_TABLE_SCHEMA_VERSION: u32 = 1;

/// Identifies the basis and weight the stored Λ values assume: physicists'
/// Hermite polynomials and spatial weight `e^{-3ξ²}`.
pub const LAMBDA_CONVENTION: &str = "hermite-phys/exp(-3xi^2)/v1";

/// Global constant multiplying the bare resonant Λ-sum in the functional's
/// numerator. Fixed by matching the sum against direct space-time quadrature
/// of `∬ |e^{it∂²}f|⁶` (each resonant tuple picks up the time integral at
/// r = 0, which is π/2).
pub const NUMERATOR_CONSTANT: f64 = FRAC_PI_2;

#[derive(Debug, Error)]
pub enum IntegralsError {
    #[error("lambda table order {requested} exceeds cap {cap}")]
    LambdaOrderCap { requested: usize, cap: usize },
    #[error("multi-indices have different dimensions: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error(transparent)]
    Hermite(#[from] HermiteError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("lambda table I/O: {0}")]
    TableIo(#[from] io::Error),
    #[error("lambda table format: {0}")]
    TableFormat(String),
}

/// The exponent `q = 2 + 4/d` of the space-time norm in dimension d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentQ {
    d: u32,
}

impl ExponentQ {
    pub fn from_dimension(d: u32) -> Result<Self, IntegralsError> {
        if d == 0 {
            return Err(IntegralsError::ZeroDimension);
        }
        Ok(ExponentQ { d })
    }

    pub fn dimension(self) -> u32 {
        self.d
    }

    pub fn q(self) -> f64 {
        2.0 + 4.0 / f64::from(self.d)
    }
}

/// `∫ dT/(1+4T²) ((1-2iT)/(1+2iT))^r`: equals `π/2` at r = 0 and
/// `sin(rπ)/(2r)` otherwise — in particular it vanishes at every nonzero
/// integer r, which is what collapses the six-fold sum onto resonant tuples.
pub fn time_integral(r: f64) -> f64 {
    if r.abs() < 1e-14 {
        FRAC_PI_2
    } else {
        (r * PI).sin() / (2.0 * r)
    }
}

/// Pair integral `G(m,n,q) = c_m c_n ∫ e^{-qx²/2} H_m(x) H_n(x) dx`.
/// Exactly 0 for odd `m+n` (parity short-circuit, no quadrature).
pub fn weighted_pair_integral(m: HermiteOrder, n: HermiteOrder, q: ExponentQ) -> f64 {
    let (m, n) = (m.get(), n.get());
    if (m + n) % 2 == 1 {
        return 0.0;
    }
    let rule = QuadratureRule::gauss_hermite((m + n) / 2 + 2).expect("nonzero rule size");
    pair_integral_with_rule(m, n, q.q(), &rule)
}

/// Same integrand evaluated with a caller-supplied rule (must be exact for
/// degree `m + n`). The substitution is `x = √(2/q) y`; the normalized
/// Hermite recurrence plus a log-space `e^{(2/q)y²}` compensation keeps every
/// node finite at any order.
fn pair_integral_with_rule(m: usize, n: usize, q: f64, rule: &QuadratureRule) -> f64 {
    if (m + n) % 2 == 1 {
        return 0.0;
    }
    let scale = (2.0 / q).sqrt();
    let mut col = Vec::new();
    let max_order = m.max(n);
    let sum = rule.integrate_scaled(2.0 / q, |y| {
        hermite::hermite_fn_column(max_order, scale * y, &mut col);
        col[m] * col[n]
    });
    scale * sum
}

/// Six-fold coefficient
/// `Λ = c_{n₁}···c_{n₆} ∫ H_{n₁}···H_{n₆}(ξ) e^{-3ξ²} dξ`,
/// equivalently `∫ f_{n₁}(ξ)···f_{n₆}(ξ) dξ`. Exactly 0 when `Σ nᵢ` is odd.
pub fn lambda6(modes: [HermiteOrder; 6]) -> f64 {
    let raw = [
        modes[0].get(),
        modes[1].get(),
        modes[2].get(),
        modes[3].get(),
        modes[4].get(),
        modes[5].get(),
    ];
    let total: usize = raw.iter().sum();
    if total % 2 == 1 {
        return 0.0;
    }
    let rule = QuadratureRule::gauss_hermite(total / 2 + 2).expect("nonzero rule size");
    lambda6_with_rule(&raw, &rule)
}

fn lambda6_with_rule(modes: &[usize; 6], rule: &QuadratureRule) -> f64 {
    let total: usize = modes.iter().sum();
    if total % 2 == 1 {
        return 0.0;
    }
    let max_order = *modes.iter().max().expect("six modes");
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    let mut col = Vec::new();
    let sum = rule.integrate_scaled(1.0, |y| {
        hermite::hermite_fn_column(max_order, y * inv_sqrt3, &mut col);
        modes.iter().map(|&n| col[n]).product::<f64>()
    });
    inv_sqrt3 * sum
}

/// `I₁(k,l,m) = δ_{kl} (π/2) c_m⁴ c_k c_l ∫ H_m⁴ H_k H_l e^{-3ξ²} dξ`,
/// the diagonal Hessian integral at mode m with the time factor π/2 folded in.
pub fn hessian_integral_i1(k: HermiteOrder, l: HermiteOrder, m: HermiteOrder) -> f64 {
    if k != l {
        return 0.0;
    }
    FRAC_PI_2 * lambda6([m, m, m, m, k, l])
}

/// `I₂(k,l,m) = (π/2) c_m⁴ c_k c_l ∫ H_m⁴ H_k H_l e^{-3ξ²} dξ` when
/// `k + l = 2m` (the resonance surviving the time integral), else exactly 0.
pub fn hessian_integral_i2(k: HermiteOrder, l: HermiteOrder, m: HermiteOrder) -> f64 {
    if k.get() + l.get() != 2 * m.get() {
        return 0.0;
    }
    FRAC_PI_2 * lambda6([m, m, m, m, k, l])
}

/// d-dimensional Hessian integral at the Gaussian:
/// `I⁻(k,l,q) = (π/2) c₀^{qd} c_k c_l / c₀^{2d} ∏_j ∫ e^{-qξ²/2} H_{k_j} H_{l_j} dξ`
/// when `|k| = |l|` and every coordinate pair shares parity; 0 otherwise.
pub fn hessian_integral_iminus(
    k: &MultiIndex,
    l: &MultiIndex,
    q: ExponentQ,
) -> Result<f64, IntegralsError> {
    if k.dim() != l.dim() {
        return Err(IntegralsError::DimensionMismatch(k.dim(), l.dim()));
    }
    if k.total() != l.total() {
        return Ok(0.0);
    }
    let d = k.dim() as f64;
    let qv = q.q();
    // c₀^{qd} / c₀^{2d} = π^{-(q-2)d/4}
    let prefactor = FRAC_PI_2 * PI.powf(-(qv - 2.0) * d / 4.0);
    let mut product = 1.0;
    for (&kj, &lj) in k.entries().iter().zip(l.entries()) {
        if (kj + lj) % 2 == 1 {
            return Ok(0.0);
        }
        product *=
            weighted_pair_integral(HermiteOrder::trusted(kj), HermiteOrder::trusted(lj), q);
    }
    Ok(prefactor * product)
}

/// Cache of `G(m,n,q)` for all `m, n <= n_max`, built with a single rule
/// exact at the top degree.
#[derive(Debug, Clone)]
pub struct GTable {
    n_max: usize,
    q: ExponentQ,
    values: Vec<f64>,
}

impl GTable {
    pub fn build(n_max: usize, q: ExponentQ) -> Result<Self, IntegralsError> {
        let rule = QuadratureRule::gauss_hermite(n_max + 2)?;
        let size = n_max + 1;
        let mut values = vec![0.0; size * size];
        for m in 0..size {
            for n in m..size {
                let v = pair_integral_with_rule(m, n, q.q(), &rule);
                values[m * size + n] = v;
                values[n * size + m] = v;
            }
        }
        Ok(GTable { n_max, q, values })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn q(&self) -> ExponentQ {
        self.q
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        assert!(m <= self.n_max && n <= self.n_max, "GTable order out of range");
        self.values[m * (self.n_max + 1) + n]
    }
}

/// Sorts each triple and orders the two triples lexicographically; Λ is
/// invariant under exactly these rearrangements of a resonant tuple.
pub fn canonical_tuple(t: &[usize; 6]) -> [usize; 6] {
    let mut a = [t[0], t[1], t[2]];
    let mut b = [t[3], t[4], t[5]];
    a.sort_unstable();
    b.sort_unstable();
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    [a[0], a[1], a[2], b[0], b[1], b[2]]
}

/// Whether `n₁+n₂+n₃ = n₄+n₅+n₆` — the tuples surviving the time integral.
pub fn is_resonant(t: &[usize; 6]) -> bool {
    t[0] + t[1] + t[2] == t[3] + t[4] + t[5]
}

/// Cached map from resonant 6-tuples with all modes `<= max_order` to Λ.
/// Only canonical representatives are stored; lookups canonicalize first.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    max_order: usize,
    numerator_constant: f64,
    entries: BTreeMap<[u16; 6], f64>,
}

#[derive(Serialize, Deserialize)]
struct LambdaTableFile {
    schema_version: u32,
    convention: String,
    max_order: usize,
    numerator_constant: f64,
    entries: Vec<LambdaEntryFile>,
}

#[derive(Serialize, Deserialize)]
struct LambdaEntryFile {
    modes: [u16; 6],
    value: f64,
}

impl LambdaTable {
    /// Computes every resonant tuple with modes `<= n_max`, one quadrature per
    /// canonical representative (72-fold symmetry), in parallel.
    pub fn build(n_max: usize) -> Result<Self, IntegralsError> {
        Self::build_with_cap(n_max, DEFAULT_LAMBDA_ORDER_CAP)
    }

    pub fn build_with_cap(n_max: usize, cap: usize) -> Result<Self, IntegralsError> {
        if n_max > cap {
            return Err(IntegralsError::LambdaOrderCap { requested: n_max, cap });
        }
        let rule = QuadratureRule::gauss_hermite(3 * n_max + 2)?;
        // per-node columns f_0..f_{n_max}(y/√3), shared read-only by all tuples
        let inv_sqrt3 = 1.0 / 3f64.sqrt();
        let columns: Vec<Vec<f64>> = rule
            .nodes()
            .iter()
            .map(|&y| {
                let mut col = Vec::new();
                hermite::hermite_fn_column(n_max, y * inv_sqrt3, &mut col);
                col
            })
            .collect();

        let mut pairs: Vec<[u16; 6]> = Vec::new();
        for k in 0..=(3 * n_max) {
            let triples = sorted_triples_with_sum(k, n_max);
            for (i, a) in triples.iter().enumerate() {
                for b in &triples[i..] {
                    pairs.push([
                        a[0] as u16,
                        a[1] as u16,
                        a[2] as u16,
                        b[0] as u16,
                        b[1] as u16,
                        b[2] as u16,
                    ]);
                }
            }
        }

        let scaled = rule.scaled_weights(1.0);
        let computed: Vec<([u16; 6], f64)> = pairs
            .par_iter()
            .map(|key| {
                let value = columns
                    .iter()
                    .zip(&scaled)
                    .map(|(col, &w)| w * key.iter().map(|&n| col[n as usize]).product::<f64>())
                    .sum::<f64>()
                    * inv_sqrt3;
                (*key, value)
            })
            .collect();

        let entries: BTreeMap<[u16; 6], f64> = computed.into_iter().collect();
        Ok(LambdaTable { max_order: n_max, numerator_constant: NUMERATOR_CONSTANT, entries })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// The constant multiplying the Λ-sum in the functional's numerator.
    pub fn numerator_constant(&self) -> f64 {
        self.numerator_constant
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Λ for a resonant tuple (any ordering); `None` if a mode exceeds the
    /// table order or the tuple is not resonant.
    pub fn get(&self, tuple: &[usize; 6]) -> Option<f64> {
        if !is_resonant(tuple) || tuple.iter().any(|&n| n > self.max_order) {
            return None;
        }
        let c = canonical_tuple(tuple);
        let key = [c[0] as u16, c[1] as u16, c[2] as u16, c[3] as u16, c[4] as u16, c[5] as u16];
        self.entries.get(&key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([usize; 6], f64)> + '_ {
        self.entries.iter().map(|(k, &v)| {
            (
                [
                    k[0] as usize,
                    k[1] as usize,
                    k[2] as usize,
                    k[3] as usize,
                    k[4] as usize,
                    k[5] as usize,
                ],
                v,
            )
        })
    }

    pub fn write_json(&self, w: &mut impl Write) -> Result<(), IntegralsError> {
        let file = LambdaTableFile {
            schema_version: LAMBDA_TABLE_SCHEMA_VERSION,
            convention: LAMBDA_CONVENTION.to_string(),
            max_order: self.max_order,
            numerator_constant: self.numerator_constant,
            entries: self
                .entries
                .iter()
                .map(|(&modes, &value)| LambdaEntryFile { modes, value })
                .collect(),
        };
        serde_json::to_writer_pretty(&mut *w, &file)
            .map_err(|e| IntegralsError::TableFormat(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read_json(r: &mut impl Read) -> Result<Self, IntegralsError> {
        let mut buf = String::new();
        r.read_to_string(&mut buf)?;
        Self::from_json_str(&buf)
    }

    pub fn from_json_str(s: &str) -> Result<Self, IntegralsError> {
        let file: LambdaTableFile =
            serde_json::from_str(s).map_err(|e| IntegralsError::TableFormat(e.to_string()))?;
        if file.schema_version != LAMBDA_TABLE_SCHEMA_VERSION {
            return Err(IntegralsError::TableFormat(format!(
                "unsupported schema version {}",
                file.schema_version
            )));
        }
        if file.convention != LAMBDA_CONVENTION {
            return Err(IntegralsError::TableFormat(format!(
                "convention mismatch: file has {:?}, expected {LAMBDA_CONVENTION:?}",
                file.convention
            )));
        }
        if (file.numerator_constant - NUMERATOR_CONSTANT).abs() > 1e-12 {
            return Err(IntegralsError::TableFormat(format!(
                "numerator constant mismatch: file has {}",
                file.numerator_constant
            )));
        }
        let mut entries = BTreeMap::new();
        for e in file.entries {
            let t = [
                e.modes[0] as usize,
                e.modes[1] as usize,
                e.modes[2] as usize,
                e.modes[3] as usize,
                e.modes[4] as usize,
                e.modes[5] as usize,
            ];
            if !is_resonant(&t) || t.iter().any(|&n| n > file.max_order) {
                return Err(IntegralsError::TableFormat(format!(
                    "entry {t:?} is not a resonant tuple within order {}",
                    file.max_order
                )));
            }
            if canonical_tuple(&t) != t {
                return Err(IntegralsError::TableFormat(format!(
                    "entry {t:?} is not in canonical order"
                )));
            }
            entries.insert(e.modes, e.value);
        }
        Ok(LambdaTable {
            max_order: file.max_order,
            numerator_constant: file.numerator_constant,
            entries,
        })
    }
}

/// All `(a,b,c)` with `a <= b <= c <= n_max` and `a+b+c = sum`.
fn sorted_triples_with_sum(sum: usize, n_max: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..=n_max.min(sum / 3) {
        let rest = sum - a;
        for b in a..=n_max.min(rest / 2) {
            let c = rest - b;
            if c >= b && c <= n_max {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Exact evaluation route: Hermite product linearization with big-integer
/// coefficients, integrated term by term against exact rational Gaussian
/// moments. Independent of the quadrature path in every step.
pub mod exact {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    /// Expands `∏ H_{orders[i]}` as `Σ_k coeff_k H_k` using the pairwise
    /// linearization `H_a H_b = Σ_j C(a,j) C(b,j) j! 2^j H_{a+b-2j}`.
    fn product_expansion(orders: &[usize]) -> BTreeMap<usize, BigInt> {
        let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
        acc.insert(orders[0], BigInt::one());
        for &b in &orders[1..] {
            let mut next: BTreeMap<usize, BigInt> = BTreeMap::new();
            for (&a, coeff) in &acc {
                let mut j_factor = BigInt::one(); // C(a,j) C(b,j) j! 2^j
                for j in 0..=a.min(b) {
                    if j > 0 {
                        // ratio from j-1 to j: (a-j+1)(b-j+1) * 2 / j
                        j_factor = j_factor * BigInt::from(a - j + 1) * BigInt::from(b - j + 1)
                            * BigInt::from(2)
                            / BigInt::from(j);
                    }
                    let entry = next.entry(a + b - 2 * j).or_insert_with(BigInt::zero);
                    *entry += coeff * &j_factor;
                }
            }
            acc = next;
        }
        acc
    }

    /// Rational part of `∫ H_k(x) e^{-a x²} dx = √(π/a) · k!/(k/2)! · ((1-a)/a)^{k/2}`
    /// (zero for odd k).
    fn moment_ratio(k: usize, a: &BigRational) -> BigRational {
        if k % 2 == 1 {
            return BigRational::zero();
        }
        let i = k / 2;
        let ratio = (BigRational::one() - a) / a;
        let mut acc = BigRational::one();
        // k!/(k/2)! = (i+1)(i+2)...(2i)
        for m in (i + 1)..=(2 * i) {
            acc *= BigRational::from(BigInt::from(m));
        }
        acc * pow_rational(&ratio, i)
    }

    fn pow_rational(r: &BigRational, mut e: usize) -> BigRational {
        let mut base = r.clone();
        let mut acc = BigRational::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    fn ln_c_product(orders: &[usize]) -> f64 {
        orders.iter().map(|&n| hermite::ln_normalization_c(HermiteOrder::trusted(n))).sum()
    }

    /// Exact-route Λ coefficient (weight `e^{-3ξ²}`, six normalizations).
    pub fn lambda6(modes: &[usize; 6]) -> f64 {
        let a = BigRational::from(BigInt::from(3));
        let expansion = product_expansion(modes);
        let mut sum = BigRational::zero();
        for (k, coeff) in &expansion {
            sum += BigRational::from(coeff.clone()) * moment_ratio(*k, &a);
        }
        let magnitude = (ln_c_product(modes) + (PI / 3.0).ln() * 0.5).exp();
        signed_to_f64(&sum) * magnitude
    }

    /// Exact-route pair integral `G(m,n,q)` for `q = 2 + 4/d`.
    pub fn pair_integral(m: usize, n: usize, q: ExponentQ) -> f64 {
        let d = q.dimension() as i64;
        // a = q/2 = (d+2)/d
        let a = BigRational::new(BigInt::from(d + 2), BigInt::from(d));
        let expansion = product_expansion(&[m, n]);
        let mut sum = BigRational::zero();
        for (k, coeff) in &expansion {
            sum += BigRational::from(coeff.clone()) * moment_ratio(*k, &a);
        }
        let sqrt_pi_over_a = (PI * d as f64 / (d as f64 + 2.0)).sqrt();
        let magnitude = (ln_c_product(&[m, n])).exp() * sqrt_pi_over_a;
        signed_to_f64(&sum) * magnitude
    }

    /// Exact-route I₁ (time factor π/2 included).
    pub fn hessian_integral_i1(k: usize, l: usize, m: usize) -> f64 {
        if k != l {
            return 0.0;
        }
        FRAC_PI_2 * lambda6(&[m, m, m, m, k, l])
    }

    /// Exact-route I₂ (time factor π/2 included).
    pub fn hessian_integral_i2(k: usize, l: usize, m: usize) -> f64 {
        if k + l != 2 * m {
            return 0.0;
        }
        FRAC_PI_2 * lambda6(&[m, m, m, m, k, l])
    }

    fn signed_to_f64(r: &BigRational) -> f64 {
        // Ratio::to_f64 is exact-rounded even for huge terms
        r.to_f64().unwrap_or_else(|| {
            if r.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ord(n: usize) -> HermiteOrder {
        HermiteOrder::new(n).unwrap()
    }

    #[test]
    fn time_integral_values() {
        assert_eq!(time_integral(0.0), FRAC_PI_2);
        assert_abs_diff_eq!(time_integral(2.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(time_integral(0.5), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn time_integral_vanishes_at_nonzero_integers() {
        for r in 1..=50 {
            assert_abs_diff_eq!(time_integral(r as f64), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(time_integral(-(r as f64)), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn pair_integral_closed_forms() {
        let q6 = ExponentQ::from_dimension(1).unwrap();
        assert_relative_eq!(
            weighted_pair_integral(ord(0), ord(0), q6),
            1.0 / 3f64.sqrt(),
            max_relative = 1e-13
        );
        assert_eq!(weighted_pair_integral(ord(0), ord(1), q6), 0.0);
        assert_relative_eq!(
            weighted_pair_integral(ord(1), ord(1), q6),
            1.0 / (3.0 * 3f64.sqrt()),
            max_relative = 1e-13
        );
    }

    #[test]
    fn pair_integral_matches_exact_route() {
        for d in [1u32, 2, 3] {
            let q = ExponentQ::from_dimension(d).unwrap();
            for m in 0..=12 {
                for n in 0..=12 {
                    let quad = weighted_pair_integral(ord(m), ord(n), q);
                    let oracle = exact::pair_integral(m, n, q);
                    if oracle == 0.0 {
                        assert_eq!(quad, 0.0, "G({m},{n}) parity");
                    } else {
                        assert_relative_eq!(quad, oracle, max_relative = 1e-11);
                    }
                }
            }
        }
        // total degree 40, the top of the cross-validated range
        let q6 = ExponentQ::from_dimension(1).unwrap();
        assert_relative_eq!(
            weighted_pair_integral(ord(20), ord(20), q6),
            exact::pair_integral(20, 20, q6),
            max_relative = 1e-11
        );
        assert_relative_eq!(
            weighted_pair_integral(ord(25), ord(15), q6),
            exact::pair_integral(25, 15, q6),
            max_relative = 1e-11
        );
    }

    #[test]
    fn lambda6_closed_form_and_parity() {
        let v = lambda6([ord(0); 6]);
        assert_relative_eq!(v, 1.0 / (PI * 3f64.sqrt()), max_relative = 1e-13);
        assert_eq!(lambda6([ord(1), ord(0), ord(0), ord(0), ord(0), ord(0)]), 0.0);
    }

    #[test]
    fn lambda6_matches_exact_route() {
        let tuples: [[usize; 6]; 7] = [
            [2, 0, 0, 1, 1, 0],
            [1, 1, 1, 1, 1, 1],
            [3, 2, 1, 4, 1, 1],
            [5, 5, 0, 4, 4, 2],
            [8, 6, 2, 7, 5, 4],
            [2, 2, 2, 6, 0, 0],
            [8, 8, 8, 8, 4, 4], // total degree 40
        ];
        for t in tuples {
            let modes = t.map(ord);
            let quad = lambda6(modes);
            let oracle = exact::lambda6(&t);
            assert_relative_eq!(quad, oracle, max_relative = 1e-11);
        }
    }

    #[test]
    fn quadrature_size_insensitive() {
        // doubling the rule leaves the (already exact) value unchanged
        let t = [4usize, 3, 1, 2, 2, 4];
        let small = QuadratureRule::gauss_hermite(16 / 2 + 2).unwrap();
        let large = QuadratureRule::gauss_hermite(16 + 4).unwrap();
        let a = lambda6_with_rule(&t, &small);
        let b = lambda6_with_rule(&t, &large);
        assert_relative_eq!(a, b, max_relative = 1e-13);
    }

    #[test]
    fn i1_examples() {
        assert_eq!(hessian_integral_i1(ord(0), ord(1), ord(0)), 0.0);
        assert_relative_eq!(
            hessian_integral_i1(ord(0), ord(0), ord(0)),
            1.0 / (2.0 * 3f64.sqrt()),
            max_relative = 1e-13
        );
        let quad = hessian_integral_i1(ord(2), ord(2), ord(0));
        let oracle = exact::hessian_integral_i1(2, 2, 0);
        assert_relative_eq!(quad, oracle, max_relative = 1e-12);
    }

    #[test]
    fn i2_examples() {
        assert_eq!(hessian_integral_i2(ord(0), ord(1), ord(0)), 0.0);
        assert_eq!(
            hessian_integral_i2(ord(0), ord(0), ord(0)),
            hessian_integral_i1(ord(0), ord(0), ord(0))
        );
        let quad = hessian_integral_i2(ord(0), ord(2), ord(1));
        let oracle = exact::hessian_integral_i2(0, 2, 1);
        assert_relative_eq!(quad, oracle, max_relative = 1e-12);
    }

    #[test]
    fn iminus_examples() {
        let q4 = ExponentQ::from_dimension(2).unwrap();
        let k = MultiIndex::new(vec![1, 0]).unwrap();
        let l = MultiIndex::new(vec![0, 2]).unwrap();
        assert_eq!(hessian_integral_iminus(&k, &l, q4).unwrap(), 0.0);
        let l = MultiIndex::new(vec![0, 1]).unwrap();
        assert_eq!(hessian_integral_iminus(&k, &l, q4).unwrap(), 0.0);

        let q6 = ExponentQ::from_dimension(1).unwrap();
        let k0 = MultiIndex::new(vec![0]).unwrap();
        assert_relative_eq!(
            hessian_integral_iminus(&k0, &k0, q6).unwrap(),
            1.0 / (2.0 * 3f64.sqrt()),
            max_relative = 1e-13
        );

        let k3 = MultiIndex::new(vec![1, 0, 0]).unwrap();
        assert!(hessian_integral_iminus(&k3, &k0, q6).is_err());
    }

    #[test]
    fn canonical_tuple_and_symmetry() {
        let t = [3usize, 1, 2, 0, 4, 2];
        assert_eq!(canonical_tuple(&t), [0, 2, 4, 1, 2, 3]);
        assert!(is_resonant(&t));
        // Λ invariant under the full 72-element group on a resonant tuple
        let base = lambda6(t.map(ord));
        let perms3 = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for pa in perms3 {
            for pb in perms3 {
                for swap in [false, true] {
                    let first = [t[pa[0]], t[pa[1]], t[pa[2]]];
                    let second = [t[pb[0] + 3], t[pb[1] + 3], t[pb[2] + 3]];
                    let arranged: [usize; 6] = if swap {
                        [second[0], second[1], second[2], first[0], first[1], first[2]]
                    } else {
                        [first[0], first[1], first[2], second[0], second[1], second[2]]
                    };
                    let v = lambda6(arranged.map(ord));
                    assert_relative_eq!(v, base, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn table_order_zero() {
        let table = LambdaTable::build(0).unwrap();
        assert_eq!(table.len(), 1);
        assert_relative_eq!(
            table.get(&[0; 6]).unwrap(),
            1.0 / (PI * 3f64.sqrt()),
            max_relative = 1e-13
        );
    }

    #[test]
    fn table_order_one_contents() {
        let table = LambdaTable::build(1).unwrap();
        assert!(table.get(&[1; 6]).is_some());
        // resonance classes k = 0..3 all represented
        for t in [[0usize; 6], [1, 0, 0, 1, 0, 0], [1, 1, 0, 1, 1, 0], [1, 1, 1, 1, 1, 1]] {
            assert!(table.get(&t).is_some(), "missing {t:?}");
        }
        assert!(table.get(&[1, 0, 0, 0, 0, 0]).is_none(), "non-resonant tuple");
    }

    #[test]
    fn table_matches_direct_computation() {
        let table = LambdaTable::build(2).unwrap();
        // unsymmetrized spot checks across orderings
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move |bound: usize| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 33) as usize % bound
        };
        let mut checked = 0;
        while checked < 50 {
            let t = [next(3), next(3), next(3), next(3), next(3), next(3)];
            if !is_resonant(&t) {
                continue;
            }
            checked += 1;
            let direct = lambda6(t.map(ord));
            let tabled = table.get(&t).unwrap();
            assert_abs_diff_eq!(direct, tabled, epsilon = 1e-13);
        }
    }

    #[test]
    fn table_cap_enforced() {
        assert!(matches!(
            LambdaTable::build(17),
            Err(IntegralsError::LambdaOrderCap { requested: 17, cap: 16 })
        ));
    }

    #[test]
    fn table_json_round_trip() {
        let table = LambdaTable::build(2).unwrap();
        let mut buf = Vec::new();
        table.write_json(&mut buf).unwrap();
        let restored = LambdaTable::from_json_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(restored.max_order(), 2);
        assert_eq!(restored.len(), table.len());
        for (t, v) in table.iter() {
            assert_eq!(restored.get(&t), Some(v));
        }
        // serialization is deterministic
        let mut buf2 = Vec::new();
        table.write_json(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn exponent_q_values() {
        assert_eq!(ExponentQ::from_dimension(1).unwrap().q(), 6.0);
        assert_eq!(ExponentQ::from_dimension(2).unwrap().q(), 4.0);
        assert_relative_eq!(
            ExponentQ::from_dimension(3).unwrap().q(),
            10.0 / 3.0,
            max_relative = 1e-15
        );
        assert!(ExponentQ::from_dimension(0).is_err());
    }
}
