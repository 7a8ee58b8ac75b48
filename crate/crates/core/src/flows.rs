//! The functional `S[α] = H[α] / P(α)³` on truncated Hermite coefficient
//! vectors, where `H` is the space-time L⁶ norm of the free evolution written
//! as a resonant six-fold Λ-sum and `P = Σ |α_n|²`.
//!
//! `H[α] = C · Σ_k Σ_{n₁+n₂+n₃ = n₄+n₅+n₆ = k} α_{n₁}α_{n₂}α_{n₃}
//!          ᾱ_{n₄}ᾱ_{n₅}ᾱ_{n₆} Λ(n₁..n₆)`,
//! with the global constant `C = π/2` coming from the resonance time integral
//! (pinned against [`direct_quadrature_oracle`], which integrates
//! `∬ |e^{it∂²}f|⁶ dx dt` with no reference to the Λ machinery).
//!
//! Implemented flows: projected gradient ascent on the unit sphere of P (the
//! critical points of interest are maximizers; a `Descent` direction flag is
//! kept for the opposite orientation) and the Hamiltonian flow
//! `α̇_ℓ = i ∂H/∂ᾱ_ℓ` integrated by classical RK4 with conservation
//! monitoring of H, P and the oscillator energy Q.

use crate::hermite::{self, HermiteError, HermiteOrder};
use crate::integrals::{IntegralsError, LambdaTable};
use crate::quadrature::{QuadratureError, QuadratureRule};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("coefficient vector must not be identically zero")]
    ZeroVector,
    #[error("coefficient vector has modes up to {max_mode} but table order is {table_order}")]
    TableTooSmall { max_mode: usize, table_order: usize },
    #[error("resonant sum has non-negligible imaginary part (relative {0:e})")]
    NumeratorNotReal(f64),
    #[error("line search stalled at step size {0:e} without finding an improving point")]
    StalledLineSearch(f64),
    #[error("{quantity} drifted by {drift:e}, more than 10x the tolerance {tolerance:e}")]
    ConservationBreach { quantity: &'static str, drift: f64, tolerance: f64 },
    #[error("unknown initial-condition preset {0:?}")]
    BadPreset(String),
    #[error(transparent)]
    Integrals(#[from] IntegralsError),
    #[error(transparent)]
    Hermite(#[from] HermiteError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Finite sequence of complex Hermite coefficients `(α_0, ..., α_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    values: Vec<Complex64>,
}

impl CoeffVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        assert!(!values.is_empty(), "coefficient vector needs at least one mode");
        CoeffVector { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `e_m` with modes `0..=n_max`.
    pub fn basis(m: usize, n_max: usize) -> Self {
        assert!(m <= n_max);
        let mut values = vec![Complex64::ZERO; n_max + 1];
        values[m] = Complex64::ONE;
        CoeffVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Highest mode index carried (not necessarily nonzero).
    pub fn max_mode(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `P = Σ |α_n|²`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self, FlowError> {
        let p = self.norm_sq();
        if p == 0.0 {
            return Err(FlowError::ZeroVector);
        }
        let inv = 1.0 / p.sqrt();
        Ok(CoeffVector { values: self.values.iter().map(|a| a * inv).collect() })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        CoeffVector { values: self.values.iter().map(|a| a * c).collect() }
    }

    /// Parses a named preset: `gaussian`, `mode:m`, or
    /// `gaussian+noise:eps:seed` (e₀ plus complex noise of size eps per mode,
    /// normalized; reproducible from the seed).
    pub fn parse_preset(spec: &str, n_max: usize) -> Result<Self, FlowError> {
        if spec == "gaussian" {
            return Ok(Self::basis(0, n_max));
        }
        if let Some(m) = spec.strip_prefix("mode:") {
            let m: usize =
                m.parse().map_err(|_| FlowError::BadPreset(spec.to_string()))?;
            if m > n_max {
                return Err(FlowError::BadPreset(spec.to_string()));
            }
            return Ok(Self::basis(m, n_max));
        }
        if let Some(rest) = spec.strip_prefix("gaussian+noise:") {
            let mut parts = rest.split(':');
            let eps: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| FlowError::BadPreset(spec.to_string()))?;
            let seed: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| FlowError::BadPreset(spec.to_string()))?;
            if parts.next().is_some() {
                return Err(FlowError::BadPreset(spec.to_string()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut values = vec![Complex64::ZERO; n_max + 1];
            values[0] = Complex64::ONE;
            for v in values.iter_mut() {
                let re: f64 = rng.random::<f64>() * 2.0 - 1.0;
                let im: f64 = rng.random::<f64>() * 2.0 - 1.0;
                *v += eps * Complex64::new(re, im);
            }
            return CoeffVector::new(values).normalized();
        }
        // JSON array of [re, im] pairs
        if spec.trim_start().starts_with('[') {
            return Self::from_json_pairs(spec);
        }
        Err(FlowError::BadPreset(spec.to_string()))
    }

    /// Parses `[[re, im], ...]`.
    pub fn from_json_pairs(s: &str) -> Result<Self, FlowError> {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(s)
            .map_err(|e| FlowError::BadPreset(format!("{s}: {e}")))?;
        if pairs.is_empty() {
            return Err(FlowError::BadPreset(s.to_string()));
        }
        Ok(CoeffVector {
            values: pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        })
    }
}

/// Oscillator energy `Q = Σ (n + 1/2) |α_n|²`, conserved by the Hamiltonian
/// flow because the Λ-sum only couples resonant tuples.
pub fn qho_energy(alpha: &CoeffVector) -> f64 {
    alpha
        .values()
        .iter()
        .enumerate()
        .map(|(n, a)| (n as f64 + 0.5) * a.norm_sqr())
        .sum()
}

/// Multiplies `α_n` by `i^n`; the numerator is invariant under this map
/// (Fourier transform of the underlying function) and applying it four times
/// is the identity.
pub fn fourier_phase_map(alpha: &CoeffVector) -> CoeffVector {
    let values = alpha
        .values()
        .iter()
        .enumerate()
        .map(|(n, &a)| match n % 4 {
            0 => a,
            1 => Complex64::new(-a.im, a.re),
            2 => -a,
            _ => Complex64::new(a.im, -a.re),
        })
        .collect();
    CoeffVector::new(values)
}

/// The Λ-sum organized for evaluation: one dense coupling block per
/// resonance class k, over the ordered triples with that sum. Built once from
/// a [`LambdaTable`] and then shared read-only by flow steps.
pub struct ResonantSystem {
    n_max: usize,
    constant: f64,
    classes: Vec<ResonanceClass>,
}

struct ResonanceClass {
    triples: Vec<[u16; 3]>,
    coupling: Vec<f64>, // row-major triples.len() x triples.len()
}

impl ResonantSystem {
    pub fn new(table: &LambdaTable) -> Self {
        let n_max = table.max_order();
        let mut classes = Vec::with_capacity(3 * n_max + 1);
        for k in 0..=(3 * n_max) {
            let triples = ordered_triples_with_sum(k, n_max);
            let r = triples.len();
            let mut coupling = vec![0.0; r * r];
            for (i, a) in triples.iter().enumerate() {
                for (j, b) in triples.iter().enumerate() {
                    let tuple = [
                        a[0] as usize,
                        a[1] as usize,
                        a[2] as usize,
                        b[0] as usize,
                        b[1] as usize,
                        b[2] as usize,
                    ];
                    coupling[i * r + j] =
                        table.get(&tuple).expect("table covers every resonant tuple");
                }
            }
            classes.push(ResonanceClass { triples, coupling });
        }
        ResonantSystem { n_max, constant: table.numerator_constant(), classes }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    fn check_cover(&self, alpha: &CoeffVector) -> Result<(), FlowError> {
        if alpha.max_mode() > self.n_max {
            return Err(FlowError::TableTooSmall {
                max_mode: alpha.max_mode(),
                table_order: self.n_max,
            });
        }
        Ok(())
    }

    /// Bare resonant sum `T(α)` (no constant); real up to roundoff.
    fn numerator_bare(&self, alpha: &CoeffVector) -> Complex64 {
        let a = alpha.values();
        let mut total = Complex64::ZERO;
        let mut monomials: Vec<Complex64> = Vec::new();
        for class in &self.classes {
            let r = class.triples.len();
            if r == 0 {
                continue;
            }
            monomials.clear();
            monomials.extend(class.triples.iter().map(|t| {
                let get = |n: u16| a.get(n as usize).copied().unwrap_or(Complex64::ZERO);
                get(t[0]) * get(t[1]) * get(t[2])
            }));
            for i in 0..r {
                let ui = monomials[i];
                if ui == Complex64::ZERO {
                    continue;
                }
                let row = &class.coupling[i * r..(i + 1) * r];
                let mut acc = Complex64::ZERO;
                for (j, &lam) in row.iter().enumerate() {
                    if lam != 0.0 {
                        acc += lam * monomials[j].conj();
                    }
                }
                total += ui * acc;
            }
        }
        total
    }

    /// `∂T/∂ᾱ_ℓ` for the bare sum.
    fn gradient_bare(&self, alpha: &CoeffVector) -> Vec<Complex64> {
        let a = alpha.values();
        let mut grad = vec![Complex64::ZERO; a.len()];
        let mut monomials: Vec<Complex64> = Vec::new();
        let mut v: Vec<Complex64> = Vec::new();
        for class in &self.classes {
            let r = class.triples.len();
            if r == 0 {
                continue;
            }
            monomials.clear();
            monomials.extend(class.triples.iter().map(|t| {
                let get = |n: u16| a.get(n as usize).copied().unwrap_or(Complex64::ZERO);
                get(t[0]) * get(t[1]) * get(t[2])
            }));
            // v_j = Σ_i u_i Λ_ij
            v.clear();
            v.resize(r, Complex64::ZERO);
            for (i, &ui) in monomials.iter().enumerate() {
                if ui == Complex64::ZERO {
                    continue;
                }
                let row = &class.coupling[i * r..(i + 1) * r];
                for (j, &lam) in row.iter().enumerate() {
                    if lam != 0.0 {
                        v[j] += ui * lam;
                    }
                }
            }
            // ∂ū_j/∂ᾱ_ℓ distributes over the three slots of triple j
            for (j, t) in class.triples.iter().enumerate() {
                if v[j] == Complex64::ZERO {
                    continue;
                }
                let (x, y, z) = (t[0] as usize, t[1] as usize, t[2] as usize);
                let (ax, ay, az) = (a[x].conj(), a[y].conj(), a[z].conj());
                grad[x] += v[j] * ay * az;
                grad[y] += v[j] * ax * az;
                grad[z] += v[j] * ax * ay;
            }
        }
        grad
    }

    /// Numerator `H[α] = C · T(α)`, with the imaginary part of T checked to be
    /// roundoff-small and discarded.
    pub fn numerator(&self, alpha: &CoeffVector) -> Result<f64, FlowError> {
        self.check_cover(alpha)?;
        let t = self.numerator_bare(alpha);
        let scale = t.re.abs().max(alpha.norm_sq().powi(3) * f64::MIN_POSITIVE.sqrt()).max(1e-300);
        if t.im.abs() > 1e-12 * scale {
            return Err(FlowError::NumeratorNotReal(t.im.abs() / scale));
        }
        Ok(self.constant * t.re)
    }

    /// `S[α] = H[α] / P³`.
    pub fn value(&self, alpha: &CoeffVector) -> Result<f64, FlowError> {
        let p = alpha.norm_sq();
        if p == 0.0 {
            return Err(FlowError::ZeroVector);
        }
        Ok(self.numerator(alpha)? / p.powi(3))
    }

    /// `∂S/∂ᾱ_ℓ = C (∂T/∂ᾱ_ℓ / P³ - 3 α_ℓ T / P⁴)`; vanishes identically at
    /// every single-mode vector.
    pub fn gradient(&self, alpha: &CoeffVector) -> Result<Vec<Complex64>, FlowError> {
        self.check_cover(alpha)?;
        let p = alpha.norm_sq();
        if p == 0.0 {
            return Err(FlowError::ZeroVector);
        }
        let t = self.numerator_bare(alpha).re;
        let grad_t = self.gradient_bare(alpha);
        let inv_p3 = p.powi(3).recip();
        let t_over_p4 = 3.0 * t / p.powi(4);
        Ok(alpha
            .values()
            .iter()
            .zip(grad_t)
            .map(|(&al, g)| self.constant * (g * inv_p3 - al * t_over_p4))
            .collect())
    }

    /// Hamiltonian vector field `α̇_ℓ = i ∂H/∂ᾱ_ℓ = i C ∂T/∂ᾱ_ℓ`.
    fn hamiltonian_field(&self, alpha: &CoeffVector) -> Vec<Complex64> {
        self.gradient_bare(alpha)
            .into_iter()
            .map(|g| Complex64::new(0.0, self.constant) * g)
            .collect()
    }
}

fn ordered_triples_with_sum(sum: usize, n_max: usize) -> Vec<[u16; 3]> {
    let mut out = Vec::new();
    for a in 0..=n_max.min(sum) {
        for b in 0..=n_max.min(sum - a) {
            let c = sum - a - b;
            if c <= n_max {
                out.push([a as u16, b as u16, c as u16]);
            }
        }
    }
    out
}

/// Numerator `H[α]` evaluated through `table`.
pub fn strichartz_numerator(alpha: &CoeffVector, table: &LambdaTable) -> Result<f64, FlowError> {
    ResonantSystem::new(table).numerator(alpha)
}

/// `S[α]`.
pub fn strichartz_value(alpha: &CoeffVector, table: &LambdaTable) -> Result<f64, FlowError> {
    ResonantSystem::new(table).value(alpha)
}

/// `∂S/∂ᾱ` as a complex vector.
pub fn strichartz_gradient(
    alpha: &CoeffVector,
    table: &LambdaTable,
) -> Result<Vec<Complex64>, FlowError> {
    ResonantSystem::new(table).gradient(alpha)
}

fn gradient_norm(g: &[Complex64]) -> f64 {
    g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// One recorded state of a flow.
#[derive(Debug, Clone, Copy)]
pub struct FlowRow {
    pub t: f64,
    pub s: f64,
    pub p: f64,
    pub h: f64,
    pub q: f64,
    pub grad_residual: f64,
}

/// Relative drifts of conserved quantities over a Hamiltonian run.
#[derive(Debug, Clone, Copy)]
pub struct ConservationDrift {
    pub h: f64,
    pub p: f64,
    pub q: f64,
}

/// Trajectory summary shared by both flows.
#[derive(Debug, Clone)]
pub struct FlowReport {
    pub rows: Vec<FlowRow>,
    pub final_alpha: CoeffVector,
    /// Gradient flow: residual dropped below tolerance before max_steps.
    pub converged: bool,
    pub final_residual: f64,
    /// Gradient flow: S moved monotonically in the chosen direction across
    /// every recorded row (up to 1e-12 relative jitter).
    pub monotone: bool,
    /// Present for Hamiltonian runs.
    pub drift: Option<ConservationDrift>,
}

fn is_monotone(rows: &[FlowRow], sign: f64) -> bool {
    rows.windows(2).all(|pair| {
        let tol = 1e-12 * pair[0].s.abs().max(1.0);
        sign * (pair[1].s - pair[0].s) >= -tol
    })
}

impl FlowReport {
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "t,S,P,H,Q,grad_residual")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                crate::fmt_f64(r.t),
                crate::fmt_f64(r.s),
                crate::fmt_f64(r.p),
                crate::fmt_f64(r.h),
                crate::fmt_f64(r.q),
                crate::fmt_f64(r.grad_residual)
            )?;
        }
        Ok(())
    }
}

/// Which way the gradient flow moves along ∂S/∂ᾱ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowDirection {
    /// Toward larger S; the optimizers of interest are maximizers.
    #[default]
    Ascent,
    Descent,
}

#[derive(Debug, Clone)]
pub struct GradientFlowParams {
    pub direction: FlowDirection,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub residual_tol: f64,
    pub max_steps: usize,
    pub record_every: usize,
}

impl Default for GradientFlowParams {
    fn default() -> Self {
        GradientFlowParams {
            direction: FlowDirection::Ascent,
            initial_step: 0.1,
            min_step: 1e-12,
            max_step: 2.0,
            residual_tol: 1e-10,
            max_steps: 20_000,
            record_every: 10,
        }
    }
}

/// Projected gradient flow on the unit sphere of P: step along ±∂S/∂ᾱ,
/// renormalize, and backtrack until S improves in the chosen direction.
/// S is monotone along the recorded trajectory by construction.
pub fn gradient_flow(
    alpha0: &CoeffVector,
    table: &LambdaTable,
    params: &GradientFlowParams,
) -> Result<FlowReport, FlowError> {
    let sys = ResonantSystem::new(table);
    sys.check_cover(alpha0)?;
    let mut alpha = alpha0.normalized()?;
    let mut s = sys.value(&alpha)?;
    let mut grad = sys.gradient(&alpha)?;
    let mut residual = gradient_norm(&grad);
    let mut t = 0.0;
    let mut step = params.initial_step;
    let mut rows = vec![make_row(&sys, &alpha, t, s, residual)?];
    let mut converged = residual < params.residual_tol;

    let sign = match params.direction {
        FlowDirection::Ascent => 1.0,
        FlowDirection::Descent => -1.0,
    };

    let mut iter = 0;
    while !converged && iter < params.max_steps {
        iter += 1;
        let mut accepted = false;
        while step >= params.min_step {
            let candidate = CoeffVector::new(
                alpha
                    .values()
                    .iter()
                    .zip(&grad)
                    .map(|(&a, &g)| a + sign * step * g)
                    .collect(),
            )
            .normalized()?;
            let s_new = sys.value(&candidate)?;
            let improved = sign * (s_new - s) >= -1e-14 * s.abs().max(1.0);
            if improved {
                t += step;
                alpha = candidate;
                s = s_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(FlowError::StalledLineSearch(step));
        }
        grad = sys.gradient(&alpha)?;
        residual = gradient_norm(&grad);
        converged = residual < params.residual_tol;
        step = (step * 1.5).min(params.max_step);
        if iter % params.record_every == 0 || converged || iter == params.max_steps {
            rows.push(make_row(&sys, &alpha, t, s, residual)?);
        }
    }

    let monotone = is_monotone(&rows, sign);
    Ok(FlowReport {
        rows,
        final_alpha: alpha,
        converged,
        final_residual: residual,
        monotone,
        drift: None,
    })
}

fn make_row(
    sys: &ResonantSystem,
    alpha: &CoeffVector,
    t: f64,
    s: f64,
    residual: f64,
) -> Result<FlowRow, FlowError> {
    Ok(FlowRow {
        t,
        s,
        p: alpha.norm_sq(),
        h: sys.numerator(alpha)?,
        q: qho_energy(alpha),
        grad_residual: residual,
    })
}

#[derive(Debug, Clone)]
pub struct HamiltonianFlowParams {
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
    /// Relative drift tolerance for H, P, Q; exceeding 10x this is an error.
    pub conservation_tol: f64,
}

impl Default for HamiltonianFlowParams {
    fn default() -> Self {
        HamiltonianFlowParams {
            dt: 1e-4,
            n_steps: 10_000,
            record_every: 100,
            conservation_tol: 1e-8,
        }
    }
}

/// Classical RK4 on `α̇_ℓ = i ∂H/∂ᾱ_ℓ`. H, P and Q are monitored rather than
/// enforced; drift beyond 10x the tolerance aborts with an error (the signal
/// that dt is too large for the data).
pub fn hamiltonian_flow(
    alpha0: &CoeffVector,
    table: &LambdaTable,
    params: &HamiltonianFlowParams,
) -> Result<FlowReport, FlowError> {
    let sys = ResonantSystem::new(table);
    sys.check_cover(alpha0)?;
    if alpha0.norm_sq() == 0.0 {
        return Err(FlowError::ZeroVector);
    }
    let mut alpha = alpha0.clone();
    let h0 = sys.numerator(&alpha)?;
    let p0 = alpha.norm_sq();
    let q0 = qho_energy(&alpha);

    let axpy = |a: &CoeffVector, c: f64, k: &[Complex64]| {
        CoeffVector::new(a.values().iter().zip(k).map(|(&x, &v)| x + c * v).collect())
    };

    let mut rows = vec![FlowRow {
        t: 0.0,
        s: sys.value(&alpha)?,
        p: p0,
        h: h0,
        q: q0,
        grad_residual: gradient_norm(&sys.gradient(&alpha)?),
    }];
    let mut drift = ConservationDrift { h: 0.0, p: 0.0, q: 0.0 };

    for i in 1..=params.n_steps {
        let dt = params.dt;
        let k1 = sys.hamiltonian_field(&alpha);
        let k2 = sys.hamiltonian_field(&axpy(&alpha, dt / 2.0, &k1));
        let k3 = sys.hamiltonian_field(&axpy(&alpha, dt / 2.0, &k2));
        let k4 = sys.hamiltonian_field(&axpy(&alpha, dt, &k3));
        alpha = CoeffVector::new(
            alpha
                .values()
                .iter()
                .enumerate()
                .map(|(l, &x)| x + dt / 6.0 * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]))
                .collect(),
        );

        if i % params.record_every == 0 || i == params.n_steps {
            let t = dt * i as f64;
            let h = sys.numerator(&alpha)?;
            let p = alpha.norm_sq();
            let q = qho_energy(&alpha);
            drift.h = drift.h.max((h - h0).abs() / h0.abs().max(1e-300));
            drift.p = drift.p.max((p - p0).abs() / p0.abs().max(1e-300));
            drift.q = drift.q.max((q - q0).abs() / q0.abs().max(1e-300));
            rows.push(FlowRow {
                t,
                s: sys.value(&alpha)?,
                p,
                h,
                q,
                grad_residual: gradient_norm(&sys.gradient(&alpha)?),
            });
        }
    }

    for (name, value) in [("H", drift.h), ("P", drift.p), ("Q", drift.q)] {
        if value > 10.0 * params.conservation_tol {
            return Err(FlowError::ConservationBreach {
                quantity: name,
                drift: value,
                tolerance: params.conservation_tol,
            });
        }
    }

    let final_residual = rows.last().map(|r| r.grad_residual).unwrap_or(0.0);
    Ok(FlowReport {
        rows,
        final_alpha: alpha,
        converged: false,
        final_residual,
        monotone: true, // not meaningful for the Hamiltonian flow
        drift: Some(drift),
    })
}

/// Direct space-time quadrature of `∬ |e^{it∂²}f|⁶ dx dt` for
/// `f = Σ α_n f_n`: synthesizes the evolved profile from
/// [`hermite::free_evolution_coeff`] on a `(ξ, s)` grid, with
/// `ξ = x/√(1+4t²)` and `t = tan(s)/2` mapping time to `(-π/2, π/2)`.
///
/// This never touches the Λ machinery, so agreement with
/// [`strichartz_numerator`] pins the resonance selection, the time-integral
/// value, and the global constant all at once. Both rule sizes converge fast;
/// `spatial_size >= 3N+1` and `time_size >= 3N/2+1` are already exact.
pub fn direct_quadrature_oracle(
    alpha: &CoeffVector,
    spatial_size: usize,
    time_size: usize,
) -> Result<f64, FlowError> {
    let rule = QuadratureRule::gauss_hermite(spatial_size)?;
    let n_max = alpha.max_mode();
    let inv_sqrt3 = 1.0 / 3f64.sqrt();

    // spatial profile per time node: |Σ_n α_n FE(n,t) f_n(ξ)|⁶ integrated in ξ
    let mut col = Vec::new();
    let scaled = rule.scaled_weights(1.0);
    let ds = PI / time_size as f64;
    let mut total = 0.0;
    for j in 0..time_size {
        let s = -PI / 2.0 + (j as f64 + 0.5) * ds;
        let t = s.tan() / 2.0;
        let phases: Vec<Complex64> = (0..=n_max)
            .map(|n| hermite::free_evolution_coeff(HermiteOrder::trusted(n), t, 1))
            .collect();
        let mut spatial = 0.0;
        for (&y, &w) in rule.nodes().iter().zip(&scaled) {
            let xi = y * inv_sqrt3;
            hermite::hermite_fn_column(n_max, xi, &mut col);
            let mut amp = Complex64::ZERO;
            for (n, &a) in alpha.values().iter().enumerate() {
                if a != Complex64::ZERO {
                    amp += a * phases[n] * col[n];
                }
            }
            // |amp|⁶ already carries e^{-3ξ²}; the scaled weight supplies e^{+y²}
            spatial += w * amp.norm_sqr().powi(3);
        }
        spatial *= inv_sqrt3;
        // dx dt Jacobian: √(1+4t²) · ds/(2cos²s) = ds/(2|cos s|³)
        let cos = s.cos().abs();
        total += spatial * ds / (2.0 * cos * cos * cos);
    }
    Ok(total)
}
