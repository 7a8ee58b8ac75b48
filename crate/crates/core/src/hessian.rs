//! Constrained Hessians of the space-time functional at its Hermite critical
//! points.
//!
//! At the 1d mode m the Hessian restricted to real variations splits into a
//! `2m x 2m` block coupling k with `2m-k` (diagonal `a_k`, anti-diagonal
//! `b_k`) plus an infinite diagonal tail `a_k, k > 2m`, truncated here at a
//! cutoff K:
//!
//! `a_k = 18 I₁(k,k,m) - 6 I₁(m,m,m)`, `b_k = 12 I₂(k, 2m-k, m)`.
//!
//! At the Gaussian in dimension d the Hessian over multi-indexed modes
//! `k ≠ 0` is sparse — entries vanish unless `|k| = |l|` — and is assembled
//! from the pair-integral table as `∏_j G(k_j, l_j, q)` minus the uniform
//! diagonal shift `(2/q) G(0,0,q)^d`, up to an overall positive scaling
//! selected by [`HessianConvention`]. The three scalings share sign pattern
//! and zero structure; only magnitudes differ.

use crate::hermite::HermiteOrder;
use crate::integrals::{
    self, ExponentQ, GTable, IntegralsError,
};
use crate::linalg::{
    self, block2x2_eigenvalues, LinalgError, MultiIndex, SparseSymMatrix, Spectrum, SymMatrix,
};
use crate::quadrature::{QuadratureError, QuadratureRule};
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HessianError {
    #[error("tail cutoff {cutoff} must exceed 2m = {two_m}")]
    TailCutoffTooSmall { cutoff: usize, two_m: usize },
    #[error("tail not settled at cutoff {cutoff}: entry a_{k} = {value} breaks negative-decreasing run")]
    TailNotSettled { cutoff: usize, k: usize, value: f64 },
    #[error("positive-eigenvalue ratio needs mode m >= 1")]
    RatioUndefinedAtGaussian,
    #[error("mode m = {0} too small for this zero-mode check")]
    ModeTooSmall(usize),
    #[error("matrix size {size} exceeds eigensolver cap {cap}")]
    MatrixTooLarge { size: usize, cap: usize },
    #[error("quadratic form component at the excluded critical index {0}")]
    ExcludedIndex(usize),
    #[error(transparent)]
    Integrals(#[from] IntegralsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// The mode-m Hessian on real variations: block diagonal/anti-diagonal
/// entries for `k <= 2m` plus the diagonal tail up to the cutoff K. The
/// critical index k = m itself is excluded (constrained variation).
#[derive(Debug, Clone)]
pub struct BlockHessian1D {
    mode: usize,
    cutoff: usize,
    /// a_k for k = 0..=K; the slot k = m is unused and holds 0.
    diag: Vec<f64>,
    /// b_k for k = 0..=2m; the slot k = m is unused and holds 0.
    anti: Vec<f64>,
}

impl BlockHessian1D {
    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn tail_cutoff(&self) -> usize {
        self.cutoff
    }

    /// Diagonal entry `a_k`, k != m, k <= K.
    pub fn diag_entry(&self, k: usize) -> f64 {
        assert!(k != self.mode && k <= self.cutoff);
        self.diag[k]
    }

    /// Anti-diagonal entry `b_k` pairing k with 2m-k, for k <= 2m, k != m.
    pub fn anti_entry(&self, k: usize) -> f64 {
        assert!(k != self.mode && k <= 2 * self.mode);
        self.anti[k]
    }

    /// Tail entries `a_k` for `k = 2m+1 ..= K`, in order.
    pub fn tail_entries(&self) -> &[f64] {
        &self.diag[2 * self.mode + 1..]
    }

    /// Eigenvalues of the 2m x 2m block: one symmetric 2x2 per pair
    /// `(i, 2m-i)`, i < m.
    pub fn block_eigenvalues(&self) -> Result<Vec<f64>, HessianError> {
        let m = self.mode;
        let mut out = Vec::with_capacity(2 * m);
        for i in 0..m {
            let j = 2 * m - i;
            let (lo, hi) = block2x2_eigenvalues(self.diag[i], self.diag[j], self.anti[i], self.anti[j])?;
            out.push(lo);
            out.push(hi);
        }
        Ok(out)
    }

    /// Eigenvalues of the block restricted to imaginary variations: the
    /// anti-diagonal flips sign (which leaves every characteristic polynomial
    /// unchanged) and the direction i·f_m contributes one extra zero.
    pub fn imaginary_block_eigenvalues(&self) -> Result<Vec<f64>, HessianError> {
        let m = self.mode;
        let mut out = Vec::with_capacity(2 * m + 1);
        for i in 0..m {
            let j = 2 * m - i;
            let (lo, hi) =
                block2x2_eigenvalues(self.diag[i], self.diag[j], -self.anti[i], -self.anti[j])?;
            out.push(lo);
            out.push(hi);
        }
        out.push(0.0);
        Ok(out)
    }

    /// Evaluates the quadratic form on a sparse real vector given as
    /// `(index, component)` pairs (indices distinct, != m, <= K).
    pub fn quadratic_form(&self, components: &[(usize, f64)]) -> Result<f64, HessianError> {
        self.form_with_anti_sign(components, 1.0)
    }

    /// Quadratic form of the Hessian restricted to imaginary variations
    /// `i f_k`: same diagonal, anti-diagonal sign flipped.
    pub fn quadratic_form_imaginary(
        &self,
        components: &[(usize, f64)],
    ) -> Result<f64, HessianError> {
        self.form_with_anti_sign(components, -1.0)
    }

    fn form_with_anti_sign(
        &self,
        components: &[(usize, f64)],
        sign: f64,
    ) -> Result<f64, HessianError> {
        let m = self.mode;
        let lookup = |idx: usize| {
            components.iter().find(|(k, _)| *k == idx).map(|&(_, v)| v).unwrap_or(0.0)
        };
        let mut q = 0.0;
        for &(k, v) in components {
            if k == m {
                return Err(HessianError::ExcludedIndex(k));
            }
            assert!(k <= self.cutoff, "component index beyond tail cutoff");
            q += self.diag[k] * v * v;
            // each anti-diagonal pair (k, 2m-k) counted once
            if k < m {
                q += sign * 2.0 * self.anti[k] * v * lookup(2 * m - k);
            }
        }
        Ok(q)
    }

    /// Dense form over indices `{0..=K} \ {m}` (block plus tail), mostly for
    /// cross-checks against the dense eigensolver.
    pub fn to_dense(&self) -> SymMatrix {
        let m = self.mode;
        let size = self.cutoff; // K+1 indices minus the excluded one
        let to_row = |k: usize| if k < m { k } else { k - 1 };
        let mut mat = SymMatrix::zeros(size);
        for k in 0..=self.cutoff {
            if k == m {
                continue;
            }
            mat.set_sym(to_row(k), to_row(k), self.diag[k]);
        }
        for k in 0..2 * m {
            if k == m {
                continue;
            }
            let j = 2 * m - k;
            if j != k && j != m {
                mat.set_sym(to_row(k), to_row(j), self.anti[k]);
            }
        }
        mat
    }
}

/// Assembles the mode-m Hessian with tail cutoff K (> 2m). One quadrature
/// rule exact at the top degree serves every entry.
pub fn assemble_hessian_1d(m: usize, cutoff: usize) -> Result<BlockHessian1D, HessianError> {
    if cutoff <= 2 * m {
        return Err(HessianError::TailCutoffTooSmall { cutoff, two_m: 2 * m });
    }
    let rule = QuadratureRule::gauss_hermite(2 * m + cutoff + 2)?;
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    let max_order = cutoff.max(m);
    let columns: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .map(|&y| {
            let mut col = Vec::new();
            crate::hermite::hermite_fn_column(max_order, y * inv_sqrt3, &mut col);
            col
        })
        .collect();
    let scaled = rule.scaled_weights(1.0);

    // (π/2) ∫ f_m⁴ f_k f_l, the shared integral of I₁/I₂
    let base_integral = |k: usize, l: usize| -> f64 {
        let sum: f64 = columns
            .iter()
            .zip(&scaled)
            .map(|(col, &w)| {
                let fm2 = col[m] * col[m];
                w * fm2 * fm2 * col[k] * col[l]
            })
            .sum();
        FRAC_PI_2 * inv_sqrt3 * sum
    };

    let i1_mmm = base_integral(m, m);
    let mut diag = vec![0.0; cutoff + 1];
    let mut anti = vec![0.0; 2 * m + 1];
    for k in 0..=cutoff {
        if k == m {
            continue;
        }
        diag[k] = 18.0 * base_integral(k, k) - 6.0 * i1_mmm;
        if k <= 2 * m {
            anti[k] = 12.0 * base_integral(k, 2 * m - k);
        }
    }
    Ok(BlockHessian1D { mode: m, cutoff, diag, anti })
}

/// Merged spectrum of the mode-m Hessian: block eigenvalues from the paired
/// 2x2s, tail eigenvalues directly from the diagonal entries.
pub fn spectrum_1d(m: usize, cutoff: usize, tolerance: f64) -> Result<Spectrum, HessianError> {
    let h = assemble_hessian_1d(m, cutoff)?;
    let mut eigs = h.block_eigenvalues()?;
    eigs.extend_from_slice(h.tail_entries());
    Ok(Spectrum::classify(eigs, tolerance))
}

/// First `count` diagonal tail entries `a_k`, `k = 2m+1, 2m+2, ...`.
pub fn tail_values_1d(m: usize, count: usize) -> Result<Vec<f64>, HessianError> {
    let h = assemble_hessian_1d(m, 2 * m + count.max(1))?;
    Ok(h.tail_entries()[..count].to_vec())
}

/// Positive-eigenvalue counts of the mode-m Hessian at cutoff K, split into
/// block and tail contributions. The conjecture-facing ratio divides the
/// total by 2m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveCount {
    pub block: usize,
    pub tail: usize,
    pub ratio: f64,
}

/// Ratio of positive eigenvalues to 2m. Errors unless the tail is settled:
/// the last ten tail entries must all be negative and strictly decreasing (so
/// that no positives hide beyond K; the tails decrease monotonically once
/// past the low-k parity oscillation).
pub fn positive_ratio(m: usize, cutoff: usize) -> Result<PositiveCount, HessianError> {
    if m == 0 {
        return Err(HessianError::RatioUndefinedAtGaussian);
    }
    let h = assemble_hessian_1d(m, cutoff)?;
    let tail = h.tail_entries();
    let guard = 10.min(tail.len().saturating_sub(1));
    let last = &tail[tail.len() - guard..];
    for (i, pair) in last.windows(2).enumerate() {
        if pair[1] >= pair[0] || pair[1] >= 0.0 {
            let k = cutoff - guard + i + 2;
            return Err(HessianError::TailNotSettled { cutoff, k, value: pair[1] });
        }
    }
    let tol = linalg::DEFAULT_ZERO_TOLERANCE;
    let block = h.block_eigenvalues()?.iter().filter(|&&v| v > tol).count();
    let tail_pos = tail.iter().filter(|&&v| v > tol).count();
    Ok(PositiveCount {
        block,
        tail: tail_pos,
        ratio: (block + tail_pos) as f64 / (2 * m) as f64,
    })
}

/// Quadratic form of the mode-m Hessian on the normalized translation
/// direction `√(m/(2m+1)) e_{m-1} - √((m+1)/(2m+1)) e_{m+1}` (the expansion
/// of f_m′). Translation invariance forces this to vanish.
pub fn zero_mode_check_translation(m: usize) -> Result<f64, HessianError> {
    if m == 0 {
        return Err(HessianError::ModeTooSmall(0));
    }
    let h = assemble_hessian_1d(m, 2 * m + 2)?;
    let den = (2 * m + 1) as f64;
    let v = [
        (m - 1, (m as f64 / den).sqrt()),
        (m + 1, -((m as f64 + 1.0) / den).sqrt()),
    ];
    Ok(h.quadratic_form(&v)?.abs())
}

/// Quadratic form on the normalized expansion of `(4x² - 2(2m+1)) f_m`,
/// which spans `e_{m+2}` (and `e_{m-2}` for m >= 2) via
/// `(4x²-2(2m+1)) H_m = H_{m+2} + 4m(m-1) H_{m-2}`.
///
/// The symmetry behind this zero mode is `f_m -> e^{ic(4x²-2(2m+1))} f_m`,
/// an imaginary variation, so the vanishing form is the imaginary-subspace
/// one. (For m <= 1 the two coincide: a single component never meets the
/// anti-diagonal.) The real block inherits a zero eigenvalue on the same
/// `(m-2, m+2)` pair because the characteristic polynomial only sees
/// `b_{m-2} b_{m+2}`.
pub fn zero_mode_check_phase(m: usize) -> Result<f64, HessianError> {
    let cutoff = (2 * m).max(m + 2) + 2;
    let h = assemble_hessian_1d(m, cutoff)?;
    // in the orthonormal basis: c_m/c_{m+2} = 2√((m+1)(m+2)),
    // 4m(m-1)·c_m/c_{m-2} = 2√(m(m-1))
    let up = 2.0 * (((m + 1) * (m + 2)) as f64).sqrt();
    let mut components = vec![(m + 2, up)];
    if m >= 2 {
        components.push((m - 2, 2.0 * ((m * (m - 1)) as f64).sqrt()));
    }
    let norm = components.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    for c in components.iter_mut() {
        c.1 /= norm;
    }
    Ok(h.quadratic_form_imaginary(&components)?.abs())
}

/// Overall positive scaling of the Gaussian Hessian matrix. All three share
/// the same zero/negative structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HessianConvention {
    /// Raw pair-integral products: `∏ G(k_j,l_j)` with shift `(2/q) G(0,0)^d`.
    #[default]
    Section8,
    /// Entries as I⁻ values (each 1d pair integral carries the π/2 time
    /// factor and the c₀ powers, which collapse to an overall 1/2): exactly
    /// half of `Section8`. This is the normalization of the column-sum
    /// inequality, and the one whose d=3 spectral gap is ≈ 0.03.
    CombIneq,
    /// The true second variation `(q²/2) I⁻(k,l) - δ q I⁻(0,0)`, i.e.
    /// `q²/4` times `Section8`.
    PaperH,
}

impl HessianConvention {
    pub fn scale(self, q: ExponentQ) -> f64 {
        match self {
            HessianConvention::Section8 => 1.0,
            HessianConvention::CombIneq => 0.5,
            HessianConvention::PaperH => q.q() * q.q() / 4.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HessianConvention::Section8 => "section8",
            HessianConvention::CombIneq => "comb-ineq",
            HessianConvention::PaperH => "paper-h",
        }
    }
}

/// The d-dimensional Hessian at the Gaussian over multi-indices
/// `0 < |k|, k_j <= N`, with the zero index removed by the norm constraint.
/// Row r corresponds to the multi-index with flat encoding r+1.
#[derive(Debug, Clone)]
pub struct GaussianHessianDD {
    pub dimension: u32,
    pub n_max: usize,
    pub q: ExponentQ,
    pub convention: HessianConvention,
    pub matrix: SparseSymMatrix,
}

impl GaussianHessianDD {
    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn multi_index(&self, row: usize) -> MultiIndex {
        MultiIndex::decode(row + 1, self.dimension as usize, self.n_max)
            .expect("row within matrix")
    }
}

fn gaussian_matrix(
    d: u32,
    n_max: usize,
    scale: f64,
    shifted: bool,
) -> Result<(SparseSymMatrix, ExponentQ), HessianError> {
    let q = ExponentQ::from_dimension(d)?;
    let dd = d as usize;
    let size = (n_max + 1).pow(d) - 1;
    if size > linalg::DEFAULT_SIZE_CAP {
        return Err(HessianError::MatrixTooLarge { size, cap: linalg::DEFAULT_SIZE_CAP });
    }
    let g = GTable::build(n_max, q)?;
    let shift = if shifted { (2.0 / q.q()) * g.get(0, 0).powi(d as i32) } else { 0.0 };

    let indices: Vec<MultiIndex> = (0..size)
        .map(|r| MultiIndex::decode(r + 1, dd, n_max).expect("in range"))
        .collect();
    // bucket rows by |k|; only equal-degree pairs can couple
    let max_total = dd * n_max;
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); max_total + 1];
    for (r, k) in indices.iter().enumerate() {
        sectors[k.total()].push(r);
    }

    let rows: Vec<Vec<(usize, usize, f64)>> = sectors
        .par_iter()
        .flat_map(|sector| {
            sector
                .par_iter()
                .map(|&r| {
                    let k = &indices[r];
                    let mut entries = Vec::new();
                    for &c in sector.iter().filter(|&&c| c >= r) {
                        let l = &indices[c];
                        let mut v: f64 = k
                            .entries()
                            .iter()
                            .zip(l.entries())
                            .map(|(&kj, &lj)| g.get(kj, lj))
                            .product();
                        if r == c {
                            v -= shift;
                        }
                        v *= scale;
                        if v != 0.0 {
                            entries.push((r, c, v));
                        }
                    }
                    entries
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut matrix = SparseSymMatrix::new(size);
    for batch in rows {
        for (r, c, v) in batch {
            matrix.insert(r, c, v)?;
        }
    }
    Ok((matrix, q))
}

/// Assembles the shifted Gaussian Hessian in the requested convention.
pub fn assemble_hessian_gaussian(
    d: u32,
    n_max: usize,
    convention: HessianConvention,
) -> Result<GaussianHessianDD, HessianError> {
    let q = ExponentQ::from_dimension(d)?;
    let (matrix, q) = gaussian_matrix(d, n_max, convention.scale(q), true)?;
    Ok(GaussianHessianDD { dimension: d, n_max, q, convention, matrix })
}

/// The unshifted Gram side `∏ G(k_j, l_j)` alone (`Section8` scaling):
/// positive semi-definite by its inner-product representation.
pub fn assemble_gram_gaussian(d: u32, n_max: usize) -> Result<SparseSymMatrix, HessianError> {
    Ok(gaussian_matrix(d, n_max, 1.0, false)?.0)
}

/// Diagonalizes the Gaussian Hessian and reports the spectrum together with
/// the gap from the zero cluster to the nearest strictly negative eigenvalue.
pub fn spectrum_gaussian(
    d: u32,
    n_max: usize,
    tolerance: f64,
    convention: HessianConvention,
) -> Result<(Spectrum, Option<f64>), HessianError> {
    let h = assemble_hessian_gaussian(d, n_max, convention)?;
    let spectrum = linalg::symmetric_eigenvalues(&h.matrix.to_dense(), tolerance)?;
    let gap = spectrum.nearest_negative().map(|v| -v);
    Ok((spectrum, gap))
}

/// First variation of the functional at the Gaussian along mode k: the
/// separated form `2 · time_integral(|k|/2) · ∏_j G(k_j, 0, q)` (positive
/// constants dropped). Vanishes for every k ≠ 0: integer resonance kills the
/// time factor for even |k|, spatial parity kills a pair integral for odd.
pub fn first_variation_gaussian(k: &MultiIndex, q: ExponentQ) -> f64 {
    let time = integrals::time_integral(k.total() as f64 / 2.0);
    let space: f64 = k
        .entries()
        .iter()
        .map(|&kj| {
            integrals::weighted_pair_integral(
                HermiteOrder::trusted(kj),
                HermiteOrder::trusted(0),
                q,
            )
        })
        .product();
    (2.0 * time * space).abs()
}
