//! Multi-index bookkeeping and symmetric eigenvalue machinery.
//!
//! The eigensolver is the classic two-stage dense path: Householder reduction
//! to tridiagonal form followed by the implicit-shift QL iteration (the
//! EISPACK tred2/tql2 pair). A cyclic Jacobi routine is kept alongside as an
//! independent cross-check for small matrices. Everything is f64 and
//! row-major; the matrices this crate diagonalizes top out around 10^3.

#![allow(clippy::needless_range_loop)] // index loops mirror the EISPACK originals

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, Write};
use thiserror::Error;

/// Largest matrix accepted by the dense eigensolver.
pub const DEFAULT_SIZE_CAP: usize = 4000;

/// Default tolerance under which an eigenvalue is classified as zero.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("multi-index must have at least one coordinate")]
    EmptyMultiIndex,
    #[error("multi-index coordinate {value} exceeds truncation {n_max}")]
    CoordinateOutOfRange { value: usize, n_max: usize },
    #[error("flat index {flat} out of range for d={d}, n_max={n_max}")]
    FlatIndexOutOfRange { flat: usize, d: usize, n_max: usize },
    #[error("matrix of size {0} exceeds eigensolver cap {DEFAULT_SIZE_CAP}")]
    SizeCap(usize),
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {defect:e}")]
    NotSymmetric { i: usize, j: usize, defect: f64 },
    #[error("QL iteration failed to converge at eigenvalue {0}")]
    NoConvergence(usize),
    #[error("2x2 block discriminant {0:e} below -1e-12; inputs inconsistent")]
    NegativeDiscriminant(f64),
    #[error("index pair ({0}, {1}) out of range for matrix of size {2}")]
    IndexOutOfRange(usize, usize, usize),
}

/// A d-tuple of mode numbers indexing a tensor-product Hermite mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self, LinalgError> {
        if entries.is_empty() {
            return Err(LinalgError::EmptyMultiIndex);
        }
        Ok(MultiIndex { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Total degree `|k| = Σ k_j`.
    pub fn total(&self) -> usize {
        self.entries.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Flat index `k_1 (N+1)^{d-1} + ... + k_d`, bijective onto `[0, (N+1)^d)`.
    pub fn encode(&self, n_max: usize) -> Result<usize, LinalgError> {
        let mut flat = 0usize;
        for &k in &self.entries {
            if k > n_max {
                return Err(LinalgError::CoordinateOutOfRange { value: k, n_max });
            }
            flat = flat * (n_max + 1) + k;
        }
        Ok(flat)
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(flat: usize, d: usize, n_max: usize) -> Result<Self, LinalgError> {
        if d == 0 {
            return Err(LinalgError::EmptyMultiIndex);
        }
        let base = n_max + 1;
        if flat >= base.pow(d as u32) {
            return Err(LinalgError::FlatIndexOutOfRange { flat, d, n_max });
        }
        let mut entries = vec![0usize; d];
        let mut rest = flat;
        for slot in entries.iter_mut().rev() {
            *slot = rest % base;
            rest /= base;
        }
        Ok(MultiIndex { entries })
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    /// Builds a symmetric matrix from `f(i, j)` evaluated on `i <= j` and
    /// mirrored, so symmetry holds exactly.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            assert_eq!(row.len(), n, "rows must form a square matrix");
            data.extend_from_slice(row);
        }
        SymMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn check_symmetric(&self) -> Result<(), LinalgError> {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let defect = (self.get(i, j) - self.get(j, i)).abs();
                if defect > 1e-12 {
                    return Err(LinalgError::NotSymmetric { i, j, defect });
                }
            }
        }
        Ok(())
    }
}

/// Symmetric real matrix stored as its upper triangle, entry map keyed by
/// `(i, j)` with `i <= j`. Explicit zeros are never stored.
#[derive(Debug, Clone, Default)]
pub struct SparseSymMatrix {
    size: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SparseSymMatrix {
    pub fn new(size: usize) -> Self {
        SparseSymMatrix { size, entries: BTreeMap::new() }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn insert(&mut self, i: usize, j: usize, v: f64) -> Result<(), LinalgError> {
        if i >= self.size || j >= self.size {
            return Err(LinalgError::IndexOutOfRange(i, j, self.size));
        }
        let key = if i <= j { (i, j) } else { (j, i) };
        if v == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn to_dense(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.size);
        for (i, j, v) in self.iter() {
            m.set_sym(i, j, v);
        }
        m
    }
}

/// Eigenvalue counts under a zero-classification tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumCounts {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Sorted eigenvalues of a symmetric matrix plus their sign classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub tolerance: f64,
    pub counts: SpectrumCounts,
}

impl Spectrum {
    /// Sorts `eigenvalues` ascending and classifies each as negative, zero
    /// (|λ| <= tolerance), or positive.
    pub fn classify(mut eigenvalues: Vec<f64>, tolerance: f64) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues must not be NaN"));
        let mut counts = SpectrumCounts { negative: 0, zero: 0, positive: 0 };
        for &v in &eigenvalues {
            if v < -tolerance {
                counts.negative += 1;
            } else if v > tolerance {
                counts.positive += 1;
            } else {
                counts.zero += 1;
            }
        }
        Spectrum { eigenvalues, tolerance, counts }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest eigenvalue classified as strictly negative, if any.
    pub fn nearest_negative(&self) -> Option<f64> {
        self.eigenvalues.iter().copied().filter(|&v| v < -self.tolerance).fold(None, |acc, v| {
            Some(match acc {
                None => v,
                Some(a) if v > a => v,
                Some(a) => a,
            })
        })
    }

    /// One eigenvalue per row.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "eigenvalue")?;
        for &v in &self.eigenvalues {
            writeln!(w, "{}", crate::fmt_f64(v))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "tolerance": self.tolerance,
            "counts": self.counts,
            "eigenvalues": self.eigenvalues,
        })
    }
}

/// Eigenvalues of the symmetric 2x2 block `[[a_i, b_i], [b_j, a_j]]`,
/// returned ascending. The discriminant is computed as
/// `(a_i - a_j)^2 + 4 b_i b_j` and clamped at zero when within -1e-12;
/// anything lower signals inconsistent inputs.
pub fn block2x2_eigenvalues(
    a_i: f64,
    a_j: f64,
    b_i: f64,
    b_j: f64,
) -> Result<(f64, f64), LinalgError> {
    let mut disc = (a_i - a_j) * (a_i - a_j) + 4.0 * b_i * b_j;
    if disc < 0.0 {
        if disc < -1e-12 {
            return Err(LinalgError::NegativeDiscriminant(disc));
        }
        disc = 0.0;
    }
    let half_trace = 0.5 * (a_i + a_j);
    let r = 0.5 * disc.sqrt();
    Ok((half_trace - r, half_trace + r))
}

/// Eigenvalues (ascending) of a dense symmetric matrix, classified at
/// `tolerance`. Rejects asymmetric input and sizes above the cap.
pub fn symmetric_eigenvalues(m: &SymMatrix, tolerance: f64) -> Result<Spectrum, LinalgError> {
    if m.size() > DEFAULT_SIZE_CAP {
        return Err(LinalgError::SizeCap(m.size()));
    }
    m.check_symmetric()?;
    let mut work = m.clone();
    let n = work.n;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut work, &mut d, &mut e, false);
    ql_implicit(&mut d, &mut e, &mut Accumulator::None)?;
    Ok(Spectrum::classify(d, tolerance))
}

/// Eigenvalues (ascending) and an orthonormal eigenvector per eigenvalue.
pub fn symmetric_eigen_with_vectors(
    m: &SymMatrix,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), LinalgError> {
    if m.size() > DEFAULT_SIZE_CAP {
        return Err(LinalgError::SizeCap(m.size()));
    }
    m.check_symmetric()?;
    let mut work = m.clone();
    let n = work.n;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut work, &mut d, &mut e, true);
    ql_implicit(&mut d, &mut e, &mut Accumulator::Matrix(&mut work))?;
    // sort ascending, carrying vector columns along
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("eigenvalue NaN"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors: Vec<Vec<f64>> =
        order.iter().map(|&j| (0..n).map(|k| work.get(k, j)).collect()).collect();
    Ok((eigenvalues, vectors))
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `offdiag` (len n-1). This is
/// the Golub–Welsch workhorse: quadrature weights come from the squared first
/// components.
pub(crate) fn tridiagonal_eigen_first_components(
    diag: &[f64],
    offdiag: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let n = diag.len();
    assert_eq!(offdiag.len() + 1, n);
    let mut d = diag.to_vec();
    // ql_implicit expects e[0] unused, e[i] = subdiagonal entry i.
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(offdiag);
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    ql_implicit(&mut d, &mut e, &mut Accumulator::Row(&mut first))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("eigenvalue NaN"));
    let values = order.iter().map(|&i| d[i]).collect();
    let components = order.iter().map(|&i| first[i]).collect();
    Ok((values, components))
}

/// Cyclic Jacobi rotations (Numerical Recipes style, upper triangle only),
/// eigenvalues only. Used as an independent check of the QL path on matrices
/// small enough that its cost per sweep is irrelevant.
pub fn jacobi_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>, LinalgError> {
    m.check_symmetric()?;
    let n = m.size();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.clone();
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 1..=60usize {
        let mut sm = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                sm += a.get(p, q).abs();
            }
        }
        if sm == 0.0 {
            d.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalue NaN"));
            return Ok(d);
        }
        let tresh = if sweep < 4 { 0.2 * sm / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in (p + 1)..n {
                let g = 100.0 * a.get(p, q).abs();
                if sweep > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a.set_sym(p, q, 0.0);
                } else if a.get(p, q).abs() > tresh {
                    let mut h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        a.get(p, q) / h
                    } else {
                        let theta = 0.5 * h / a.get(p, q);
                        let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            t = -t;
                        }
                        t
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    h = t * a.get(p, q);
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    a.set_sym(p, q, 0.0);
                    let rot = |a: &mut SymMatrix, i1: usize, j1: usize, i2: usize, j2: usize| {
                        let g = a.get(i1, j1);
                        let h = a.get(i2, j2);
                        a.set_sym(i1, j1, g - s * (h + g * tau));
                        a.set_sym(i2, j2, h + s * (g - h * tau));
                    };
                    for j in 0..p {
                        rot(&mut a, j, p, j, q);
                    }
                    for j in (p + 1)..q {
                        rot(&mut a, p, j, j, q);
                    }
                    for j in (q + 1)..n {
                        rot(&mut a, p, j, q, j);
                    }
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }
    Err(LinalgError::NoConvergence(0))
}

enum Accumulator<'a> {
    None,
    /// Single row of the transform (first components of eigenvectors).
    Row(&'a mut [f64]),
    /// Full transform; columns end up as eigenvectors.
    Matrix(&'a mut SymMatrix),
}

impl Accumulator<'_> {
    #[inline]
    fn rotate(&mut self, i: usize, s: f64, c: f64) {
        match self {
            Accumulator::None => {}
            Accumulator::Row(row) => {
                let h = row[i + 1];
                row[i + 1] = s * row[i] + c * h;
                row[i] = c * row[i] - s * h;
            }
            Accumulator::Matrix(v) => {
                let n = v.n;
                for k in 0..n {
                    let h = v.data[k * n + i + 1];
                    v.data[k * n + i + 1] = s * v.data[k * n + i] + c * h;
                    v.data[k * n + i] = c * v.data[k * n + i] - s * h;
                }
            }
        }
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form
/// (EISPACK tred2). On exit `d` holds the diagonal and `e[1..]` the
/// subdiagonal. With `accumulate` the orthogonal transform is formed in `v`,
/// otherwise `v` is left as scratch.
fn householder_tridiagonalize(v: &mut SymMatrix, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = v.n;
    if n == 0 {
        return;
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.data[i * n + j] = 0.0;
                v.data[j * n + i] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                v.data[j * n + i] = f;
                let mut g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v.data[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v.get(i - 1, j);
                v.data[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..(n - 1) {
            v.data[(n - 1) * n + i] = v.get(i, i);
            v.data[i * n + i] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v.get(k, i + 1) / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v.get(k, i + 1) * v.get(k, j);
                    }
                    for k in 0..=i {
                        v.data[k * n + j] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v.data[k * n + i + 1] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v.get(n - 1, j);
            v.data[(n - 1) * n + j] = 0.0;
        }
        v.data[(n - 1) * n + n - 1] = 1.0;
    } else {
        // Without accumulation, d currently holds the Householder scalars;
        // the reduced diagonal sits on the (untouched) matrix diagonal.
        for j in 0..n {
            d[j] = v.get(j, j);
        }
    }
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on a tridiagonal matrix (EISPACK tql2).
/// `d` is the diagonal, `e[1..]` the subdiagonal; on success `d` holds the
/// (unsorted) eigenvalues and the accumulator has absorbed every rotation.
fn ql_implicit(d: &mut [f64], e: &mut [f64], accum: &mut Accumulator) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(LinalgError::NoConvergence(l));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    accum.rotate(i, s, c);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
