//! Dense real linear algebra and reproducible randomness.
//!
//! Matrices are `nalgebra` dynamic matrices. Lattice bases are stored
//! column-wise throughout the crate, so `gram_schmidt` orthogonalizes
//! columns.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Condition numbers above this are rejected by inversion routines.
pub const MAX_CONDITION: f64 = 1e12;

const SVD_MAX_ITER_PER_DIM: usize = 1000;

/// Full singular value decomposition `a = U diag(sigma) Vᵀ`.
///
/// `u` is `m×m`, `v` is `n×n` and `sigma` has `min(m, n)` entries sorted
/// non-increasing.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdTriple {
    pub fn smallest_singular_value(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    pub fn largest_singular_value(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn condition_number(&self) -> f64 {
        let lo = self.smallest_singular_value();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            self.largest_singular_value() / lo
        }
    }

    /// `U diag(sigma) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut s = Matrix::zeros(m, n);
        for (i, &v) in self.sigma.iter().enumerate() {
            s[(i, i)] = v;
        }
        &self.u * s * self.v.transpose()
    }
}

pub fn svd(a: &Matrix) -> Result<SvdTriple> {
    let thin = thin_svd(a)?;
    Ok(SvdTriple { u: complete_orthonormal(&thin.u), sigma: thin.sigma, v: complete_orthonormal(&thin.v) })
}

/// Thin decomposition: `u` is `m×r`, `v` is `n×r` with `r = min(m, n)`.
fn thin_svd(a: &Matrix) -> Result<SvdTriple> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (m, n) = a.shape();
    let max_iter = SVD_MAX_ITER_PER_DIM * m.max(n);
    let dec = a
        .clone()
        .try_svd(true, true, f64::EPSILON, max_iter)
        .ok_or(Error::SvdNonConvergence { rows: m, cols: n })?;
    let u_thin = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v requested");
    let r = dec.singular_values.len();

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));

    let mut u = Matrix::zeros(m, r);
    let mut v = Matrix::zeros(n, r);
    let mut sigma = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(dec.singular_values[src].max(0.0));
        u.set_column(dst, &u_thin.column(src));
        v.set_column(dst, &v_t.row(src).transpose());
    }
    Ok(SvdTriple { u, sigma, v })
}

/// Extends orthonormal columns `q` (m×r) to an m×m orthogonal matrix.
fn complete_orthonormal(q: &Matrix) -> Matrix {
    let (m, r) = q.shape();
    if r == m {
        return q.clone();
    }
    let mut cols: Vec<Vec<f64>> = (0..r).map(|j| q.column(j).iter().copied().collect()).collect();
    for e in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = vec![0.0; m];
        v[e] = 1.0;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let p = dot(&v, c);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= p * ci;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            v.iter_mut().for_each(|x| *x /= nv);
            cols.push(v);
        }
    }
    Matrix::from_fn(m, m, |i, j| cols[j][i])
}

/// Gram-Schmidt data for a set of column vectors.
///
/// `b_i = b*_i + Σ_{j<i} mu[(i, j)] b*_j`; `mu` is unit lower-triangular.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    pub b_star: Matrix,
    pub mu: Matrix,
    pub norms_sq: Vec<f64>,
}

impl GramSchmidt {
    pub fn norms(&self) -> Vec<f64> {
        self.norms_sq.iter().map(|v| v.sqrt()).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.norms_sq.iter().fold(0.0_f64, |a, &b| a.max(b)).sqrt()
    }

    pub fn min_norm(&self) -> f64 {
        self.norms_sq.iter().fold(f64::INFINITY, |a, &b| a.min(b)).sqrt()
    }

    /// `Σ log ‖b*_i‖`, the log-volume of the spanned lattice.
    pub fn log_volume(&self) -> f64 {
        self.norms_sq.iter().map(|v| 0.5 * v.ln()).sum()
    }
}

pub fn gram_schmidt(b: &Matrix) -> Result<GramSchmidt> {
    let (d, n) = b.shape();
    let mut b_star = Matrix::zeros(d, n);
    let mut mu = Matrix::identity(n, n);
    let mut norms_sq = vec![0.0; n];
    for i in 0..n {
        let bi: Vec<f64> = b.column(i).iter().copied().collect();
        let mut v = bi.clone();
        for j in 0..i {
            let bj: Vec<f64> = b_star.column(j).iter().copied().collect();
            let m = dot(&v, &bj) / norms_sq[j];
            mu[(i, j)] = m;
            for (vk, bk) in v.iter_mut().zip(&bj) {
                *vk -= m * bk;
            }
        }
        let nsq = dot(&v, &v);
        let scale = dot(&bi, &bi);
        if !(nsq > 1e-24 * scale.max(f64::MIN_POSITIVE)) || scale == 0.0 {
            return Err(Error::DegenerateBasis { index: i });
        }
        norms_sq[i] = nsq;
        for (k, vk) in v.iter().enumerate() {
            b_star[(k, i)] = *vk;
        }
    }
    Ok(GramSchmidt { b_star, mu, norms_sq })
}

/// Moore-Penrose inverse of a full-column-rank matrix.
pub fn pseudo_inverse(a: &Matrix) -> Result<Matrix> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::DimensionMismatch { expected: n, found: m });
    }
    let dec = thin_svd(a)?;
    let cond = dec.condition_number();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition: cond });
    }
    let mut out = Matrix::zeros(n, m);
    for (i, &s) in dec.sigma.iter().enumerate() {
        let vi = dec.v.column(i);
        let ui = dec.u.column(i);
        out += (vi * ui.transpose()) / s;
    }
    Ok(out)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len());
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

pub fn mat_t_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.nrows(), x.len());
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)] * x[i]).sum())
        .collect()
}

/// Seeded ChaCha20 stream.
///
/// Each `(seed, stream)` pair names an independent, reproducible sequence;
/// Monte Carlo workers take one stream each.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Same seed, different stream.
    pub fn substream(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    /// Child generator keyed by the next output of this one.
    pub fn derive(&mut self) -> Self {
        let seed = self.inner.next_u64();
        Self::new(seed, self.stream)
    }

    /// Fresh 64-bit value suitable as a child seed.
    pub fn next_seed(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform integer in `[lo, hi)`.
    pub fn uniform_int(&mut self, lo: u64, hi: u64) -> u64 {
        self.inner.random_range(lo..hi)
    }

    pub fn bit(&mut self) -> bool {
        self.inner.random::<bool>()
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
