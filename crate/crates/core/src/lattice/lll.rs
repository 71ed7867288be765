use crate::error::{Error, Result};
use crate::numerics::{dot, Matrix};

use super::LatticeBasis;

pub const DEFAULT_DELTA: f64 = 0.99;

const MAX_PASSES: usize = 8;

/// Output of [`lll_reduce`].
///
/// `reduced = original · transform`, with `transform` unimodular.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub reduced: LatticeBasis,
    /// Column `j` holds the integer coefficients of reduced vector `j`
    /// in the original basis.
    pub transform: Vec<Vec<i64>>,
    pub swaps: usize,
    pub delta: f64,
}

impl ReductionResult {
    /// Maps coefficients w.r.t. the reduced basis back to the original one.
    pub fn to_original(&self, z: &[i64]) -> Vec<i64> {
        let n = z.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.transform[j][i] * z[j]).sum())
            .collect()
    }

    pub fn transform_matrix(&self) -> Matrix {
        let n = self.transform.len();
        Matrix::from_fn(n, n, |i, j| self.transform[j][i] as f64)
    }

    /// Exact determinant of the transform (fraction-free elimination).
    pub fn transform_determinant(&self) -> i128 {
        let n = self.transform.len();
        let mut a: Vec<Vec<i128>> = (0..n)
            .map(|i| (0..n).map(|j| self.transform[j][i] as i128).collect())
            .collect();
        bareiss_determinant(&mut a)
    }

    /// Checks size reduction and the Lovász condition on the reduced basis.
    pub fn is_reduced(&self, tol: f64) -> bool {
        let g = self.reduced.gso();
        let n = self.reduced.dim();
        for i in 0..n {
            for j in 0..i {
                if g.mu[(i, j)].abs() > 0.5 + tol {
                    return false;
                }
            }
        }
        (1..n).all(|k| {
            let m = g.mu[(k, k - 1)];
            g.norms_sq[k] >= (self.delta - m * m) * g.norms_sq[k - 1] * (1.0 - tol)
        })
    }
}

pub(crate) fn bareiss_determinant(a: &mut [Vec<i128>]) -> i128 {
    let n = a.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// `2^{n·log2(log2 n)/log2 n}`, the LLL-variant approximation factor.
pub fn lll_approximation_factor(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("approximation factor undefined for n = {n}")));
    }
    let l = (n as f64).log2();
    Ok(2f64.powf(n as f64 * l.log2() / l))
}

struct Gso {
    mu: Vec<Vec<f64>>,
    bsq: Vec<f64>,
}

fn compute_gso(cols: &[Vec<f64>]) -> Gso {
    let n = cols.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut bsq = vec![0.0; n];
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            let m = dot(&v, &bstar[j]) / bsq[j];
            mu[i][j] = m;
            for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                *vk -= m * bk;
            }
        }
        mu[i][i] = 1.0;
        bsq[i] = dot(&v, &v);
        bstar.push(v);
    }
    Gso { mu, bsq }
}

/// LLL reduction with Lovász parameter `delta ∈ (1/4, 1)`.
///
/// Gram-Schmidt data is kept in floating point and recomputed after every
/// swap; the integer transform is tracked exactly alongside.
pub fn lll_reduce(b: &LatticeBasis, delta: f64) -> ReductionResult {
    assert!(delta > 0.25 && delta < 1.0, "delta must lie in (1/4, 1)");
    let n = b.dim();
    let mut cols = b.columns();
    let mut transform: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| i64::from(i == j)).collect())
        .collect();
    let mut swaps = 0usize;

    for _ in 0..MAX_PASSES {
        let mut g = compute_gso(&cols);
        let mut k = 1usize;
        while k < n {
            size_reduce(&mut cols, &mut transform, &mut g, k, k - 1);
            let m = g.mu[k][k - 1];
            if g.bsq[k] < (delta - m * m) * g.bsq[k - 1] {
                cols.swap(k, k - 1);
                transform.swap(k, k - 1);
                swaps += 1;
                g = compute_gso(&cols);
                k = (k - 1).max(1);
            } else {
                for j in (0..k - 1).rev() {
                    size_reduce(&mut cols, &mut transform, &mut g, k, j);
                }
                k += 1;
            }
        }
        // recompute from the exact transform to shed accumulated rounding
        cols = apply_transform(b, &transform);
        let result = ReductionResult {
            reduced: LatticeBasis::new(Matrix::from_fn(b.ambient_dim(), n, |i, j| cols[j][i]))
                .expect("unimodular image of a basis is a basis"),
            transform: transform.clone(),
            swaps,
            delta,
        };
        if result.is_reduced(1e-9) {
            return result;
        }
    }
    let reduced = LatticeBasis::new(Matrix::from_fn(b.ambient_dim(), n, |i, j| cols[j][i]))
        .expect("unimodular image of a basis is a basis");
    log::warn!("LLL did not certify reduction after {MAX_PASSES} passes");
    ReductionResult { reduced, transform, swaps, delta }
}

fn size_reduce(cols: &mut [Vec<f64>], transform: &mut [Vec<i64>], g: &mut Gso, k: usize, l: usize) {
    let q = g.mu[k][l].round();
    if q == 0.0 {
        return;
    }
    let qi = q as i64;
    let (lo, hi) = cols.split_at_mut(k);
    for (a, b) in hi[0].iter_mut().zip(&lo[l]) {
        *a -= q * b;
    }
    let (lo, hi) = transform.split_at_mut(k);
    for (a, b) in hi[0].iter_mut().zip(&lo[l]) {
        *a -= qi * b;
    }
    for j in 0..l {
        g.mu[k][j] -= q * g.mu[l][j];
    }
    g.mu[k][l] -= q;
}

fn apply_transform(b: &LatticeBasis, transform: &[Vec<i64>]) -> Vec<Vec<f64>> {
    transform.iter().map(|c| b.point(c)).collect()
}
