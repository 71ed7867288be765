use crate::error::{Error, Result};
use crate::lattice::{babai_nearest_plane, lll_reduce, LatticeBasis, DEFAULT_DELTA};
use crate::numerics::{mat_vec, pseudo_inverse, Matrix};
use crate::wiretap::{round_clamp, TransmitVector};

use super::{DecoderMethod, DecoderOutcome};

/// Cost guard for exhaustive ML search: `M^n` candidates at most.
pub const MAX_ML_CANDIDATES: f64 = 1e7;

fn check_dims(g: &Matrix, y: &[f64]) -> Result<()> {
    if y.len() != g.nrows() {
        return Err(Error::DimensionMismatch { expected: g.nrows(), found: y.len() });
    }
    if g.nrows() < g.ncols() {
        return Err(Error::DimensionMismatch { expected: g.ncols(), found: g.nrows() });
    }
    Ok(())
}

/// Zero forcing: `clamp(round(G⁺ y))`.
pub fn zf_decode(g: &Matrix, y: &[f64], m: u64) -> Result<DecoderOutcome> {
    check_dims(g, y)?;
    let pinv = pseudo_inverse(g)?;
    let soft = mat_vec(&pinv, y);
    let est = TransmitVector { symbols: soft.iter().map(|&v| round_clamp(v, m)).collect() };
    Ok(DecoderOutcome::new(est, DecoderMethod::Zf))
}

/// LLL-reduce the lattice spanned by the columns of `G`, decode with
/// nearest plane, map back through the unimodular transform and clamp.
pub fn babai_attack(g: &Matrix, y: &[f64], m: u64) -> Result<DecoderOutcome> {
    check_dims(g, y)?;
    let basis = LatticeBasis::new(g.clone())?;
    let red = lll_reduce(&basis, DEFAULT_DELTA);
    let (_, z) = babai_nearest_plane(&red.reduced, y)?;
    let coeffs = red.to_original(&z);
    let est = TransmitVector {
        symbols: coeffs.iter().map(|&c| c.clamp(0, m as i64 - 1) as u64).collect(),
    };
    Ok(DecoderOutcome::new(est, DecoderMethod::BabaiLll))
}

/// Exhaustive maximum likelihood over `[0, M)^n`: `argmin ‖y − Gx‖` with
/// lexicographic tie-break, by depth-first search on the triangular factor.
pub fn exact_ml_decode(g: &Matrix, y: &[f64], m: u64) -> Result<DecoderOutcome> {
    check_dims(g, y)?;
    let n = g.ncols();
    let space = (m as f64).powi(n as i32);
    if space > MAX_ML_CANDIDATES {
        return Err(Error::SearchSpaceTooLarge { size: space, limit: MAX_ML_CANDIDATES });
    }
    let qr = g.clone().qr();
    let r = qr.r();
    let q = qr.q();
    let yv = nalgebra::DVector::from_column_slice(y);
    let z: Vec<f64> = (q.transpose() * yv).iter().copied().collect();
    for i in 0..n {
        if r[(i, i)].abs() < 1e-300 {
            return Err(Error::RankDeficient { index: i, value: r[(i, i)] });
        }
    }

    // initial radius from a clamped back substitution
    let mut x0 = vec![0u64; n];
    for i in (0..n).rev() {
        let mut c = z[i];
        for j in i + 1..n {
            c -= r[(i, j)] * x0[j] as f64;
        }
        x0[i] = round_clamp(c / r[(i, i)], m);
    }
    let d0 = objective(&r, &z, &x0);

    let mut search = MlSearch {
        r: &r,
        z: &z,
        m,
        x: vec![0; n],
        best: x0,
        best_d: d0,
    };
    search.level(n - 1, 0.0);
    Ok(DecoderOutcome::new(TransmitVector { symbols: search.best }, DecoderMethod::ExactMl))
}

fn objective(r: &Matrix, z: &[f64], x: &[u64]) -> f64 {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut s = z[i];
            for j in i..n {
                s -= r[(i, j)] * x[j] as f64;
            }
            s * s
        })
        .sum()
}

struct MlSearch<'a> {
    r: &'a Matrix,
    z: &'a [f64],
    m: u64,
    x: Vec<u64>,
    best: Vec<u64>,
    best_d: f64,
}

impl MlSearch<'_> {
    fn tol(&self) -> f64 {
        1e-9 * self.best_d.max(1e-12)
    }

    fn level(&mut self, i: usize, partial: f64) {
        let n = self.x.len();
        let mut c = self.z[i];
        for j in i + 1..n {
            c -= self.r[(i, j)] * self.x[j] as f64;
        }
        let rii = self.r[(i, i)];
        let centre = c / rii;
        let rem = self.best_d + self.tol() - partial;
        if rem < 0.0 {
            return;
        }
        let half = rem.sqrt() / rii.abs();
        let lo = (centre - half).ceil().max(0.0);
        let hi = (centre + half).floor().min((self.m - 1) as f64);
        if lo > hi {
            return;
        }
        for v in lo as u64..=hi as u64 {
            let e = c - rii * v as f64;
            let d = partial + e * e;
            if d > self.best_d + self.tol() {
                continue;
            }
            self.x[i] = v;
            if i == 0 {
                let better = d < self.best_d - self.tol()
                    || (d <= self.best_d + self.tol() && self.x < self.best);
                if better {
                    self.best.clone_from(&self.x);
                    self.best_d = self.best_d.min(d);
                }
            } else {
                self.level(i - 1, d);
            }
        }
        self.x[i] = 0;
    }
}
