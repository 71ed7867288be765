//! Exact enumeration (Fincke-Pohst style) over LLL-reduced bases.

use crate::error::{Error, Result};
use crate::numerics::{dot, norm, Matrix};

use super::{babai_nearest_plane, lll_reduce, LatticeBasis, MinimaEstimate, DEFAULT_DELTA};

/// Default cost guard on enumeration dimension.
pub const MAX_ENUM_DIM: usize = 8;

/// Cap on stored vectors while computing successive minima.
const MAX_STORED_VECTORS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationLimit {
    /// Refuse bases of larger rank.
    Dim(usize),
    /// Caller accepts the exponential cost.
    Unbounded,
}

impl Default for EnumerationLimit {
    fn default() -> Self {
        Self::Dim(MAX_ENUM_DIM)
    }
}

impl EnumerationLimit {
    fn check(self, dim: usize) -> Result<()> {
        match self {
            Self::Dim(limit) if dim > limit => Err(Error::DimensionTooLarge { dim, limit }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvpSolution {
    pub vector: Vec<f64>,
    /// Coefficients in the input basis.
    pub coefficients: Vec<i64>,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct CvpSolution {
    pub point: Vec<f64>,
    pub coefficients: Vec<i64>,
    pub distance: f64,
}

/// Depth-first search over integer vectors `z` whose partial squared
/// distance `Σ_i (c_i − z_i − Σ_{j>i} μ_ji z_j)² ‖b*_i‖²` stays within the
/// radius. `visit` sees every full vector in range and returns the (possibly
/// shrunk) radius.
struct Enumerator<'a, F> {
    mu: &'a Matrix,
    bsq: &'a [f64],
    centre: &'a [f64],
    z: Vec<i64>,
    radius_sq: f64,
    visit: F,
}

impl<F: FnMut(&[i64], f64) -> f64> Enumerator<'_, F> {
    fn run(&mut self) {
        let n = self.bsq.len();
        self.level(n - 1, 0.0);
    }

    fn level(&mut self, i: usize, partial: f64) {
        let n = self.bsq.len();
        let mut c = self.centre[i];
        for j in i + 1..n {
            c -= self.mu[(j, i)] * self.z[j] as f64;
        }
        let b = self.bsq[i];
        let rem = self.radius_sq - partial;
        if rem < 0.0 {
            return;
        }
        let half = (rem / b).sqrt();
        let lo = (c - half).ceil() as i64;
        let hi = (c + half).floor() as i64;
        for zi in lo..=hi {
            let d = partial + (c - zi as f64).powi(2) * b;
            if d > self.radius_sq {
                continue;
            }
            self.z[i] = zi;
            if i == 0 {
                let z = self.z.clone();
                self.radius_sq = (self.visit)(&z, d);
            } else {
                self.level(i - 1, d);
            }
        }
        self.z[i] = 0;
    }
}

fn enumerate<F: FnMut(&[i64], f64) -> f64>(basis: &LatticeBasis, centre: &[f64], radius_sq: f64, visit: F) {
    let g = basis.gso();
    let mut e = Enumerator {
        mu: &g.mu,
        bsq: &g.norms_sq,
        centre,
        z: vec![0; basis.dim()],
        radius_sq,
        visit,
    };
    e.run();
}

fn lex_less(a: &[i64], b: &[i64]) -> bool {
    a.cmp(b) == std::cmp::Ordering::Less
}

/// Exact shortest nonzero vector.
pub fn enumerate_svp(b: &LatticeBasis, limit: EnumerationLimit) -> Result<SvpSolution> {
    limit.check(b.dim())?;
    let red = lll_reduce(b, DEFAULT_DELTA);
    let rb = &red.reduced;
    let radius_sq = rb
        .column_norms()
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min(v * v))
        * (1.0 + 1e-9);
    let centre = vec![0.0; b.dim()];
    let mut best: Option<(Vec<i64>, f64)> = None;
    enumerate(rb, &centre, radius_sq, |z, d| {
        if z.iter().all(|&v| v == 0) {
            return radius_sq;
        }
        let better = match &best {
            None => true,
            Some((bz, bd)) => d < bd * (1.0 - 1e-12) || (d <= bd * (1.0 + 1e-12) && lex_less(z, bz)),
        };
        if better {
            best = Some((z.to_vec(), d));
        }
        best.as_ref().map_or(radius_sq, |(_, bd)| bd * (1.0 + 1e-9))
    });
    let (z, _) = best.expect("a basis vector lies within the initial radius");
    let vector = rb.point(&z);
    Ok(SvpSolution { length: norm(&vector), coefficients: red.to_original(&z), vector })
}

/// Exact closest lattice point; ties go to the lexicographically smallest
/// coefficient vector in the input basis.
pub fn enumerate_cvp(b: &LatticeBasis, target: &[f64], limit: EnumerationLimit) -> Result<CvpSolution> {
    limit.check(b.dim())?;
    if target.len() != b.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: b.ambient_dim(), found: target.len() });
    }
    let red = lll_reduce(b, DEFAULT_DELTA);
    let rb = &red.reduced;
    let g = rb.gso();
    let n = rb.dim();
    let centre: Vec<f64> = (0..n)
        .map(|i| {
            let bs: Vec<f64> = g.b_star.column(i).iter().copied().collect();
            dot(target, &bs) / g.norms_sq[i]
        })
        .collect();
    // squared distance of the target to span(B)
    let mut proj = vec![0.0; target.len()];
    for i in 0..n {
        for (k, p) in proj.iter_mut().enumerate() {
            *p += centre[i] * g.b_star[(k, i)];
        }
    }
    let perp_sq: f64 = target.iter().zip(&proj).map(|(t, p)| (t - p).powi(2)).sum();

    let (babai_point, _) = babai_nearest_plane(rb, target)?;
    let babai_sq: f64 = target.iter().zip(&babai_point).map(|(t, p)| (t - p).powi(2)).sum();
    let radius_sq = (babai_sq - perp_sq).max(0.0) * (1.0 + 1e-9) + 1e-12 * babai_sq.max(1.0);

    let mut best: Option<(Vec<i64>, f64)> = None;
    enumerate(rb, &centre, radius_sq, |z, d| {
        let x = red.to_original(z);
        let better = match &best {
            None => true,
            Some((bx, bd)) => {
                let tol = 1e-9 * bd.max(1e-12);
                d < bd - tol || ((d - bd).abs() <= tol && lex_less(&x, bx))
            }
        };
        if better {
            let keep = best.as_ref().map_or(d, |(_, bd)| d.min(*bd));
            best = Some((x, keep));
        }
        let bd = best.as_ref().map_or(radius_sq, |(_, bd)| *bd);
        bd + 1e-9 * bd.max(1e-12)
    });
    let (coefficients, _) = best.expect("Babai point lies within the initial radius");
    let point = b.point(&coefficients);
    let distance = norm(&target.iter().zip(&point).map(|(t, p)| t - p).collect::<Vec<_>>());
    Ok(CvpSolution { point, coefficients, distance })
}

pub(super) fn successive_minima(b: &LatticeBasis, limit: EnumerationLimit) -> Result<MinimaEstimate> {
    limit.check(b.dim())?;
    let n = b.dim();
    let red = lll_reduce(b, DEFAULT_DELTA);
    let rb = &red.reduced;
    let max_col = rb.column_norms().iter().fold(0.0_f64, |a, &v| a.max(v));
    let radius_sq = max_col * max_col * (1.0 + 1e-9);
    let centre = vec![0.0; n];
    let mut found: Vec<(f64, Vec<i64>)> = Vec::new();
    let mut overflow = false;
    enumerate(rb, &centre, radius_sq, |z, d| {
        // keep one of ±z
        if let Some(&first) = z.iter().find(|&&v| v != 0) {
            if first > 0 {
                if found.len() < MAX_STORED_VECTORS {
                    found.push((d, z.to_vec()));
                } else {
                    overflow = true;
                }
            }
        }
        radius_sq
    });
    if overflow {
        return Err(Error::SearchSpaceTooLarge { size: MAX_STORED_VECTORS as f64, limit: MAX_STORED_VECTORS as f64 });
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    // greedy selection of independent vectors; independence tested on the
    // integer coefficient vectors
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for (_, z) in &found {
        let mut v: Vec<f64> = z.iter().map(|&x| x as f64).collect();
        let scale = norm(&v);
        for o in &ortho {
            let p = dot(&v, o);
            for (vi, oi) in v.iter_mut().zip(o) {
                *vi -= p * oi;
            }
        }
        let r = norm(&v);
        if r > 1e-9 * scale {
            v.iter_mut().for_each(|x| *x /= r);
            ortho.push(v);
            let point = rb.point(z);
            values.push(norm(&point));
            vectors.push(point);
            if ortho.len() == n {
                break;
            }
        }
    }
    debug_assert_eq!(values.len(), n);
    Ok(MinimaEstimate { values, vectors, exact: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapSvpAnswer {
    Yes,
    No,
    Unresolved,
}

/// Exact small-dimension GapSVP: YES if `λ₁ ≤ d`, NO if `λ₁ > γ·d`.
pub fn gapsvp_decide(b: &LatticeBasis, d: f64, gamma: f64, limit: EnumerationLimit) -> Result<GapSvpAnswer> {
    if !(gamma >= 1.0) || !(d > 0.0) {
        return Err(Error::InvalidParameter("GapSVP needs d > 0 and gamma >= 1".into()));
    }
    let l1 = enumerate_svp(b, limit)?.length;
    Ok(if l1 <= d {
        GapSvpAnswer::Yes
    } else if l1 > gamma * d {
        GapSvpAnswer::No
    } else {
        GapSvpAnswer::Unresolved
    })
}

/// `n` linearly independent vectors of length at most `γ·λ_n`, taken from
/// the exact successive minima.
pub fn sivp_solve_small(b: &LatticeBasis, gamma: f64) -> Result<Vec<Vec<f64>>> {
    if !(gamma >= 1.0) {
        return Err(Error::InvalidParameter("SIVP needs gamma >= 1".into()));
    }
    let m = successive_minima(b, EnumerationLimit::Dim(super::EXACT_MINIMA_MAX_DIM))?;
    Ok(m.vectors)
}
