//! Continuous Gaussians `Ψ_k`, lattice discrete Gaussians and distances
//! between distributions.
//!
//! Widths follow the convention `Ψ_k = N(0, k²/(2π))`: the standard
//! deviation is `k/√(2π)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::numerics::{dot, SeededRng};

/// Standard deviation of `Ψ_k`.
pub fn width_to_std(k: f64) -> f64 {
    k / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiParams {
    pub k: f64,
}

impl PsiParams {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("Gaussian width must be positive, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn std_dev(&self) -> f64 {
        width_to_std(self.k)
    }

    pub fn variance(&self) -> f64 {
        self.k * self.k / (2.0 * PI)
    }

    pub fn density(&self, x: f64) -> f64 {
        (-PI * x * x / (self.k * self.k)).exp() / self.k
    }
}

pub fn psi_sample(p: PsiParams, rng: &mut SeededRng) -> f64 {
    p.std_dev() * rng.standard_normal()
}

/// Draws from `Ψ_k`, treating `k = 0` as the point mass at zero.
pub(crate) fn psi_or_zero(k: f64, rng: &mut SeededRng) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        width_to_std(k) * rng.standard_normal()
    }
}

/// Exact total variational distance between `Ψ_{k1}` and `Ψ_{k2}`.
///
/// The densities cross at `±x*`; the distance is the mass difference of
/// `[-x*, x*]` under the two laws.
pub fn tvd_gaussians(p1: PsiParams, p2: PsiParams) -> f64 {
    let (s1, s2) = {
        let (a, b) = (p1.std_dev(), p2.std_dev());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    if s1 == s2 {
        return 0.0;
    }
    let x2 = 2.0 * s1 * s1 * s2 * s2 * (s2 / s1).ln() / (s2 * s2 - s1 * s1);
    let x = x2.sqrt();
    let d = erf(x / (s1 * std::f64::consts::SQRT_2)) - erf(x / (s2 * std::f64::consts::SQRT_2));
    d.clamp(0.0, 1.0)
}

/// Upper bound on the smoothing parameter:
/// `η_ε(L) ≤ √(ln(2n(1+1/ε))/π) · λ_n(L)`.
///
/// `λ_n` is exact for small rank and an LLL upper bound otherwise.
pub fn smoothing_upper_bound(basis: &LatticeBasis, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let lambda_n = basis.successive_minima()?.lambda_n();
    Ok(smoothing_factor(basis.dim(), epsilon) * lambda_n)
}

/// `√(ln(2n(1+1/ε))/π)`.
pub fn smoothing_factor(n: usize, epsilon: f64) -> f64 {
    ((2.0 * n as f64 * (1.0 + 1.0 / epsilon)).ln() / PI).sqrt()
}

/// The `ω(√log n)` factor of the sampler precondition, taken as `max(ln n, 1)`.
pub fn omega_sqrt_log(n: usize) -> f64 {
    (n as f64).ln().max(1.0)
}

/// Width below which [`DiscreteGaussianSampler`] refuses to run:
/// `max‖b*_i‖ · max(ln n, 1) · safety`.
pub fn sampler_threshold(basis: &LatticeBasis, safety: f64) -> f64 {
    basis.gso().max_norm() * omega_sqrt_log(basis.dim()) * safety
}

#[derive(Debug, Clone)]
pub struct DiscreteGaussianSpec {
    pub lattice: LatticeBasis,
    pub r: f64,
    pub center: Vec<f64>,
}

impl DiscreteGaussianSpec {
    pub fn new(lattice: LatticeBasis, r: f64) -> Self {
        let center = vec![0.0; lattice.ambient_dim()];
        Self { lattice, r, center }
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Self {
        self.center = center;
        self
    }

    /// Unnormalized mass `exp(-π‖v − c‖²/r²)` of a point.
    pub fn weight(&self, v: &[f64]) -> f64 {
        let d2: f64 = v.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        (-PI * d2 / (self.r * self.r)).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSample {
    pub point: Vec<f64>,
    pub coefficients: Vec<i64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    pub safety: f64,
    /// Sample even when `r` is below the threshold.
    pub allow_narrow: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { safety: 1.0, allow_narrow: false }
    }
}

/// Randomized nearest-plane sampler for `D_{L,r,c}`.
#[derive(Debug, Clone)]
pub struct DiscreteGaussianSampler {
    spec: DiscreteGaussianSpec,
    b_star: Vec<Vec<f64>>,
    norms_sq: Vec<f64>,
}

impl DiscreteGaussianSampler {
    pub fn new(spec: DiscreteGaussianSpec, opts: SamplerOptions) -> Result<Self> {
        if !(spec.r > 0.0 && spec.r.is_finite()) {
            return Err(Error::InvalidParameter(format!("sampler width must be positive, got {}", spec.r)));
        }
        if spec.center.len() != spec.lattice.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: spec.lattice.ambient_dim(), found: spec.center.len() });
        }
        let threshold = sampler_threshold(&spec.lattice, opts.safety);
        if spec.r <= threshold {
            if !opts.allow_narrow {
                return Err(Error::WidthTooSmall { width: spec.r, threshold });
            }
            log::warn!("sampling below threshold: r = {} <= {threshold}", spec.r);
        }
        let g = spec.lattice.gso();
        let b_star = (0..spec.lattice.dim()).map(|i| g.b_star.column(i).iter().copied().collect()).collect();
        let norms_sq = g.norms_sq.clone();
        Ok(Self { spec, b_star, norms_sq })
    }

    pub fn spec(&self) -> &DiscreteGaussianSpec {
        &self.spec
    }

    pub fn sample(&self, rng: &mut SeededRng) -> LatticeSample {
        let basis = &self.spec.lattice;
        let n = basis.dim();
        let mut t = self.spec.center.clone();
        let mut coefficients = vec![0i64; n];
        for i in (0..n).rev() {
            let c = dot(&t, &self.b_star[i]) / self.norms_sq[i];
            let s = self.spec.r / self.norms_sq[i].sqrt();
            let z = sample_z(s, c, rng);
            coefficients[i] = z;
            if z != 0 {
                let zf = z as f64;
                for (tk, bk) in t.iter_mut().zip(basis.matrix().column(i).iter()) {
                    *tk -= zf * bk;
                }
            }
        }
        LatticeSample { point: basis.point(&coefficients), coefficients }
    }
}

pub fn discrete_gaussian_sample(
    spec: &DiscreteGaussianSpec,
    opts: SamplerOptions,
    rng: &mut SeededRng,
) -> Result<LatticeSample> {
    Ok(DiscreteGaussianSampler::new(spec.clone(), opts)?.sample(rng))
}

/// One-dimensional discrete Gaussian `D_{Z,s,c}` with mass proportional to
/// `exp(-π(z − c)²/s²)`, by rejection from a two-sided geometric law
/// centred at `round(c)`.
pub fn sample_z(s: f64, c: f64, rng: &mut SeededRng) -> i64 {
    let z0 = c.round();
    let lambda = ((2.0 * PI).sqrt() / s).min(3.0);
    let log_bound = lambda / 2.0 + lambda * lambda * s * s / (4.0 * PI);
    loop {
        let u = 1.0 - rng.uniform();
        let m = (-u.ln() / lambda).floor();
        let negative = rng.bit();
        if m == 0.0 && negative {
            continue;
        }
        let z = if negative { z0 - m } else { z0 + m };
        let log_accept = -PI * (z - c) * (z - c) / (s * s) + lambda * m - log_bound;
        if rng.uniform().ln() < log_accept {
            return z as i64;
        }
    }
}

/// Combines two samples of a discrete MIMO distribution into one with
/// denser support: weights `c_i, c_j` uniform in `[1, 2^c_bits)`.
pub fn continuous_from_discrete(
    s1: (&[f64], f64),
    s2: (&[f64], f64),
    rng: &mut SeededRng,
    c_bits: u32,
) -> Result<(Vec<f64>, f64)> {
    if c_bits == 0 || c_bits > 62 {
        return Err(Error::InvalidParameter(format!("c_bits must be in 1..=62, got {c_bits}")));
    }
    let hi = 1u64 << c_bits;
    if hi == 2 {
        return combine_samples(s1, s2, 1, 1);
    }
    let ci = rng.uniform_int(1, hi);
    let cj = rng.uniform_int(1, hi);
    combine_samples(s1, s2, ci, cj)
}

/// `((c_i a_i + c_j a_j)/(c_i + c_j), (c_i y_i + c_j y_j)/(c_i + c_j))`.
pub fn combine_samples(s1: (&[f64], f64), s2: (&[f64], f64), ci: u64, cj: u64) -> Result<(Vec<f64>, f64)> {
    if s1.0.len() != s2.0.len() {
        return Err(Error::DimensionMismatch { expected: s1.0.len(), found: s2.0.len() });
    }
    if ci + cj == 0 {
        return Err(Error::InvalidParameter("weights sum to zero".into()));
    }
    let (wi, wj) = (ci as f64, cj as f64);
    let t = wi + wj;
    let a = s1.0.iter().zip(s2.0).map(|(x, y)| (wi * x + wj * y) / t).collect();
    Ok((a, (wi * s1.1 + wj * s2.1) / t))
}

/// Histogram estimate of the total variational distance between two
/// one-dimensional samples, with Scott's-rule bin width.
pub fn empirical_tvd(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::EmptyBatch);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let sd = crate::stats::std_dev(&pooled);
    let n_eff = a.len().min(b.len()) as f64;
    let h = 3.49 * sd * n_eff.powf(-1.0 / 3.0);
    let lo = pooled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(h > 0.0) || hi == lo {
        return Ok(0.0);
    }
    let bins = (((hi - lo) / h).ceil() as usize).max(1);
    let hist = |xs: &[f64]| {
        let mut counts = vec![0usize; bins];
        for &x in xs {
            let idx = (((x - lo) / h) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        counts
    };
    let (ha, hb) = (hist(a), hist(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    Ok(0.5 * ha.iter().zip(&hb).map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs()).sum::<f64>())
}
