//! Bounded distance decoding from a MIMO search oracle.
//!
//! Dual-lattice discrete Gaussian samples `v ~ D_{L*,r}` are turned into
//! structured MIMO samples
//! `(k·v/r, k·⟨v, A⁻¹y⟩/(rM) + k·e/r)`, `e ~ Ψ_{α/√2}`,
//! whose hidden vector is the coefficient vector of the closest lattice
//! point modulo `M`. Coefficients are then lifted digit by digit.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::distributions::{
    psi_or_zero, smoothing_upper_bound, DiscreteGaussianSampler, DiscreteGaussianSpec, SamplerOptions,
};
use crate::error::{Error, Result};
use crate::lattice::{babai_nearest_plane, lll_reduce, LatticeBasis, ReductionResult, DEFAULT_DELTA};
use crate::numerics::{dot, mat_vec, norm, pseudo_inverse, svd, Matrix, SeededRng};
use crate::wiretap::{BatchLabel, NoiseForm, SampleBatch, SystemParams};

use super::SearchOracle;

#[derive(Debug, Clone)]
pub struct BddInstance {
    pub basis: LatticeBasis,
    pub target: Vec<f64>,
    /// Promised bound on the distance from `target` to the lattice.
    pub bound_d: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BddOptions {
    /// Target standard deviation of the oracle's per-coordinate
    /// least-squares estimate; sets the number of samples per call.
    pub estimation_std: f64,
    pub min_samples_per_dim: usize,
    pub max_samples: usize,
    pub max_lift_rounds: usize,
}

impl Default for BddOptions {
    fn default() -> Self {
        Self { estimation_std: 0.05, min_samples_per_dim: 64, max_samples: 400_000, max_lift_rounds: 16 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BddReport {
    pub point: Vec<f64>,
    /// Coefficients in the input basis.
    pub coefficients: Vec<i64>,
    /// Smallest singular value of the reduced basis.
    pub sigma: f64,
    /// Smallest eigenvalue of `AᵀA` (the alternative reading of `σ`).
    pub sigma_eigen: f64,
    pub eta_lattice: f64,
    pub eta_dual: f64,
    /// `M·σ·α/(k²·r·√2)`.
    pub d_max: f64,
    /// `√n/√2`.
    pub shrink_threshold: f64,
    pub shrinks: bool,
    /// `1/√(1/k² + (√2ξ/(Mα))²)`, `k/√2` and `(r/k)·η(L*)`.
    pub hiding: [f64; 3],
    pub samples_per_call: usize,
    pub lift_rounds: usize,
}

struct Setup {
    red: ReductionResult,
    a_inv: Matrix,
    sigma: f64,
    eta_lattice: f64,
    eta_dual: f64,
    d_max: f64,
    hiding: [f64; 3],
    dual_reduced: LatticeBasis,
}

fn setup(basis: &LatticeBasis, bound_d: f64, r: f64, p: &SystemParams) -> Result<Setup> {
    let n = basis.dim();
    if basis.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: basis.ambient_dim() });
    }
    if p.n != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.n });
    }
    if !(bound_d > 0.0) {
        return Err(Error::InvalidParameter(format!("bound_d must be positive, got {bound_d}")));
    }
    let red = lll_reduce(basis, DEFAULT_DELTA);
    let dec = svd(red.reduced.matrix())?;
    let sigma = dec.smallest_singular_value();
    let a_inv = pseudo_inverse(red.reduced.matrix())?;
    let eps = 2f64.powi(-(n as i32));

    let eta_lattice = smoothing_upper_bound(&red.reduced, eps)?;
    if !(r > SQRT_2 * eta_lattice) {
        return Err(Error::Precondition(format!(
            "r > sqrt(2)*eta(L) violated: r = {r}, sqrt(2)*eta(L) <= {}",
            SQRT_2 * eta_lattice
        )));
    }

    let (m, k, alpha) = (p.m as f64, p.k, p.alpha);
    let d_max = m * sigma * alpha / (k * k * r * SQRT_2);
    if !(bound_d < d_max) {
        return Err(Error::Precondition(format!(
            "d < M*sigma*alpha/(k^2*r*sqrt(2)) violated: d = {bound_d}, bound = {d_max}"
        )));
    }

    let dual = red.reduced.dual_basis()?;
    let dual_reduced = lll_reduce(&dual, DEFAULT_DELTA).reduced;
    let eta_dual = smoothing_upper_bound(&dual_reduced, eps)?;
    let xi = k * bound_d / sigma;
    let lhs = 1.0 / (1.0 / (k * k) + (SQRT_2 * xi / (m * alpha)).powi(2)).sqrt();
    let mid = k / SQRT_2;
    let rhs = r / k * eta_dual;
    if !(lhs >= mid && mid > rhs) {
        return Err(Error::Precondition(format!(
            "statistical hiding 1/sqrt(1/k^2+(sqrt(2)xi/(M alpha))^2) >= k/sqrt(2) > (r/k)*eta(L*) violated: {lhs} >= {mid} > {rhs}"
        )));
    }
    Ok(Setup { red, a_inv, sigma, eta_lattice, eta_dual, d_max, hiding: [lhs, mid, rhs], dual_reduced })
}

/// Solves BDD on `inst` using a MIMO search oracle, after checking the
/// width, distance and statistical-hiding preconditions.
pub fn bdd_via_mimo<O: SearchOracle + ?Sized>(
    inst: &BddInstance,
    r: f64,
    oracle: &mut O,
    p: &SystemParams,
    opts: &BddOptions,
    rng: &mut SeededRng,
) -> Result<BddReport> {
    let n = inst.basis.dim();
    if inst.target.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: inst.target.len() });
    }
    let s = setup(&inst.basis, inst.bound_d, r, p)?;
    let shrink_threshold = (n as f64).sqrt() / SQRT_2;
    let shrinks = s.d_max > shrink_threshold;
    if !shrinks {
        log::warn!("bounding distance {} does not exceed sqrt(n/2) = {shrink_threshold}", s.d_max);
    }
    log::debug!("sigma = {} (eigenvalue reading {})", s.sigma, s.sigma * s.sigma);

    let sampler = DiscreteGaussianSampler::new(
        DiscreteGaussianSpec::new(s.dual_reduced.clone(), r),
        SamplerOptions::default(),
    )?;
    let (m, k, alpha) = (p.m as f64, p.k, p.alpha);
    let noise_width = k * alpha / (SQRT_2 * r);
    let ratio = noise_width * m / (k * opts.estimation_std);
    let samples = ((ratio * ratio).ceil() as usize).clamp(opts.min_samples_per_dim * n, opts.max_samples.max(1));
    let oracle_params = SystemParams { noise_form: NoiseForm::Scaled, noise_scale: 1.0, ..p.clone() };

    let a = s.red.reduced.matrix();
    let mut y = inst.target.clone();
    let mut d = inst.bound_d;
    let min_gs = s.red.reduced.gso().min_norm();
    let mut digits: Vec<Vec<i64>> = Vec::new();
    loop {
        if digits.len() >= opts.max_lift_rounds {
            return Err(Error::ReductionFailure {
                coordinate: 0,
                reason: format!("lift did not converge in {} rounds", opts.max_lift_rounds),
            });
        }
        let digit = coefficients_mod_m(&y, a, &s.a_inv, &sampler, r, samples, oracle, &oracle_params, rng)?;
        let shift = mat_vec(a, &digit.iter().map(|&v| v as f64).collect::<Vec<_>>());
        for (yi, si) in y.iter_mut().zip(&shift) {
            *yi = (*yi - si) / m;
        }
        d /= m;
        digits.push(digit);
        if d < min_gs / 2.0 {
            break;
        }
    }
    let (_, mut coeffs) = babai_nearest_plane(&s.red.reduced, &y)?;
    for digit in digits.iter().rev() {
        for (c, dg) in coeffs.iter_mut().zip(digit) {
            *c = dg + p.m as i64 * *c;
        }
    }
    let coefficients = s.red.to_original(&coeffs);
    let point = inst.basis.point(&coefficients);
    let dist = norm(&inst.target.iter().zip(&point).map(|(t, q)| t - q).collect::<Vec<_>>());
    if dist > inst.bound_d * (1.0 + 1e-9) {
        return Err(Error::ReductionFailure {
            coordinate: n,
            reason: format!("recovered point at distance {dist} exceeds the bound {}", inst.bound_d),
        });
    }
    Ok(BddReport {
        point,
        coefficients,
        sigma: s.sigma,
        sigma_eigen: s.sigma * s.sigma,
        eta_lattice: s.eta_lattice,
        eta_dual: s.eta_dual,
        d_max: s.d_max,
        shrink_threshold,
        shrinks,
        hiding: s.hiding,
        samples_per_call: samples,
        lift_rounds: digits.len(),
    })
}

/// One oracle call: coefficient vector of the lattice point closest to `y`,
/// reduced modulo `M`. The target is first shifted by a lattice vector so
/// that the coefficients sit near the middle of `[0, M)`.
#[allow(clippy::too_many_arguments)]
fn coefficients_mod_m<O: SearchOracle + ?Sized>(
    y: &[f64],
    a: &Matrix,
    a_inv: &Matrix,
    sampler: &DiscreteGaussianSampler,
    r: f64,
    samples: usize,
    oracle: &mut O,
    p: &SystemParams,
    rng: &mut SeededRng,
) -> Result<Vec<i64>> {
    let m = p.m as i64;
    let u = mat_vec(a_inv, y);
    let t: Vec<i64> = u.iter().map(|&v| v.round() as i64 - m / 2).collect();
    let shift = mat_vec(a, &t.iter().map(|&v| v as f64).collect::<Vec<_>>());
    let y_shifted: Vec<f64> = y.iter().zip(&shift).map(|(a, b)| a - b).collect();
    let coords = mat_vec(a_inv, &y_shifted);

    let (k, mf) = (p.k, p.m as f64);
    let e_width = p.alpha / SQRT_2;
    let rows = (0..samples)
        .map(|_| {
            let v = sampler.sample(rng).point;
            let a_row: Vec<f64> = v.iter().map(|&x| k * x / r).collect();
            let yv = k * dot(&v, &coords) / (r * mf) + k * psi_or_zero(e_width, rng) / r;
            (a_row, yv)
        })
        .collect();
    let batch = SampleBatch { rows, label: BatchLabel::ADist };
    let x = oracle.solve(&batch, p)?;
    Ok(x.symbols.iter().zip(&t).map(|(&xi, &ti)| (xi as i64 + ti).rem_euclid(m)).collect())
}

/// A generated instance together with the parameters that make it satisfy
/// every precondition of [`bdd_via_mimo`].
#[derive(Debug, Clone)]
pub struct ToyBddInstance {
    pub instance: BddInstance,
    pub params: SystemParams,
    pub r: f64,
    /// Coefficients of the lattice point the target was built from.
    pub coefficients: Vec<i64>,
}

/// Parameters for a given basis: `r = 1.05·√2·η(L)`,
/// `k = √(1.1·√2·r·η(L*))`, `α = 1.05·k²·r·√n/(Mσ)`. Returns the params,
/// `r`, and the largest admissible distance bound
/// `min(0.9·d_max, 0.9·λ₁/2, σ/4)`; the last term keeps `‖A⁻¹δ‖ ≤ 1/4`.
pub fn toy_parameters(basis: &LatticeBasis, m: u64) -> Result<(SystemParams, f64, f64)> {
    let n = basis.dim();
    let eps = 2f64.powi(-(n as i32));
    let red = lll_reduce(basis, DEFAULT_DELTA);
    let sigma = svd(red.reduced.matrix())?.smallest_singular_value();
    let minima = basis.successive_minima()?;
    let eta_l = smoothing_upper_bound(&red.reduced, eps)?;
    let dual = lll_reduce(&red.reduced.dual_basis()?, DEFAULT_DELTA).reduced;
    let eta_d = smoothing_upper_bound(&dual, eps)?;
    let r = 1.05 * SQRT_2 * eta_l;
    let k = (1.1 * SQRT_2 * r * eta_d).sqrt();
    let alpha = 1.05 * k * k * r * (n as f64).sqrt() / (m as f64 * sigma);
    let d_max = m as f64 * sigma * alpha / (k * k * r * SQRT_2);
    let bound_d = (0.9 * d_max).min(0.9 * minima.lambda_1() / 2.0).min(sigma / 4.0);
    let params = SystemParams::new(n, m, alpha, k)?.with_noise_form(NoiseForm::Scaled);
    Ok((params, r, bound_d))
}

/// Random integer basis with entries in `[-6, 6]`, random coefficients in
/// `[-20, 20]` and an offset of norm below the admissible bound.
pub fn make_toy_bdd_instance(n: usize, m: u64, rng: &mut SeededRng) -> Result<ToyBddInstance> {
    for _ in 0..1000 {
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.uniform_int(0, 13) as f64 - 6.0).collect())
            .collect();
        let Ok(basis) = LatticeBasis::from_columns(&cols) else { continue };
        if basis.abs_determinant() < 0.5 {
            continue;
        }
        let Ok((params, r, bound_d)) = toy_parameters(&basis, m) else { continue };
        if setup(&basis, bound_d, r, &params).is_err() {
            continue;
        }
        if DiscreteGaussianSampler::new(
            DiscreteGaussianSpec::new(lll_reduce(&basis.dual_basis()?, DEFAULT_DELTA).reduced, r),
            SamplerOptions::default(),
        )
        .is_err()
        {
            continue;
        }
        let coefficients: Vec<i64> = (0..n).map(|_| rng.uniform_int(0, 41) as i64 - 20).collect();
        let dir: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let len = norm(&dir);
        let radius = bound_d * rng.uniform();
        let lattice_point = basis.point(&coefficients);
        let target = lattice_point.iter().zip(&dir).map(|(p, d)| p + radius * d / len).collect();
        return Ok(ToyBddInstance {
            instance: BddInstance { basis, target, bound_d },
            params,
            r,
            coefficients,
        });
    }
    Err(Error::SearchFailure { attempts: 1000 })
}
