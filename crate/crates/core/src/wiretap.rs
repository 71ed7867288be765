//! The MIMO wiretap system: channel draws, SVD precoding, Bob's receiver,
//! Eve's observation and the structured/unstructured sample generators.

use serde::{Deserialize, Serialize};

use crate::distributions::{psi_or_zero, width_to_std};
use crate::error::{Error, Result};
use crate::numerics::{dot, mat_t_vec, mat_vec, svd, Matrix, SeededRng, SvdTriple};

/// Singular values below this make Bob's receiver refuse to decode.
pub const MIN_SINGULAR_VALUE: f64 = 1e-12;

/// How the noise enters a structured sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseForm {
    /// `y = ⟨a, x⟩ + e`, `e ~ Ψ_{Mα}`.
    #[default]
    Unscaled,
    /// `y = ⟨a, x⟩/M + e`, `e ~ Ψ_α`.
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Transmit antennas.
    pub n: usize,
    /// Receive antennas.
    pub m_rx: usize,
    /// Constellation size.
    #[serde(rename = "M")]
    pub m: u64,
    pub alpha: f64,
    pub k: f64,
    pub m_slack: f64,
    /// Expected transmit norm.
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(default)]
    pub noise_form: NoiseForm,
    /// Multiplies every noise width; `0` switches noise off.
    #[serde(default = "one")]
    pub noise_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl SystemParams {
    /// Square system (`m_rx = n`), `m_slack = 1`, `P` set to the expected
    /// norm of a uniform transmit vector.
    pub fn new(n: usize, m: u64, alpha: f64, k: f64) -> Result<Self> {
        let p = Self {
            n,
            m_rx: n,
            m,
            alpha,
            k,
            m_slack: 1.0,
            p: expected_norm(n, m),
            noise_form: NoiseForm::Unscaled,
            noise_scale: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_m_rx(mut self, m_rx: usize) -> Result<Self> {
        self.m_rx = m_rx;
        self.validate()?;
        Ok(self)
    }

    pub fn with_m_slack(mut self, m_slack: f64) -> Result<Self> {
        self.m_slack = m_slack;
        self.validate()?;
        Ok(self)
    }

    pub fn with_noise_scale(mut self, scale: f64) -> Result<Self> {
        self.noise_scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn with_noise_form(mut self, form: NoiseForm) -> Self {
        self.noise_form = form;
        self
    }

    pub fn noiseless(self) -> Self {
        Self { noise_scale: 0.0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.m < 2 {
            return bad(format!("constellation size must be at least 2, got {}", self.m));
        }
        let n3 = (self.n as u128).pow(3);
        if self.m_rx == 0 || self.m_rx as u128 > n3 {
            return bad(format!("m_rx = {} outside [1, n^3]", self.m_rx));
        }
        for (name, v) in [("alpha", self.alpha), ("k", self.k), ("m_slack", self.m_slack), ("P", self.p)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return bad(format!("noise_scale must be non-negative, got {}", self.noise_scale));
        }
        if self.m_rx > 16 * self.n {
            log::warn!("m_rx = {} exceeds 16n = {}", self.m_rx, 16 * self.n);
        }
        Ok(())
    }

    /// Width of the physical channel noise, `Mα` times the noise scale.
    pub fn channel_noise_width(&self) -> f64 {
        self.m as f64 * self.alpha * self.noise_scale
    }

    /// Gain applied to `⟨a, x⟩` in a structured sample.
    pub fn inner_product_gain(&self) -> f64 {
        match self.noise_form {
            NoiseForm::Unscaled => 1.0,
            NoiseForm::Scaled => 1.0 / self.m as f64,
        }
    }

    /// Width of the additive noise in a structured sample.
    pub fn sample_noise_width(&self) -> f64 {
        match self.noise_form {
            NoiseForm::Unscaled => self.m as f64 * self.alpha * self.noise_scale,
            NoiseForm::Scaled => self.alpha * self.noise_scale,
        }
    }

    /// Width of `ψ` in the unstructured distribution, chosen so that its
    /// second moment matches a structured sample with `‖x‖ = P`.
    pub fn r_dist_width(&self) -> f64 {
        let s = self.k * self.p * self.inner_product_gain();
        s.hypot(self.sample_noise_width())
    }

    /// Bits per transmitted symbol, `ceil(log2 M)`.
    pub fn bits_per_symbol(&self) -> usize {
        bits_per_symbol(self.m)
    }
}

pub fn bits_per_symbol(m: u64) -> usize {
    (64 - (m - 1).leading_zeros()) as usize
}

/// `E‖x‖` approximated by `√(n (M−1)(2M−1)/6)`, the root mean square norm of
/// a uniform vector in `[0, M)^n`.
pub fn expected_norm(n: usize, m: u64) -> f64 {
    let m = m as f64;
    (n as f64 * (m - 1.0) * (2.0 * m - 1.0) / 6.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransmitVector {
    pub symbols: Vec<u64>,
}

impl TransmitVector {
    pub fn new(symbols: Vec<u64>, m: u64) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| s >= m) {
            return Err(Error::InvalidParameter(format!("symbol {s} outside [0, {m})")));
        }
        Ok(Self { symbols })
    }

    pub fn zeros(n: usize) -> Self {
        Self { symbols: vec![0; n] }
    }

    pub fn random(n: usize, m: u64, rng: &mut SeededRng) -> Self {
        Self { symbols: (0..n).map(|_| rng.uniform_int(0, m)).collect() }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.symbols.iter().map(|&s| s as f64).collect()
    }

    pub fn symbol_errors(&self, other: &Self) -> usize {
        self.symbols.iter().zip(&other.symbols).filter(|(a, b)| a != b).count()
    }

    /// Differing bits between the natural binary labels of the symbols.
    pub fn bit_errors(&self, other: &Self) -> usize {
        self.symbols.iter().zip(&other.symbols).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }
}

/// Rounds half-up and clamps to `[0, M)`.
pub fn round_clamp(v: f64, m: u64) -> u64 {
    let r = (v + 0.5).floor();
    if r.is_nan() || r <= 0.0 {
        0
    } else if r >= (m - 1) as f64 {
        m - 1
    } else {
        r as u64
    }
}

#[derive(Debug, Clone)]
pub struct WiretapInstance {
    /// Alice to Bob, `m_rx × n`.
    pub a: Matrix,
    /// Alice to Eve, `m_rx × n`.
    pub b: Matrix,
    pub svd_a: SvdTriple,
    origin: Option<InstanceOrigin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct InstanceOrigin {
    a_seed: u64,
    b_seed: u64,
    stream: u64,
}

/// Serialized form of a [`WiretapInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub n: usize,
    pub m_rx: usize,
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    /// Row-major matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
}

fn gaussian_matrix(rows: usize, cols: usize, k: f64, rng: &mut SeededRng) -> Matrix {
    let sd = width_to_std(k);
    // fill row by row so the draw order matches the row-major document
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = sd * rng.standard_normal();
        }
    }
    m
}

fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<Matrix> {
    if rows.len() != nrows {
        return Err(Error::DimensionMismatch { expected: nrows, found: rows.len() });
    }
    if let Some(r) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch { expected: ncols, found: r.len() });
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl WiretapInstance {
    /// Builds an instance from explicit gain matrices.
    pub fn from_matrices(a: Matrix, b: Matrix) -> Result<Self> {
        if a.shape() != b.shape() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
        }
        let svd_a = svd(&a)?;
        Ok(Self { a, b, svd_a, origin: None })
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn m_rx(&self) -> usize {
        self.a.nrows()
    }

    pub fn v(&self) -> &Matrix {
        &self.svd_a.v
    }

    pub fn to_document(&self, k: f64, include_matrices: bool) -> InstanceDocument {
        let o = self.origin;
        let with = include_matrices || o.is_none();
        InstanceDocument {
            n: self.n(),
            m_rx: self.m_rx(),
            k,
            a_seed: o.map(|o| o.a_seed),
            b_seed: o.map(|o| o.b_seed),
            stream: o.map(|o| o.stream),
            a: with.then(|| to_rows(&self.a)),
            b: with.then(|| to_rows(&self.b)),
        }
    }

    /// Rebuilds an instance from raw matrices if present, otherwise from
    /// the recorded seeds.
    pub fn from_document(doc: &InstanceDocument) -> Result<Self> {
        if let (Some(a), Some(b)) = (&doc.a, &doc.b) {
            let a = from_rows(a, doc.m_rx, doc.n)?;
            let b = from_rows(b, doc.m_rx, doc.n)?;
            let mut inst = Self::from_matrices(a, b)?;
            if let (Some(a_seed), Some(b_seed), Some(stream)) = (doc.a_seed, doc.b_seed, doc.stream) {
                inst.origin = Some(InstanceOrigin { a_seed, b_seed, stream });
            }
            return Ok(inst);
        }
        match (doc.a_seed, doc.b_seed, doc.stream) {
            (Some(a_seed), Some(b_seed), Some(stream)) => {
                build_from_seeds(doc.n, doc.m_rx, doc.k, InstanceOrigin { a_seed, b_seed, stream })
            }
            _ => Err(Error::Config("instance document has neither matrices nor seeds".into())),
        }
    }
}

fn build_from_seeds(n: usize, m_rx: usize, k: f64, origin: InstanceOrigin) -> Result<WiretapInstance> {
    let a = gaussian_matrix(m_rx, n, k, &mut SeededRng::new(origin.a_seed, origin.stream));
    let b = gaussian_matrix(m_rx, n, k, &mut SeededRng::new(origin.b_seed, origin.stream));
    let mut inst = WiretapInstance::from_matrices(a, b)?;
    inst.origin = Some(origin);
    Ok(inst)
}

/// Draws `A` and `B` with i.i.d. `Ψ_k` entries from two child streams.
pub fn make_instance(p: &SystemParams, rng: &mut SeededRng) -> Result<WiretapInstance> {
    p.validate()?;
    let a_seed = rng.next_seed();
    let b_seed = rng.next_seed();
    build_from_seeds(p.n, p.m_rx, p.k, InstanceOrigin { a_seed, b_seed, stream: rng.stream() })
}

fn check_len(x: &TransmitVector, n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    Ok(())
}

/// Alice's precoding `x̃ = V x`.
pub fn precode(inst: &WiretapInstance, x: &TransmitVector) -> Result<Vec<f64>> {
    check_len(x, inst.n())?;
    Ok(mat_vec(inst.v(), &x.as_f64()))
}

fn channel_noise(len: usize, p: &SystemParams, rng: &mut SeededRng) -> Vec<f64> {
    let w = p.channel_noise_width();
    (0..len).map(|_| psi_or_zero(w, rng)).collect()
}

/// `y = A V x + e` with `e ~ Ψ_{Mα}` per receive antenna.
pub fn transmit_to_bob(
    inst: &WiretapInstance,
    x: &TransmitVector,
    p: &SystemParams,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let xt = precode(inst, x)?;
    let mut y = mat_vec(&inst.a, &xt);
    for (yi, e) in y.iter_mut().zip(channel_noise(inst.m_rx(), p, rng)) {
        *yi += e;
    }
    Ok(y)
}

/// Bob's receiver shaping `Uᵀ y`.
pub fn bob_shape(inst: &WiretapInstance, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != inst.m_rx() {
        return Err(Error::DimensionMismatch { expected: inst.m_rx(), found: y.len() });
    }
    Ok(mat_t_vec(&inst.svd_a.u, y))
}

/// Per-stream soft estimates `(Uᵀ y)_i / σ_i`.
pub fn bob_equalize(inst: &WiretapInstance, y: &[f64]) -> Result<Vec<f64>> {
    let n = inst.n();
    let sigma = &inst.svd_a.sigma;
    if sigma.len() < n {
        return Err(Error::RankDeficient { index: sigma.len(), value: 0.0 });
    }
    if let Some((i, &s)) = sigma.iter().enumerate().take(n).find(|(_, &s)| !(s >= MIN_SINGULAR_VALUE)) {
        return Err(Error::RankDeficient { index: i, value: s });
    }
    let shaped = bob_shape(inst, y)?;
    Ok((0..n).map(|i| shaped[i] / sigma[i]).collect())
}

/// Bob's linear-time decoder: equalize each stream, round, clamp.
pub fn bob_decode(inst: &WiretapInstance, y: &[f64], p: &SystemParams) -> Result<TransmitVector> {
    let soft = bob_equalize(inst, y)?;
    Ok(TransmitVector { symbols: soft.iter().map(|&v| round_clamp(v, p.m)).collect() })
}

/// Eve's effective channel `G = B V` and observation `y = G x + e`.
pub fn eve_receive(
    inst: &WiretapInstance,
    x: &TransmitVector,
    p: &SystemParams,
    rng: &mut SeededRng,
) -> Result<(Matrix, Vec<f64>)> {
    check_len(x, inst.n())?;
    let g = &inst.b * inst.v();
    let mut y = mat_vec(&g, &x.as_f64());
    for (yi, e) in y.iter_mut().zip(channel_noise(inst.m_rx(), p, rng)) {
        *yi += e;
    }
    Ok((g, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BatchLabel {
    ADist,
    RDist,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub rows: Vec<(Vec<f64>, f64)>,
    pub label: BatchLabel,
}

impl SampleBatch {
    pub fn new(rows: Vec<(Vec<f64>, f64)>, label: BatchLabel) -> Result<Self> {
        if let Some(first) = rows.first() {
            let n = first.0.len();
            for (a, y) in &rows {
                if a.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: a.len() });
                }
                if !y.is_finite() || a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(Self { rows, label })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.0.len())
    }

    pub fn ys(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }

    /// Rows of `a` as a matrix, scaled by `gain`.
    pub fn gain_matrix(&self, gain: f64) -> Matrix {
        Matrix::from_fn(self.len(), self.dim(), |i, j| gain * self.rows[i].0[j])
    }

    pub fn with_label(mut self, label: BatchLabel) -> Self {
        self.label = label;
        self
    }
}

fn gain_row(n: usize, k: f64, rng: &mut SeededRng) -> Vec<f64> {
    let sd = width_to_std(k);
    (0..n).map(|_| sd * rng.standard_normal()).collect()
}

/// Structured samples `(a_i, g·⟨a_i, x⟩ + e_i)`; the gain `g` and the noise
/// width follow `p.noise_form`.
pub fn sample_a_dist(x: &TransmitVector, p: &SystemParams, rng: &mut SeededRng, count: usize) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    check_len(x, p.n)?;
    let xf = x.as_f64();
    let gain = p.inner_product_gain();
    let w = p.sample_noise_width();
    let rows = (0..count)
        .map(|_| {
            let a = gain_row(p.n, p.k, rng);
            let y = gain * dot(&a, &xf) + psi_or_zero(w, rng);
            (a, y)
        })
        .collect();
    Ok(SampleBatch { rows, label: BatchLabel::ADist })
}

/// Unstructured samples `(a_i, ψ_i)` with `ψ_i ~ Ψ_w` independent of `a_i`.
pub fn sample_r_dist(p: &SystemParams, rng: &mut SeededRng, count: usize) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    p.validate()?;
    let w = p.r_dist_width();
    let rows = (0..count)
        .map(|_| {
            let a = gain_row(p.n, p.k, rng);
            (a, psi_or_zero(w, rng))
        })
        .collect();
    Ok(SampleBatch { rows, label: BatchLabel::RDist })
}
