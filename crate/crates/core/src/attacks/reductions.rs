use std::f64::consts::PI;

use crate::distributions::psi_or_zero;
use crate::error::{Error, Result};
use crate::numerics::{dot, SeededRng};
use crate::wiretap::{BatchLabel, NoiseForm, SampleBatch, SystemParams, TransmitVector};

use super::decoders::exact_ml_decode;
use super::{DecisionOracle, SearchOracle};

/// Largest constellation the decision-to-search loop will enumerate.
pub const DECISION_MAX_M: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

/// Residual standard deviation separating the two hypotheses: the midpoint
/// of `w/√(2π)` (correct candidate) and `√(w² + (k·g)²)/√(2π)` (any wrong
/// candidate), `w` the sample noise width and `g` the inner-product gain.
pub fn verify_threshold(p: &SystemParams) -> f64 {
    let w = p.sample_noise_width();
    let kg = p.k * p.inner_product_gain();
    (w + w.hypot(kg)) / 2.0 / (2.0 * PI).sqrt()
}

/// Accepts iff the root-mean-square residual `y_i − g⟨a_i, x'⟩` is below
/// [`verify_threshold`]. Both hypotheses have zero-mean residuals, so the
/// RMS about zero estimates their standard deviation.
pub fn verify_solution(batch: &SampleBatch, candidate: &TransmitVector, p: &SystemParams) -> Result<Verdict> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if candidate.len() != batch.dim() {
        return Err(Error::DimensionMismatch { expected: batch.dim(), found: candidate.len() });
    }
    let c = candidate.as_f64();
    let g = p.inner_product_gain();
    let ss: f64 = batch.rows.iter().map(|(a, y)| (y - g * dot(a, &c)).powi(2)).sum();
    let rms = (ss / batch.len() as f64).sqrt();
    Ok(if rms < verify_threshold(p) { Verdict::Accept } else { Verdict::Reject })
}

/// Exact maximum-likelihood search oracle over the batch rows.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMlOracle;

impl SearchOracle for ExactMlOracle {
    fn solve(&mut self, batch: &SampleBatch, p: &SystemParams) -> Result<TransmitVector> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let g = batch.gain_matrix(p.inner_product_gain());
        Ok(exact_ml_decode(&g, &batch.ys(), p.m)?.estimate)
    }
}

/// Decision oracle that says YES iff exact ML yields a candidate passing
/// verification.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactDecisionOracle;

impl DecisionOracle for ExactDecisionOracle {
    fn decide(&mut self, batch: &SampleBatch, p: &SystemParams) -> Result<bool> {
        let x = ExactMlOracle.solve(batch, p)?;
        Ok(verify_solution(batch, &x, p)? == Verdict::Accept)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ErrorHandlingOptions {
    /// Grid step is `n^{-2c}·α²`.
    pub c: u32,
    pub max_grid_points: usize,
    /// Oracle calls per grid point; `None` means `n`.
    pub repeats: Option<usize>,
}

impl Default for ErrorHandlingOptions {
    fn default() -> Self {
        Self { c: 1, max_grid_points: 10_000, repeats: None }
    }
}

/// Solves search at an unknown noise `β ≤ α` with an oracle for noise
/// exactly `α`: pad the samples with `Ψ_{√γ}` noise over a grid of `γ`
/// in `[0, α²]`, call the oracle and keep the first verified answer.
pub fn error_handling_search<O: SearchOracle + ?Sized>(
    batch: &SampleBatch,
    oracle: &mut O,
    p: &SystemParams,
    opts: ErrorHandlingOptions,
    rng: &mut SeededRng,
) -> Result<TransmitVector> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if opts.max_grid_points < 2 {
        return Err(Error::InvalidParameter("grid needs at least two points".into()));
    }
    let alpha2 = p.alpha * p.alpha;
    let steps = (p.n as f64).powi(2 * opts.c as i32);
    let (step, points) = if steps + 1.0 <= opts.max_grid_points as f64 {
        (alpha2 / steps, steps as usize + 1)
    } else {
        let pts = opts.max_grid_points;
        (alpha2 / (pts - 1) as f64, pts)
    };
    // noise widths are in units of α; the unscaled form carries a factor M
    let unit = match p.noise_form {
        NoiseForm::Unscaled => p.m as f64,
        NoiseForm::Scaled => 1.0,
    };
    let repeats = opts.repeats.unwrap_or(p.n).max(1);
    let mut attempts = 0usize;
    for j in 0..points {
        let gamma = j as f64 * step;
        let pad = unit * gamma.sqrt();
        let reps = if j == 0 { 1 } else { repeats };
        for _ in 0..reps {
            let padded = SampleBatch {
                rows: batch.rows.iter().map(|(a, y)| (a.clone(), y + psi_or_zero(pad, rng))).collect(),
                label: batch.label,
            };
            attempts += 1;
            let cand = match oracle.solve(&padded, p) {
                Ok(c) => c,
                Err(e) => {
                    log::debug!("oracle failed at gamma = {gamma}: {e}");
                    continue;
                }
            };
            if verify_solution(batch, &cand, p)? == Verdict::Accept {
                log::debug!("verified at grid point {j} (gamma = {gamma}) after {attempts} calls");
                return Ok(cand);
            }
        }
    }
    Err(Error::SearchFailure { attempts })
}

/// Replaces column `j` of every row by a fresh `ã ~ Ψ_k` and shifts
/// `y ← y + g·(ã − a_j)·guess`. When `guess = x_j` the result has the same
/// distribution as a fresh structured batch.
pub fn rerandomize_column(
    batch: &SampleBatch,
    j: usize,
    guess: u64,
    p: &SystemParams,
    rng: &mut SeededRng,
) -> Result<SampleBatch> {
    if j >= batch.dim() {
        return Err(Error::DimensionMismatch { expected: batch.dim(), found: j });
    }
    let g = p.inner_product_gain();
    let rows = batch
        .rows
        .iter()
        .map(|(a, y)| {
            let mut a = a.clone();
            let mut fresh = psi_or_zero(p.k, rng);
            if a[j].abs() < 1e-300 {
                // a vanishing a_j carries no information about x_j; redraw
                fresh = psi_or_zero(p.k, rng);
            }
            let l = fresh - a[j];
            a[j] = fresh;
            (a, y + g * l * guess as f64)
        })
        .collect();
    Ok(SampleBatch { rows, label: BatchLabel::Unknown })
}

/// Recovers `x` coordinate by coordinate with a decision oracle: for each
/// guess of `x_j`, re-randomize column `j` and ask whether the batch is
/// still structured.
pub fn decision_to_search<O: DecisionOracle + ?Sized>(
    batch: &SampleBatch,
    oracle: &mut O,
    p: &SystemParams,
    rng: &mut SeededRng,
) -> Result<TransmitVector> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = batch.dim();
    if p.m <= 1 {
        return Ok(TransmitVector::zeros(n));
    }
    if p.m > DECISION_MAX_M {
        return Err(Error::InvalidParameter(format!(
            "decision-to-search enumerates M = {} guesses per coordinate; limit is {DECISION_MAX_M}",
            p.m
        )));
    }
    let mut symbols = Vec::with_capacity(n);
    for j in 0..n {
        let mut found = None;
        for guess in 0..p.m {
            let shifted = rerandomize_column(batch, j, guess, p, rng)?;
            if oracle.decide(&shifted, p)? {
                found = Some(guess);
                break;
            }
        }
        match found {
            Some(v) => symbols.push(v),
            None => {
                return Err(Error::ReductionFailure { coordinate: j, reason: "no guess accepted".into() })
            }
        }
    }
    let x = TransmitVector { symbols };
    if verify_solution(batch, &x, p)? == Verdict::Reject {
        return Err(Error::ReductionFailure { coordinate: n, reason: "final verification rejected".into() });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiretap::sample_a_dist;

    fn small_params() -> SystemParams {
        SystemParams::new(4, 4, 0.1, 1.0).unwrap()
    }

    #[test]
    fn empty_batch_rejected() {
        let p = small_params();
        let b = SampleBatch { rows: vec![], label: BatchLabel::Unknown };
        assert!(matches!(verify_solution(&b, &TransmitVector::zeros(4), &p), Err(Error::EmptyBatch)));
    }

    #[test]
    fn degenerate_constellation_needs_no_calls() {
        let mut p = small_params();
        let mut rng = SeededRng::new(1, 0);
        let batch = sample_a_dist(&TransmitVector::zeros(4), &p, &mut rng, 16).unwrap();
        p.m = 1;
        let mut calls = 0;
        let mut oracle = |_: &SampleBatch, _: &SystemParams| -> Result<bool> {
            calls += 1;
            Ok(true)
        };
        let x = decision_to_search(&batch, &mut oracle, &p, &mut rng).unwrap();
        assert_eq!(x, TransmitVector::zeros(4));
        assert_eq!(calls, 0);
    }

    #[test]
    fn no_padding_needed_succeeds_at_first_grid_point() {
        let p = small_params();
        let mut rng = SeededRng::new(2, 0);
        let x = TransmitVector::new(vec![3, 0, 2, 1], 4).unwrap();
        let batch = sample_a_dist(&x, &p, &mut rng, 256).unwrap();
        let mut calls = 0;
        let mut oracle = |b: &SampleBatch, p: &SystemParams| {
            calls += 1;
            ExactMlOracle.solve(b, p)
        };
        let got = error_handling_search(&batch, &mut oracle, &p, ErrorHandlingOptions::default(), &mut rng).unwrap();
        assert_eq!(got, x);
        assert_eq!(calls, 1);
    }

    #[test]
    fn picky_oracle_needs_the_right_grid_point() {
        // answers correctly only when the padded residual width is close to α
        let p = small_params();
        let mut rng = SeededRng::new(3, 0);
        let x = TransmitVector::new(vec![1, 2, 3, 0], 4).unwrap();
        let half = SystemParams { alpha: p.alpha / 2.0, ..p.clone() };
        let batch = sample_a_dist(&x, &half, &mut rng, 2000).unwrap();
        let target = p.sample_noise_width() / (2.0 * PI).sqrt();
        let truth = x.clone();
        let mut oracle = move |b: &SampleBatch, _: &SystemParams| -> Result<TransmitVector> {
            let xf = truth.as_f64();
            let rms = (b.rows.iter().map(|(a, y)| (y - dot(a, &xf)).powi(2)).sum::<f64>() / b.len() as f64).sqrt();
            if (rms / target - 1.0).abs() < 0.1 {
                Ok(truth.clone())
            } else {
                Ok(TransmitVector::zeros(4))
            }
        };
        let got = error_handling_search(&batch, &mut oracle, &p, ErrorHandlingOptions::default(), &mut rng).unwrap();
        assert_eq!(got, x);
    }
}
