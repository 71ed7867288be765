//! Symbol/bit error rate experiments comparing Bob's receiver with Eve's
//! decoders.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SeededRng;
use crate::stats::wilson_interval;
use crate::wiretap::{bob_decode, eve_receive, make_instance, transmit_to_bob, SystemParams, TransmitVector};

use super::decoders::{babai_attack, exact_ml_decode, zf_decode, MAX_ML_CANDIDATES};
use super::DecoderMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    pub method: String,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u64,
    pub alpha: f64,
    pub k: f64,
    pub trials: u64,
    pub ser: f64,
    pub ser_ci_low: f64,
    pub ser_ci_high: f64,
    pub seed: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerTable {
    pub rows: Vec<BerRow>,
}

/// Formats a float with 17 significant digits.
pub(crate) fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl BerTable {
    pub fn row(&self, method: DecoderMethod) -> Option<&BerRow> {
        self.rows.iter().find(|r| r.method == method.name())
    }

    /// CSV with columns `method,n,M,alpha,k,trials,ser,ser_ci_low,ser_ci_high,seed`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["method", "n", "M", "alpha", "k", "trials", "ser", "ser_ci_low", "ser_ci_high", "seed"])?;
        for r in &self.rows {
            out.write_record([
                r.method.clone(),
                r.n.to_string(),
                r.m.to_string(),
                fmt_float(r.alpha),
                fmt_float(r.k),
                r.trials.to_string(),
                fmt_float(r.ser),
                fmt_float(r.ser_ci_low),
                fmt_float(r.ser_ci_high),
                r.seed.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    symbols: u64,
    bits: u64,
}

fn decode(method: DecoderMethod, g: &crate::numerics::Matrix, y: &[f64], m: u64) -> Result<TransmitVector> {
    Ok(match method {
        DecoderMethod::Zf => zf_decode(g, y, m)?.estimate,
        DecoderMethod::BabaiLll => babai_attack(g, y, m)?.estimate,
        DecoderMethod::ExactMl => exact_ml_decode(g, y, m)?.estimate,
        DecoderMethod::Bob => unreachable!("Bob decodes through the SVD receiver"),
    })
}

fn run_trial(p: &SystemParams, methods: &[DecoderMethod], seed: u64, trial: u64) -> Result<Vec<Counts>> {
    let mut rng = SeededRng::new(seed, trial);
    let inst = make_instance(p, &mut rng)?;
    let x = TransmitVector::random(p.n, p.m, &mut rng);
    let y = transmit_to_bob(&inst, &x, p, &mut rng)?;
    let (g, ye) = eve_receive(&inst, &x, p, &mut rng)?;
    methods
        .iter()
        .map(|&method| {
            let est = if method == DecoderMethod::Bob { bob_decode(&inst, &y, p)? } else { decode(method, &g, &ye, p.m)? };
            Ok(Counts { symbols: est.symbol_errors(&x) as u64, bits: est.bit_errors(&x) as u64 })
        })
        .collect()
}

/// Runs `trials` independent (instance, message) draws; trial `t` uses
/// stream `t` of `seed`, so results do not depend on scheduling. Bob's
/// receiver is always included.
pub fn ber_experiment(p: &SystemParams, trials: u64, methods: &[DecoderMethod], seed: u64) -> Result<BerTable> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    p.validate()?;
    let mut methods: Vec<DecoderMethod> = methods.to_vec();
    methods.push(DecoderMethod::Bob);
    methods.sort();
    methods.dedup();
    if methods.contains(&DecoderMethod::ExactMl) {
        let space = (p.m as f64).powi(p.n as i32);
        if space > MAX_ML_CANDIDATES {
            return Err(Error::SearchSpaceTooLarge { size: space, limit: MAX_ML_CANDIDATES });
        }
    }
    let zero = || vec![Counts::default(); methods.len()];
    let totals = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(p, &methods, seed, t))
        .try_reduce(zero, |mut acc, c| {
            for (a, b) in acc.iter_mut().zip(c) {
                a.symbols += b.symbols;
                a.bits += b.bits;
            }
            Ok(acc)
        })?;
    let n_symbols = trials * p.n as u64;
    let n_bits = n_symbols * p.bits_per_symbol() as u64;
    let rows = methods
        .iter()
        .zip(totals)
        .map(|(m, c)| {
            let (lo, hi) = wilson_interval(c.symbols, n_symbols);
            BerRow {
                method: m.name().to_string(),
                n: p.n,
                m: p.m,
                alpha: p.alpha,
                k: p.k,
                trials,
                ser: c.symbols as f64 / n_symbols as f64,
                ser_ci_low: lo,
                ser_ci_high: hi,
                seed,
                symbol_errors: c.symbols,
                bit_errors: c.bits,
                ber: c.bits as f64 / n_bits as f64,
            }
        })
        .collect();
    Ok(BerTable { rows })
}
