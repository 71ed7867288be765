use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SeededRng;
use crate::wiretap::{bob_equalize, precode, transmit_to_bob, SystemParams, TransmitVector, WiretapInstance};

/// Shared secret `s ∈ [0, M)^n` and the system it is used with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CipherContext {
    pub s: Vec<u64>,
    pub params: SystemParams,
}

/// Key length in bits: `n·ceil(log2 M)`.
pub fn key_bits(p: &SystemParams) -> usize {
    p.n * p.bits_per_symbol()
}

impl CipherContext {
    pub fn new(s: Vec<u64>, params: SystemParams) -> Result<Self> {
        params.validate()?;
        if params.m % 2 != 0 {
            return Err(Error::Config(format!("the cipher needs an even constellation, got M = {}", params.m)));
        }
        if s.len() != params.n {
            return Err(Error::DimensionMismatch { expected: params.n, found: s.len() });
        }
        if let Some(&v) = s.iter().find(|&&v| v >= params.m) {
            return Err(Error::InvalidParameter(format!("key symbol {v} outside [0, {})", params.m)));
        }
        Ok(Self { s, params })
    }

    pub fn random(params: SystemParams, rng: &mut SeededRng) -> Result<Self> {
        let s = (0..params.n).map(|_| rng.uniform_int(0, params.m)).collect();
        Self::new(s, params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ciphertext {
    /// `V·((s + (M/2)·m) mod M)`.
    pub transmitted: Vec<f64>,
    /// Bob's channel output; the ciphertext proper.
    pub received: Vec<f64>,
}

/// Channel symbols `(s + (M/2)·m) mod M`.
pub fn cipher_symbols(ctx: &CipherContext, message: &[bool]) -> Result<TransmitVector> {
    let p = &ctx.params;
    if message.len() != p.n {
        return Err(Error::DimensionMismatch { expected: p.n, found: message.len() });
    }
    let half = p.m / 2;
    Ok(TransmitVector {
        symbols: ctx.s.iter().zip(message).map(|(&s, &b)| (s + if b { half } else { 0 }) % p.m).collect(),
    })
}

/// Encrypts one `n`-bit message over `inst`, which must be a fresh channel
/// draw for every message.
pub fn encrypt(
    ctx: &CipherContext,
    message: &[bool],
    inst: &WiretapInstance,
    rng: &mut SeededRng,
) -> Result<Ciphertext> {
    let x = cipher_symbols(ctx, message)?;
    let transmitted = precode(inst, &x)?;
    let received = transmit_to_bob(inst, &x, &ctx.params, rng)?;
    Ok(Ciphertext { transmitted, received })
}

/// `round((2/M)·((Σ⁻¹Uᵀy − s) mod M)) mod 2` per stream.
pub fn decrypt(ctx: &CipherContext, y: &[f64], inst: &WiretapInstance) -> Result<Vec<bool>> {
    let soft = bob_equalize(inst, y)?;
    Ok(bits_from_soft(&soft, &ctx.s, ctx.params.m))
}

/// Message bits from hard symbol estimates, as an eavesdropper holding the
/// key would recover them.
pub fn bits_from_symbols(ctx: &CipherContext, symbols: &[u64]) -> Vec<bool> {
    let soft: Vec<f64> = symbols.iter().map(|&v| v as f64).collect();
    bits_from_soft(&soft, &ctx.s, ctx.params.m)
}

pub(crate) fn bits_from_soft(soft: &[f64], s: &[u64], m: u64) -> Vec<bool> {
    let mf = m as f64;
    soft.iter()
        .zip(s)
        .map(|(&z, &si)| {
            let w = (z - si as f64).rem_euclid(mf);
            let q = (2.0 * w / mf).round() as i64;
            q.rem_euclid(2) == 1
        })
        .collect()
}
