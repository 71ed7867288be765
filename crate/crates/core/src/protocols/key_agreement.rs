use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SeededRng;
use crate::params::{check_hardness_constraints, secrecy_capacity, ConstraintReport};
use crate::wiretap::{bob_decode, make_instance, transmit_to_bob, SystemParams, TransmitVector};

use super::bits_to_hex;
use super::hash::{universal_hash, ToeplitzSeed};

/// Error control for a single message over the wiretap channel.
pub trait ChannelCoder {
    fn name(&self) -> &'static str;

    /// Sends `x` to Bob (over fresh channel draws) and returns his estimate.
    fn exchange(&self, x: &TransmitVector, p: &SystemParams, rng: &mut SeededRng) -> Result<TransmitVector>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coder {
    #[default]
    None,
    /// Three transmissions, per-symbol majority vote (median when all differ).
    #[serde(rename = "repetition-3")]
    Repetition3,
}

fn send_once(x: &TransmitVector, p: &SystemParams, rng: &mut SeededRng) -> Result<TransmitVector> {
    let inst = make_instance(p, rng)?;
    let y = transmit_to_bob(&inst, x, p, rng)?;
    bob_decode(&inst, &y, p)
}

impl ChannelCoder for Coder {
    fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Repetition3 => "repetition-3",
        }
    }

    fn exchange(&self, x: &TransmitVector, p: &SystemParams, rng: &mut SeededRng) -> Result<TransmitVector> {
        match self {
            Self::None => send_once(x, p, rng),
            Self::Repetition3 => {
                let copies = [send_once(x, p, rng)?, send_once(x, p, rng)?, send_once(x, p, rng)?];
                let symbols = (0..x.len())
                    .map(|i| {
                        let mut v = [copies[0].symbols[i], copies[1].symbols[i], copies[2].symbols[i]];
                        v.sort_unstable();
                        // with a repeated value the median is that value
                        v[1]
                    })
                    .collect();
                Ok(TransmitVector { symbols })
            }
        }
    }
}

/// Smallest `c` with `2c·√(n·log2 M·log2 1.01) > eta`.
pub fn minimal_message_count(n: usize, m: u64, eta: usize) -> Result<usize> {
    let cap = secrecy_capacity(n, (m as f64).log2())?;
    Ok((eta as f64 / (2.0 * cap)).floor() as usize + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyAgreementConfig {
    pub params: SystemParams,
    pub eta: usize,
    pub c: usize,
    pub coder: Coder,
}

impl KeyAgreementConfig {
    /// Uses the minimal admissible message count.
    pub fn new(params: SystemParams, eta: usize, coder: Coder) -> Result<Self> {
        let c = minimal_message_count(params.n, params.m, eta)?;
        Self::with_message_count(params, eta, c, coder)
    }

    pub fn with_message_count(params: SystemParams, eta: usize, c: usize, coder: Coder) -> Result<Self> {
        params.validate()?;
        if eta == 0 {
            return Err(Error::Config("eta must be positive".into()));
        }
        let cap = secrecy_capacity(params.n, (params.m as f64).log2())?;
        if !(2.0 * c as f64 * cap > eta as f64) {
            return Err(Error::Config(format!(
                "{c} messages carry at most {:.3} secret bits, below eta = {eta}",
                2.0 * c as f64 * cap
            )));
        }
        Ok(Self { params, eta, c, coder })
    }
}

/// Little-endian `ceil(log2 M)` bits per symbol, symbols in order.
pub fn encode_symbols(symbols: &[u64], m: u64) -> Vec<bool> {
    let width = crate::wiretap::bits_per_symbol(m);
    symbols.iter().flat_map(|&s| (0..width).map(move |b| (s >> b) & 1 == 1)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub params: SystemParams,
    pub seed: u64,
    pub eta: usize,
    pub c: usize,
    pub coder: Coder,
    pub constraints: Option<ConstraintReport>,
    pub constraint_warning: Option<String>,
    pub encoding: String,
    /// Alice's messages, hex of the encoded bits.
    pub messages: Vec<String>,
    /// Bob's decoded messages.
    pub bob_messages: Vec<String>,
    pub message_symbol_errors: Vec<usize>,
    pub hash_seed: String,
    pub alice_key: String,
    pub bob_key: String,
    pub all_messages_correct: bool,
    pub success: bool,
    #[serde(skip)]
    pub alice_key_bits: Vec<bool>,
    #[serde(skip)]
    pub bob_key_bits: Vec<bool>,
}

/// Sends `c` random messages to Bob and hashes both sides' copies down to
/// `eta` bits with a public Toeplitz seed.
pub fn run_key_agreement(cfg: &KeyAgreementConfig, seed: u64) -> Result<Transcript> {
    let p = &cfg.params;
    let (constraints, constraint_warning) = match check_hardness_constraints(p) {
        Ok(rep) => {
            let v = rep.violations();
            let warn = (!v.is_empty()).then(|| v.join("; "));
            (Some(rep), warn)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(w) = &constraint_warning {
        // recorded in the transcript; callers decide whether to surface it
        log::debug!("key agreement outside the hardness regime: {w}");
    }

    let mut rng = SeededRng::new(seed, 0);
    let mut alice_bits = Vec::new();
    let mut bob_bits = Vec::new();
    let mut messages = Vec::with_capacity(cfg.c);
    let mut bob_messages = Vec::with_capacity(cfg.c);
    let mut errors = Vec::with_capacity(cfg.c);
    for _ in 0..cfg.c {
        let x = TransmitVector::random(p.n, p.m, &mut rng);
        let est = cfg.coder.exchange(&x, p, &mut rng)?;
        let a = encode_symbols(&x.symbols, p.m);
        let b = encode_symbols(&est.symbols, p.m);
        messages.push(bits_to_hex(&a));
        bob_messages.push(bits_to_hex(&b));
        errors.push(x.symbol_errors(&est));
        alice_bits.extend(a);
        bob_bits.extend(b);
    }
    let hash_seed = ToeplitzSeed::random(alice_bits.len(), cfg.eta, &mut rng)?;
    let alice_key = universal_hash(&hash_seed, &alice_bits, cfg.eta)?;
    let bob_key = universal_hash(&hash_seed, &bob_bits, cfg.eta)?;
    Ok(Transcript {
        params: p.clone(),
        seed,
        eta: cfg.eta,
        c: cfg.c,
        coder: cfg.coder,
        constraints,
        constraint_warning,
        encoding: format!("little-endian, {} bits per symbol", p.bits_per_symbol()),
        messages,
        bob_messages,
        all_messages_correct: errors.iter().all(|&e| e == 0),
        message_symbol_errors: errors,
        hash_seed: bits_to_hex(&hash_seed.bits),
        alice_key: bits_to_hex(&alice_key),
        bob_key: bits_to_hex(&bob_key),
        success: alice_key == bob_key,
        alice_key_bits: alice_key,
        bob_key_bits: bob_key,
    })
}
