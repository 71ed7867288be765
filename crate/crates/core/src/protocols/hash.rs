use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SeededRng;

/// Seed of a Toeplitz matrix over GF(2): `eta + input_len − 1` bits, one per
/// diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzSeed {
    pub bits: Vec<bool>,
    pub input_len: usize,
    pub eta: usize,
}

impl ToeplitzSeed {
    pub fn random(input_len: usize, eta: usize, rng: &mut SeededRng) -> Result<Self> {
        if input_len == 0 || eta == 0 {
            return Err(Error::InvalidParameter("hash input and output lengths must be positive".into()));
        }
        let bits = (0..input_len + eta - 1).map(|_| rng.bit()).collect();
        Ok(Self { bits, input_len, eta })
    }

    /// Entry `(i, j)` of the `eta × input_len` matrix.
    fn entry(&self, i: usize, j: usize) -> bool {
        self.bits[i + self.input_len - 1 - j]
    }
}

/// Toeplitz hash `T·x` over GF(2).
pub fn universal_hash(seed: &ToeplitzSeed, input: &[bool], eta: usize) -> Result<Vec<bool>> {
    if input.len() != seed.input_len {
        return Err(Error::DimensionMismatch { expected: seed.input_len, found: input.len() });
    }
    if eta != seed.eta || seed.bits.len() != seed.input_len + seed.eta - 1 {
        return Err(Error::DimensionMismatch { expected: seed.eta, found: eta });
    }
    Ok((0..eta)
        .map(|i| input.iter().enumerate().fold(false, |acc, (j, &x)| acc ^ (x & seed.entry(i, j))))
        .collect())
}
