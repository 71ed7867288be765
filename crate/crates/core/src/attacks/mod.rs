//! Eavesdropper decoders and the reduction machinery that turns MIMO
//! decoding oracles into lattice solvers.

mod bdd;
mod decoders;
mod experiment;
mod reductions;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::wiretap::{SampleBatch, SystemParams, TransmitVector};

pub use bdd::{bdd_via_mimo, make_toy_bdd_instance, toy_parameters, BddInstance, BddOptions, BddReport, ToyBddInstance};
pub use decoders::{babai_attack, exact_ml_decode, zf_decode, MAX_ML_CANDIDATES};
pub use experiment::{ber_experiment, BerRow, BerTable};
pub use reductions::{
    decision_to_search, error_handling_search, DECISION_MAX_M, rerandomize_column, verify_solution, verify_threshold, ErrorHandlingOptions,
    ExactDecisionOracle, ExactMlOracle, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMethod {
    /// Bob's SVD receiver.
    Bob,
    Zf,
    BabaiLll,
    ExactMl,
}

impl DecoderMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bob => "bob",
            Self::Zf => "zf",
            Self::BabaiLll => "babai_lll",
            Self::ExactMl => "exact_ml",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Bob, Self::Zf, Self::BabaiLll, Self::ExactMl].into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderOutcome {
    pub estimate: TransmitVector,
    pub method: DecoderMethod,
    /// Filled in by [`DecoderOutcome::compare`].
    pub symbol_errors: Option<usize>,
}

impl DecoderOutcome {
    pub fn new(estimate: TransmitVector, method: DecoderMethod) -> Self {
        Self { estimate, method, symbol_errors: None }
    }

    pub fn compare(mut self, truth: &TransmitVector) -> Self {
        self.symbol_errors = Some(self.estimate.symbol_errors(truth));
        self
    }

    pub fn exact_match(&self) -> Option<bool> {
        self.symbol_errors.map(|e| e == 0)
    }
}

/// Recovers the hidden vector from a batch of structured samples.
pub trait SearchOracle {
    fn solve(&mut self, batch: &SampleBatch, p: &SystemParams) -> Result<TransmitVector>;
}

/// Answers whether a batch is structured (`true`) or not.
pub trait DecisionOracle {
    fn decide(&mut self, batch: &SampleBatch, p: &SystemParams) -> Result<bool>;
}

impl<F> SearchOracle for F
where
    F: FnMut(&SampleBatch, &SystemParams) -> Result<TransmitVector>,
{
    fn solve(&mut self, batch: &SampleBatch, p: &SystemParams) -> Result<TransmitVector> {
        self(batch, p)
    }
}

impl<F> DecisionOracle for F
where
    F: FnMut(&SampleBatch, &SystemParams) -> Result<bool>,
{
    fn decide(&mut self, batch: &SampleBatch, p: &SystemParams) -> Result<bool> {
        self(batch, p)
    }
}
