//! Massive-MIMO physical-layer cryptography.
//!
//! Alice precodes with the right singular vectors of her channel to Bob,
//! so Bob decodes each stream independently in linear time while an
//! eavesdropper faces a lattice decoding problem. The crate provides the
//! channel model, the eavesdropper's decoders, the lattice machinery
//! behind the hardness argument (reduction, enumeration, discrete
//! Gaussians, BDD from a MIMO oracle) and two protocols built on the
//! channel: key agreement and a symmetric cipher.

pub mod attacks;
pub mod distributions;
pub mod error;
pub mod lattice;
pub mod numerics;
pub mod params;
pub mod protocols;
pub mod stats;
pub mod wiretap;

pub use error::{Error, Result};
pub use lattice::{LatticeBasis, MinimaEstimate, ReductionResult};
pub use numerics::{Matrix, SeededRng, SvdTriple};
pub use params::ConstraintReport;
pub use wiretap::{NoiseForm, SampleBatch, SystemParams, TransmitVector, WiretapInstance};
