//! Pauli-frame Monte Carlo simulation of fault-tolerant error correction with
//! the concatenated Steane code.
//!
//! The crate models the depolarizing noise model on a per-qubit Pauli frame,
//! the Hamming-code decoders (level-by-level and exact minimum-weight over the
//! 49-qubit concatenated code), the encoded ancilla factories (verified,
//! reject-on-detect, and idealized), both error-correction protocols, and the
//! round-based harness that measures crash rates, thresholds and preparation
//! overhead.

pub mod ancilla;
pub mod audit;
pub mod circuit;
pub mod ec;
pub mod error;
pub mod hamming;
pub mod harness;
pub mod noise;
pub mod pauli;
pub mod stats;

pub use ancilla::{AncillaFactory, AncillaTally, FactoryConfig, FactoryStats, Scheme};
pub use circuit::LogicalState;
pub use ec::{DataBlock, EcOutcome, Protocol, Role};
pub use error::{FrameError, Result, SimError};
pub use harness::{OverheadConfig, OverheadPoint, SweepConfig, SweepResult, ThresholdEstimate};
pub use noise::{Noise, NoiseParams, RandomSource};
pub use pauli::{Basis, ErrorType, Frame, Pauli};
