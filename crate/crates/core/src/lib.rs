//! Simulation and decoding toolkit for Knill-style error correction.

pub mod circuit;
pub mod codes;
pub mod decoders;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod ld;
pub mod pauli;
pub mod protocols;
pub mod sim;

pub use codes::{rotated_surface_code, StabilizerCode};
pub use circuit::{apply_noise_model, CliffordCircuit, Instruction, Kind, NoiseModel};
pub use decoders::{BpConfig, DecodeResult, Decoder, DecoderKind, DecodingProblem, Schedule};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec};
pub use pauli::{PauliOperator, PauliSymbol};
