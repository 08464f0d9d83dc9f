//! End-to-end memory experiments built from protocol modules.

use std::sync::Arc;

use super::online::CodeCapacityDecoder;
use super::prep::{bell_prep_module, encoded_prep_module, input_prep_module, LogicalBasis, PrepBlock};
use super::register::Register;
use super::teleport::{compressed_knill_gadget, knill_gadget, readout_modules};
use super::windowed::{windowed_ec_module, WindowGeometry};
use super::{ComposedExperiment, ProtocolModule};
use crate::decoders::{BpConfig, DecoderKind};
use crate::error::Result;

/// Settings shared by the circuit-level experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSettings {
    /// Circuit-level noise rate of every noisy module.
    pub q: f64,
    /// Logical state stored and read out.
    pub basis: LogicalBasis,
    /// Check rounds per block in auxiliary state preparation.
    pub prep_rounds: usize,
    /// Decoder for preparation histories and windowed decoding.
    pub offline: DecoderKind,
    pub bp: BpConfig,
}

/// Appends the decoded readout of block `d` and composes, with one
/// observable per logical qubit.
fn finish(
    reg: &Register,
    mut modules: Vec<ProtocolModule>,
    d: usize,
    s: &ChainSettings,
    online: Arc<CodeCapacityDecoder>,
) -> Result<ComposedExperiment> {
    let readout = readout_modules(reg, d, s.basis, s.q, online)?;
    modules.push(readout.measure);
    modules.push(readout.result);
    let total: usize = modules.iter().map(|m| m.circuit.n_measurements()).sum();
    let k = reg.result.len();
    let observables = (total - k..total).map(|j| vec![j]).collect();
    ComposedExperiment::new(modules, observables)
}

/// Noiseless input, `rounds` Knill gadgets each fed by a fresh Bell pair,
/// then decoded readout. Block roles rotate so the output block of one
/// round is the data block of the next.
pub fn knill_memory(
    reg: &Register,
    rounds: usize,
    s: &ChainSettings,
    online: Arc<CodeCapacityDecoder>,
) -> Result<ComposedExperiment> {
    let mut modules = vec![input_prep_module(reg, 0, s.basis)?];
    let mut d = 0;
    for _ in 0..rounds {
        let (a, b) = ((d + 1) % 3, (d + 2) % 3);
        modules.push(bell_prep_module(reg, a, b, s.prep_rounds, s.q, s.offline, s.bp)?);
        modules.push(knill_gadget(reg, d, a, b, s.q, online.clone())?);
        d = b;
    }
    finish(reg, modules, d, s, online)
}

/// As [`knill_memory`] with the compressed gadget: each round prepares
/// |0̄⟩ and |+̄⟩ blocks and teleports through both.
pub fn compressed_knill_memory(
    reg: &Register,
    rounds: usize,
    s: &ChainSettings,
    online: Arc<CodeCapacityDecoder>,
) -> Result<ComposedExperiment> {
    let mut modules = vec![input_prep_module(reg, 0, s.basis)?];
    let mut d = 0;
    for _ in 0..rounds {
        let (a, b) = ((d + 1) % 3, (d + 2) % 3);
        let blocks = [
            PrepBlock {
                block: a,
                basis: LogicalBasis::Zero,
            },
            PrepBlock {
                block: b,
                basis: LogicalBasis::Plus,
            },
        ];
        modules.push(encoded_prep_module(reg, &blocks, s.prep_rounds, s.q, s.offline, s.bp, None)?);
        let (first, second) = compressed_knill_gadget(reg, d, a, b, s.q, online.clone())?;
        modules.push(first);
        modules.push(second);
        d = b;
    }
    finish(reg, modules, d, s, online)
}

/// Noiseless input, repeated check rounds decoded in windows, then decoded
/// readout.
pub fn windowed_memory(
    reg: &Register,
    geometry: WindowGeometry,
    s: &ChainSettings,
    online: Arc<CodeCapacityDecoder>,
) -> Result<ComposedExperiment> {
    let modules = vec![
        input_prep_module(reg, 0, s.basis)?,
        windowed_ec_module(reg, 0, s.basis, geometry, s.q, s.offline, s.bp)?,
    ];
    finish(reg, modules, 0, s, online)
}
