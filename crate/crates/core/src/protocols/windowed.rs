//! Repeated check measurement decoded in overlapping windows.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::prep::{sector_inputs, LogicalBasis, Sector, SectorPlan};
use super::register::Register;
use super::sector::{detector_values, sector_model};
use super::{noisy, Classifier, ProtocolModule};
use crate::circuit::CliffordCircuit;
use crate::codes::RoundRecord;
use crate::decoders::{BpConfig, Decoder, DecoderKind, DecodingProblem, MIN_PRIOR};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowGeometry {
    pub rounds: usize,
    pub window: usize,
    pub commit: usize,
}

impl WindowGeometry {
    pub fn validate(&self) -> Result<()> {
        let WindowGeometry { rounds, window, commit } = *self;
        if commit < 1 || window <= commit {
            return Err(Error::InvalidProtocol(format!(
                "window {window} must exceed commit {commit} ≥ 1"
            )));
        }
        if rounds == 0 || rounds % commit != 0 {
            return Err(Error::InvalidProtocol(format!(
                "rounds {rounds} must be a positive multiple of commit {commit}"
            )));
        }
        Ok(())
    }

    /// `(start, end, commit_end)` rounds of each window. The last window
    /// reaches the final round and commits everything.
    pub fn windows(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut s = 0;
        loop {
            if s + self.window >= self.rounds {
                out.push((s, self.rounds, self.rounds));
                return out;
            }
            out.push((s, s + self.window, s + self.commit));
            s += self.commit;
        }
    }
}

#[derive(Clone, Debug)]
struct Window {
    detectors: std::ops::Range<usize>,
    mechanisms: Vec<usize>,
    commit: Vec<bool>,
    decoder: Decoder,
}

/// Per-mechanism data needed to commit corrections.
#[derive(Clone, Debug)]
struct Committed {
    detectors: Vec<BitVec>,
    tracked: Vec<BitVec>,
}

/// `rounds` noisy check rounds on block `b`, which must hold a code state
/// in `basis` on entry. Only the sector that protects `basis` is decoded.
/// Windows of `window` rounds advance by `commit`; corrections on
/// mechanisms first seen in a window's commit region are kept and their
/// detector flips are removed from later windows. The committed
/// corrections' effect on the final frame selects pure-error and logical
/// corrections at the end of the module.
pub fn windowed_ec_module(
    reg: &Register,
    b: usize,
    basis: LogicalBasis,
    geometry: WindowGeometry,
    q: f64,
    decoder: DecoderKind,
    bp: BpConfig,
) -> Result<ProtocolModule> {
    geometry.validate()?;
    let code = &reg.code;
    let cb = reg.code_block(b);
    let mut bare = CliffordCircuit::new(reg.n_qubits());
    let records: Vec<RoundRecord> = (0..geometry.rounds).map(|_| cb.append_round(&mut bare, code)).collect();
    let circuit = noisy(&bare, q)?;
    let mut analysis = CliffordCircuit::new(reg.n_qubits());
    match basis {
        LogicalBasis::Zero => analysis.reset_z(&cb.data),
        LogicalBasis::Plus => analysis.reset_x(&cb.data),
    }
    let analysis = analysis.compose(&circuit)?;
    let sector = match basis {
        LogicalBasis::Zero => Sector::ZChecks,
        LogicalBasis::Plus => Sector::XChecks,
    };
    let inputs = sector_inputs(reg, b, sector, &records, true);
    let dem = sector_model(&analysis, analysis.len(), &inputs.detectors, &inputs.tracked)?;
    let per_round = sector.checks(code).num_rows();
    let n_det = dem.n_detectors;
    let n_tracked = dem.n_observables;
    let committed = Committed {
        detectors: dem
            .mechanisms
            .iter()
            .map(|m| BitVec::from_indices(n_det, m.detectors.iter().copied()))
            .collect(),
        tracked: dem
            .mechanisms
            .iter()
            .map(|m| BitVec::from_indices(n_tracked, m.observables.iter().copied()))
            .collect(),
    };
    let first_round: Vec<Option<usize>> = dem
        .mechanisms
        .iter()
        .map(|m| m.detectors.first().map(|&d| d / per_round))
        .collect();
    let mut windows = Vec::new();
    for (s, e, c) in geometry.windows() {
        let mechanisms: Vec<usize> = (0..dem.mechanisms.len())
            .filter(|&j| first_round[j].is_some_and(|r| (s..e).contains(&r)))
            .collect();
        let range = s * per_round..e * per_round;
        let mut h = BitMatrix::zeros(range.len(), mechanisms.len());
        for (col, &j) in mechanisms.iter().enumerate() {
            for &d in dem.mechanisms[j].detectors.iter().filter(|d| range.contains(d)) {
                h.set(d - range.start, col, true);
            }
        }
        let priors = mechanisms
            .iter()
            .map(|&j| dem.mechanisms[j].p.clamp(MIN_PRIOR, 0.5))
            .collect();
        let commit = mechanisms.iter().map(|&j| first_round[j].is_some_and(|r| r < c)).collect();
        windows.push(Window {
            detectors: range,
            decoder: Decoder::new(decoder, DecodingProblem::new(h, priors, None)?, bp)?,
            mechanisms,
            commit,
        });
    }
    let plan: SectorPlan = inputs.plan;
    let pos = circuit.len();
    let corrections = inputs.corrections.into_iter().map(|p| (pos, p)).collect();
    let detectors = inputs.detectors;
    let classifier: Classifier = Arc::new(move |slice: &BitVec| {
        let mut residual = detector_values(&detectors, slice);
        let mut tracked = BitVec::zeros(n_tracked);
        for w in &windows {
            let s = residual.slice(w.detectors.start, w.detectors.len());
            if s.is_zero() {
                continue;
            }
            let Ok(r) = w.decoder.decode(&s) else {
                continue;
            };
            for col in r.correction.iter_ones() {
                if w.commit[col] {
                    let j = w.mechanisms[col];
                    residual.xor_assign(&committed.detectors[j]);
                    tracked.xor_assign(&committed.tracked[j]);
                }
            }
        }
        BitVec::from_bools(&plan.outputs(slice, &tracked))
    });
    Ok(ProtocolModule::new("windowed_ec", circuit, corrections, classifier).allow_degenerate())
}
