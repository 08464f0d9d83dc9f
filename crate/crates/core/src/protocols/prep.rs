//! Encoded state preparation: fresh blocks, repeated check rounds, and a
//! classifier that decodes each block's history with an offline decoder and
//! returns the block to the code space.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::register::Register;
use super::sector::{detector_values, sector_model, Tracked};
use super::{noisy, ProtocolModule};
use crate::circuit::CliffordCircuit;
use crate::codes::{RoundRecord, StabilizerCode};
use crate::decoders::{BpConfig, Decoder, DecoderKind, DecodingProblem};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec, Echelon};
use crate::pauli::PauliOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LogicalBasis {
    /// |0̄⟩ on every logical qubit.
    #[default]
    Zero,
    /// |+̄⟩ on every logical qubit.
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrepBlock {
    pub block: usize,
    pub basis: LogicalBasis,
}

/// Which checks a sector is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Sector {
    /// X checks, which detect Z errors.
    XChecks,
    /// Z checks, which detect X errors.
    ZChecks,
}

impl Sector {
    pub fn checks(self, code: &StabilizerCode) -> &BitMatrix {
        match self {
            Sector::XChecks => &code.h_x,
            Sector::ZChecks => &code.h_z,
        }
    }

    /// Logical operators of the same Pauli type as the checks.
    pub fn logicals(self, code: &StabilizerCode) -> &BitMatrix {
        match self {
            Sector::XChecks => &code.logical_x,
            Sector::ZChecks => &code.logical_z,
        }
    }

    /// Logical operators that flip `logicals`, used as corrections.
    pub fn dual_logicals(self, code: &StabilizerCode) -> &BitMatrix {
        match self {
            Sector::XChecks => &code.logical_z,
            Sector::ZChecks => &code.logical_x,
        }
    }

    /// Operator of the checks' own type on block `b`.
    pub fn test_op(self, reg: &Register, b: usize, bits: &BitVec) -> PauliOperator {
        match self {
            Sector::XChecks => reg.x_on(b, bits),
            Sector::ZChecks => reg.z_on(b, bits),
        }
    }

    /// Operator of the opposite type on block `b`.
    pub fn fix_op(self, reg: &Register, b: usize, bits: &BitVec) -> PauliOperator {
        match self {
            Sector::XChecks => reg.z_on(b, bits),
            Sector::ZChecks => reg.x_on(b, bits),
        }
    }

    pub fn record(self, r: &RoundRecord) -> &[usize] {
        match self {
            Sector::XChecks => &r.x,
            Sector::ZChecks => &r.z,
        }
    }

    /// Whether the checks have a known value right after preparing `basis`.
    pub fn known_after(self, basis: LogicalBasis) -> bool {
        matches!(
            (self, basis),
            (Sector::XChecks, LogicalBasis::Plus) | (Sector::ZChecks, LogicalBasis::Zero)
        )
    }
}

/// Indices of a maximal set of independent rows, in order.
pub(crate) fn independent_rows(h: &BitMatrix) -> Vec<usize> {
    let mut basis = Echelon::new();
    (0..h.num_rows()).filter(|&i| basis.insert(h.row(i).clone())).collect()
}

/// Pure errors for the given independent rows: `h · t_j = e_j` on them.
pub(crate) fn pure_errors_for(h: &BitMatrix, rows: &[usize]) -> Vec<BitVec> {
    let sub = BitMatrix::from_rows(h.num_cols(), rows.iter().map(|&i| h.row(i).clone()).collect());
    (0..rows.len())
        .map(|j| {
            sub.solve(&BitVec::from_indices(rows.len(), [j]))
                .expect("independent rows have full row rank")
        })
        .collect()
}

/// Decoding plan for one sector of one block. The plan's output bits are
/// the pure-error selections followed (for known sectors) by logical
/// corrections.
#[derive(Clone, Debug)]
pub(crate) struct SectorPlan {
    pub detectors: Vec<Vec<usize>>,
    pub decoder: Option<Decoder>,
    /// First-round measurement of each independent check, for sectors whose
    /// initial value is random.
    pub first_round: Option<Vec<usize>>,
    /// `pure_logical[j][a]`: pure error `j` anticommutes with tracked
    /// logical `a`.
    pub pure_logical: Vec<Vec<bool>>,
    pub n_pure: usize,
    pub n_logical: usize,
}

impl SectorPlan {
    /// Decoded tracked bits for a measurement slice.
    pub fn tracked(&self, slice: &BitVec) -> BitVec {
        let n = self.n_pure + self.n_logical;
        let Some(dec) = &self.decoder else {
            return BitVec::zeros(n);
        };
        let s = detector_values(&self.detectors, slice);
        if s.is_zero() {
            return BitVec::zeros(n);
        }
        match dec.decode(&s) {
            Ok(r) => r.observable_flips.expect("sector problems carry observables"),
            Err(_) => BitVec::zeros(n),
        }
    }

    /// Correction bits given decoded tracked bits.
    pub fn outputs(&self, slice: &BitVec, tracked: &BitVec) -> Vec<bool> {
        let mut out: Vec<bool> = (0..self.n_pure)
            .map(|j| {
                let base = self.first_round.as_ref().is_some_and(|f| slice.get(f[j]));
                base ^ tracked.get(j)
            })
            .collect();
        for a in 0..self.n_logical {
            let pure = (0..self.n_pure).fold(false, |acc, j| acc ^ (out[j] && self.pure_logical[j][a]));
            out.push(tracked.get(self.n_pure + a) ^ pure);
        }
        out
    }

    pub fn classify(&self, slice: &BitVec) -> Vec<bool> {
        self.outputs(slice, &self.tracked(slice))
    }
}

/// Detectors, tracked bits and correction generators of one sector of
/// block `b`, before any error model is attached.
pub(crate) struct SectorInputs {
    pub detectors: Vec<Vec<usize>>,
    pub tracked: Vec<Tracked>,
    pub corrections: Vec<PauliOperator>,
    /// Output logic with no decoder attached.
    pub plan: SectorPlan,
}

/// `rounds` are the block's round records; `known` says whether the first
/// round is compared against a known initial value (and whether logical
/// flips are tracked).
pub(crate) fn sector_inputs(reg: &Register, b: usize, sector: Sector, rounds: &[RoundRecord], known: bool) -> SectorInputs {
    let code = &reg.code;
    let h = sector.checks(code);
    let rows = independent_rows(h);
    let pure = pure_errors_for(h, &rows);
    let mut detectors = Vec::new();
    for (r, rec) in rounds.iter().enumerate() {
        let cur = sector.record(rec);
        for i in 0..h.num_rows() {
            if r == 0 {
                if known {
                    detectors.push(vec![cur[i]]);
                }
            } else {
                detectors.push(vec![cur[i], sector.record(&rounds[r - 1])[i]]);
            }
        }
    }
    let first = if known { None } else { rounds.first() };
    let mut tracked: Vec<Tracked> = rows
        .iter()
        .map(|&i| {
            let test = sector.test_op(reg, b, h.row(i));
            match first {
                Some(f) => Tracked::frame_and(vec![sector.record(f)[i]], test),
                None => Tracked::frame(test),
            }
        })
        .collect();
    let logicals = sector.logicals(code);
    let n_logical = if known { logicals.num_rows() } else { 0 };
    for a in 0..n_logical {
        tracked.push(Tracked::frame(sector.test_op(reg, b, logicals.row(a))));
    }
    let pure_logical = pure
        .iter()
        .map(|t| (0..n_logical).map(|a| t.dot(logicals.row(a))).collect())
        .collect();
    let mut corrections: Vec<PauliOperator> = pure.iter().map(|t| sector.fix_op(reg, b, t)).collect();
    let duals = sector.dual_logicals(code);
    for a in 0..n_logical {
        corrections.push(sector.fix_op(reg, b, duals.row(a)));
    }
    SectorInputs {
        plan: SectorPlan {
            detectors: detectors.clone(),
            decoder: None,
            first_round: first.map(|f| rows.iter().map(|&i| sector.record(f)[i]).collect()),
            pure_logical,
            n_pure: rows.len(),
            n_logical,
        },
        detectors,
        tracked,
        corrections,
    }
}

/// Decoding plan of one sector of block `b` over the whole history, with
/// the error model taken from `analysis` and the frame read at `pos`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn plan_sector(
    reg: &Register,
    b: usize,
    sector: Sector,
    rounds: &[RoundRecord],
    known: bool,
    analysis: &CliffordCircuit,
    pos: usize,
    offline: DecoderKind,
    bp: BpConfig,
) -> Result<(SectorPlan, Vec<PauliOperator>)> {
    let mut inputs = sector_inputs(reg, b, sector, rounds, known);
    let dem = sector_model(analysis, pos, &inputs.detectors, &inputs.tracked)?;
    if !dem.mechanisms.is_empty() && dem.n_detectors > 0 {
        inputs.plan.decoder = Some(Decoder::new(offline, DecodingProblem::from_dem(&dem), bp)?);
    }
    Ok((inputs.plan, inputs.corrections))
}

/// Wraps sector plans into a module classifier.
pub(crate) fn plans_classifier(plans: Vec<SectorPlan>) -> super::Classifier {
    Arc::new(move |slice: &BitVec| {
        let bits: Vec<bool> = plans.iter().flat_map(|p| p.classify(slice)).collect();
        BitVec::from_bools(&bits)
    })
}

/// Prepares each listed block in its basis with `rounds` noisy check rounds
/// (blocks one after another, sharing the auxiliaries), then optionally a
/// transversal CNOT `entangle = (control, target)`. Both check sectors of
/// every block are decoded separately with the offline decoder, and the
/// resulting frame corrections are inserted before the entangling CNOT.
pub fn encoded_prep_module(
    reg: &Register,
    blocks: &[PrepBlock],
    rounds: usize,
    q: f64,
    offline: DecoderKind,
    bp: BpConfig,
    entangle: Option<(usize, usize)>,
) -> Result<ProtocolModule> {
    if rounds < 1 {
        return Err(Error::InvalidProtocol("preparation needs at least one round".into()));
    }
    let code = &reg.code;
    let mut bare = CliffordCircuit::new(reg.n_qubits());
    let mut records = Vec::new();
    for pb in blocks {
        let cb = reg.code_block(pb.block);
        match pb.basis {
            LogicalBasis::Zero => bare.reset_z(&cb.data),
            LogicalBasis::Plus => bare.reset_x(&cb.data),
        }
        let recs: Vec<RoundRecord> = (0..rounds).map(|_| cb.append_round(&mut bare, code)).collect();
        records.push(recs);
    }
    let mut circuit = noisy(&bare, q)?;
    let pos = circuit.len();
    if let Some((c, t)) = entangle {
        let mut tail = CliffordCircuit::new(reg.n_qubits());
        let pairs: Vec<(usize, usize)> = reg.blocks[c].iter().copied().zip(reg.blocks[t].iter().copied()).collect();
        tail.cnot(&pairs);
        circuit = circuit.compose(&noisy(&tail, q)?)?;
    }
    let mut plans = Vec::new();
    let mut corrections = Vec::new();
    for (pb, recs) in blocks.iter().zip(&records) {
        for sector in [Sector::XChecks, Sector::ZChecks] {
            let known = sector.known_after(pb.basis);
            let (plan, gens) = plan_sector(reg, pb.block, sector, recs, known, &circuit, pos, offline, bp)?;
            corrections.extend(gens.into_iter().map(|p| (pos, p)));
            plans.push(plan);
        }
    }
    let name = match entangle {
        Some(_) => "bell_prep",
        None => "encoded_prep",
    };
    // pure errors of a sector that is never measured again flip nothing
    Ok(ProtocolModule::new(name, circuit, corrections, plans_classifier(plans)).allow_degenerate())
}

/// Logical Bell pair on blocks `(a, b)`: `a` in |0̄⟩, `b` in |+̄⟩, then a
/// transversal CNOT controlled on `b`.
pub fn bell_prep_module(
    reg: &Register,
    a: usize,
    b: usize,
    rounds: usize,
    q: f64,
    offline: DecoderKind,
    bp: BpConfig,
) -> Result<ProtocolModule> {
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
    encoded_prep_module(reg, &blocks, rounds, q, offline, bp, Some((b, a)))
}

/// Noiseless preparation of one block: a single perfect check round whose
/// random outcomes are fixed with pure errors.
pub fn input_prep_module(reg: &Register, block: usize, basis: LogicalBasis) -> Result<ProtocolModule> {
    let mut m = encoded_prep_module(
        reg,
        &[PrepBlock { block, basis }],
        1,
        0.0,
        DecoderKind::Bp,
        BpConfig::default(),
        None,
    )?;
    m.name = "input_prep".into();
    Ok(m)
}
