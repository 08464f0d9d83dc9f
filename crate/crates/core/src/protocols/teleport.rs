//! Teleportation-based error correction and decoded readout.

use std::sync::Arc;

use super::online::CodeCapacityDecoder;
use super::prep::LogicalBasis;
use super::register::Register;
use super::{noisy, Classifier, ProtocolModule};
use crate::circuit::CliffordCircuit;
use crate::codes::StabilizerCode;
use crate::error::Result;
use crate::gf2::{BitMatrix, BitVec};
use crate::pauli::PauliOperator;

/// Corrected Bell-measurement outcomes `(X̄X̄, Z̄Z̄)` per logical qubit.
///
/// `x` are the X outcomes of the data block, `z` the Z outcomes of the
/// auxiliary block, and `(r_z, r_x)` the Z and X parts of the recovery.
/// Each outcome is the raw logical parity plus the commutation of the
/// logical with the recovery.
pub fn knill_corrected_outcomes(
    code: &StabilizerCode,
    x: &BitVec,
    z: &BitVec,
    r_z: &BitVec,
    r_x: &BitVec,
) -> (BitVec, BitVec) {
    let corrected = |l: &BitMatrix, m: &BitVec, r: &BitVec| {
        let mut v = l.mul_vec(m);
        v.xor_assign(&l.mul_vec(r));
        v
    };
    (corrected(&code.logical_x, x, r_z), corrected(&code.logical_z, z, r_x))
}

fn transversal(reg: &Register, control: usize, target: usize) -> Vec<(usize, usize)> {
    reg.blocks[control]
        .iter()
        .copied()
        .zip(reg.blocks[target].iter().copied())
        .collect()
}

/// Logical corrections on block `b`: X̄ for every logical, then Z̄.
fn logical_corrections(reg: &Register, b: usize, pos: usize, x: bool, z: bool) -> Vec<(usize, PauliOperator)> {
    let code = &reg.code;
    let mut out = Vec::new();
    if x {
        out.extend(code.logical_x.rows().iter().map(|l| (pos, reg.x_on(b, l))));
    }
    if z {
        out.extend(code.logical_z.rows().iter().map(|l| (pos, reg.z_on(b, l))));
    }
    out
}

/// Knill error correction: transversal Bell measurement of data block `d`
/// with block `a`, teleporting into block `b`. Blocks `a` and `b` must hold
/// a logical Bell pair. The combined syndrome is decoded with the online
/// decoder and the corrected logical outcomes select X̄/Z̄ on `b`.
pub fn knill_gadget(
    reg: &Register,
    d: usize,
    a: usize,
    b: usize,
    q: f64,
    online: Arc<CodeCapacityDecoder>,
) -> Result<ProtocolModule> {
    let code = reg.code.clone();
    let n = code.n;
    let mut bare = CliffordCircuit::new(reg.n_qubits());
    bare.cnot(&transversal(reg, d, a));
    bare.measure_x(&reg.blocks[d]);
    bare.measure_z(&reg.blocks[a]);
    let circuit = noisy(&bare, q)?;
    let corrections = logical_corrections(reg, b, circuit.len(), true, true);
    let classifier: Classifier = Arc::new(move |slice: &BitVec| {
        let x = slice.slice(0, n);
        let z = slice.slice(n, n);
        let r_z = online.recover_z(&code.h_x.mul_vec(&x));
        let r_x = online.recover_x(&code.h_z.mul_vec(&z));
        let (mx, mz) = knill_corrected_outcomes(&code, &x, &z, &r_z, &r_x);
        mz.concat(&mx)
    });
    // logical corrections outside the readout basis flip nothing downstream
    Ok(ProtocolModule::new("knill", circuit, corrections, classifier).allow_degenerate())
}

/// Compressed Knill error correction for CSS codes: one-bit teleportation
/// of `d` into `a` (holding |0̄⟩, only X checks decoded), then of `a` into
/// `b` (holding |+̄⟩, only Z checks decoded).
pub fn compressed_knill_gadget(
    reg: &Register,
    d: usize,
    a: usize,
    b: usize,
    q: f64,
    online: Arc<CodeCapacityDecoder>,
) -> Result<(ProtocolModule, ProtocolModule)> {
    let n = reg.code.n;

    let mut bare = CliffordCircuit::new(reg.n_qubits());
    bare.cnot(&transversal(reg, d, a));
    bare.measure_x(&reg.blocks[d]);
    let c1 = noisy(&bare, q)?;
    let corr1 = logical_corrections(reg, a, c1.len(), false, true);
    let (code, dec) = (reg.code.clone(), online.clone());
    let f1: Classifier = Arc::new(move |slice: &BitVec| {
        let x = slice.slice(0, n);
        let r_z = dec.recover_z(&code.h_x.mul_vec(&x));
        let mut mx = code.logical_x.mul_vec(&x);
        mx.xor_assign(&code.logical_x.mul_vec(&r_z));
        mx
    });

    let mut bare = CliffordCircuit::new(reg.n_qubits());
    bare.cnot(&transversal(reg, b, a));
    bare.measure_z(&reg.blocks[a]);
    let c2 = noisy(&bare, q)?;
    let corr2 = logical_corrections(reg, b, c2.len(), true, false);
    let code = reg.code.clone();
    let f2: Classifier = Arc::new(move |slice: &BitVec| {
        let z = slice.slice(0, n);
        let r_x = online.recover_x(&code.h_z.mul_vec(&z));
        let mut mz = code.logical_z.mul_vec(&z);
        mz.xor_assign(&code.logical_z.mul_vec(&r_x));
        mz
    });
    Ok((
        ProtocolModule::new("compressed_knill_x", c1, corr1, f1).allow_degenerate(),
        ProtocolModule::new("compressed_knill_z", c2, corr2, f2).allow_degenerate(),
    ))
}

/// The two modules of a decoded logical readout.
#[derive(Debug)]
pub struct ReadoutModules {
    /// Transversal measurement of the block; writes decoded logical values
    /// onto the result qubits as X corrections.
    pub measure: ProtocolModule,
    /// Noiseless measurement of the result qubits.
    pub result: ProtocolModule,
}

/// Measures block `b` transversally in `basis` (with measurement noise
/// `q`), decodes the outcomes with the online decoder and copies the
/// decoded logical values onto the register's result qubits.
pub fn readout_modules(
    reg: &Register,
    b: usize,
    basis: LogicalBasis,
    q: f64,
    online: Arc<CodeCapacityDecoder>,
) -> Result<ReadoutModules> {
    let code = reg.code.clone();
    let n = code.n;
    let mut bare = CliffordCircuit::new(reg.n_qubits());
    match basis {
        LogicalBasis::Zero => bare.measure_z(&reg.blocks[b]),
        LogicalBasis::Plus => bare.measure_x(&reg.blocks[b]),
    };
    let mut measure = noisy(&bare, q)?;
    measure.reset_z(&reg.result);
    let nq = reg.n_qubits();
    let corrections = reg
        .result
        .iter()
        .map(|&r| (measure.len(), PauliOperator::single(nq, r, crate::pauli::PauliSymbol::X)))
        .collect();
    let classifier: Classifier = Arc::new(move |slice: &BitVec| {
        let bits = slice.slice(0, n);
        let (checks, logicals) = match basis {
            LogicalBasis::Zero => (&code.h_z, &code.logical_z),
            LogicalBasis::Plus => (&code.h_x, &code.logical_x),
        };
        let s = checks.mul_vec(&bits);
        let r = match basis {
            LogicalBasis::Zero => online.recover_x(&s),
            LogicalBasis::Plus => online.recover_z(&s),
        };
        let mut v = logicals.mul_vec(&bits);
        v.xor_assign(&logicals.mul_vec(&r));
        v
    });
    let mut result = CliffordCircuit::new(nq);
    result.measure_z(&reg.result);
    Ok(ReadoutModules {
        measure: ProtocolModule::new("readout", measure, corrections, classifier),
        result: ProtocolModule::passive("result", result),
    })
}
