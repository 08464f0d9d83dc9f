//! Error models for a module's own decoding problems.
//!
//! Detectors are given as parities of the module's measurements. Tracked
//! quantities ("virtual observables") may also depend on the error frame at
//! a chosen instruction boundary, which is how a module predicts the
//! residual Pauli frame on its output blocks.

use std::collections::HashMap;

use crate::circuit::CliffordCircuit;
use crate::error::Result;
use crate::gf2::BitVec;
use crate::pauli::PauliOperator;
use crate::sim::dem::{enumerate_faults, parities};
use crate::sim::frame::{propagate, record_to_rows, Insertion};
use crate::sim::{DetectorErrorModel, Mechanism};

/// A tracked bit: parity of `refs` XOR commutation of the error frame at
/// the snapshot position with `test` (if any).
#[derive(Clone, Debug)]
pub(crate) struct Tracked {
    pub refs: Vec<usize>,
    pub test: Option<PauliOperator>,
}

impl Tracked {
    pub fn frame(test: PauliOperator) -> Self {
        Self { refs: Vec::new(), test: Some(test) }
    }

    pub fn frame_and(refs: Vec<usize>, test: PauliOperator) -> Self {
        Self { refs, test: Some(test) }
    }
}

/// Builds an error model over `detectors` and `tracked` for the noisy
/// circuit `c`, with the frame snapshot taken at instruction boundary
/// `pos`. Faults are merged by signature; faults with an empty signature
/// are dropped.
pub(crate) fn sector_model(
    c: &CliffordCircuit,
    pos: usize,
    detectors: &[Vec<usize>],
    tracked: &[Tracked],
) -> Result<DetectorErrorModel> {
    let faults = enumerate_faults(c);
    let ins: Vec<Insertion> = faults
        .iter()
        .map(|f| Insertion {
            pos: f.instruction + 1,
            ops: f.ops.clone(),
        })
        .collect();
    let qubits: Vec<usize> = (0..c.n_qubits()).collect();
    let prop = propagate(c, &ins, Some((pos, &qubits)))?;
    let flips = record_to_rows(&prop, c.n_measurements());
    let (sx, sz) = prop.snapshot.as_ref().expect("snapshot requested");
    let bit = |rows: &Vec<Vec<u64>>, q: usize, t: usize| (rows[q][t / 64] >> (t % 64)) & 1 == 1;
    let mut index: HashMap<(Vec<usize>, Vec<usize>), usize> = HashMap::new();
    let mut mechanisms: Vec<Mechanism> = Vec::new();
    for (t, (f, row)) in faults.iter().zip(flips.rows()).enumerate() {
        let d: Vec<usize> = parities(detectors, row).iter_ones().collect();
        let o: Vec<usize> = tracked
            .iter()
            .enumerate()
            .filter(|(_, tr)| {
                let mut v = tr.refs.iter().fold(false, |a, &j| a ^ row.get(j));
                if let Some(p) = &tr.test {
                    for q in p.support() {
                        let (px, pz) = p.get(q).bits();
                        v ^= (bit(sx, q, t) && pz) ^ (bit(sz, q, t) && px);
                    }
                }
                v
            })
            .map(|(i, _)| i)
            .collect();
        if d.is_empty() && o.is_empty() {
            continue;
        }
        match index.get(&(d.clone(), o.clone())) {
            Some(&i) => {
                let m = &mut mechanisms[i];
                m.p = m.p * (1.0 - f.p) + f.p * (1.0 - m.p);
            }
            None => {
                index.insert((d.clone(), o.clone()), mechanisms.len());
                mechanisms.push(Mechanism {
                    p: f.p,
                    detectors: d,
                    observables: o,
                });
            }
        }
    }
    Ok(DetectorErrorModel {
        n_detectors: detectors.len(),
        n_observables: tracked.len(),
        mechanisms,
    })
}

/// Detector values of a measurement slice.
pub(crate) fn detector_values(detectors: &[Vec<usize>], slice: &BitVec) -> BitVec {
    parities(detectors, slice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Kind;
    use crate::pauli::PauliSymbol;

    #[test]
    fn frame_tracking_sees_only_earlier_faults() {
        // X flip before the snapshot, another after it
        let mut c = CliffordCircuit::new(1);
        c.reset_z(&[0]);
        c.noise(Kind::NoiseXFlip, &[0], 0.1).unwrap();
        c.noise(Kind::NoiseXFlip, &[0], 0.2).unwrap();
        c.measure_z(&[0]);
        let z = PauliOperator::single(1, 0, PauliSymbol::Z);
        let dem = sector_model(&c, 2, &[vec![0]], &[Tracked::frame(z)]).unwrap();
        assert_eq!(dem.mechanisms.len(), 2);
        assert_eq!(dem.mechanisms[0].observables, vec![0]);
        assert!(dem.mechanisms[1].observables.is_empty());
        assert!((dem.mechanisms[1].p - 0.2).abs() < 1e-12);
    }

    #[test]
    fn refs_combine_with_frame() {
        let mut c = CliffordCircuit::new(1);
        c.reset_z(&[0]);
        c.noise(Kind::NoiseXFlip, &[0], 0.1).unwrap();
        c.measure_z(&[0]);
        let z = PauliOperator::single(1, 0, PauliSymbol::Z);
        // flip of the measurement cancels the frame's anticommutation
        let dem = sector_model(&c, 3, &[], &[Tracked::frame_and(vec![0], z)]).unwrap();
        assert!(dem.mechanisms.is_empty());
    }
}
