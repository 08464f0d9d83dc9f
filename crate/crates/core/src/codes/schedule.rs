//! Syndrome-extraction rounds.
//!
//! X checks: auxiliary reset in |+⟩, CNOT auxiliary→data, MEASURE_X.
//! Z checks: auxiliary reset in |0⟩, CNOT data→auxiliary, MEASURE_Z.

use super::StabilizerCode;
use crate::circuit::CliffordCircuit;
use crate::gf2::BitMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckRef {
    X(usize),
    Z(usize),
}

/// First-fit layering: X-check CNOTs first, then Z-check CNOTs, each
/// placed in the earliest layer where neither endpoint is busy.
pub(crate) fn greedy_schedule(h_x: &BitMatrix, h_z: &BitMatrix) -> Vec<Vec<(CheckRef, usize)>> {
    let mut out = Vec::new();
    for (h, make) in [(h_x, CheckRef::X as fn(usize) -> CheckRef), (h_z, CheckRef::Z)] {
        let mut layers: Vec<Vec<(CheckRef, usize)>> = Vec::new();
        let mut busy_data: Vec<Vec<bool>> = Vec::new();
        let mut busy_check: Vec<Vec<bool>> = Vec::new();
        for i in 0..h.num_rows() {
            for q in h.row(i).iter_ones() {
                let l = (0..)
                    .find(|&l| l >= layers.len() || (!busy_data[l][q] && !busy_check[l][i]))
                    .unwrap();
                if l == layers.len() {
                    layers.push(Vec::new());
                    busy_data.push(vec![false; h.num_cols()]);
                    busy_check.push(vec![false; h.num_rows()]);
                }
                layers[l].push((make(i), q));
                busy_data[l][q] = true;
                busy_check[l][i] = true;
            }
        }
        out.extend(layers);
    }
    out
}

/// Where one code block lives in a larger register.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeBlock {
    pub data: Vec<usize>,
    pub anc_x: Vec<usize>,
    pub anc_z: Vec<usize>,
}

/// Measurement ordinals of one round, indexed by check.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundRecord {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
}

impl CodeBlock {
    /// Data on `offset..offset+n`, then X auxiliaries, then Z auxiliaries.
    pub fn contiguous(code: &StabilizerCode, offset: usize) -> Self {
        let a = offset + code.n;
        let b = a + code.r_x();
        Self {
            data: (offset..a).collect(),
            anc_x: (a..b).collect(),
            anc_z: (b..b + code.r_z()).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.data.len() + self.anc_x.len() + self.anc_z.len()
    }

    /// Appends one noiseless round of check measurements.
    pub fn append_round(&self, c: &mut CliffordCircuit, code: &StabilizerCode) -> RoundRecord {
        c.reset_x(&self.anc_x);
        c.reset_z(&self.anc_z);
        c.tick();
        for layer in &code.schedule {
            let pairs: Vec<(usize, usize)> = layer
                .iter()
                .map(|&(chk, q)| match chk {
                    CheckRef::X(i) => (self.anc_x[i], self.data[q]),
                    CheckRef::Z(i) => (self.data[q], self.anc_z[i]),
                })
                .collect();
            c.cnot(&pairs);
            c.tick();
        }
        RoundRecord {
            x: c.measure_x(&self.anc_x).collect(),
            z: c.measure_z(&self.anc_z).collect(),
        }
    }
}

/// Data-qubit preparation declared by the caller of [`syndrome_circuit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataInit {
    /// Reset data to |0⟩; first-round Z checks are deterministic.
    Zero,
    /// Reset data to |+⟩; first-round X checks are deterministic.
    Plus,
    /// No data preparation and no first-round detectors.
    Unspecified,
}

/// `rounds` noiseless syndrome rounds with detectors comparing consecutive
/// rounds. Per round, X-check detectors precede Z-check detectors.
pub fn syndrome_circuit(code: &StabilizerCode, rounds: usize, init: DataInit) -> CliffordCircuit {
    assert!(rounds >= 1, "at least one round");
    let block = CodeBlock::contiguous(code, 0);
    let mut c = CliffordCircuit::new(block.width());
    match init {
        DataInit::Zero => c.reset_z(&block.data),
        DataInit::Plus => c.reset_x(&block.data),
        DataInit::Unspecified => {}
    }
    let mut prev: Option<RoundRecord> = None;
    for _ in 0..rounds {
        let rec = block.append_round(&mut c, code);
        match &prev {
            None => {
                if init == DataInit::Plus {
                    for &m in &rec.x {
                        c.detector(&[m]).unwrap();
                    }
                }
                if init == DataInit::Zero {
                    for &m in &rec.z {
                        c.detector(&[m]).unwrap();
                    }
                }
            }
            Some(p) => {
                for (a, b) in p.x.iter().zip(&rec.x).chain(p.z.iter().zip(&rec.z)) {
                    c.detector(&[*a, *b]).unwrap();
                }
            }
        }
        prev = Some(rec);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{apply_noise_model, Kind};
    use crate::codes::{lifted_product_code, rotated_surface_code, toy_lifted_product};
    use crate::sim::{build_dem, reference_sample, sample_batch};
    use std::collections::HashSet;

    #[test]
    fn first_round_detectors_follow_initialisation() {
        let code = rotated_surface_code(3).unwrap();
        let c = syndrome_circuit(&code, 1, DataInit::Zero);
        assert_eq!(c.n_detectors(), 4);
        let c = syndrome_circuit(&code, 1, DataInit::Unspecified);
        assert_eq!(c.n_detectors(), 0);
        let c = syndrome_circuit(&code, 3, DataInit::Zero);
        assert_eq!(c.n_detectors(), 4 + 2 * 8);
    }

    #[test]
    fn noiseless_detectors_never_fire() {
        for code in [rotated_surface_code(3).unwrap(), lifted_product_code(&toy_lifted_product()).unwrap()] {
            for init in [DataInit::Zero, DataInit::Plus] {
                let c = apply_noise_model(&syndrome_circuit(&code, 3, init), 0.0).unwrap();
                let dem = build_dem(&c).unwrap();
                assert!(dem.mechanisms.is_empty());
                let r = reference_sample(&c, 1);
                let batch = sample_batch(&c, &r, 300, 2);
                let dets = c.detector_refs();
                for row in &batch.rows {
                    assert_eq!(
                        crate::sim::dem::parities(&dets, row),
                        crate::sim::dem::parities(&dets, &r.outcomes)
                    );
                }
            }
        }
    }

    #[test]
    fn aux_measurement_flip_fires_two_consecutive_detectors() {
        let code = rotated_surface_code(3).unwrap();
        let rounds = 4;
        let base = syndrome_circuit(&code, rounds, DataInit::Zero);
        // inject an X flip right before the round-2 MEASURE_Z of Z-check 1
        let mut c = CliffordCircuit::new(base.n_qubits());
        let mut seen = 0;
        let anc = CodeBlock::contiguous(&code, 0).anc_z[1];
        for inst in base.instructions() {
            if inst.kind == Kind::MeasureZ {
                seen += 1;
                if seen == 2 {
                    c.noise(Kind::NoiseXFlip, &[anc], 0.5).unwrap();
                }
            }
            c.push(inst.clone()).unwrap();
        }
        let dem = build_dem(&c).unwrap();
        assert_eq!(dem.mechanisms.len(), 1);
        // detectors: 4 first-round Z, then per later round 4 X + 4 Z
        let round2_z1 = 4 + 4 + 1;
        let round3_z1 = 4 + 8 + 4 + 1;
        assert_eq!(dem.mechanisms[0].detectors, vec![round2_z1, round3_z1]);
    }

    #[test]
    fn greedy_layers_are_conflict_free() {
        let code = lifted_product_code(&toy_lifted_product()).unwrap();
        for layer in &code.schedule {
            let mut data = HashSet::new();
            let mut checks = HashSet::new();
            for (chk, q) in layer {
                assert!(data.insert(*q));
                assert!(checks.insert(*chk));
            }
        }
    }
}
