//! Modular fault-tolerant protocols and the composer that samples them.
//!
//! A [`ProtocolModule`] is a circuit, a classical function of that
//! circuit's own measurement outcomes, and a list of Pauli corrections the
//! function may select. Modules are composed on a shared register and
//! sampled without ever applying corrections physically: every selected
//! correction is turned into measurement flips through a precomputed flip
//! matrix and XORed into the record.

mod chains;
mod online;
mod prep;
mod register;
mod sector;
mod teleport;
mod windowed;

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;

use crate::circuit::CliffordCircuit;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::pauli::PauliOperator;
use crate::sim::dem::parities;
use crate::sim::{measurement_flip_map, reference_sample, FrameSampler, SampleBatch};

pub use chains::{compressed_knill_memory, knill_memory, windowed_memory, ChainSettings};
pub use online::CodeCapacityDecoder;
pub use prep::{bell_prep_module, encoded_prep_module, input_prep_module, LogicalBasis, PrepBlock};
pub use register::Register;
pub use teleport::{
    compressed_knill_gadget, knill_corrected_outcomes, knill_gadget, readout_modules, ReadoutModules,
};
pub use windowed::{windowed_ec_module, WindowGeometry};

/// Pure map from a module's own measurement slice to correction bits.
pub type Classifier = Arc<dyn Fn(&BitVec) -> BitVec + Send + Sync>;

#[derive(Clone)]
pub struct ProtocolModule {
    pub name: String,
    /// Circuit on the full register.
    pub circuit: CliffordCircuit,
    /// Correction generators as `(position, Pauli)`, where `position` is an
    /// instruction boundary of this module's circuit.
    pub corrections: Vec<(usize, PauliOperator)>,
    pub classifier: Classifier,
    /// Flip matrix over the composed circuit, filled in by composition.
    pub flip_matrix: Option<BitMatrix>,
    /// Accept generators whose flip rows are dependent, e.g. corrections
    /// that no later measurement can see.
    pub degenerate: bool,
}

impl fmt::Debug for ProtocolModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolModule")
            .field("name", &self.name)
            .field("instructions", &self.circuit.len())
            .field("measurements", &self.circuit.n_measurements())
            .field("corrections", &self.corrections.len())
            .finish()
    }
}

impl ProtocolModule {
    pub fn new(
        name: impl Into<String>,
        circuit: CliffordCircuit,
        corrections: Vec<(usize, PauliOperator)>,
        classifier: Classifier,
    ) -> Self {
        Self {
            name: name.into(),
            circuit,
            corrections,
            classifier,
            flip_matrix: None,
            degenerate: false,
        }
    }

    /// A module that never requests corrections.
    pub fn passive(name: impl Into<String>, circuit: CliffordCircuit) -> Self {
        Self::new(name, circuit, Vec::new(), Arc::new(|_| BitVec::zeros(0)))
    }

    /// Runs the classifier and checks the output length.
    pub fn classify(&self, slice: &BitVec) -> BitVec {
        let out = (self.classifier)(slice);
        assert_eq!(
            out.len(),
            self.corrections.len(),
            "classifier of `{}` returned the wrong number of bits",
            self.name
        );
        out
    }

    /// Marks the correction generators as possibly dependent.
    pub fn allow_degenerate(mut self) -> Self {
        self.degenerate = true;
        self
    }

    /// Index just after the last measurement instruction (0 if none).
    fn measurements_end(&self) -> usize {
        self.circuit
            .instructions()
            .iter()
            .rposition(|i| i.kind.is_measurement())
            .map_or(0, |i| i + 1)
    }
}

/// Modules composed on one register, with flip matrices precomputed over
/// the whole circuit.
#[derive(Clone, Debug)]
pub struct ComposedExperiment {
    modules: Vec<ProtocolModule>,
    observables: Vec<Vec<usize>>,
    circuit: CliffordCircuit,
    slices: Vec<Range<usize>>,
}

impl ComposedExperiment {
    /// Composes `modules` in order. `observables` are parities of global
    /// measurement ordinals. Fails on width mismatches, corrections placed
    /// before their module's last measurement, and correction generators
    /// whose flip vectors are linearly dependent unless the module is
    /// flagged degenerate.
    pub fn new(mut modules: Vec<ProtocolModule>, observables: Vec<Vec<usize>>) -> Result<Self> {
        let Some(first) = modules.first() else {
            return Err(Error::InvalidProtocol("no modules".into()));
        };
        let n = first.circuit.n_qubits();
        let mut circuit = CliffordCircuit::new(n);
        let mut slices = Vec::with_capacity(modules.len());
        let mut insertions = Vec::with_capacity(modules.len());
        for m in &modules {
            if m.circuit.n_qubits() != n {
                return Err(Error::DimensionMismatch {
                    left: m.circuit.n_qubits(),
                    right: n,
                });
            }
            let end = m.measurements_end();
            let offset = circuit.len();
            let mut ins = Vec::with_capacity(m.corrections.len());
            for (pos, p) in &m.corrections {
                if *pos < end || *pos > m.circuit.len() {
                    return Err(Error::InvalidProtocol(format!(
                        "module `{}`: correction at {pos} must lie in {end}..={}",
                        m.name,
                        m.circuit.len()
                    )));
                }
                if p.num_qubits() != n {
                    return Err(Error::DimensionMismatch {
                        left: p.num_qubits(),
                        right: n,
                    });
                }
                ins.push((offset + pos, p.clone()));
            }
            insertions.push(ins);
            let start = circuit.n_measurements();
            circuit = circuit.compose(&m.circuit)?;
            slices.push(start..circuit.n_measurements());
        }
        let total = circuit.n_measurements();
        if let Some(&bad) = observables.iter().flatten().find(|&&j| j >= total) {
            return Err(Error::InvalidProtocol(format!(
                "observable references measurement {bad} of {total}"
            )));
        }
        for (m, ins) in modules.iter_mut().zip(&insertions) {
            let k = measurement_flip_map(&circuit, ins)?;
            if !m.degenerate && k.rank() < ins.len() {
                return Err(Error::InvalidProtocol(format!(
                    "module `{}`: correction generators are degenerate (rank {} < {})",
                    m.name,
                    k.rank(),
                    ins.len()
                )));
            }
            m.flip_matrix = Some(k);
        }
        Ok(Self {
            modules,
            observables,
            circuit,
            slices,
        })
    }

    pub fn circuit(&self) -> &CliffordCircuit {
        &self.circuit
    }

    pub fn modules(&self) -> &[ProtocolModule] {
        &self.modules
    }

    pub fn observables(&self) -> &[Vec<usize>] {
        &self.observables
    }

    /// Global measurement range of module `i`.
    pub fn slice(&self, i: usize) -> Range<usize> {
        self.slices[i].clone()
    }

    /// Applies every module's corrections to one measurement record, in
    /// module order: `m ← m ⊕ f_i(m_i) · K_i`.
    pub fn correct(&self, m: &mut BitVec) {
        for (module, range) in self.modules.iter().zip(&self.slices) {
            if module.corrections.is_empty() {
                continue;
            }
            let slice = m.slice(range.start, range.len());
            let select = module.classify(&slice);
            if !select.is_zero() {
                let k = module.flip_matrix.as_ref().expect("set by composition");
                m.xor_assign(&k.left_mul_vec(&select));
            }
        }
    }

    pub fn correct_batch(&self, batch: &mut SampleBatch) {
        batch.rows.par_iter_mut().for_each(|row| self.correct(row));
    }

    pub fn observable_values(&self, m: &BitVec) -> BitVec {
        parities(&self.observables, m)
    }

    /// Corrected observable values of a noiseless run.
    pub fn expected_observables(&self) -> BitVec {
        let mut m = reference_sample(&self.circuit, 0).outcomes;
        self.correct(&mut m);
        self.observable_values(&m)
    }

    /// Noise instructions present in the composed circuit.
    pub fn noise_sites(&self) -> usize {
        self.circuit.instructions().iter().filter(|i| i.kind.is_noise()).count()
    }
}

/// Samples the composed circuit and applies every module's corrections.
pub fn compose_and_sample(exp: &ComposedExperiment, shots: usize, seed: u64) -> SampleBatch {
    let reference = reference_sample(exp.circuit(), seed);
    let mut batch = FrameSampler::default().sample(exp.circuit(), &reference, shots, seed);
    exp.correct_batch(&mut batch);
    batch
}

/// Applies the noise model to a bare circuit unless `q` is zero, in which
/// case the circuit is returned unchanged.
pub(crate) fn noisy(c: &CliffordCircuit, q: f64) -> Result<CliffordCircuit> {
    if q == 0.0 {
        Ok(c.clone())
    } else {
        crate::circuit::apply_noise_model(c, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliSymbol;

    fn measure_module(n: usize, q: usize) -> CliffordCircuit {
        let mut c = CliffordCircuit::new(n);
        c.measure_z(&[q]);
        c
    }

    #[test]
    fn identity_classifier_leaves_record_unchanged() {
        let mut c = CliffordCircuit::new(2);
        c.reset_z(&[0, 1]);
        c.h(&[0]);
        c.cnot(&[(0, 1)]);
        c.measure_z(&[0, 1]);
        let x1 = PauliOperator::single(2, 1, PauliSymbol::X);
        let len = c.len();
        let m = ProtocolModule::new("m", c, vec![(len, x1)], Arc::new(|_| BitVec::zeros(1)));
        let tail = ProtocolModule::passive("tail", measure_module(2, 1));
        let exp = ComposedExperiment::new(vec![m, tail], vec![vec![2]]).unwrap();
        let raw = compose_and_sample(&exp, 64, 3);
        let reference = reference_sample(exp.circuit(), 3);
        let plain = FrameSampler::default().sample(exp.circuit(), &reference, 64, 3);
        assert_eq!(raw, plain);
    }

    #[test]
    fn forced_correction_reaches_next_module() {
        // module 1 always fires X on qubit 1; module 2 reports what it saw
        let mut c1 = CliffordCircuit::new(2);
        c1.reset_z(&[0, 1]);
        c1.measure_z(&[0]);
        let len = c1.len();
        let x1 = PauliOperator::single(2, 1, PauliSymbol::X);
        let m1 = ProtocolModule::new("fire", c1, vec![(len, x1)], Arc::new(|_| BitVec::from_bools(&[true])));
        let seen = Arc::new(std::sync::Mutex::new(Vec::new()));
        let log = seen.clone();
        let c2 = measure_module(2, 1);
        let x0 = PauliOperator::single(2, 0, PauliSymbol::X);
        let m2 = ProtocolModule::new(
            "watch",
            c2,
            vec![(1, x0)],
            Arc::new(move |s: &BitVec| {
                log.lock().unwrap().push(s.get(0));
                BitVec::zeros(1)
            }),
        );
        let tail = ProtocolModule::passive("tail", measure_module(2, 0));
        let exp = ComposedExperiment::new(vec![m1, m2, tail], vec![]).unwrap();
        let k = exp.modules()[0].flip_matrix.as_ref().unwrap();
        assert_eq!(k.row(0).iter_ones().collect::<Vec<_>>(), vec![1]);
        let batch = compose_and_sample(&exp, 100, 1);
        assert!(batch.rows.iter().all(|r| r.get(1)));
        assert!(seen.lock().unwrap().iter().all(|&b| b));
    }

    #[test]
    fn composition_rejects_bad_modules() {
        let x = PauliOperator::single(1, 0, PauliSymbol::X);
        let z = PauliOperator::single(1, 0, PauliSymbol::Z);
        // correction before the module's own measurement
        let m = ProtocolModule::new("early", measure_module(1, 0), vec![(0, x.clone())], Arc::new(|_| BitVec::zeros(1)));
        assert!(ComposedExperiment::new(vec![m], vec![]).is_err());
        // X and XZ flip the same later measurements
        let y = x.multiply(&z).unwrap();
        let m = ProtocolModule::new(
            "degenerate",
            measure_module(1, 0),
            vec![(1, x.clone()), (1, y.clone())],
            Arc::new(|_| BitVec::zeros(2)),
        );
        let tail = ProtocolModule::passive("tail", measure_module(1, 0));
        assert!(matches!(
            ComposedExperiment::new(vec![m, tail], vec![]),
            Err(Error::InvalidProtocol(_))
        ));
        let m = ProtocolModule::new(
            "flagged",
            measure_module(1, 0),
            vec![(1, x.clone()), (1, y.clone())],
            Arc::new(|_| BitVec::zeros(2)),
        )
        .allow_degenerate();
        let tail = ProtocolModule::passive("tail", measure_module(1, 0));
        assert!(ComposedExperiment::new(vec![m, tail], vec![]).is_ok());
        let m = ProtocolModule::passive("m", measure_module(1, 0));
        assert!(ComposedExperiment::new(vec![m], vec![vec![3]]).is_err());
        assert!(ComposedExperiment::new(vec![], vec![]).is_err());
    }

    #[test]
    fn flip_rows_are_linear_in_generators() {
        let mut c = CliffordCircuit::new(3);
        c.reset_z(&[0, 1, 2]);
        let len = c.len();
        let gens = [
            PauliOperator::single(3, 0, PauliSymbol::X),
            PauliOperator::single(3, 1, PauliSymbol::Y),
            PauliOperator::single(3, 2, PauliSymbol::X),
        ];
        let product = gens[0].multiply(&gens[1]).unwrap().multiply(&gens[2]).unwrap();
        let mut tail = CliffordCircuit::new(3);
        tail.cnot(&[(0, 1), (1, 2)]);
        tail.h(&[0]);
        tail.measure_z(&[0, 1, 2]);
        tail.measure_x(&[1]);
        let full = c.compose(&tail).unwrap();
        let mut ins: Vec<(usize, PauliOperator)> = gens.iter().map(|g| (len, g.clone())).collect();
        ins.push((len, product));
        let k = measurement_flip_map(&full, &ins).unwrap();
        let mut xor = k.row(0).clone();
        xor.xor_assign(k.row(1));
        xor.xor_assign(k.row(2));
        assert_eq!(&xor, k.row(3));
    }
}
