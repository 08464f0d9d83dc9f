//! Stabilizer simulation: noiseless reference pass, batched frame sampling,
//! measurement-flip maps and detector-error-model extraction.

pub mod dem;
pub mod frame;
pub mod tableau;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::CliffordCircuit;
use crate::gf2::BitVec;

pub use dem::{build_dem, DetectorErrorModel, Mechanism};
pub use frame::{measurement_flip_map, FrameSampler, DEFAULT_BLOCK_SIZE};
pub use tableau::Tableau;

/// Noiseless measurement record with per-measurement determinism flags.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSample {
    pub outcomes: BitVec,
    /// Bit `j` set iff measurement `j` has a forced outcome.
    pub determinism: BitVec,
}

/// Noisy measurement records, one row per shot.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub measurements: usize,
    pub rows: Vec<BitVec>,
}

impl SampleBatch {
    pub fn shots(&self) -> usize {
        self.rows.len()
    }
}

/// Tableau simulation with noise channels skipped.
pub fn reference_sample(c: &CliffordCircuit, seed: u64) -> ReferenceSample {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = tableau::run_tableau(c, |_| rng.gen(), |_, _| {});
    ReferenceSample {
        outcomes: BitVec::from_bools(&run.outcomes),
        determinism: BitVec::from_bools(&run.deterministic),
    }
}

/// Samples `shots` noisy records with the default block size.
pub fn sample_batch(c: &CliffordCircuit, reference: &ReferenceSample, shots: usize, seed: u64) -> SampleBatch {
    FrameSampler::default().sample(c, reference, shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{apply_noise_model, Kind};
    use crate::pauli::PauliOperator;

    #[test]
    fn prepared_state_measures_deterministically() {
        let mut c = CliffordCircuit::new(1);
        c.reset_z(&[0]);
        c.measure_z(&[0]);
        let r = reference_sample(&c, 1);
        assert!(!r.outcomes.get(0));
        assert!(r.determinism.get(0));

        let mut c = CliffordCircuit::new(1);
        c.reset_z(&[0]);
        c.measure_x(&[0]);
        assert!(!reference_sample(&c, 1).determinism.get(0));
    }

    #[test]
    fn reference_pass_flags_forced_outcomes() {
        let mut c = CliffordCircuit::new(3);
        c.reset_z(&[0, 1, 2]);
        c.h(&[0]);
        c.cnot(&[(0, 1)]);
        c.measure_z(&[0, 1, 2]);
        c.measure_x(&[2]);
        let a = reference_sample(&c, 1);
        for seed in 2..20 {
            let b = reference_sample(&c, seed);
            assert_eq!(a.determinism, b.determinism);
            assert_eq!(b.outcomes.get(0), b.outcomes.get(1));
            assert!(!b.outcomes.get(2));
        }
        assert_eq!(a.determinism.to_bools(), vec![false, true, true, false]);
    }

    #[test]
    fn noiseless_deterministic_circuit_reproduces_reference() {
        let mut c = CliffordCircuit::new(3);
        c.reset_z(&[0, 1, 2]);
        c.push(crate::circuit::Instruction::gate(Kind::PauliX, vec![1])).unwrap();
        c.cnot(&[(1, 2), (0, 1)]);
        c.measure_z(&[0, 1, 2]);
        let noisy = apply_noise_model(&c, 0.0).unwrap();
        let r = reference_sample(&noisy, 5);
        let batch = sample_batch(&noisy, &r, 1000, 9);
        assert!(batch.rows.iter().all(|row| *row == r.outcomes));
        assert_eq!(r.outcomes.to_bools(), vec![false, true, true]);
    }

    #[test]
    fn flip_rate_matches_binomial() {
        let q = 0.1;
        let mut c = CliffordCircuit::new(1);
        c.reset_z(&[0]);
        c.noise(Kind::NoiseXFlip, &[0], q).unwrap();
        c.measure_z(&[0]);
        let r = reference_sample(&c, 0);
        let n = 100_000;
        let batch = sample_batch(&c, &r, n, 17);
        let ones = batch.rows.iter().filter(|row| row.get(0)).count() as f64;
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((ones / n as f64 - q).abs() < 3.0 * sigma, "rate {}", ones / n as f64);
    }

    #[test]
    fn x_fault_on_control_flips_both() {
        let mut c = CliffordCircuit::new(2);
        c.reset_z(&[0, 1]);
        c.noise(Kind::NoiseXFlip, &[0], 1.0).unwrap();
        c.cnot(&[(0, 1)]);
        c.measure_z(&[0, 1]);
        let r = reference_sample(&c, 0);
        let batch = sample_batch(&c, &r, 100, 1);
        assert!(batch.rows.iter().all(|row| row.to_bools() == vec![true, true]));
    }

    #[test]
    fn flip_map_examples() {
        let mut c = CliffordCircuit::new(2);
        c.cnot(&[(0, 1)]);
        c.measure_z(&[0, 1]);
        let x0: PauliOperator = "XI".parse().unwrap();
        let z0: PauliOperator = "ZI".parse().unwrap();
        let k = measurement_flip_map(&c, &[(0, x0), (0, z0)]).unwrap();
        assert_eq!(k.row(0).to_bools(), vec![true, true]);
        assert_eq!(k.row(1).to_bools(), vec![false, false]);
        let bad = measurement_flip_map(&c, &[(9, "XI".parse().unwrap())]);
        assert!(matches!(bad, Err(crate::Error::InvalidPosition { .. })));
    }

    #[test]
    fn block_size_does_not_change_seeded_output_shape() {
        let mut c = CliffordCircuit::new(2);
        c.reset_z(&[0, 1]);
        c.h(&[0]);
        c.measure_z(&[0, 1]);
        let r = reference_sample(&c, 0);
        let a = FrameSampler::new(64).sample(&c, &r, 300, 4);
        let b = FrameSampler::new(64).sample(&c, &r, 300, 4);
        assert_eq!(a, b);
        assert_eq!(a.shots(), 300);
    }
}
