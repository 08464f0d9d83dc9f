//! Fixtures shared by the benchmarks.

use knill_core::codes::{syndrome_circuit, DataInit};
use knill_core::sim::build_dem;
use knill_core::{apply_noise_model, rotated_surface_code, BitVec, CliffordCircuit, DecodingProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Noisy `d`-round memory circuit of the distance-`d` surface code.
pub fn surface_memory(d: usize, q: f64) -> CliffordCircuit {
    let code = rotated_surface_code(d).expect("valid distance");
    apply_noise_model(&syndrome_circuit(&code, d, DataInit::Zero), q).expect("bare circuit")
}

/// Decoding problem of [`surface_memory`].
pub fn surface_memory_problem(d: usize, q: f64) -> DecodingProblem {
    DecodingProblem::from_dem(&build_dem(&surface_memory(d, q)).expect("deterministic detectors"))
}

/// Syndromes of errors drawn independently from the problem's priors.
pub fn sample_syndromes(p: &DecodingProblem, count: usize, seed: u64) -> Vec<BitVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let e = BitVec::from_bools(&p.priors.iter().map(|&pr| rng.gen::<f64>() < pr).collect::<Vec<_>>());
            p.syndrome_of(&e)
        })
        .collect()
}
