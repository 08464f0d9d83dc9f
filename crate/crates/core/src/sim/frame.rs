//! Batched Pauli-frame propagation.
//!
//! Frames are stored qubit-major: row `q` holds one bit per column (a shot
//! when sampling, an insertion when computing flip maps), packed in `u64`
//! words, so every gate is a handful of word-parallel XORs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{CliffordCircuit, Instruction, Kind};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::pauli::{PauliOperator, PauliSymbol};
use crate::sim::{ReferenceSample, SampleBatch};

/// Default number of shots simulated together.
pub const DEFAULT_BLOCK_SIZE: usize = 256;

/// Seeds the generator for one shot block. The stream is ChaCha8 keyed by
/// `seed` (expanded by `SeedableRng::seed_from_u64`) with the block index as
/// the stream id, so block outputs do not depend on scheduling.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

pub(crate) struct Frames {
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl Frames {
    pub(crate) fn new(n_qubits: usize, width: usize) -> Self {
        let words = width.div_ceil(64).max(1);
        Self {
            words,
            x: vec![0; n_qubits * words],
            z: vec![0; n_qubits * words],
        }
    }

    #[inline]
    fn rng_of(&self, q: usize) -> std::ops::Range<usize> {
        q * self.words..(q + 1) * self.words
    }

    #[inline]
    pub(crate) fn x_row(&self, q: usize) -> &[u64] {
        &self.x[self.rng_of(q)]
    }

    #[inline]
    pub(crate) fn z_row(&self, q: usize) -> &[u64] {
        &self.z[self.rng_of(q)]
    }

    #[inline]
    fn flip(&mut self, q: usize, col: usize, sym: PauliSymbol) {
        let (px, pz) = sym.bits();
        let i = q * self.words + col / 64;
        let m = 1u64 << (col % 64);
        if px {
            self.x[i] ^= m;
        }
        if pz {
            self.z[i] ^= m;
        }
    }

    fn h(&mut self, q: usize) {
        let r = self.rng_of(q);
        for i in r {
            std::mem::swap(&mut self.x[i], &mut self.z[i]);
        }
    }

    fn s(&mut self, q: usize) {
        for i in self.rng_of(q) {
            self.z[i] ^= self.x[i];
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let w = self.words;
        for k in 0..w {
            self.x[t * w + k] ^= self.x[c * w + k];
            self.z[c * w + k] ^= self.z[t * w + k];
        }
    }

    fn clear_x(&mut self, q: usize) {
        let r = self.rng_of(q);
        self.x[r].fill(0);
    }

    fn clear_z(&mut self, q: usize) {
        let r = self.rng_of(q);
        self.z[r].fill(0);
    }

    fn randomize_x(&mut self, q: usize, rng: &mut impl Rng) {
        for i in self.rng_of(q) {
            self.x[i] ^= rng.gen::<u64>();
        }
    }

    fn randomize_z(&mut self, q: usize, rng: &mut impl Rng) {
        for i in self.rng_of(q) {
            self.z[i] ^= rng.gen::<u64>();
        }
    }

    /// Applies a Clifford gate or reset; noise and annotations are ignored.
    /// Measurements append one record row per target to `record`.
    fn apply(&mut self, inst: &Instruction, record: &mut Vec<u64>, mut randomize: Option<&mut ChaCha8Rng>) {
        match inst.kind {
            Kind::ResetZ => {
                for &q in &inst.targets {
                    self.clear_x(q);
                    self.clear_z(q);
                    if let Some(rng) = randomize.as_deref_mut() {
                        self.randomize_z(q, rng);
                    }
                }
            }
            Kind::ResetX => {
                for &q in &inst.targets {
                    self.clear_x(q);
                    self.clear_z(q);
                    if let Some(rng) = randomize.as_deref_mut() {
                        self.randomize_x(q, rng);
                    }
                }
            }
            Kind::H => inst.targets.iter().for_each(|&q| self.h(q)),
            Kind::S => inst.targets.iter().for_each(|&q| self.s(q)),
            Kind::Cnot => inst.pairs().for_each(|(c, t)| self.cnot(c, t)),
            Kind::MeasureZ => {
                for &q in &inst.targets {
                    record.extend_from_slice(self.x_row(q));
                    if let Some(rng) = randomize.as_deref_mut() {
                        self.randomize_z(q, rng);
                    }
                }
            }
            Kind::MeasureX => {
                for &q in &inst.targets {
                    record.extend_from_slice(self.z_row(q));
                    if let Some(rng) = randomize.as_deref_mut() {
                        self.randomize_x(q, rng);
                    }
                }
            }
            _ => {}
        }
    }

    /// Samples one noise instruction independently in every column.
    fn sample_noise(&mut self, inst: &Instruction, width: usize, rng: &mut ChaCha8Rng) {
        let p = inst.prob.unwrap_or(0.0);
        if p <= 0.0 {
            return;
        }
        let sites = if inst.kind.is_pairwise() {
            inst.targets.len() / 2
        } else {
            inst.targets.len()
        };
        let total = sites * width;
        let hit = |frames: &mut Frames, idx: usize, rng: &mut ChaCha8Rng| {
            let (site, col) = (idx / width, idx % width);
            match inst.kind {
                Kind::NoiseXFlip => frames.flip(inst.targets[site], col, PauliSymbol::X),
                Kind::NoiseZFlip => frames.flip(inst.targets[site], col, PauliSymbol::Z),
                Kind::NoiseDep1 => {
                    let s = [PauliSymbol::X, PauliSymbol::Y, PauliSymbol::Z][rng.gen_range(0..3)];
                    frames.flip(inst.targets[site], col, s);
                }
                Kind::NoiseDep2 => {
                    let (a, b) = two_qubit_pauli(rng.gen_range(1..16));
                    frames.flip(inst.targets[2 * site], col, a);
                    frames.flip(inst.targets[2 * site + 1], col, b);
                }
                _ => unreachable!(),
            }
        };
        if p >= 1.0 {
            for idx in 0..total {
                hit(self, idx, rng);
            }
            return;
        }
        let log_q = (-p).ln_1p();
        let mut idx = 0usize;
        loop {
            let u: f64 = rng.gen();
            let gap = ((1.0 - u).ln() / log_q).floor();
            if gap >= (total - idx) as f64 {
                break;
            }
            idx += gap as usize;
            hit(self, idx, rng);
            idx += 1;
            if idx >= total {
                break;
            }
        }
    }
}

/// Two-qubit Pauli number `v` in 1..16, in lexicographic I<X<Y<Z order.
pub(crate) fn two_qubit_pauli(v: usize) -> (PauliSymbol, PauliSymbol) {
    const S: [PauliSymbol; 4] = [PauliSymbol::I, PauliSymbol::X, PauliSymbol::Y, PauliSymbol::Z];
    (S[v / 4], S[v % 4])
}

fn sample_block(
    c: &CliffordCircuit,
    width: usize,
    seed: u64,
    block: u64,
    randomize: bool,
) -> (Frames, Vec<u64>) {
    let mut rng = block_rng(seed, block);
    let mut frames = Frames::new(c.n_qubits(), width);
    let mut record = Vec::with_capacity(c.n_measurements() * frames.words);
    if randomize {
        for q in 0..c.n_qubits() {
            frames.randomize_z(q, &mut rng);
        }
    }
    for inst in c.instructions() {
        if inst.kind.is_noise() {
            frames.sample_noise(inst, width, &mut rng);
        } else {
            let r = if randomize { Some(&mut rng) } else { None };
            frames.apply(inst, &mut record, r);
        }
    }
    (frames, record)
}

/// Shot-blocked frame sampler.
#[derive(Clone, Copy, Debug)]
pub struct FrameSampler {
    pub block_size: usize,
}

impl Default for FrameSampler {
    fn default() -> Self {
        Self {
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }
}

impl FrameSampler {
    pub fn new(block_size: usize) -> Self {
        assert!(block_size > 0 && block_size % 64 == 0, "block size must be a positive multiple of 64");
        Self { block_size }
    }

    fn blocks(&self, shots: usize) -> Vec<(u64, usize)> {
        (0..shots.div_ceil(self.block_size))
            .map(|b| (b as u64, self.block_size.min(shots - b * self.block_size)))
            .collect()
    }

    /// Noisy measurement records: reference outcomes XOR sampled frame flips.
    pub fn sample(&self, c: &CliffordCircuit, reference: &ReferenceSample, shots: usize, seed: u64) -> SampleBatch {
        assert_eq!(reference.outcomes.len(), c.n_measurements(), "reference was taken from another circuit");
        let m = c.n_measurements();
        let rows: Vec<Vec<BitVec>> = self
            .blocks(shots)
            .into_par_iter()
            .map(|(b, width)| {
                let (_, record) = sample_block(c, width, seed, b, true);
                let words = width.div_ceil(64).max(1);
                (0..width)
                    .map(|s| {
                        let mut row = reference.outcomes.clone();
                        let (w, bit) = (s / 64, s % 64);
                        for j in 0..m {
                            if (record[j * words + w] >> bit) & 1 == 1 {
                                row.flip(j);
                            }
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        SampleBatch {
            measurements: m,
            rows: rows.into_iter().flatten().collect(),
        }
    }

    /// Measurement flips caused by noise alone, one row per shot, without
    /// stabilizer randomisation.
    pub fn sample_flips(&self, c: &CliffordCircuit, shots: usize, seed: u64) -> Vec<BitVec> {
        let m = c.n_measurements();
        let rows: Vec<Vec<BitVec>> = self
            .blocks(shots)
            .into_par_iter()
            .map(|(b, width)| {
                let (_, record) = sample_block(c, width, seed, b, false);
                let words = width.div_ceil(64).max(1);
                (0..width)
                    .map(|s| {
                        let (w, bit) = (s / 64, s % 64);
                        BitVec::from_indices(m, (0..m).filter(|j| (record[j * words + w] >> bit) & 1 == 1))
                    })
                    .collect()
            })
            .collect();
        rows.into_iter().flatten().collect()
    }

    /// Samples the accumulated error frame at the end of the circuit, one
    /// Pauli per shot, without stabilizer randomisation.
    pub fn final_frames(&self, c: &CliffordCircuit, shots: usize, seed: u64) -> Vec<PauliOperator> {
        let n = c.n_qubits();
        let out: Vec<Vec<PauliOperator>> = self
            .blocks(shots)
            .into_par_iter()
            .map(|(b, width)| {
                let (frames, _) = sample_block(c, width, seed, b, false);
                (0..width)
                    .map(|s| {
                        let (w, bit) = (s / 64, s % 64);
                        let mut p = PauliOperator::identity(n);
                        for q in 0..n {
                            let x = (frames.x_row(q)[w] >> bit) & 1 == 1;
                            let z = (frames.z_row(q)[w] >> bit) & 1 == 1;
                            if x || z {
                                p.set(q, PauliSymbol::from_bits(x, z));
                            }
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        out.into_iter().flatten().collect()
    }
}

/// A sparse Pauli inserted at an instruction boundary (`pos` = number of
/// instructions executed before it).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Insertion {
    pub pos: usize,
    pub ops: Vec<(usize, PauliSymbol)>,
}

impl Insertion {
    pub(crate) fn from_pauli(pos: usize, p: &PauliOperator) -> Self {
        Self {
            pos,
            ops: p.support().into_iter().map(|q| (q, p.get(q))).collect(),
        }
    }
}

/// Result of deterministic propagation of many insertions at once.
pub(crate) struct Propagation {
    pub width: usize,
    pub words: usize,
    /// Measurement-major flip record: row `j` has bit `t` set iff insertion
    /// `t` flips measurement `j`.
    pub record: Vec<u64>,
    /// Frames at the snapshot position, restricted to the requested qubits.
    pub snapshot: Option<(Vec<Vec<u64>>, Vec<Vec<u64>>)>,
}

impl Propagation {
    #[inline]
    pub fn flips(&self, meas: usize) -> &[u64] {
        &self.record[meas * self.words..(meas + 1) * self.words]
    }
}

pub(crate) fn propagate(
    c: &CliffordCircuit,
    insertions: &[Insertion],
    snapshot: Option<(usize, &[usize])>,
) -> Result<Propagation> {
    let len = c.len();
    let width = insertions.len();
    let mut by_pos: Vec<Vec<usize>> = vec![Vec::new(); len + 1];
    for (t, ins) in insertions.iter().enumerate() {
        if ins.pos > len {
            return Err(Error::InvalidPosition { position: ins.pos, len });
        }
        if let Some(&(q, _)) = ins.ops.iter().find(|(q, _)| *q >= c.n_qubits()) {
            return Err(Error::DimensionMismatch {
                left: q,
                right: c.n_qubits(),
            });
        }
        by_pos[ins.pos].push(t);
    }
    let mut frames = Frames::new(c.n_qubits(), width);
    let mut record = Vec::with_capacity(c.n_measurements() * frames.words);
    let mut snap = None;
    for i in 0..=len {
        for &t in &by_pos[i] {
            for &(q, s) in &insertions[t].ops {
                frames.flip(q, t, s);
            }
        }
        if let Some((pos, qubits)) = snapshot {
            if pos == i {
                snap = Some((
                    qubits.iter().map(|&q| frames.x_row(q).to_vec()).collect(),
                    qubits.iter().map(|&q| frames.z_row(q).to_vec()).collect(),
                ));
            }
        }
        if i < len {
            frames.apply(&c.instructions()[i], &mut record, None);
        }
    }
    Ok(Propagation {
        width,
        words: frames.words,
        record,
        snapshot: snap,
    })
}

/// The measurement-flip map: row `t` marks the measurements whose outcome
/// is flipped when insertion `t` is applied to the otherwise noiseless
/// circuit.
pub fn measurement_flip_map(c: &CliffordCircuit, insertions: &[(usize, PauliOperator)]) -> Result<BitMatrix> {
    let ins = insertions
        .iter()
        .map(|(pos, p)| {
            if p.num_qubits() != c.n_qubits() {
                return Err(Error::DimensionMismatch {
                    left: p.num_qubits(),
                    right: c.n_qubits(),
                });
            }
            Ok(Insertion::from_pauli(*pos, p))
        })
        .collect::<Result<Vec<_>>>()?;
    let prop = propagate(c, &ins, None)?;
    Ok(record_to_rows(&prop, c.n_measurements()))
}

/// Transposes a measurement-major record into one row per insertion.
pub(crate) fn record_to_rows(prop: &Propagation, m: usize) -> BitMatrix {
    let mut out = BitMatrix::zeros(prop.width, m);
    for j in 0..m {
        for (w, &word) in prop.flips(j).iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                out.set(w * 64 + b, j, true);
            }
        }
    }
    out
}
