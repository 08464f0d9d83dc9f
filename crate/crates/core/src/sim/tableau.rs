//! Aaronson-Gottesman stabilizer tableau.
//!
//! Used for the noiseless reference pass and as the per-shot oracle that the
//! frame sampler is validated against.

use rand::Rng;

use crate::circuit::{CliffordCircuit, Kind};
use crate::gf2::BitVec;
use crate::pauli::{PauliOperator, PauliSymbol};

#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    // rows 0..n destabilizers, n..2n stabilizers, 2n scratch
    x: Vec<BitVec>,
    z: Vec<BitVec>,
    r: Vec<bool>,
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

impl Tableau {
    /// The all-|0⟩ state on `n` qubits.
    pub fn new(n: usize) -> Self {
        let mut x = vec![BitVec::zeros(n); 2 * n + 1];
        let mut z = vec![BitVec::zeros(n); 2 * n + 1];
        for i in 0..n {
            x[i].set(i, true);
            z[n + i].set(i, true);
        }
        Self {
            n,
            x,
            z,
            r: vec![false; 2 * n + 1],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (self.x[i].get(a), self.z[i].get(a));
            self.r[i] ^= xa && za;
            self.x[i].set(a, za);
            self.z[i].set(a, xa);
        }
    }

    pub fn s(&mut self, a: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (self.x[i].get(a), self.z[i].get(a));
            self.r[i] ^= xa && za;
            self.z[i].set(a, za ^ xa);
        }
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            let (xa, za) = (self.x[i].get(a), self.z[i].get(a));
            let (xb, zb) = (self.x[i].get(b), self.z[i].get(b));
            self.r[i] ^= xa && zb && (xb ^ za ^ true);
            self.x[i].set(b, xb ^ xa);
            self.z[i].set(a, za ^ zb);
        }
    }

    /// Applies a single-qubit Pauli gate (flips the signs of anticommuting rows).
    pub fn pauli(&mut self, a: usize, p: PauliSymbol) {
        let (px, pz) = p.bits();
        for i in 0..2 * self.n {
            let anti = (px && self.z[i].get(a)) ^ (pz && self.x[i].get(a));
            self.r[i] ^= anti;
        }
    }

    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        for q in p.support() {
            self.pauli(q, p.get(q));
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut sum = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for j in 0..self.n {
            sum += g(self.x[i].get(j), self.z[i].get(j), self.x[h].get(j), self.z[h].get(j));
        }
        self.r[h] = sum.rem_euclid(4) == 2;
        let (xi, zi) = (self.x[i].clone(), self.z[i].clone());
        self.x[h].xor_assign(&xi);
        self.z[h].xor_assign(&zi);
    }

    /// Whether a Z measurement of qubit `a` has a forced outcome.
    pub fn is_deterministic_z(&self, a: usize) -> bool {
        (self.n..2 * self.n).all(|p| !self.x[p].get(a))
    }

    /// Measures qubit `a` in the Z basis. `choose` supplies the outcome when
    /// it is random. Returns `(outcome, deterministic)`.
    pub fn measure_z_with(&mut self, a: usize, choose: impl FnOnce() -> bool) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&p| self.x[p].get(a)) {
            for i in 0..2 * n {
                if i != p && self.x[i].get(a) {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p] = BitVec::zeros(n);
            self.z[p] = BitVec::zeros(n);
            self.z[p].set(a, true);
            let outcome = choose();
            self.r[p] = outcome;
            (outcome, false)
        } else {
            let scratch = 2 * n;
            self.x[scratch] = BitVec::zeros(n);
            self.z[scratch] = BitVec::zeros(n);
            self.r[scratch] = false;
            for i in 0..n {
                if self.x[i].get(a) {
                    self.rowsum(scratch, i + n);
                }
            }
            (self.r[scratch], true)
        }
    }

    pub fn measure_z(&mut self, a: usize, rng: &mut impl Rng) -> (bool, bool) {
        self.measure_z_with(a, || rng.gen())
    }

    pub fn measure_x_with(&mut self, a: usize, choose: impl FnOnce() -> bool) -> (bool, bool) {
        self.h(a);
        let res = self.measure_z_with(a, choose);
        self.h(a);
        res
    }

    pub fn reset_z(&mut self, a: usize) {
        let (m, _) = self.measure_z_with(a, || false);
        if m {
            self.pauli(a, PauliSymbol::X);
        }
    }

    pub fn reset_x(&mut self, a: usize) {
        self.reset_z(a);
        self.h(a);
    }
}

/// Measurement-by-measurement simulation of a circuit on a tableau.
///
/// Noise instructions are treated as identity; callers that want faults use
/// [`run_tableau`] with an explicit fault hook.
pub struct TableauRun {
    pub outcomes: Vec<bool>,
    pub deterministic: Vec<bool>,
}

/// Runs the circuit on a fresh tableau. `choose(ordinal)` decides random
/// outcomes; `fault(index, tableau)` is invoked at every noise instruction.
pub fn run_tableau(
    c: &CliffordCircuit,
    mut choose: impl FnMut(usize) -> bool,
    mut fault: impl FnMut(usize, &mut Tableau),
) -> TableauRun {
    let mut t = Tableau::new(c.n_qubits());
    let mut outcomes = Vec::with_capacity(c.n_measurements());
    let mut deterministic = Vec::with_capacity(c.n_measurements());
    for (idx, inst) in c.instructions().iter().enumerate() {
        match inst.kind {
            Kind::ResetZ => inst.targets.iter().for_each(|&q| t.reset_z(q)),
            Kind::ResetX => inst.targets.iter().for_each(|&q| t.reset_x(q)),
            Kind::H => inst.targets.iter().for_each(|&q| t.h(q)),
            Kind::S => inst.targets.iter().for_each(|&q| t.s(q)),
            Kind::Cnot => inst.pairs().for_each(|(a, b)| t.cnot(a, b)),
            Kind::PauliX => inst.targets.iter().for_each(|&q| t.pauli(q, PauliSymbol::X)),
            Kind::PauliY => inst.targets.iter().for_each(|&q| t.pauli(q, PauliSymbol::Y)),
            Kind::PauliZ => inst.targets.iter().for_each(|&q| t.pauli(q, PauliSymbol::Z)),
            Kind::MeasureZ | Kind::MeasureX => {
                for &q in &inst.targets {
                    let ord = outcomes.len();
                    let (m, det) = if inst.kind == Kind::MeasureZ {
                        t.measure_z_with(q, || choose(ord))
                    } else {
                        t.measure_x_with(q, || choose(ord))
                    };
                    outcomes.push(m);
                    deterministic.push(det);
                }
            }
            k if k.is_noise() => fault(idx, &mut t),
            _ => {}
        }
    }
    TableauRun {
        outcomes,
        deterministic,
    }
}
