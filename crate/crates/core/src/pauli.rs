//! Symplectic representation of n-qubit Pauli operators.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitVec;

/// Single-qubit Pauli symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliSymbol {
    I,
    X,
    Y,
    Z,
}

impl PauliSymbol {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliSymbol::I,
            (true, false) => PauliSymbol::X,
            (true, true) => PauliSymbol::Y,
            (false, true) => PauliSymbol::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            PauliSymbol::I => (false, false),
            PauliSymbol::X => (true, false),
            PauliSymbol::Y => (true, true),
            PauliSymbol::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliSymbol::I => 'I',
            PauliSymbol::X => 'X',
            PauliSymbol::Y => 'Y',
            PauliSymbol::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator `i^phase · P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}` with each
/// `P_q` in {I, X, Y, Z}.
///
/// `phase` is kept mod 4 so that multiplication is a true group operation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    pub fn from_bits(x: BitVec, z: BitVec) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: z.len(),
            });
        }
        Ok(Self { x, z, phase: 0 })
    }

    /// Single-qubit Pauli `symbol` on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, symbol: PauliSymbol) -> Self {
        let mut p = Self::identity(n);
        p.set(q, symbol);
        p
    }

    pub fn x_type(bits: BitVec) -> Self {
        let n = bits.len();
        Self {
            x: bits,
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    pub fn z_type(bits: BitVec) -> Self {
        let n = bits.len();
        Self {
            x: BitVec::zeros(n),
            z: bits,
            phase: 0,
        }
    }

    pub fn from_symbols(symbols: &[PauliSymbol]) -> Self {
        let mut p = Self::identity(symbols.len());
        for (q, &s) in symbols.iter().enumerate() {
            p.set(q, s);
        }
        p
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    #[inline]
    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    /// Power of `i` multiplying the tensor product of symbols.
    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn get(&self, q: usize) -> PauliSymbol {
        PauliSymbol::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, symbol: PauliSymbol) {
        let (x, z) = symbol.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn symbols(&self) -> Vec<PauliSymbol> {
        (0..self.num_qubits()).map(|q| self.get(q)).collect()
    }

    pub fn support(&self) -> Vec<usize> {
        let mut s = self.x.clone();
        s.or_assign(&self.z);
        s.iter_ones().collect()
    }

    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::DimensionMismatch {
                left: self.num_qubits(),
                right: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// The commutation function: `true` iff the two operators anticommute.
    pub fn anticommutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// Operator product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let mut plus = 0u32;
        let mut minus = 0u32;
        for (((&x1, &z1), &x2), &z2) in self
            .x
            .words()
            .iter()
            .zip(self.z.words())
            .zip(other.x.words())
            .zip(other.z.words())
        {
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            let pos = (y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
            let neg = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
            plus += pos.count_ones();
            minus += neg.count_ones();
        }
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        let phase = (u32::from(self.phase) + u32::from(other.phase) + plus + 4 * minus - minus) % 4;
        Ok(Self {
            x,
            z,
            phase: phase as u8,
        })
    }

    /// Sign-blind equality (same symbols on every qubit).
    pub fn same_up_to_phase(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let symbols = body
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(PauliSymbol::I),
                'X' => Ok(PauliSymbol::X),
                'Y' => Ok(PauliSymbol::Y),
                'Z' => Ok(PauliSymbol::Z),
                other => Err(Error::Parse {
                    line: 0,
                    msg: format!("unexpected Pauli symbol {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_symbols(&symbols).with_phase(phase))
    }
}
