//! CSS code constructions and their syndrome-extraction circuits.

mod lifted;
mod schedule;
mod surface;

pub use lifted::{lifted_product_code, toy_lifted_product, LiftedProductSpec, Polynomial};
pub use schedule::{syndrome_circuit, CheckRef, CodeBlock, DataInit, RoundRecord};
pub use surface::rotated_surface_code;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec, Echelon};
use crate::pauli::PauliOperator;

/// A CSS stabilizer code together with a fixed CNOT schedule for measuring
/// its checks.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub h_x: BitMatrix,
    pub h_z: BitMatrix,
    pub logical_x: BitMatrix,
    pub logical_z: BitMatrix,
    pub d_upper: Option<usize>,
    /// CNOT layers; within a layer no qubit is touched twice.
    pub schedule: Vec<Vec<(CheckRef, usize)>>,
}

impl StabilizerCode {
    /// Builds a code from check matrices, computing logicals and a greedy
    /// schedule (all X-check layers, then all Z-check layers).
    pub fn from_checks(name: impl Into<String>, h_x: BitMatrix, h_z: BitMatrix) -> Result<Self> {
        let (logical_x, logical_z) = logical_operators(&h_x, &h_z)?;
        let schedule = schedule::greedy_schedule(&h_x, &h_z);
        Self::assemble(name.into(), h_x, h_z, logical_x, logical_z, schedule)
    }

    pub(crate) fn assemble(
        name: String,
        h_x: BitMatrix,
        h_z: BitMatrix,
        logical_x: BitMatrix,
        logical_z: BitMatrix,
        schedule: Vec<Vec<(CheckRef, usize)>>,
    ) -> Result<Self> {
        let n = h_x.num_cols();
        let mut code = Self {
            name,
            n,
            k: logical_x.num_rows(),
            h_x,
            h_z,
            logical_x,
            logical_z,
            d_upper: None,
            schedule,
        };
        code.validate()?;
        if n <= 30 {
            code.d_upper = code.distance();
        }
        Ok(code)
    }

    /// Checks the CSS, dimension and pairing invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidCode(m.to_string()));
        if self.h_z.num_cols() != self.n || self.logical_x.num_cols() != self.n || self.logical_z.num_cols() != self.n {
            return bad("matrix widths disagree");
        }
        if !self.h_x.mul(&self.h_z.transpose()).is_zero() {
            return bad("h_x · h_zᵀ ≠ 0");
        }
        if self.k != self.n - self.h_x.rank() - self.h_z.rank() || self.logical_z.num_rows() != self.k {
            return bad("logical count disagrees with n − rank(h_x) − rank(h_z)");
        }
        if !self.logical_x.mul(&self.h_z.transpose()).is_zero() || !self.logical_z.mul(&self.h_x.transpose()).is_zero() {
            return bad("logical operator anticommutes with a check");
        }
        if self.logical_x.mul(&self.logical_z.transpose()) != BitMatrix::identity(self.k) {
            return bad("logicals are not symplectically paired");
        }
        Ok(())
    }

    pub fn r_x(&self) -> usize {
        self.h_x.num_rows()
    }

    pub fn r_z(&self) -> usize {
        self.h_z.num_rows()
    }

    /// `(s_x, s_z)` with `s_x = h_x · e_z` and `s_z = h_z · e_x`.
    pub fn syndrome(&self, e: &PauliOperator) -> Result<(BitVec, BitVec)> {
        if e.num_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                left: e.num_qubits(),
                right: self.n,
            });
        }
        Ok((self.h_x.mul_vec(e.z_bits()), self.h_z.mul_vec(e.x_bits())))
    }

    /// Exact distance by enumerating logical cosets; `None` above 30 qubits.
    pub fn distance(&self) -> Option<usize> {
        if self.n > 30 {
            return None;
        }
        if self.k == 0 {
            return Some(self.n);
        }
        let dx = min_logical_weight(&self.h_z, &self.logical_z);
        let dz = min_logical_weight(&self.h_x, &self.logical_x);
        Some(dx.min(dz))
    }

    /// Pure errors `(t_x, t_z)`: row `i` of `t_x` is a Z-type operator that
    /// flips X-check `i` alone, and `t_z` likewise for Z-checks with X-type
    /// rows. Checks dependent on earlier ones get a zero row.
    pub fn pure_errors(&self) -> (BitMatrix, BitMatrix) {
        (pure_error_rows(&self.h_x), pure_error_rows(&self.h_z))
    }
}

/// For each row of `h`, a vector `t` with `h · t = e_row` if that row is
/// independent of the previous ones, zero otherwise.
fn pure_error_rows(h: &BitMatrix) -> BitMatrix {
    let mut out = BitMatrix::zeros(h.num_rows(), h.num_cols());
    let mut basis = Echelon::new();
    let independent: Vec<usize> = (0..h.num_rows()).filter(|&i| basis.insert(h.row(i).clone())).collect();
    let sub = BitMatrix::from_rows(h.num_cols(), independent.iter().map(|&i| h.row(i).clone()).collect());
    for (j, &i) in independent.iter().enumerate() {
        let target = BitVec::from_indices(independent.len(), [j]);
        let t = sub.solve(&target).expect("independent rows have full row rank");
        *out.row_mut(i) = t;
    }
    out
}

/// Minimum weight of `v` with `checks · v = 0` and `dual · v ≠ 0`.
fn min_logical_weight(checks: &BitMatrix, dual: &BitMatrix) -> usize {
    let ker = checks.kernel();
    let dim = ker.num_rows();
    let mut v = BitVec::zeros(checks.num_cols());
    let mut best = usize::MAX;
    // Gray-code walk over the kernel.
    for i in 1u64..(1u64 << dim) {
        let bit = i.trailing_zeros() as usize;
        v.xor_assign(ker.row(bit));
        let w = v.count_ones();
        if w < best && !dual.mul_vec(&v).is_zero() {
            best = w;
        }
    }
    best
}

/// Logical operators of a CSS code: `ker(h_z) / rowspace(h_x)` for X and
/// `ker(h_x) / rowspace(h_z)` for Z, normalised so `L_x · L_zᵀ = I`.
pub fn logical_operators(h_x: &BitMatrix, h_z: &BitMatrix) -> Result<(BitMatrix, BitMatrix)> {
    if h_x.num_cols() != h_z.num_cols() {
        return Err(Error::DimensionMismatch {
            left: h_x.num_cols(),
            right: h_z.num_cols(),
        });
    }
    if !h_x.mul(&h_z.transpose()).is_zero() {
        return Err(Error::InvalidCode("h_x · h_zᵀ ≠ 0".into()));
    }
    let n = h_x.num_cols();
    let quotient = |checks: &BitMatrix, stabs: &BitMatrix| {
        let mut span = Echelon::from_matrix(stabs);
        let reps: Vec<BitVec> = checks
            .kernel()
            .rows()
            .iter()
            .filter(|v| span.insert((*v).clone()))
            .cloned()
            .collect();
        BitMatrix::from_rows(n, reps)
    };
    let lx = quotient(h_z, h_x);
    let lz = quotient(h_x, h_z);
    let pairing = lx.mul(&lz.transpose());
    let inv = pairing
        .inverse()
        .ok_or_else(|| Error::InvalidCode("logical pairing matrix is singular".into()))?;
    let lz = inv.transpose().mul(&lz);
    Ok((lx, lz))
}

/// Girth of the Tanner graph of `h` (`None` if acyclic).
pub fn tanner_girth(h: &BitMatrix) -> Option<usize> {
    let (r, v) = (h.num_rows(), h.num_cols());
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); r + v];
    for i in 0..r {
        for j in h.row(i).iter_ones() {
            adj[i].push(r + j);
            adj[r + j].push(i);
        }
    }
    let mut best = usize::MAX;
    for s in 0..r + v {
        let mut dist = vec![usize::MAX; r + v];
        let mut parent = vec![usize::MAX; r + v];
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] >= best {
                break;
            }
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

/// Sparse coordinate text: a `# rows=R cols=C` header then `r c` per entry.
pub fn to_sparse_text(m: &BitMatrix) -> String {
    let mut s = format!("# rows={} cols={}\n", m.num_rows(), m.num_cols());
    for (i, row) in m.rows().iter().enumerate() {
        for j in row.iter_ones() {
            s.push_str(&format!("{i} {j}\n"));
        }
    }
    s
}

pub fn from_sparse_text(text: &str) -> Result<BitMatrix> {
    let mut dims = None;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.into(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let get = |key: &str| {
                rest.split_whitespace()
                    .find_map(|t| t.strip_prefix(key))
                    .and_then(|v| v.parse::<usize>().ok())
            };
            if let (Some(r), Some(c)) = (get("rows="), get("cols=")) {
                dims = Some((r, c));
            }
            continue;
        }
        let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(r)), Some(Ok(c)), None) => entries.push((r, c, i + 1)),
            _ => return Err(err("expected `row col`")),
        }
    }
    let (rows, cols) = dims.unwrap_or_else(|| {
        (
            entries.iter().map(|e| e.0 + 1).max().unwrap_or(0),
            entries.iter().map(|e| e.1 + 1).max().unwrap_or(0),
        )
    });
    let mut m = BitMatrix::zeros(rows, cols);
    for (r, c, line) in entries {
        if r >= rows || c >= cols {
            return Err(Error::Parse {
                line,
                msg: format!("entry ({r},{c}) outside {rows}x{cols}"),
            });
        }
        m.set(r, c, true);
    }
    Ok(m)
}
