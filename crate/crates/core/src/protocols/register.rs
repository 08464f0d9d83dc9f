use std::sync::Arc;

use crate::codes::{CodeBlock, StabilizerCode};
use crate::gf2::BitVec;
use crate::pauli::PauliOperator;

/// Qubit layout shared by all modules of an experiment: three data blocks
/// of `n` qubits, one set of check auxiliaries shared by the blocks, and
/// `k` result qubits that receive decoded logical readouts.
#[derive(Clone, Debug)]
pub struct Register {
    pub code: Arc<StabilizerCode>,
    pub blocks: [Vec<usize>; 3],
    pub anc_x: Vec<usize>,
    pub anc_z: Vec<usize>,
    pub result: Vec<usize>,
}

impl Register {
    pub fn new(code: Arc<StabilizerCode>) -> Self {
        let n = code.n;
        let block = |b: usize| (b * n..(b + 1) * n).collect();
        let a = 3 * n;
        let b = a + code.r_x();
        let c = b + code.r_z();
        Self {
            blocks: [block(0), block(1), block(2)],
            anc_x: (a..b).collect(),
            anc_z: (b..c).collect(),
            result: (c..c + code.k).collect(),
            code,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.result.last().map_or(3 * self.code.n + self.code.r_x() + self.code.r_z(), |&q| q + 1)
    }

    pub fn code_block(&self, b: usize) -> CodeBlock {
        CodeBlock {
            data: self.blocks[b].clone(),
            anc_x: self.anc_x.clone(),
            anc_z: self.anc_z.clone(),
        }
    }

    /// X-type operator with support `bits` on block `b`.
    pub fn x_on(&self, b: usize, bits: &BitVec) -> PauliOperator {
        PauliOperator::x_type(self.spread(b, bits))
    }

    /// Z-type operator with support `bits` on block `b`.
    pub fn z_on(&self, b: usize, bits: &BitVec) -> PauliOperator {
        PauliOperator::z_type(self.spread(b, bits))
    }

    fn spread(&self, b: usize, bits: &BitVec) -> BitVec {
        BitVec::from_indices(self.n_qubits(), bits.iter_ones().map(|i| self.blocks[b][i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::rotated_surface_code;

    #[test]
    fn layout_is_disjoint_and_dense() {
        let reg = Register::new(Arc::new(rotated_surface_code(3).unwrap()));
        let mut all: Vec<usize> = reg.blocks.iter().flatten().copied().collect();
        all.extend(&reg.anc_x);
        all.extend(&reg.anc_z);
        all.extend(&reg.result);
        all.sort();
        assert_eq!(all, (0..reg.n_qubits()).collect::<Vec<_>>());
        assert_eq!(reg.n_qubits(), 27 + 8 + 1);
        let p = reg.x_on(1, &BitVec::from_indices(9, [0, 8]));
        assert_eq!(p.support(), vec![9, 17]);
    }
}
