//! Exhaustive maximum-likelihood decoding for small problems.

use super::{DecodeResult, DecodingProblem};
use crate::error::{Error, Result};
use crate::gf2::BitVec;

pub const ML_MAX_VARIABLES: usize = 24;

/// Most probable error pattern with the given syndrome. Ties go to the
/// lexicographically smallest pattern, read from variable 0 upward.
pub fn ml_oracle_decode(p: &DecodingProblem, syndrome: &BitVec) -> Result<DecodeResult> {
    p.check_syndrome_len(syndrome)?;
    let v = p.num_vars();
    if v > ML_MAX_VARIABLES {
        return Err(Error::TooManyVariables {
            got: v,
            max: ML_MAX_VARIABLES,
        });
    }
    let cost: Vec<f64> = p.channel_llrs();
    let columns: Vec<BitVec> = (0..v).map(|j| p.check_matrix.column(j)).collect();
    let pattern_cost = |bits: u32| (0..v).filter(|j| bits >> j & 1 == 1).map(|j| cost[j]).sum::<f64>();
    // a is lexicographically smaller than b iff at the lowest differing
    // index a has a zero
    let lex_less = |a: u32, b: u32| {
        let d = a ^ b;
        d != 0 && a & (d & d.wrapping_neg()) == 0
    };
    let mut s = BitVec::zeros(p.num_checks());
    let mut bits = 0u32;
    let mut best: Option<(f64, u32)> = None;
    let mut consider = |bits: u32, s: &BitVec| {
        if s != syndrome {
            return;
        }
        let c = pattern_cost(bits);
        best = match best {
            Some((bc, bb)) if c > bc || (c == bc && !lex_less(bits, bb)) => Some((bc, bb)),
            _ => Some((c, bits)),
        };
    };
    consider(0, &s);
    for i in 1u64..(1u64 << v) {
        let j = i.trailing_zeros() as usize;
        bits ^= 1 << j;
        s.xor_assign(&columns[j]);
        consider(bits, &s);
    }
    let (_, bits) = best.ok_or(Error::InfeasibleSyndrome)?;
    let correction = BitVec::from_indices(v, (0..v).filter(|j| bits >> j & 1 == 1));
    Ok(p.result(correction, true, 0, Vec::new()))
}
