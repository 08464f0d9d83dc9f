//! Order-0 ordered statistics decoding.

use super::{bp_decode, BpConfig, DecodeResult, DecodingProblem};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};

/// OSD-0 on top of BP posteriors. If the BP hard decision already matches
/// the syndrome it is returned unchanged. Otherwise columns are ordered by
/// ascending LLR (most likely flipped first, ties by index), the first
/// independent columns in that order form the information set, and the
/// unique solution supported on it is returned.
pub fn osd0_postprocess(p: &DecodingProblem, syndrome: &BitVec, bp_llrs: &[f64]) -> Result<DecodeResult> {
    p.check_syndrome_len(syndrome)?;
    let v = p.num_vars();
    if bp_llrs.len() != v {
        return Err(Error::DimensionMismatch {
            left: bp_llrs.len(),
            right: v,
        });
    }
    let hard = BitVec::from_bools(&bp_llrs.iter().map(|&l| l < 0.0).collect::<Vec<_>>());
    if p.syndrome_of(&hard) == *syndrome {
        return Ok(p.result(hard, true, 0, bp_llrs.to_vec()));
    }
    let mut order: Vec<usize> = (0..v).collect();
    order.sort_by(|&a, &b| bp_llrs[a].total_cmp(&bp_llrs[b]).then(a.cmp(&b)));
    let mut position = vec![0; v];
    for (i, &j) in order.iter().enumerate() {
        position[j] = i;
    }
    let rows = p
        .check_vars
        .iter()
        .enumerate()
        .map(|(c, vars)| {
            let mut row = BitVec::zeros(v + 1);
            for &j in vars {
                row.set(position[j], true);
            }
            row.set(v, syndrome.get(c));
            row
        })
        .collect();
    let mut m = BitMatrix::from_rows(v + 1, rows);
    let pivots = m.row_reduce();
    let mut correction = BitVec::zeros(v);
    for (r, &col) in pivots.iter().enumerate() {
        if col == v {
            return Err(Error::InfeasibleSyndrome);
        }
        if m.get(r, v) {
            correction.set(order[col], true);
        }
    }
    Ok(p.result(correction, true, 0, bp_llrs.to_vec()))
}

/// BP followed by OSD-0 when BP does not converge.
pub fn bposd_decode(p: &DecodingProblem, syndrome: &BitVec, cfg: &BpConfig) -> Result<DecodeResult> {
    let bp = bp_decode(p, syndrome, cfg.max_iter, cfg.scale, cfg.schedule)?;
    if bp.converged {
        return Ok(bp);
    }
    let mut r = osd0_postprocess(p, syndrome, &bp.llrs)?;
    r.iterations = bp.iterations;
    r.converged = false;
    Ok(r)
}
