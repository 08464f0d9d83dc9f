//! Normalised min-sum belief propagation.

use super::{DecodeResult, DecodingProblem, Schedule};
use crate::error::Result;
use crate::gf2::BitVec;

const CLAMP: f64 = 50.0;

/// Flattened edge layout: edges of check `c` are `start[c]..start[c+1]`.
struct Edges {
    start: Vec<usize>,
    var: Vec<usize>,
    /// For each variable, its edge ids.
    of_var: Vec<Vec<usize>>,
}

fn edges(p: &DecodingProblem) -> Edges {
    let mut start = vec![0];
    let mut var = Vec::new();
    let mut of_var = vec![Vec::new(); p.num_vars()];
    for vars in &p.check_vars {
        for &j in vars {
            of_var[j].push(var.len());
            var.push(j);
        }
        start.push(var.len());
    }
    Edges { start, var, of_var }
}

/// Check-node update: writes `scale · sign · min` excluding self into `out`.
fn check_update(q: &[f64], flip: bool, scale: f64, out: &mut [f64]) {
    let mut neg = flip;
    let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
    for (i, &m) in q.iter().enumerate() {
        neg ^= m < 0.0;
        let a = m.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            arg = i;
        } else if a < min2 {
            min2 = a;
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        let sign = neg ^ (q[i] < 0.0);
        let mag = if i == arg { min2 } else { min1 };
        let r = (scale * mag).min(CLAMP);
        *o = if sign { -r } else { r };
    }
}

fn hard_decision(llr: &[f64]) -> BitVec {
    BitVec::from_bools(&llr.iter().map(|&l| l < 0.0).collect::<Vec<_>>())
}

/// Min-sum BP with messages scaled by `scale`. The serial schedule updates
/// checks in ascending index order, in place. Stops as soon as the hard
/// decision reproduces `syndrome`.
pub fn bp_decode(
    p: &DecodingProblem,
    syndrome: &BitVec,
    max_iter: usize,
    scale: f64,
    schedule: Schedule,
) -> Result<DecodeResult> {
    p.check_syndrome_len(syndrome)?;
    let lambda = p.channel_llrs();
    let hard = hard_decision(&lambda);
    if p.syndrome_of(&hard) == *syndrome {
        return Ok(p.result(hard, true, 0, lambda));
    }
    let e = edges(p);
    let n_edges = e.var.len();
    let mut r = vec![0.0; n_edges];
    let mut post = lambda.clone();
    let mut q = vec![0.0; n_edges];
    let mut scratch = Vec::new();
    if schedule == Schedule::Parallel {
        for (k, &j) in e.var.iter().enumerate() {
            q[k] = lambda[j].clamp(-CLAMP, CLAMP);
        }
    }
    for it in 1..=max_iter {
        match schedule {
            Schedule::Parallel => {
                for c in 0..p.num_checks() {
                    let (a, b) = (e.start[c], e.start[c + 1]);
                    check_update(&q[a..b], syndrome.get(c), scale, &mut r[a..b]);
                }
                for (j, ids) in e.of_var.iter().enumerate() {
                    post[j] = lambda[j] + ids.iter().map(|&k| r[k]).sum::<f64>();
                    for &k in ids {
                        q[k] = (post[j] - r[k]).clamp(-CLAMP, CLAMP);
                    }
                }
            }
            Schedule::Serial => {
                for c in 0..p.num_checks() {
                    let (a, b) = (e.start[c], e.start[c + 1]);
                    scratch.clear();
                    scratch.extend((a..b).map(|k| (post[e.var[k]] - r[k]).clamp(-CLAMP, CLAMP)));
                    check_update(&scratch, syndrome.get(c), scale, &mut r[a..b]);
                    for (i, k) in (a..b).enumerate() {
                        post[e.var[k]] = scratch[i] + r[k];
                    }
                }
            }
        }
        let hard = hard_decision(&post);
        if p.syndrome_of(&hard) == *syndrome {
            return Ok(p.result(hard, true, it, post));
        }
    }
    Ok(p.result(hard_decision(&post), false, max_iter, post))
}
