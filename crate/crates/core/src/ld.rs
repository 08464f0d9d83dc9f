//! Locally decaying noise: effective rates, empirical bound checks and
//! error accumulation over rounds.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{CliffordCircuit, Kind};
use crate::error::{Error, Result};
use crate::sim::FrameSampler;

/// Noise rates seen by one transversal Bell measurement: the two input
/// blocks, the transversal CNOT and the measurements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdRates {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl LdRates {
    pub fn new(p1: f64, p2: f64, p3: f64, p4: f64) -> Result<Self> {
        let r = Self { p1, p2, p3, p4 };
        r.validate()?;
        Ok(r)
    }

    /// All four rates equal to `p`.
    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(p, p, p, p)
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.p1, self.p2, self.p3, self.p4] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
        }
        if self.p1 + self.p2 + self.p3 > 1.0 {
            return Err(Error::InvalidProbability(self.p1 + self.p2 + self.p3));
        }
        Ok(())
    }
}

/// Effective rate `√(p1 + p2 + p3) + p4`.
pub fn p_eff(r: &LdRates) -> Result<f64> {
    r.validate()?;
    Ok((r.p1 + r.p2 + r.p3).sqrt() + r.p4)
}

/// Upper bound `min(1, rounds · f)` on the failure probability after
/// `rounds` rounds that each fail with probability at most `f`.
pub fn accumulated_failure_bound(f_per_round: f64, rounds: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&f_per_round) {
        return Err(Error::InvalidProbability(f_per_round));
    }
    Ok((rounds as f64 * f_per_round).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdViolation {
    pub subset: Vec<usize>,
    /// Fraction of samples whose support contains `subset`.
    pub frequency: f64,
    /// `τ^|B| + 3σ̂`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdReport {
    pub shots: usize,
    pub n_qubits: usize,
    pub tau: f64,
    pub max_subset: usize,
    /// Number of nonempty subsets of size at most `max_subset`.
    pub subsets_checked: u64,
    pub violations: Vec<LdViolation>,
}

impl LdReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// Calls `f` on every nonempty subset of `items` with at most `max` entries,
/// as a sorted index list.
fn for_each_subset(items: &[usize], max: usize, f: &mut impl FnMut(&[usize])) {
    fn go(items: &[usize], start: usize, max: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        for i in start..items.len() {
            cur.push(items[i]);
            f(cur);
            if cur.len() < max {
                go(items, i + 1, max, cur, f);
            }
            cur.pop();
        }
    }
    go(items, 0, max, &mut Vec::with_capacity(max), f);
}

/// Compares the empirical inclusion frequency `Pr̂(support ⊇ B)` of every
/// subset `B` with `1 ≤ |B| ≤ max_subset` against `τ^|B| + 3σ̂`, where
/// `σ̂` is the binomial standard error of the frequency. Subsets never
/// contained in a sample have frequency 0 and cannot violate the bound.
pub fn ld_bound_check(samples: &[Vec<usize>], n_qubits: usize, tau: f64, max_subset: usize) -> Result<LdReport> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidProbability(tau));
    }
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for s in samples {
        let mut support = s.clone();
        support.sort_unstable();
        support.dedup();
        if let Some(&q) = support.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidConfig(format!(
                "support qubit {q} outside 0..{n_qubits}"
            )));
        }
        for_each_subset(&support, max_subset, &mut |b| *counts.entry(b.to_vec()).or_insert(0) += 1);
    }
    let shots = samples.len();
    let mut violations: Vec<LdViolation> = counts
        .into_iter()
        .filter_map(|(subset, c)| {
            let f = c as f64 / shots as f64;
            let sigma = (f * (1.0 - f) / shots as f64).sqrt();
            let bound = tau.powi(subset.len() as i32) + 3.0 * sigma;
            (f > bound).then_some(LdViolation {
                subset,
                frequency: f,
                bound,
            })
        })
        .collect();
    violations.sort_by(|a, b| a.subset.len().cmp(&b.subset.len()).then_with(|| a.subset.cmp(&b.subset)));
    Ok(LdReport {
        shots,
        n_qubits,
        tau,
        max_subset,
        subsets_checked: (1..=max_subset.min(n_qubits)).map(|k| binomial(n_qubits, k)).sum(),
        violations,
    })
}

/// Parses a support dump: one line per shot, space-separated qubit
/// indices. Blank lines are shots with empty support.
pub fn parse_support_dump(text: &str) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Parse {
                            line: i + 1,
                            msg: format!("bad qubit index `{t}`"),
                        })
                })
                .collect()
        })
        .collect()
}

/// Transversal Bell measurement of `n_pairs` qubit pairs `(d_i, a_i)` with
/// depolarising input noise `p1` on the d qubits and `p2` on the a qubits,
/// two-qubit depolarising noise `p3` after each CNOT `d_i → a_i`, and
/// outcome flips `p4` before `MEASURE_X d` and `MEASURE_Z a`.
pub fn transversal_bell_circuit(n_pairs: usize, r: &LdRates) -> Result<CliffordCircuit> {
    r.validate()?;
    let d: Vec<usize> = (0..n_pairs).collect();
    let a: Vec<usize> = (n_pairs..2 * n_pairs).collect();
    let mut c = CliffordCircuit::new(2 * n_pairs);
    c.noise(Kind::NoiseDep1, &d, r.p1)?;
    c.noise(Kind::NoiseDep1, &a, r.p2)?;
    let pairs: Vec<(usize, usize)> = d.iter().copied().zip(a.iter().copied()).collect();
    c.cnot(&pairs);
    let flat: Vec<usize> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    c.noise(Kind::NoiseDep2, &flat, r.p3)?;
    c.noise(Kind::NoiseZFlip, &d, r.p4)?;
    c.measure_x(&d);
    c.noise(Kind::NoiseXFlip, &a, r.p4)?;
    c.measure_z(&a);
    Ok(c)
}

/// Samples the transversal Bell circuit and returns, per shot, the pairs
/// whose X or Z outcome is flipped by noise.
pub fn transversal_bell_supports(n_pairs: usize, r: &LdRates, shots: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let c = transversal_bell_circuit(n_pairs, r)?;
    let flips = FrameSampler::default().sample_flips(&c, shots, seed);
    Ok(flips
        .iter()
        .map(|f| (0..n_pairs).filter(|&i| f.get(i) || f.get(n_pairs + i)).collect())
        .collect())
}
