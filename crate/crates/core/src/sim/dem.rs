//! Detector error models.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::circuit::{CliffordCircuit, Kind};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::pauli::PauliSymbol;
use crate::sim::frame::{propagate, record_to_rows, two_qubit_pauli, FrameSampler, Insertion};
use crate::sim::reference_sample;

/// One elementary fault: a Pauli inserted right after noise instruction
/// `instruction`, occurring with probability `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fault {
    pub instruction: usize,
    pub ops: Vec<(usize, PauliSymbol)>,
    pub p: f64,
}

/// Every fault with nonzero probability, in instruction order. DEP1 sites
/// contribute X, Y, Z with weight p/3 each; DEP2 sites the 15 non-identity
/// pairs (lexicographic, I<X<Y<Z) with p/15 each.
pub fn enumerate_faults(c: &CliffordCircuit) -> Vec<Fault> {
    let mut out = Vec::new();
    for (idx, inst) in c.instructions().iter().enumerate() {
        let p = match inst.prob {
            Some(p) if p > 0.0 && inst.kind.is_noise() => p,
            _ => continue,
        };
        let mut push = |ops: Vec<(usize, PauliSymbol)>, p: f64| {
            out.push(Fault {
                instruction: idx,
                ops,
                p,
            })
        };
        match inst.kind {
            Kind::NoiseXFlip => inst.targets.iter().for_each(|&q| push(vec![(q, PauliSymbol::X)], p)),
            Kind::NoiseZFlip => inst.targets.iter().for_each(|&q| push(vec![(q, PauliSymbol::Z)], p)),
            Kind::NoiseDep1 => {
                for &q in &inst.targets {
                    for s in [PauliSymbol::X, PauliSymbol::Y, PauliSymbol::Z] {
                        push(vec![(q, s)], p / 3.0);
                    }
                }
            }
            Kind::NoiseDep2 => {
                for (a, b) in inst.pairs() {
                    for v in 1..16 {
                        let (sa, sb) = two_qubit_pauli(v);
                        let ops = [(a, sa), (b, sb)]
                            .into_iter()
                            .filter(|(_, s)| *s != PauliSymbol::I)
                            .collect();
                        push(ops, p / 15.0);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Measurement flips of each fault (one row per fault).
pub fn fault_flips(c: &CliffordCircuit, faults: &[Fault]) -> Result<BitMatrix> {
    let ins: Vec<Insertion> = faults
        .iter()
        .map(|f| Insertion {
            pos: f.instruction + 1,
            ops: f.ops.clone(),
        })
        .collect();
    let prop = propagate(c, &ins, None)?;
    Ok(record_to_rows(&prop, c.n_measurements()))
}

/// Parities of `flips` over each reference list.
pub fn parities(refs: &[Vec<usize>], flips: &BitVec) -> BitVec {
    BitVec::from_bools(
        &refs
            .iter()
            .map(|r| r.iter().fold(false, |acc, &j| acc ^ flips.get(j)))
            .collect::<Vec<_>>(),
    )
}

/// Checks that every detector and observable has a fixed value in the
/// absence of noise, by sampling randomised noiseless shots.
pub fn check_determinism(c: &CliffordCircuit) -> Result<()> {
    let clean = c.without_noise();
    let reference = reference_sample(&clean, 0);
    let batch = FrameSampler::default().sample(&clean, &reference, 256, 0x5eed);
    let dets = c.detector_refs();
    let obs = c.observable_refs();
    let expect_d = parities(&dets, &reference.outcomes);
    let expect_o = parities(&obs, &reference.outcomes);
    for row in &batch.rows {
        let d = parities(&dets, row);
        if let Some(i) = (0..dets.len()).find(|&i| d.get(i) != expect_d.get(i)) {
            return Err(Error::NonDeterministicDetector(i));
        }
        let o = parities(&obs, row);
        if let Some(i) = (0..obs.len()).find(|&i| o.get(i) != expect_o.get(i)) {
            return Err(Error::NonDeterministicObservable(i));
        }
    }
    Ok(())
}

/// An independent error mechanism: flips `detectors` and `observables`
/// together with probability `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    pub p: f64,
    pub detectors: Vec<usize>,
    pub observables: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub n_detectors: usize,
    pub n_observables: usize,
    pub mechanisms: Vec<Mechanism>,
}

/// Builds the detector error model of a noisy circuit. Faults with the same
/// detector/observable signature are merged (XOR-combined probabilities);
/// faults with an empty signature are dropped.
pub fn build_dem(c: &CliffordCircuit) -> Result<DetectorErrorModel> {
    check_determinism(c)?;
    let faults = enumerate_faults(c);
    let flips = fault_flips(c, &faults)?;
    let dets = c.detector_refs();
    let obs = c.observable_refs();
    let mut index: HashMap<(Vec<usize>, Vec<usize>), usize> = HashMap::new();
    let mut mechanisms: Vec<Mechanism> = Vec::new();
    for (f, row) in faults.iter().zip(flips.rows()) {
        let d: Vec<usize> = parities(&dets, row).iter_ones().collect();
        let o: Vec<usize> = parities(&obs, row).iter_ones().collect();
        if d.is_empty() && o.is_empty() {
            continue;
        }
        match index.get(&(d.clone(), o.clone())) {
            Some(&i) => {
                let m = &mut mechanisms[i];
                m.p = m.p * (1.0 - f.p) + f.p * (1.0 - m.p);
            }
            None => {
                index.insert((d.clone(), o.clone()), mechanisms.len());
                mechanisms.push(Mechanism {
                    p: f.p,
                    detectors: d,
                    observables: o,
                });
            }
        }
    }
    Ok(DetectorErrorModel {
        n_detectors: dets.len(),
        n_observables: obs.len(),
        mechanisms,
    })
}

impl DetectorErrorModel {
    /// Detector-by-mechanism check matrix.
    pub fn check_matrix(&self) -> BitMatrix {
        self.incidence(self.n_detectors, |m| &m.detectors)
    }

    /// Observable-by-mechanism matrix.
    pub fn observable_matrix(&self) -> BitMatrix {
        self.incidence(self.n_observables, |m| &m.observables)
    }

    fn incidence(&self, rows: usize, f: impl Fn(&Mechanism) -> &Vec<usize>) -> BitMatrix {
        let mut h = BitMatrix::zeros(rows, self.mechanisms.len());
        for (j, m) in self.mechanisms.iter().enumerate() {
            for &d in f(m) {
                h.set(d, j, true);
            }
        }
        h
    }

    pub fn priors(&self) -> Vec<f64> {
        self.mechanisms.iter().map(|m| m.p).collect()
    }
}

impl fmt::Display for DetectorErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# detectors={} observables={}", self.n_detectors, self.n_observables)?;
        for m in &self.mechanisms {
            write!(f, "error({})", m.p)?;
            for d in &m.detectors {
                write!(f, " D{d}")?;
            }
            for o in &m.observables {
                write!(f, " L{o}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for DetectorErrorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut mechanisms = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut d = None;
                let mut o = None;
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("detectors=") {
                        d = v.parse().ok();
                    } else if let Some(v) = tok.strip_prefix("observables=") {
                        o = v.parse().ok();
                    }
                }
                if let (Some(d), Some(o)) = (d, o) {
                    header = Some((d, o));
                }
                continue;
            }
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap_or_default();
            let p: f64 = head
                .strip_prefix("error(")
                .and_then(|t| t.strip_suffix(')'))
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(format!("expected `error(<p>)`, got `{head}`")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(err(format!("probability {p} out of range")));
            }
            let mut m = Mechanism {
                p,
                detectors: Vec::new(),
                observables: Vec::new(),
            };
            for t in toks {
                let parsed = if let Some(v) = t.strip_prefix('D') {
                    v.parse().map(|v| m.detectors.push(v))
                } else if let Some(v) = t.strip_prefix('L') {
                    v.parse().map(|v| m.observables.push(v))
                } else {
                    return Err(err(format!("unknown target `{t}`")));
                };
                parsed.map_err(|_| err(format!("bad index in `{t}`")))?;
            }
            mechanisms.push(m);
        }
        let max_d = mechanisms.iter().flat_map(|m: &Mechanism| m.detectors.iter()).map(|d| d + 1).max().unwrap_or(0);
        let max_o = mechanisms.iter().flat_map(|m| m.observables.iter()).map(|o| o + 1).max().unwrap_or(0);
        let (n_detectors, n_observables) = header.unwrap_or((max_d, max_o));
        if max_d > n_detectors || max_o > n_observables {
            return Err(Error::Parse {
                line: 0,
                msg: "index exceeds header counts".into(),
            });
        }
        Ok(DetectorErrorModel {
            n_detectors,
            n_observables,
            mechanisms,
        })
    }
}
