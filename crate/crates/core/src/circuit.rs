//! Clifford circuit representation, the line-oriented text format, and the
//! circuit-level noise model.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    ResetZ,
    ResetX,
    H,
    S,
    Cnot,
    MeasureZ,
    MeasureX,
    PauliX,
    PauliY,
    PauliZ,
    NoiseDep1,
    NoiseDep2,
    NoiseXFlip,
    NoiseZFlip,
    Detector,
    Observable,
    Tick,
}

impl Kind {
    pub const ALL: [Kind; 17] = [
        Kind::ResetZ,
        Kind::ResetX,
        Kind::H,
        Kind::S,
        Kind::Cnot,
        Kind::MeasureZ,
        Kind::MeasureX,
        Kind::PauliX,
        Kind::PauliY,
        Kind::PauliZ,
        Kind::NoiseDep1,
        Kind::NoiseDep2,
        Kind::NoiseXFlip,
        Kind::NoiseZFlip,
        Kind::Detector,
        Kind::Observable,
        Kind::Tick,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::ResetZ => "RESET_Z",
            Kind::ResetX => "RESET_X",
            Kind::H => "H",
            Kind::S => "S",
            Kind::Cnot => "CNOT",
            Kind::MeasureZ => "MEASURE_Z",
            Kind::MeasureX => "MEASURE_X",
            Kind::PauliX => "PAULI_X",
            Kind::PauliY => "PAULI_Y",
            Kind::PauliZ => "PAULI_Z",
            Kind::NoiseDep1 => "NOISE_DEP1",
            Kind::NoiseDep2 => "NOISE_DEP2",
            Kind::NoiseXFlip => "NOISE_XFLIP",
            Kind::NoiseZFlip => "NOISE_ZFLIP",
            Kind::Detector => "DETECTOR",
            Kind::Observable => "OBSERVABLE",
            Kind::Tick => "TICK",
        }
    }

    pub fn is_noise(self) -> bool {
        matches!(
            self,
            Kind::NoiseDep1 | Kind::NoiseDep2 | Kind::NoiseXFlip | Kind::NoiseZFlip
        )
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, Kind::MeasureZ | Kind::MeasureX)
    }

    pub fn is_annotation(self) -> bool {
        matches!(self, Kind::Detector | Kind::Observable | Kind::Tick)
    }

    /// Kinds whose targets come in (control, target) pairs.
    pub fn is_pairwise(self) -> bool {
        matches!(self, Kind::Cnot | Kind::NoiseDep2)
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unknown instruction {s:?}"),
            })
    }
}

/// One circuit instruction.
///
/// For `OBSERVABLE` the single target is the observable index. `meas_refs`
/// are global measurement ordinals (not relative offsets).
#[derive(Clone, Debug, PartialEq)]
pub struct Instruction {
    pub kind: Kind,
    pub targets: Vec<usize>,
    pub prob: Option<f64>,
    pub meas_refs: Vec<usize>,
}

impl Instruction {
    pub fn gate(kind: Kind, targets: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            prob: None,
            meas_refs: Vec::new(),
        }
    }

    pub fn noise(kind: Kind, targets: Vec<usize>, prob: f64) -> Self {
        Self {
            kind,
            targets,
            prob: Some(prob),
            meas_refs: Vec::new(),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.targets.chunks_exact(2).map(|c| (c[0], c[1]))
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        if let Some(p) = self.prob {
            write!(f, " p={p}")?;
        }
        if !self.meas_refs.is_empty() {
            f.write_str(" rec=")?;
            for (i, r) in self.meas_refs.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{r}")?;
            }
        }
        Ok(())
    }
}

fn parse_instruction(line: &str, lineno: usize) -> Result<Instruction> {
    let err = |msg: String| Error::Parse { line: lineno, msg };
    let mut parts = line.split_ascii_whitespace();
    let kind: Kind = parts
        .next()
        .ok_or_else(|| err("empty instruction".into()))?
        .parse()
        .map_err(|_| err(format!("unknown instruction in {line:?}")))?;
    let mut inst = Instruction::gate(kind, Vec::new());
    for tok in parts {
        if let Some(p) = tok.strip_prefix("p=") {
            let p: f64 = p.parse().map_err(|_| err(format!("bad probability {p:?}")))?;
            inst.prob = Some(p);
        } else if let Some(r) = tok.strip_prefix("rec=") {
            for x in r.split(',') {
                inst.meas_refs
                    .push(x.parse().map_err(|_| err(format!("bad record ref {x:?}")))?);
            }
        } else {
            inst.targets
                .push(tok.parse().map_err(|_| err(format!("bad target {tok:?}")))?);
        }
    }
    Ok(inst)
}

/// An ordered list of instructions on a fixed qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordCircuit {
    n_qubits: usize,
    instructions: Vec<Instruction>,
    n_measurements: usize,
    n_detectors: usize,
    n_observables: usize,
}

impl CliffordCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            instructions: Vec::new(),
            n_measurements: 0,
            n_detectors: 0,
            n_observables: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_measurements(&self) -> usize {
        self.n_measurements
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    pub fn n_observables(&self) -> usize {
        self.n_observables
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn has_noise(&self) -> bool {
        self.instructions.iter().any(|i| i.kind.is_noise())
    }

    /// Validates and appends an instruction.
    pub fn push(&mut self, inst: Instruction) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCircuit(m));
        if inst.kind.is_noise() {
            match inst.prob {
                Some(p) if (0.0..=1.0).contains(&p) => {}
                Some(p) => return Err(Error::InvalidProbability(p)),
                None => return bad(format!("{} requires p=", inst.kind.name())),
            }
        } else if inst.prob.is_some() {
            return bad(format!("{} takes no probability", inst.kind.name()));
        }
        match inst.kind {
            Kind::Detector | Kind::Observable => {
                if let Some(&r) = inst.meas_refs.iter().find(|&&r| r >= self.n_measurements) {
                    return bad(format!(
                        "record {r} referenced before it is measured ({} so far)",
                        self.n_measurements
                    ));
                }
                if inst.kind == Kind::Detector && !inst.targets.is_empty() {
                    return bad("DETECTOR takes no targets".into());
                }
                if inst.kind == Kind::Observable && inst.targets.len() != 1 {
                    return bad("OBSERVABLE takes exactly one observable index".into());
                }
            }
            _ => {
                if !inst.meas_refs.is_empty() {
                    return bad(format!("{} takes no record refs", inst.kind.name()));
                }
                if let Some(&t) = inst.targets.iter().find(|&&t| t >= self.n_qubits) {
                    return bad(format!("target {t} >= n_qubits {}", self.n_qubits));
                }
                if inst.kind.is_pairwise() {
                    if inst.targets.len() % 2 != 0 {
                        return bad(format!("{} needs an even number of targets", inst.kind.name()));
                    }
                    if inst.pairs().any(|(a, b)| a == b) {
                        return bad(format!("{} pair acts twice on one qubit", inst.kind.name()));
                    }
                }
            }
        }
        match inst.kind {
            Kind::MeasureZ | Kind::MeasureX => self.n_measurements += inst.targets.len(),
            Kind::Detector => self.n_detectors += 1,
            Kind::Observable => self.n_observables = self.n_observables.max(inst.targets[0] + 1),
            _ => {}
        }
        self.instructions.push(inst);
        Ok(())
    }

    fn push_gate(&mut self, kind: Kind, targets: &[usize]) {
        if targets.is_empty() {
            return;
        }
        self.push(Instruction::gate(kind, targets.to_vec()))
            .expect("invalid gate targets");
    }

    pub fn reset_z(&mut self, qubits: &[usize]) {
        self.push_gate(Kind::ResetZ, qubits)
    }

    pub fn reset_x(&mut self, qubits: &[usize]) {
        self.push_gate(Kind::ResetX, qubits)
    }

    pub fn h(&mut self, qubits: &[usize]) {
        self.push_gate(Kind::H, qubits)
    }

    pub fn s(&mut self, qubits: &[usize]) {
        self.push_gate(Kind::S, qubits)
    }

    pub fn cnot(&mut self, pairs: &[(usize, usize)]) {
        let flat: Vec<usize> = pairs.iter().flat_map(|&(c, t)| [c, t]).collect();
        self.push_gate(Kind::Cnot, &flat)
    }

    pub fn tick(&mut self) {
        self.instructions.push(Instruction::gate(Kind::Tick, Vec::new()));
    }

    /// Appends a Z measurement and returns the measurement ordinals it created.
    pub fn measure_z(&mut self, qubits: &[usize]) -> Range<usize> {
        let start = self.n_measurements;
        self.push_gate(Kind::MeasureZ, qubits);
        start..self.n_measurements
    }

    pub fn measure_x(&mut self, qubits: &[usize]) -> Range<usize> {
        let start = self.n_measurements;
        self.push_gate(Kind::MeasureX, qubits);
        start..self.n_measurements
    }

    pub fn noise(&mut self, kind: Kind, targets: &[usize], p: f64) -> Result<()> {
        if !kind.is_noise() {
            return Err(Error::InvalidCircuit(format!("{} is not a noise channel", kind.name())));
        }
        self.push(Instruction::noise(kind, targets.to_vec(), p))
    }

    pub fn detector(&mut self, refs: &[usize]) -> Result<usize> {
        let idx = self.n_detectors;
        self.push(Instruction {
            kind: Kind::Detector,
            targets: Vec::new(),
            prob: None,
            meas_refs: refs.to_vec(),
        })?;
        Ok(idx)
    }

    pub fn observable(&mut self, index: usize, refs: &[usize]) -> Result<()> {
        self.push(Instruction {
            kind: Kind::Observable,
            targets: vec![index],
            prob: None,
            meas_refs: refs.to_vec(),
        })
    }

    /// Concatenation `self ∘ other`; measurement references in `other` are
    /// shifted past this circuit's measurements.
    pub fn compose(&self, other: &CliffordCircuit) -> Result<CliffordCircuit> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        let mut out = self.clone();
        let shift = self.n_measurements;
        for inst in &other.instructions {
            let mut inst = inst.clone();
            for r in &mut inst.meas_refs {
                *r += shift;
            }
            out.push(inst)?;
        }
        Ok(out)
    }

    /// Embeds the circuit into a larger register without relabelling qubits.
    pub fn widen(&self, n_qubits: usize) -> Result<CliffordCircuit> {
        if n_qubits < self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: n_qubits,
                right: self.n_qubits,
            });
        }
        let mut out = self.clone();
        out.n_qubits = n_qubits;
        Ok(out)
    }

    /// Number of elementary fault sites the noise model attaches: one per
    /// reset, single-qubit gate, CNOT pair and measurement target.
    pub fn fault_site_count(&self) -> usize {
        self.instructions
            .iter()
            .map(|i| match i.kind {
                Kind::ResetZ | Kind::ResetX | Kind::H | Kind::S | Kind::MeasureZ | Kind::MeasureX => {
                    i.targets.len()
                }
                Kind::Cnot => i.targets.len() / 2,
                _ => 0,
            })
            .sum()
    }

    /// Copy with every noise channel removed.
    pub fn without_noise(&self) -> CliffordCircuit {
        let mut out = self.clone();
        out.instructions.retain(|i| !i.kind.is_noise());
        out
    }

    /// Measurement references of each detector, in detector order.
    pub fn detector_refs(&self) -> Vec<Vec<usize>> {
        self.instructions
            .iter()
            .filter(|i| i.kind == Kind::Detector)
            .map(|i| i.meas_refs.clone())
            .collect()
    }

    /// Measurement references of each observable; repeated declarations of
    /// the same index accumulate.
    pub fn observable_refs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_observables];
        for i in self.instructions.iter().filter(|i| i.kind == Kind::Observable) {
            out[i.targets[0]].extend_from_slice(&i.meas_refs);
        }
        out
    }

    /// Parses the line-oriented text format. Blank lines and `#` comments
    /// are skipped; the header `QUBITS <n>` must come first.
    pub fn parse(text: &str) -> Result<CliffordCircuit> {
        let mut circuit: Option<CliffordCircuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match &mut circuit {
                None => {
                    let n = line
                        .strip_prefix("QUBITS ")
                        .and_then(|n| n.trim().parse().ok())
                        .ok_or_else(|| Error::Parse {
                            line: lineno,
                            msg: "expected header `QUBITS <n>`".into(),
                        })?;
                    circuit = Some(CliffordCircuit::new(n));
                }
                Some(c) => {
                    let inst = parse_instruction(line, lineno)?;
                    c.push(inst).map_err(|e| Error::Parse {
                        line: lineno,
                        msg: e.to_string(),
                    })?;
                }
            }
        }
        circuit.ok_or_else(|| Error::Parse {
            line: 0,
            msg: "missing `QUBITS <n>` header".into(),
        })
    }
}

impl fmt::Display for CliffordCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.n_qubits)?;
        for inst in &self.instructions {
            writeln!(f, "{inst}")?;
        }
        Ok(())
    }
}

impl FromStr for CliffordCircuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CliffordCircuit::parse(s)
    }
}

/// Circuit-level depolarising noise parametrised by a single probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub q: f64,
    /// Adds single-qubit depolarising noise to qubits left idle between
    /// `TICK`s. Off by default.
    pub idle: bool,
}

impl NoiseModel {
    pub fn new(q: f64) -> Self {
        Self { q, idle: false }
    }

    /// Returns a noisy copy of a bare circuit.
    pub fn apply(&self, c: &CliffordCircuit) -> Result<CliffordCircuit> {
        let q = self.q;
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidProbability(q));
        }
        if c.has_noise() {
            return Err(Error::AlreadyNoisy);
        }
        let mut out = CliffordCircuit::new(c.n_qubits);
        let mut touched = vec![false; c.n_qubits];
        for inst in &c.instructions {
            match inst.kind {
                Kind::MeasureZ => out.noise(Kind::NoiseXFlip, &inst.targets, q)?,
                Kind::MeasureX => out.noise(Kind::NoiseZFlip, &inst.targets, q)?,
                Kind::Tick if self.idle => {
                    let idle: Vec<usize> = (0..c.n_qubits).filter(|&i| !touched[i]).collect();
                    if !idle.is_empty() {
                        out.noise(Kind::NoiseDep1, &idle, q)?;
                    }
                    touched.iter_mut().for_each(|t| *t = false);
                }
                _ => {}
            }
            for &t in &inst.targets {
                if !inst.kind.is_annotation() {
                    touched[t] = true;
                }
            }
            out.push(inst.clone())?;
            match inst.kind {
                Kind::ResetZ => out.noise(Kind::NoiseXFlip, &inst.targets, q)?,
                Kind::ResetX => out.noise(Kind::NoiseZFlip, &inst.targets, q)?,
                Kind::H | Kind::S => out.noise(Kind::NoiseDep1, &inst.targets, q)?,
                Kind::Cnot => out.noise(Kind::NoiseDep2, &inst.targets, q)?,
                _ => {}
            }
        }
        Ok(out)
    }
}

/// Decorates a bare circuit with the circuit-level noise model at rate `q`.
pub fn apply_noise_model(c: &CliffordCircuit, q: f64) -> Result<CliffordCircuit> {
    NoiseModel::new(q).apply(c)
}
