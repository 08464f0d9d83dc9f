//! Syndrome decoders: normalised min-sum BP, OSD-0 post-processing, exact
//! minimum-weight perfect matching, and an exhaustive ML oracle.

pub mod blossom;
mod bp;
mod ml;
mod mwpm;
mod osd;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::sim::DetectorErrorModel;

pub use bp::bp_decode;
pub use ml::{ml_oracle_decode, ML_MAX_VARIABLES};
pub use mwpm::{mwpm_decode, MatchingDecoder};
pub use osd::{bposd_decode, osd0_postprocess};

/// Priors are clamped into this range when built from a DEM.
pub const MIN_PRIOR: f64 = 1e-12;

/// A Tanner graph with per-variable error priors.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodingProblem {
    pub check_matrix: BitMatrix,
    pub priors: Vec<f64>,
    pub observable_matrix: Option<BitMatrix>,
    pub(crate) check_vars: Vec<Vec<usize>>,
    pub(crate) var_checks: Vec<Vec<usize>>,
}

impl DecodingProblem {
    pub fn new(check_matrix: BitMatrix, priors: Vec<f64>, observable_matrix: Option<BitMatrix>) -> Result<Self> {
        let v = check_matrix.num_cols();
        if priors.len() != v {
            return Err(Error::DimensionMismatch {
                left: priors.len(),
                right: v,
            });
        }
        if let Some(&p) = priors.iter().find(|&&p| !(p > 0.0 && p <= 0.5)) {
            return Err(Error::InvalidProbability(p));
        }
        if let Some(o) = &observable_matrix {
            if o.num_cols() != v {
                return Err(Error::DimensionMismatch {
                    left: o.num_cols(),
                    right: v,
                });
            }
        }
        let check_vars: Vec<Vec<usize>> = check_matrix.rows().iter().map(|r| r.iter_ones().collect()).collect();
        let mut var_checks = vec![Vec::new(); v];
        for (c, vars) in check_vars.iter().enumerate() {
            for &j in vars {
                var_checks[j].push(c);
            }
        }
        Ok(Self {
            check_matrix,
            priors,
            observable_matrix,
            check_vars,
            var_checks,
        })
    }

    /// Same prior `p` on every variable.
    pub fn uniform(check_matrix: BitMatrix, p: f64, observable_matrix: Option<BitMatrix>) -> Result<Self> {
        let v = check_matrix.num_cols();
        Self::new(check_matrix, vec![p; v], observable_matrix)
    }

    /// Detector/mechanism problem of a DEM; priors clamped into
    /// `[MIN_PRIOR, 1/2]`.
    pub fn from_dem(dem: &DetectorErrorModel) -> Self {
        let priors = dem.priors().iter().map(|p| p.clamp(MIN_PRIOR, 0.5)).collect();
        Self::new(dem.check_matrix(), priors, Some(dem.observable_matrix())).expect("DEM matrices are consistent")
    }

    pub fn num_checks(&self) -> usize {
        self.check_matrix.num_rows()
    }

    pub fn num_vars(&self) -> usize {
        self.check_matrix.num_cols()
    }

    /// Variables that touch no check.
    pub fn isolated(&self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&j| self.var_checks[j].is_empty()).collect()
    }

    /// `H · e`.
    pub fn syndrome_of(&self, e: &BitVec) -> BitVec {
        let mut s = BitVec::zeros(self.num_checks());
        for (c, vars) in self.check_vars.iter().enumerate() {
            if vars.iter().fold(false, |a, &j| a ^ e.get(j)) {
                s.set(c, true);
            }
        }
        s
    }

    fn check_syndrome_len(&self, s: &BitVec) -> Result<()> {
        if s.len() != self.num_checks() {
            return Err(Error::DimensionMismatch {
                left: s.len(),
                right: self.num_checks(),
            });
        }
        Ok(())
    }

    pub(crate) fn result(&self, correction: BitVec, converged: bool, iterations: usize, llrs: Vec<f64>) -> DecodeResult {
        let observable_flips = self.observable_matrix.as_ref().map(|o| o.mul_vec(&correction));
        DecodeResult {
            correction,
            converged,
            iterations,
            observable_flips,
            llrs,
        }
    }

    pub(crate) fn channel_llrs(&self) -> Vec<f64> {
        self.priors.iter().map(|&p| ((1.0 - p) / p).ln()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub correction: BitVec,
    /// For BP: whether the hard decision reproduced the syndrome. Other
    /// decoders always report `true` on success.
    pub converged: bool,
    pub iterations: usize,
    pub observable_flips: Option<BitVec>,
    /// Final posterior LLRs (BP-based decoders only).
    pub llrs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    #[default]
    Serial,
    Parallel,
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Schedule::Serial),
            "parallel" => Ok(Schedule::Parallel),
            _ => Err(Error::InvalidConfig(format!("unknown schedule `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpConfig {
    pub max_iter: usize,
    pub scale: f64,
    pub schedule: Schedule,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            scale: 0.75,
            schedule: Schedule::Serial,
        }
    }
}

/// Decoder selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Bp,
    Bposd,
    Mwpm,
    Ml,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Bp => "bp",
            DecoderKind::Bposd => "bposd",
            DecoderKind::Mwpm => "mwpm",
            DecoderKind::Ml => "ml",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bp" => Ok(DecoderKind::Bp),
            "bposd" | "bp-osd" | "bp_osd" => Ok(DecoderKind::Bposd),
            "mwpm" => Ok(DecoderKind::Mwpm),
            "ml" => Ok(DecoderKind::Ml),
            _ => Err(Error::InvalidConfig(format!("unknown decoder `{s}`"))),
        }
    }
}

/// A decoder bound to one problem, with any per-problem precomputation
/// done once. Safe to share across threads.
#[derive(Clone, Debug)]
pub enum Decoder {
    Bp(DecodingProblem, BpConfig),
    BpOsd(DecodingProblem, BpConfig),
    Mwpm(Box<MatchingDecoder>),
    Ml(DecodingProblem),
}

impl Decoder {
    pub fn new(kind: DecoderKind, problem: DecodingProblem, bp: BpConfig) -> Result<Self> {
        Ok(match kind {
            DecoderKind::Bp => Decoder::Bp(problem, bp),
            DecoderKind::Bposd => Decoder::BpOsd(problem, bp),
            DecoderKind::Mwpm => Decoder::Mwpm(Box::new(MatchingDecoder::new(&problem, true)?)),
            DecoderKind::Ml => {
                if problem.num_vars() > ML_MAX_VARIABLES {
                    return Err(Error::TooManyVariables {
                        got: problem.num_vars(),
                        max: ML_MAX_VARIABLES,
                    });
                }
                Decoder::Ml(problem)
            }
        })
    }

    pub fn problem(&self) -> &DecodingProblem {
        match self {
            Decoder::Bp(p, _) | Decoder::BpOsd(p, _) | Decoder::Ml(p) => p,
            Decoder::Mwpm(m) => m.problem(),
        }
    }

    pub fn decode(&self, syndrome: &BitVec) -> Result<DecodeResult> {
        match self {
            Decoder::Bp(p, c) => bp_decode(p, syndrome, c.max_iter, c.scale, c.schedule),
            Decoder::BpOsd(p, c) => bposd_decode(p, syndrome, c),
            Decoder::Mwpm(m) => m.decode(syndrome),
            Decoder::Ml(p) => ml_oracle_decode(p, syndrome),
        }
    }
}
