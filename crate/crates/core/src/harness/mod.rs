//! Monte Carlo experiment harness: configs, q sweeps and result records.

mod output;
mod stats;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codes::{lifted_product_code, rotated_surface_code, toy_lifted_product, LiftedProductSpec, StabilizerCode};
use crate::decoders::{BpConfig, DecoderKind};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::protocols::{
    compose_and_sample, compressed_knill_memory, knill_memory, windowed_memory, ChainSettings, CodeCapacityDecoder,
    ComposedExperiment, LogicalBasis, Register, WindowGeometry,
};
use crate::sim::frame::block_rng;

pub use output::{emit_grouped, emit_results, parse_csv, to_csv_string, CsvRow, OutputFormat, CSV_HEADER};
pub use stats::{agresti_coull_ci, normal_quantile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CodeCapacity,
    Knill,
    CompressedKnill,
    Windowed,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CodeCapacity => "code_capacity",
            ExperimentKind::Knill => "knill",
            ExperimentKind::CompressedKnill => "compressed_knill",
            ExperimentKind::Windowed => "windowed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeSpec {
    Surface {
        distance: usize,
    },
    /// The built-in [[8,2,2]] lifted product.
    LiftedProductToy,
    /// Base matrices read from a file. `distance` sets round-count defaults
    /// and is computed exactly for codes of at most 30 qubits when absent.
    LiftedProduct {
        path: PathBuf,
        #[serde(default)]
        distance: Option<usize>,
    },
}

impl CodeSpec {
    pub fn build(&self) -> Result<StabilizerCode> {
        match self {
            CodeSpec::Surface { distance } => rotated_surface_code(*distance),
            CodeSpec::LiftedProductToy => lifted_product_code(&toy_lifted_product()),
            CodeSpec::LiftedProduct { path, .. } => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
                lifted_product_code(&LiftedProductSpec::parse(&text)?)
            }
        }
    }

    /// Label used for grouping result files.
    pub fn family(&self) -> String {
        match self {
            CodeSpec::Surface { distance } => format!("surface_d{distance}"),
            CodeSpec::LiftedProductToy => "lp_toy".into(),
            CodeSpec::LiftedProduct { path, .. } => format!(
                "lp_{}",
                path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned())
            ),
        }
    }

    fn distance(&self, code: &StabilizerCode) -> Result<usize> {
        let given = match self {
            CodeSpec::Surface { distance } => Some(*distance),
            CodeSpec::LiftedProduct { distance, .. } => *distance,
            CodeSpec::LiftedProductToy => None,
        };
        given.or_else(|| code.distance()).ok_or_else(|| {
            Error::InvalidConfig(format!("code `{}` needs an explicit distance for round defaults", code.name))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSpec {
    pub kind: DecoderKind,
    #[serde(default)]
    pub bp: BpConfig,
    /// Uniform prior of the online decoder; the point's q when absent.
    /// Ignored for offline decoders, which use circuit priors.
    #[serde(default)]
    pub prior: Option<f64>,
}

impl DecoderSpec {
    pub fn new(kind: DecoderKind) -> Self {
        Self {
            kind,
            bp: BpConfig::default(),
            prior: None,
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}

fn default_online() -> DecoderSpec {
    DecoderSpec::new(DecoderKind::Mwpm)
}

fn default_offline() -> DecoderSpec {
    DecoderSpec::new(DecoderKind::Bposd)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub kind: ExperimentKind,
    pub code: CodeSpec,
    #[serde(default = "default_online")]
    pub online: DecoderSpec,
    #[serde(default = "default_offline")]
    pub offline: DecoderSpec,
    pub q: Vec<f64>,
    /// Knill gadget rounds, or check rounds for `windowed` (default 4d).
    #[serde(default)]
    pub rounds: Option<usize>,
    /// Check rounds per block in auxiliary preparation (default d).
    #[serde(default)]
    pub prep_rounds: Option<usize>,
    /// Windowed decoding geometry (defaults 2d and d).
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub commit: Option<usize>,
    #[serde(default)]
    pub basis: LogicalBasis,
    pub shots: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Also count failures per logical observable.
    #[serde(default)]
    pub per_observable: bool,
    /// Record wall time per point. Off by default so that output files are
    /// byte-identical across runs.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    /// Canonical JSON: every field present, fixed order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// First 16 hex digits of the SHA-256 of the compact canonical JSON.
    pub fn config_hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serialises");
        hex::encode(&Sha256::digest(compact.as_bytes())[..8])
    }

    /// Checks field ranges and kind-specific requirements without building
    /// any circuit.
    pub fn validate(&self) -> Result<()> {
        if self.q.is_empty() {
            return Err(Error::InvalidConfig("empty q sweep".into()));
        }
        if let Some(&q) = self.q.iter().find(|q| !(0.0..1.0).contains(*q)) {
            return Err(Error::InvalidProbability(q));
        }
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        for spec in [&self.online, &self.offline] {
            if let Some(p) = spec.prior {
                if !(0.0..=0.5).contains(&p) {
                    return Err(Error::InvalidProbability(p));
                }
            }
        }
        let needs_rounds = matches!(self.kind, ExperimentKind::Knill | ExperimentKind::CompressedKnill);
        if needs_rounds && self.rounds.is_none_or(|r| r == 0) {
            return Err(Error::InvalidConfig(format!("`{}` needs rounds ≥ 1", self.kind.name())));
        }
        if self.kind == ExperimentKind::CodeCapacity
            && (self.rounds.is_some() || self.window.is_some() || self.commit.is_some())
        {
            return Err(Error::InvalidConfig("code_capacity takes no round or window settings".into()));
        }
        if self.kind != ExperimentKind::Windowed && (self.window.is_some() || self.commit.is_some()) {
            return Err(Error::InvalidConfig("window and commit apply to `windowed` only".into()));
        }
        if self.prep_rounds == Some(0) {
            return Err(Error::InvalidConfig("prep_rounds must be at least 1".into()));
        }
        Ok(())
    }

    fn geometry(&self, d: usize) -> WindowGeometry {
        WindowGeometry {
            rounds: self.rounds.unwrap_or(4 * d),
            window: self.window.unwrap_or(2 * d),
            commit: self.commit.unwrap_or(d),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub experiment: String,
    pub code: String,
    pub q: f64,
    pub shots: usize,
    /// Shots in which any logical observable is wrong.
    pub failures: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable_failures: Option<Vec<usize>>,
    /// Set when the point could not be run; counts are then zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn completed(&self) -> bool {
        self.error.is_none()
    }
}

/// Seed of sweep point `index`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Shots per independently seeded batch.
const CHUNK: usize = 1 << 13;

/// Logical flips left by code-capacity decoding of the data error
/// `(ex, ez)`: Z̄ parities of the X residual, then X̄ parities of the Z
/// residual.
pub fn code_capacity_flips(code: &StabilizerCode, dec: &CodeCapacityDecoder, ex: &BitVec, ez: &BitVec) -> BitVec {
    let mut rx = dec.recover_x(&code.h_z.mul_vec(ex));
    rx.xor_assign(ex);
    let mut rz = dec.recover_z(&code.h_x.mul_vec(ez));
    rz.xor_assign(ez);
    code.logical_z.mul_vec(&rx).concat(&code.logical_x.mul_vec(&rz))
}

/// Failure tallies of one point.
#[derive(Clone, Debug, Default, PartialEq)]
struct Tally {
    failures: usize,
    per_observable: Vec<usize>,
}

impl Tally {
    fn new(n_obs: usize) -> Self {
        Self {
            failures: 0,
            per_observable: vec![0; n_obs],
        }
    }

    fn add(&mut self, wrong: &BitVec) {
        if !wrong.is_zero() {
            self.failures += 1;
            wrong.iter_ones().for_each(|i| self.per_observable[i] += 1);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.failures += other.failures;
        self.per_observable.iter_mut().zip(other.per_observable).for_each(|(a, b)| *a += b);
        self
    }
}

fn online_decoder(cfg: &ExperimentConfig, code: &StabilizerCode, q: f64) -> Result<Arc<CodeCapacityDecoder>> {
    let o = &cfg.online;
    Ok(Arc::new(CodeCapacityDecoder::new(code, o.kind, o.bp, o.prior.unwrap_or(q))?))
}

fn code_capacity_point(cfg: &ExperimentConfig, code: &StabilizerCode, q: f64, seed: u64) -> Result<Tally> {
    let dec = online_decoder(cfg, code, q)?;
    let n = code.n;
    let chunks = cfg.shots.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = block_rng(seed, c as u64);
            let mut tally = Tally::new(2 * code.k);
            for _ in 0..CHUNK.min(cfg.shots - c * CHUNK) {
                let mut ex = BitVec::zeros(n);
                let mut ez = BitVec::zeros(n);
                for i in 0..n {
                    if rng.gen::<f64>() < q {
                        match rng.gen_range(0..3) {
                            0 => ex.set(i, true),
                            1 => {
                                ex.set(i, true);
                                ez.set(i, true);
                            }
                            _ => ez.set(i, true),
                        }
                    }
                }
                tally.add(&code_capacity_flips(code, &dec, &ex, &ez));
            }
            tally
        })
        .reduce(|| Tally::new(2 * code.k), Tally::merge))
}

/// Builds the composed experiment of a circuit-level point.
pub fn build_experiment(cfg: &ExperimentConfig, q: f64) -> Result<(ComposedExperiment, Arc<CodeCapacityDecoder>)> {
    cfg.validate()?;
    let code = Arc::new(cfg.code.build()?);
    let d = cfg.code.distance(&code)?;
    let reg = Register::new(code.clone());
    let online = online_decoder(cfg, &code, q)?;
    let s = ChainSettings {
        q,
        basis: cfg.basis,
        prep_rounds: cfg.prep_rounds.unwrap_or(d),
        offline: match cfg.kind {
            ExperimentKind::Windowed => cfg.online.kind,
            _ => cfg.offline.kind,
        },
        bp: cfg.offline.bp,
    };
    let exp = match cfg.kind {
        ExperimentKind::Knill => knill_memory(&reg, cfg.rounds.unwrap_or(1), &s, online.clone())?,
        ExperimentKind::CompressedKnill => compressed_knill_memory(&reg, cfg.rounds.unwrap_or(1), &s, online.clone())?,
        ExperimentKind::Windowed => windowed_memory(&reg, cfg.geometry(d), &s, online.clone())?,
        ExperimentKind::CodeCapacity => {
            return Err(Error::InvalidConfig("code_capacity has no circuit".into()));
        }
    };
    Ok((exp, online))
}

fn circuit_point(cfg: &ExperimentConfig, q: f64, seed: u64) -> Result<Tally> {
    let (exp, _) = build_experiment(cfg, q)?;
    let expected = exp.expected_observables();
    let n_obs = exp.observables().len();
    let mut tally = Tally::new(n_obs);
    for c in 0..cfg.shots.div_ceil(CHUNK) {
        let shots = CHUNK.min(cfg.shots - c * CHUNK);
        let batch = compose_and_sample(&exp, shots, point_seed(seed, c));
        for row in &batch.rows {
            let mut wrong = exp.observable_values(row);
            wrong.xor_assign(&expected);
            tally.add(&wrong);
        }
    }
    Ok(tally)
}

fn run_point(cfg: &ExperimentConfig, hash: &str, index: usize) -> ResultRecord {
    let q = cfg.q[index];
    let seed = point_seed(cfg.seed, index);
    let start = Instant::now();
    let tally = match cfg.kind {
        ExperimentKind::CodeCapacity => cfg.code.build().and_then(|code| code_capacity_point(cfg, &code, q, seed)),
        _ => circuit_point(cfg, q, seed),
    };
    let seconds = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let mut rec = ResultRecord {
        config_hash: hash.to_string(),
        experiment: cfg.kind.name().into(),
        code: cfg.code.family(),
        q,
        shots: cfg.shots,
        failures: 0,
        rate: 0.0,
        ci_low: 0.0,
        ci_high: 0.0,
        seconds,
        observable_failures: None,
        error: None,
    };
    match tally {
        Ok(t) => {
            let (lo, hi) = agresti_coull_ci(t.failures, cfg.shots, 0.95).expect("failures never exceed shots");
            rec.failures = t.failures;
            rec.rate = t.failures as f64 / cfg.shots as f64;
            rec.ci_low = lo;
            rec.ci_high = hi;
            rec.observable_failures = cfg.per_observable.then_some(t.per_observable);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Runs every point of the sweep, in parallel, returning records in sweep
/// order. Points that cannot be built are reported in their record's
/// `error` field; only an invalid config fails the whole run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let hash = cfg.config_hash();
    Ok((0..cfg.q.len()).into_par_iter().map(|i| run_point(cfg, &hash, i)).collect())
}
