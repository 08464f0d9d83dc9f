use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use knill_core::harness::{emit_grouped, emit_results, run_experiment, to_csv_string, ExperimentConfig, OutputFormat};
use knill_core::ld::{ld_bound_check, p_eff, parse_support_dump, transversal_bell_supports, LdRates};
use knill_core::sim::{build_dem, DetectorErrorModel};
use knill_core::{BitVec, BpConfig, CliffordCircuit, Decoder, DecoderKind, DecodingProblem, Schedule};

#[derive(Parser)]
#[command(name = "knill", version, about = "Knill error correction simulation and decoding")]
struct Cli {
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep described by a JSON config.
    Run(RunArgs),
    /// Check a config and print its canonical form and hash.
    Validate { config: PathBuf },
    /// Decode syndromes against a detector error model.
    Decode(DecodeArgs),
    /// Print the detector error model of a noisy circuit.
    Dem { circuit: PathBuf },
    /// Check supports against the locally decaying bound.
    LdCheck(LdArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<usize>,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Bp,
    Bposd,
    Mwpm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Serial,
    Parallel,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    dem: PathBuf,
    /// One syndrome per line as a 0/1 string.
    #[arg(long)]
    syndromes: PathBuf,
    #[arg(long, value_enum, default_value = "bposd")]
    decoder: DecoderArg,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.75)]
    scale: f64,
    #[arg(long, value_enum, default_value = "serial")]
    schedule: ScheduleArg,
}

#[derive(Args)]
struct LdArgs {
    /// Support dump: one shot per line, space-separated qubit indices.
    #[arg(long, conflicts_with = "bell_pairs")]
    supports: Option<PathBuf>,
    /// Sample supports from a noisy transversal Bell measurement on this
    /// many pairs instead of reading a dump.
    #[arg(long)]
    bell_pairs: Option<usize>,
    /// Noise rate of the sampled Bell measurement.
    #[arg(long, default_value_t = 1e-3)]
    q: f64,
    #[arg(long, default_value_t = 1_000_000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of qubits; required with `--supports`.
    #[arg(long)]
    qubits: Option<usize>,
    /// Decay rate; defaults to the effective rate of `--q` when sampling.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 3)]
    max_subset: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<bool> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(shots) = args.shots {
        cfg.shots = shots;
    }
    cfg.validate()?;
    eprintln!("config {} ({})", cfg.config_hash(), cfg.name);
    let records = run_experiment(&cfg)?;
    let mut ok = true;
    for r in records.iter().filter(|r| !r.completed()) {
        ok = false;
        eprintln!("point q={} failed: {}", r.q, r.error.as_deref().unwrap_or_default());
    }
    print!("{}", to_csv_string(&records)?);
    if let Some(dir) = args.out.or(cfg.output.clone()) {
        let stem = format!("{}_{}", cfg.name, cfg.config_hash());
        emit_results(&records, &dir.join(format!("{stem}.csv")), OutputFormat::Csv)?;
        emit_results(&records, &dir.join(format!("{stem}.json")), OutputFormat::Json)?;
        emit_grouped(&records, &dir.join("by_code"))?;
        eprintln!("wrote results to {}", dir.display());
    }
    Ok(ok)
}

fn validate(path: &Path) -> Result<()> {
    let cfg = load_config(path)?;
    cfg.validate()?;
    println!("{}", cfg.canonical_json());
    eprintln!("config {} is valid", cfg.config_hash());
    Ok(())
}

fn parse_bits(line: &str, len: usize, lineno: usize) -> Result<BitVec> {
    let line = line.trim();
    if line.len() != len {
        bail!("syndrome line {lineno}: expected {len} bits, got {}", line.len());
    }
    let bits: Vec<bool> = line
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => bail!("syndrome line {lineno}: bad character `{c}`"),
        })
        .collect::<Result<_>>()?;
    Ok(BitVec::from_bools(&bits))
}

fn bit_string(v: &BitVec) -> String {
    (0..v.len()).map(|i| if v.get(i) { '1' } else { '0' }).collect()
}

fn decode(args: DecodeArgs) -> Result<()> {
    let dem: DetectorErrorModel = read(&args.dem)?.parse().with_context(|| format!("parsing {}", args.dem.display()))?;
    let problem = DecodingProblem::from_dem(&dem);
    let kind = match args.decoder {
        DecoderArg::Bp => DecoderKind::Bp,
        DecoderArg::Bposd => DecoderKind::Bposd,
        DecoderArg::Mwpm => DecoderKind::Mwpm,
    };
    let bp = BpConfig {
        max_iter: args.max_iter,
        scale: args.scale,
        schedule: match args.schedule {
            ScheduleArg::Serial => Schedule::Serial,
            ScheduleArg::Parallel => Schedule::Parallel,
        },
    };
    let decoder = Decoder::new(kind, problem, bp)?;
    for (i, line) in read(&args.syndromes)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let s = parse_bits(line, dem.n_detectors, i + 1)?;
        match decoder.decode(&s) {
            Ok(r) => {
                let obs = r.observable_flips.as_ref().map(bit_string).unwrap_or_default();
                println!("{} {} {}", bit_string(&r.correction), obs, u8::from(r.converged));
            }
            Err(e) => println!("error {e}"),
        }
    }
    Ok(())
}

fn dem(path: &Path) -> Result<()> {
    let c: CliffordCircuit = read(path)?.parse().with_context(|| format!("parsing {}", path.display()))?;
    print!("{}", build_dem(&c)?);
    Ok(())
}

fn ld_check(args: LdArgs) -> Result<()> {
    let (samples, n, tau) = match (&args.supports, args.bell_pairs) {
        (Some(path), _) => {
            let Some(n) = args.qubits else { bail!("--qubits is required with --supports") };
            let Some(tau) = args.tau else { bail!("--tau is required with --supports") };
            (parse_support_dump(&read(path)?)?, n, tau)
        }
        (None, Some(pairs)) => {
            let rates = LdRates::uniform(args.q)?;
            let tau = args.tau.unwrap_or(p_eff(&rates)?);
            (transversal_bell_supports(pairs, &rates, args.shots, args.seed)?, pairs, tau)
        }
        (None, None) => bail!("give either --supports or --bell-pairs"),
    };
    let report = ld_bound_check(&samples, n, tau, args.max_subset)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !report.holds() {
        bail!("{} subsets exceed the bound", report.violations.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { config } => validate(&config).map(|_| true),
        Command::Decode(args) => decode(args).map(|_| true),
        Command::Dem { circuit } => dem(&circuit).map(|_| true),
        Command::LdCheck(args) => ld_check(args).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
