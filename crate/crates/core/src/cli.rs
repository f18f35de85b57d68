//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::amplify::{self, LoadConfig, Stage2Mode};
use crate::amplitudes::{quantize, AmplitudeFile, AmplitudeVector, QuantizedAmplitudes};
use crate::bootstrap::{self, BitWeightProfile};
use crate::distributions::{self, DistributionSpec, Family, SweepOptions};
use crate::error::{Error, Result};
use crate::gradient::{build_gradient_circuit_with, SplitGate};
use crate::oracles::{build_permutation_network_with, comparator_circuit, NetworkForm, OracleModel};
use crate::resources;

/// Largest `N g` accepted by `simulate`.
pub const SIMULATE_CAP: usize = 1 << 22;

#[derive(Parser, Debug)]
#[command(name = "gradload", version, about = "Gradient-state amplitude loading simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate and quantize an amplitude vector.
    Quantize(QuantizeArgs),
    /// Run the two-stage loading protocol and print its report.
    Simulate(SimulateArgs),
    /// Sweep distribution families over N and write CSV.
    Sweep(SweepArgs),
    /// Estimate bit weights by sampling the digit oracle.
    Estimate(EstimateArgs),
    /// Print per-round resource counts.
    Resources(ResourcesArgs),
    /// Dump a generated circuit.
    Circuit(CircuitArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DistArgs {
    /// delta, uniform, triangle, powerlaw, normal, random or sine.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Power-law exponent.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// Amplitude JSON written by `quantize`; overrides --dist.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub dist: DistArgs,
    /// Bits of precision; defaults to min(16, ceil(log2 N) + 4).
    #[arg(long)]
    pub g: Option<usize>,
    /// Shift amplitudes so the largest one uses the leading bit.
    #[arg(long)]
    pub shift: bool,
}

#[derive(Args, Debug)]
pub struct QuantizeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum ModeArg {
    Amplify,
    Postselect,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Stage-1 failure amplitude; defaults to 2^((1-g)/2) sqrt(|alpha|_1) capped at 0.5.
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta2: f64,
    #[arg(long)]
    pub bootstrap: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Amplify)]
    pub mode: ModeArg,
    /// Bit-weight profile JSON to bootstrap from.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Estimate the profile with this many oracle lookups instead.
    #[arg(long, conflicts_with = "profile")]
    pub shots: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Comma-separated families.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dist: Vec<String>,
    /// Comma-separated power-law exponents.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<f64>,
    /// Comma-separated standard deviations.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    /// Comma-separated seeds for the random family.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seed: Vec<u64>,
    /// Comma-separated N values; defaults to 2^6..2^14.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub g: Option<usize>,
    /// Quantize without the dynamic-range shift.
    #[arg(long)]
    pub no_shift: bool,
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta2: f64,
    /// Simulate points with N g at most this.
    #[arg(long, default_value_t = 0)]
    pub simulate_up_to: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub shots: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ResourcesArgs {
    /// Comma-separated precisions.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
    pub g: Vec<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum What {
    Gradient,
    Permutation,
    Comparator,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SplitArg {
    Sqrtcnot,
    Sqrtswap,
}

#[derive(Args, Debug)]
pub struct CircuitArgs {
    #[arg(long, value_enum)]
    pub what: What,
    #[arg(long)]
    pub g: Option<usize>,
    /// Address qubits of the permutation network.
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, value_enum, default_value_t = SplitArg::Sqrtcnot)]
    pub split: SplitArg,
    /// Emit the unpruned permutation network.
    #[arg(long)]
    pub full: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Exit status of a subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    BoundViolated,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn spec_of(d: &DistArgs) -> Result<DistributionSpec> {
    let name = d.dist.as_deref().ok_or_else(|| Error::InvalidArgument("give --input or --dist".into()))?;
    let n = d.n.ok_or_else(|| Error::InvalidArgument("--dist needs --n".into()))?;
    DistributionSpec::new(Family::from_parts(name, d.k, d.sigma, d.seed)?, n)
}

/// Target amplitudes and their quantization.
fn load_source(s: &SourceArgs) -> Result<(AmplitudeVector, QuantizedAmplitudes)> {
    if let Some(path) = &s.input {
        let file = AmplitudeFile::read(path)?;
        return Ok((file.amplitudes()?, file.quantized()?));
    }
    let spec = spec_of(&s.dist)?;
    let alpha = distributions::generate(&spec)?;
    let g = s.g.unwrap_or_else(|| distributions::default_precision(spec.n));
    let q = quantize(&alpha, g, s.shift)?;
    Ok((alpha, q))
}

fn cmd_quantize(a: &QuantizeArgs) -> Result<Status> {
    let (alpha, q) = load_source(&a.source)?;
    let file = q.to_file(alpha.values());
    emit(a.output.as_deref(), &(serde_json::to_string_pretty(&file)? + "\n"))?;
    Ok(Status::Ok)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Status> {
    let (alpha, q) = load_source(&a.source)?;
    if q.n() * q.g() > SIMULATE_CAP {
        return Err(Error::OutOfRange(format!("N g = {} exceeds the simulation cap {SIMULATE_CAP}", q.n() * q.g())));
    }
    let l1 = alpha.normalized()?.norms().l1;
    let mut cfg = LoadConfig::new(a.delta1.unwrap_or_else(|| amplify::default_delta1(q.g(), l1)), a.delta2);
    cfg.bootstrap = a.bootstrap || a.profile.is_some() || a.shots.is_some();
    cfg.mode = match a.mode {
        ModeArg::Amplify => Stage2Mode::Amplify,
        ModeArg::Postselect => Stage2Mode::Postselect,
    };
    cfg.profile = match (&a.profile, a.shots) {
        (Some(p), _) => Some(BitWeightProfile::read(p)?),
        (None, Some(shots)) => {
            Some(bootstrap::estimate_bit_weights(&OracleModel::digit(&q), shots, a.source.dist.seed)?)
        }
        _ => None,
    };
    cfg.alpha = Some(alpha);
    let (_, report) = amplify::load_state(&q, &cfg)?;
    emit(a.output.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    let violated = report.warnings.iter().any(|w| w.contains("precondition"));
    Ok(if violated { Status::BoundViolated } else { Status::Ok })
}

fn sweep_families(a: &SweepArgs) -> Result<Vec<Family>> {
    let mut out = Vec::new();
    for name in &a.dist {
        match name.as_str() {
            "powerlaw" if a.k.is_empty() => return Err(Error::InvalidArgument("powerlaw needs --k".into())),
            "powerlaw" => {
                for &k in &a.k {
                    out.push(Family::from_parts(name, Some(k), None, 0)?);
                }
            }
            "normal" if a.sigma.is_empty() => return Err(Error::InvalidArgument("normal needs --sigma".into())),
            "normal" => {
                for &s in &a.sigma {
                    out.push(Family::from_parts(name, None, Some(s), 0)?);
                }
            }
            "random" => {
                for &seed in &a.seed {
                    out.push(Family::from_parts(name, None, None, seed)?);
                }
            }
            _ => out.push(Family::from_parts(name, None, None, 0)?),
        }
    }
    Ok(out)
}

fn cmd_sweep(a: &SweepArgs) -> Result<Status> {
    let families = sweep_families(a)?;
    let ns = if a.n.is_empty() { distributions::powers_of_two(6, 14) } else { a.n.clone() };
    let opts = SweepOptions {
        g: a.g,
        shift: !a.no_shift,
        delta1: a.delta1,
        delta2: a.delta2,
        simulate_up_to: a.simulate_up_to,
    };
    let rows = distributions::sweep(&families, &ns, &opts)?;
    let mut buf = Vec::new();
    distributions::write_csv(&rows, &mut buf)?;
    emit(a.output.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(Status::Ok)
}

fn cmd_estimate(a: &EstimateArgs) -> Result<Status> {
    let (_, q) = load_source(&a.source)?;
    let oracle = OracleModel::digit(&q);
    let profile = bootstrap::estimate_bit_weights(&oracle, a.shots, a.source.dist.seed)?;
    let exact = bootstrap::average_bit_weights(&q);
    match bootstrap::bootstrap_slowdown_ratio(&exact, &profile) {
        Ok(r) => eprintln!("slowdown ratio vs exact profile: {r:.6}"),
        Err(e) => eprintln!("slowdown ratio unavailable: {e}"),
    }
    emit(a.output.as_deref(), &(serde_json::to_string_pretty(&profile)? + "\n"))?;
    Ok(Status::Ok)
}

fn cmd_resources(a: &ResourcesArgs) -> Result<Status> {
    let text = if a.json {
        serde_json::to_string_pretty(&resources::table(&a.g)?)? + "\n"
    } else {
        resources::render_table(&a.g)?
    };
    emit(None, &text)?;
    Ok(Status::Ok)
}

fn cmd_circuit(a: &CircuitArgs) -> Result<Status> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| Error::InvalidArgument(format!("--what {:?} needs --{flag}", a.what)))
    };
    let circuit = match a.what {
        What::Gradient => {
            let split = match a.split {
                SplitArg::Sqrtcnot => SplitGate::SqrtCnot,
                SplitArg::Sqrtswap => SplitGate::SqrtSwap,
            };
            build_gradient_circuit_with(need(a.g, "g")?, split)?.circuit
        }
        What::Permutation => {
            let form = if a.full { NetworkForm::Full } else { NetworkForm::Pruned };
            build_permutation_network_with(need(a.q, "q")?, form)?.circuit
        }
        What::Comparator => comparator_circuit(need(a.g, "g")?)?.circuit,
    };
    emit(a.output.as_deref(), &circuit.dump())?;
    Ok(Status::Ok)
}

pub fn run(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Quantize(a) => cmd_quantize(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Resources(a) => cmd_resources(a),
        Command::Circuit(a) => cmd_circuit(a),
    }
}

/// 0 ok, 1 I/O failure, 2 invalid input, 3 runtime-bound precondition
/// violated (report still written).
pub fn exit_code(result: &Result<Status>) -> u8 {
    match result {
        Ok(Status::Ok) => 0,
        Ok(Status::BoundViolated) => 3,
        Err(Error::Io(_)) => 1,
        Err(_) => 2,
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result))
}
