//! Command-line front end for the `pac` binary.
//!
//! Everything writes to a caller-supplied sink so the commands can be driven
//! from tests without spawning a process.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::channel::{SnrConvention, DEFAULT_SATURATION};
use crate::cutoff::{polarize, BhattacharyyaRule, CutoffState, PolarizationBudgets};
use crate::drpo::{history_csv, RunConfig};
use crate::exec::{init_workers_from_env, Executor};
use crate::fano::{fano_decode, FanoConfig, DEFAULT_DELTA, DEFAULT_MAX_VISITS_PER_BIT};
use crate::pac::{extract_data, BitWord, ConnectionPolynomial, PacCode, RateProfile};
use crate::presets;
use crate::scl::{estimate_spectrum, scl_decode};
use crate::sim::{simulate, BiasMode, DecoderChoice, SweepConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "pac", version, about = "PAC code construction and decoding workbench")]
pub struct Cli {
    /// Run batch work on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-segment information-bit caps from polarized cutoff rates.
    Budgets(BudgetsArgs),
    /// Evolutionary rate-profile search driven by a JSON config.
    Optimize(OptimizeArgs),
    /// Monte Carlo FER / ANV sweep.
    Simulate(SimulateArgs),
    /// List-decoding weight spectrum and union bound.
    Spectrum(SpectrumArgs),
    /// Encode a data word.
    Encode(EncodeArgs),
    /// Decode a vector of channel LLRs.
    Decode(DecodeArgs),
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// Preset name or hex rate profile.
    #[arg(long)]
    pub profile: String,
    /// Block length for hex profiles (default: 4 bits per digit).
    #[arg(long = "n", alias = "N")]
    pub len: Option<usize>,
    /// Connection polynomial as a coefficient string, lowest degree first,
    /// optionally suffixed with `:low-first` to fill T in ascending order.
    #[arg(long, default_value = "10010001011")]
    pub poly: String,
}

impl CodeArgs {
    pub fn code(&self) -> CliResult<PacCode> {
        let profile = resolve_profile(&self.profile, self.len)?;
        Ok(PacCode::new(profile, self.poly.parse::<ConnectionPolynomial>()?))
    }
}

/// Accepts a preset name or a hex string.
pub fn resolve_profile(name_or_hex: &str, len: Option<usize>) -> CliResult<RateProfile> {
    if let Some(p) = presets::find(name_or_hex) {
        if len.is_some_and(|n| n != p.len) {
            return Err(CliError::Usage(format!("preset {} has N={}", p.name, p.len)));
        }
        return Ok(p.profile());
    }
    let profile = match len {
        Some(n) => RateProfile::from_hex(name_or_hex, n)?,
        None => RateProfile::parse_hex(name_or_hex)?,
    };
    Ok(profile)
}

#[derive(Debug, Args)]
pub struct BudgetsArgs {
    #[arg(long = "n", alias = "N")]
    pub len: usize,
    /// Leaf cutoff rates, minus-branch first.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["r0_root", "design_snr"])]
    pub r0_leaves: Option<Vec<f64>>,
    /// Root cutoff rate to polarize.
    #[arg(long, conflicts_with = "design_snr")]
    pub r0_root: Option<f64>,
    /// Design SNR in dB.
    #[arg(long)]
    pub design_snr: Option<f64>,
    /// Code rate for the SNR conversion (default: K/N when --k is given).
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub depth: u32,
    #[arg(long, default_value = "ebn0")]
    pub convention: SnrConvention,
    /// Check that K information bits fit the caps.
    #[arg(long = "k", alias = "K")]
    pub dimension: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecoderKind {
    Fano,
    Scl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BiasKind {
    PolarizedR0,
    Zero,
    File,
}

#[derive(Debug, Args)]
pub struct DecoderArgs {
    #[arg(long, value_enum, default_value = "fano")]
    pub decoder: DecoderKind,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Fano visit cap per decoded bit.
    #[arg(long, default_value_t = DEFAULT_MAX_VISITS_PER_BIT)]
    pub max_visits: u64,
    #[arg(long, value_enum, default_value = "polarized-r0")]
    pub bias_mode: BiasKind,
    /// SNR for polarized-r0 biases (default: the operating SNR).
    #[arg(long)]
    pub bias_snr: Option<f64>,
    /// Whitespace- or comma-separated biases, one per bit, for `--bias-mode file`.
    #[arg(long)]
    pub bias_file: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub list_size: usize,
}

impl DecoderArgs {
    fn choice(&self) -> CliResult<DecoderChoice> {
        Ok(match self.decoder {
            DecoderKind::Scl => DecoderChoice::Scl {
                list_size: self.list_size,
            },
            DecoderKind::Fano => {
                let bias = match self.bias_mode {
                    BiasKind::PolarizedR0 => BiasMode::PolarizedR0 { snr_db: self.bias_snr },
                    BiasKind::Zero => BiasMode::Zero,
                    BiasKind::File => {
                        let path = self
                            .bias_file
                            .as_ref()
                            .ok_or_else(|| CliError::Usage("--bias-mode file needs --bias-file".into()))?;
                        BiasMode::Explicit {
                            biases: read_numbers(path)?,
                        }
                    }
                };
                DecoderChoice::Fano {
                    delta: self.delta,
                    max_visits_per_bit: self.max_visits,
                    bias,
                }
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub decoder: DecoderArgs,
    /// SNR points in dB.
    #[arg(long, value_delimiter = ',', required = true)]
    pub snr: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_frames: u64,
    #[arg(long, default_value_t = 0)]
    pub min_frames: u64,
    #[arg(long, default_value_t = 100)]
    pub target_errors: u64,
    #[arg(long, default_value_t = 256)]
    pub batch: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "ebn0")]
    pub convention: SnrConvention,
    /// Skip the noise; every LLR is the saturated clean value.
    #[arg(long)]
    pub noiseless: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long = "list-size", short = 'L')]
    pub list_size: usize,
    /// SNR (dB, Eb/N0) for the union bound.
    #[arg(long, default_value_t = 4.0)]
    pub snr: f64,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// K data bits as a 0/1 string.
    #[arg(long)]
    pub data: String,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub decoder: DecoderArgs,
    /// File of N channel LLRs (positive favours bit 0).
    #[arg(long)]
    pub llr: PathBuf,
    /// Operating SNR used for polarized-r0 biases.
    #[arg(long, default_value_t = 4.0)]
    pub snr: f64,
    #[arg(long, default_value = "ebn0")]
    pub convention: SnrConvention,
}

fn read_numbers(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| CliError::Usage(format!("{}: {t:?}: {e}", path.display())))
        })
        .collect()
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    writeln!(out, "{text}").map_err(io_err(Path::new("<stdout>")))
}

pub fn budgets_json(b: &PolarizationBudgets) -> serde_json::Value {
    json!({
        "depth": b.depth,
        "caps": b.caps,
        "segment_len": b.segment_len,
        "total": b.total(),
    })
}

fn cmd_budgets(args: &BudgetsArgs, out: &mut dyn Write) -> CliResult<()> {
    let leaves: Vec<CutoffState> = if let Some(r0) = &args.r0_leaves {
        r0.iter().map(|&r| CutoffState::from_r0(r)).collect()
    } else {
        let root = if let Some(r0) = args.r0_root {
            CutoffState::from_r0(r0)
        } else if let Some(snr) = args.design_snr {
            let rate = match (args.rate, args.dimension) {
                (Some(r), _) => r,
                (None, Some(k)) => k as f64 / args.len as f64,
                (None, None) => return Err(CliError::Usage("--design-snr needs --rate or --k".into())),
            };
            CutoffState::from_snr(snr, rate, args.convention)
        } else {
            return Err(CliError::Usage(
                "one of --r0-leaves, --r0-root or --design-snr is required".into(),
            ));
        };
        polarize(root, args.depth, &BhattacharyyaRule)
    };
    let budgets = PolarizationBudgets::from_leaves(&leaves, args.len)?;
    if let Some(k) = args.dimension {
        budgets.check_feasible(k)?;
    }
    write_json(out, &budgets_json(&budgets))
}

fn cmd_optimize(args: &OptimizeArgs, exec: Executor, out: &mut dyn Write) -> CliResult<()> {
    let text = fs::read_to_string(&args.config).map_err(io_err(&args.config))?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: args.config.clone(),
        source,
    })?;
    let outcome = cfg.run(exec)?;
    fs::create_dir_all(&args.out_dir).map_err(io_err(&args.out_dir))?;
    let write = |name: &str, body: String| -> CliResult<()> {
        let path = args.out_dir.join(name);
        fs::write(&path, body).map_err(io_err(&path))
    };
    write("best_profile.hex", format!("{}\n", outcome.best_profile.to_hex()))?;
    write("history.csv", history_csv(&outcome.history))?;
    let counters = serde_json::to_string_pretty(&outcome.counters.to_json()).expect("JSON values serialize");
    write("counters.json", format!("{counters}\n"))?;
    let best = &outcome.best_candidate;
    writeln!(
        out,
        "best {} d={} a_d={} mlubv={:.6e}",
        outcome.best_profile.to_hex(),
        best.d,
        best.a_d,
        best.mlubv
    )
    .map_err(io_err(Path::new("<stdout>")))
}

fn cmd_simulate(args: &SimulateArgs, exec: Executor, out: &mut dyn Write) -> CliResult<()> {
    let code = args.code.code()?;
    let cfg = SweepConfig {
        snrs_db: args.snr.clone(),
        max_frames: args.max_frames,
        min_frames: args.min_frames,
        target_errors: args.target_errors,
        batch: args.batch,
        seed: args.seed,
        convention: args.convention,
        noiseless: args.noiseless,
        saturation: DEFAULT_SATURATION,
    };
    let result = simulate(&code, &args.decoder.choice()?, &cfg, exec)?;
    let csv = result.to_csv();
    match &args.out {
        Some(path) => fs::write(path, csv).map_err(io_err(path)),
        None => out.write_all(csv.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> CliResult<()> {
    let code = args.code.code()?;
    let spec = estimate_spectrum(&code, args.list_size, DEFAULT_SATURATION)?;
    let histogram: BTreeMap<String, usize> = spec.histogram().into_iter().map(|(w, c)| (w.to_string(), c)).collect();
    write_json(
        out,
        &json!({
            "L": args.list_size,
            "d": spec.d,
            "a_d": spec.a_d,
            "histogram": histogram,
            "mlubv": spec.mlubv(args.snr, code.rate()),
        }),
    )
}

fn cmd_encode(args: &EncodeArgs, out: &mut dyn Write) -> CliResult<()> {
    let code = args.code.code()?;
    let data: BitWord = args.data.parse()?;
    let x = code.encode(&data)?;
    writeln!(out, "{x}").map_err(io_err(Path::new("<stdout>")))
}

fn cmd_decode(args: &DecodeArgs, out: &mut dyn Write) -> CliResult<()> {
    let code = args.code.code()?;
    let llr = read_numbers(&args.llr)?;
    let value = match args.decoder.choice()? {
        DecoderChoice::Fano {
            delta,
            max_visits_per_bit,
            bias,
        } => {
            let mut cfg = FanoConfig::new(bias.resolve(&code, args.snr, args.convention)?);
            cfg.delta = delta;
            cfg.max_visits = Some(max_visits_per_bit.saturating_mul(code.len() as u64));
            let r = fano_decode(&llr, &code, &cfg)?;
            json!({
                "data": r.d_hat.to_string(),
                "visits": r.visits,
                "anv": r.anv,
                "timed_out": r.timed_out,
            })
        }
        DecoderChoice::Scl { list_size } => {
            let paths = scl_decode(&llr, &code, list_size)?;
            let best = &paths[0];
            json!({
                "data": extract_data(&best.v_hat, &code.profile).to_string(),
                "metric": best.metric,
            })
        }
    };
    write_json(out, &value)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let exec = if cli.sequential {
        Executor::Sequential
    } else {
        Executor::Parallel
    };
    match &cli.command {
        Command::Budgets(a) => cmd_budgets(a, out),
        Command::Optimize(a) => cmd_optimize(a, exec, out),
        Command::Simulate(a) => cmd_simulate(a, exec, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Encode(a) => cmd_encode(a, out),
        Command::Decode(a) => cmd_decode(a, out),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        // --help / --version
        Err(e) if !e.use_stderr() => {
            return write!(out, "{e}").map_err(io_err(Path::new("<stdout>")));
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    init_workers_from_env();
    execute(&cli, out)
}
