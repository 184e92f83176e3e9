//! `semiclab`: runs quantization, pseudospectrum, quasimode and weight
//! experiments from JSON configs and writes CSV/JSON/PGM artifacts.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod config;
mod repro;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{AtlasConfig, ExperimentConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] semiclassical::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use semiclassical::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Syntax { .. } | E::VariableOutOfRange { .. } | E::InvalidInput(_)) => 2,
            _ => 3,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.exit_code() == 2 {
            "config_error"
        } else {
            "numerical_failure"
        }
    }
}

#[derive(Parser)]
#[command(name = "semiclab", version, about = "Semiclassical pseudospectra laboratory")]
struct Cli {
    /// Worker threads for the internal pool (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every experiment; flags override the config file.
#[derive(Args, Debug, Default)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Symbol text, e.g. "xi1^2 + 1i*xi1 + x1^2".
    #[arg(long)]
    symbol: Option<String>,
    /// Phase-space half dimension n.
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated list of h.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    h: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample p over a phase-space box: range atlas, Λ± counts, level sets at probe values.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Box bounds lo hi per coordinate, ordered x1..xn, xi1..xin.
        #[arg(long = "box", num_args = 2.., allow_negative_numbers = true)]
        bounds: Option<Vec<f64>>,
        /// Samples per axis.
        #[arg(long)]
        res: Option<usize>,
    },
    /// Weyl-quantize the symbol at the first h and write the binary operator container.
    Quantize(Common),
    /// Filtered eigenvalues of the quantized operator.
    Spectrum(Common),
    /// σ_min(P − z) over a rectangle of z: CSV, PGM heatmap, isolines.
    Psgrid(Common),
    /// WKB quasimode residuals over the h list with a scaling fit.
    Quasimode(Common),
    /// σ_min(P − z) at fixed z over the h list with a scaling fit.
    Scaling(Common),
    /// Escape weight around z0.
    Weight(Common),
    /// Conjugation by the escape weight and the boundary-exclusion table.
    Conjugate(Common),
    /// P = q^w − i a^Wick: certification, spectrum, resolvent bound.
    Dissipative(Common),
    /// FBI transform of the quasimode at the first h.
    Fbi(Common),
    /// Run a canned reproduction suite and print a pass/fail table.
    Repro {
        suite: Suite,
        /// Directory for the suite's artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Suite {
    PaperExamples,
    Invariants,
    ScalingLaws,
}

fn resolve(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut c = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            if common.symbol.is_none() {
                return Err(CliError::Config("give --config or at least --symbol".into()));
            }
            ExperimentConfig::empty()
        }
    };
    if let Some(s) = &common.symbol {
        c.symbol = Some(s.clone());
    }
    if let Some(d) = common.dim {
        c.dim = d;
    }
    if let Some(h) = &common.h {
        c.h = h.clone();
    }
    if let Some(o) = &common.out {
        c.output = o.clone();
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    Ok(c)
}

fn resolve_classify(common: &Common, bounds: &Option<Vec<f64>>, res: Option<usize>) -> Result<ExperimentConfig, CliError> {
    let mut c = resolve(common)?;
    if let Some(b) = bounds {
        if b.len() % 2 != 0 {
            return Err(CliError::Config("--box takes lo hi pairs".into()));
        }
        let pairs: Vec<[f64; 2]> = b.chunks(2).map(|p| [p[0], p[1]]).collect();
        match &mut c.atlas {
            Some(a) => a.bounds = pairs,
            None => {
                let text = serde_json::json!({ "bounds": pairs }).to_string();
                c.atlas = Some(serde_json::from_str::<AtlasConfig>(&text)?);
            }
        }
    }
    if let Some(r) = res {
        c.atlas.as_mut().ok_or_else(|| CliError::Config("--res needs --box or an atlas section".into()))?.resolution = r;
    }
    Ok(c)
}

fn run_command(name: &str, config: Result<ExperimentConfig, CliError>) -> i32 {
    let outcome = config.and_then(|c| run::execute(name, &c).map(|_| c.output));
    match outcome {
        Ok(dir) => {
            println!("{name}: artifacts in {dir}");
            0
        }
        Err(e) => {
            eprintln!("semiclab {name}: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("semiclab: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("semiclab: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let code = match &cli.command {
        Command::Classify { common, bounds, res } => run_command("classify", resolve_classify(common, bounds, *res)),
        Command::Quantize(c) => run_command("quantize", resolve(c)),
        Command::Spectrum(c) => run_command("spectrum", resolve(c)),
        Command::Psgrid(c) => run_command("psgrid", resolve(c)),
        Command::Quasimode(c) => run_command("quasimode", resolve(c)),
        Command::Scaling(c) => run_command("scaling", resolve(c)),
        Command::Weight(c) => run_command("weight", resolve(c)),
        Command::Conjugate(c) => run_command("conjugate", resolve(c)),
        Command::Dissipative(c) => run_command("dissipative", resolve(c)),
        Command::Fbi(c) => run_command("fbi", resolve(c)),
        Command::Repro { suite, out } => repro::run_suite(*suite, out.clone()),
    };
    ExitCode::from(code as u8)
}
