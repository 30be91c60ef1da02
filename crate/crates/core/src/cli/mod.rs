//! The `scouts` command line.
//!
//! Every option may also come from a flat `key=value` file given with
//! `--config`; keys are the long option names and the command line wins.
//! Primary output goes to stdout in the chosen `--format`. With `--out-dir`
//! every artifact is written there together with a `<command>.meta.json`
//! sidecar, the only place a timestamp appears. CSV artifacts of randomized
//! commands start with a `# seed=N` line.
//!
//! Exit codes: 0 success, 1 usage or precondition error, 2 I/O error,
//! 3 statistical FAIL.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_FAIL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

pub(crate) fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "scouts", version, about = "Finite-memory scout protocols on the integer lattice")]
pub struct Cli {
    /// Root seed of every random stream [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Step cap for stopping times
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    /// Independent replicas or trials
    #[arg(long, global = true)]
    pub replicas: Option<u64>,
    /// Directory for artifacts and the metadata sidecar
    #[arg(long = "out-dir", global = true)]
    pub out_dir: Option<PathBuf>,
    /// Format of stdout [default: json]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat key=value file supplying any option
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a protocol file
    Validate { file: Option<PathBuf> },
    /// Record one trajectory
    #[command(allow_negative_numbers = true)]
    Simulate {
        /// Protocol file, or builtin:NAME[,key=value...]
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Hitting-time survival curves and mean verdicts per target
    Hitting {
        #[arg(long)]
        protocol: Option<String>,
        /// Target point such as 3 or -2,1; repeatable
        #[arg(long = "target", allow_hyphen_values = true)]
        targets: Vec<String>,
    },
    /// Classes, stationary laws, drifts, degeneracy and rays of a reduced kernel
    Analyze {
        #[arg(long)]
        protocol: Option<String>,
        /// Scout whose kernel is reduced (1-based) [default: 1]
        #[arg(long)]
        scout: Option<usize>,
        /// Analyze the joint kernel of a two-scout protocol instead
        #[arg(long)]
        product: bool,
        /// Fixed ray width instead of the pilot estimate
        #[arg(long)]
        width: Option<f64>,
    },
    /// Meeting renewals, gap tails and homogeneity of a two-scout protocol
    #[command(allow_negative_numbers = true)]
    Renewal {
        #[arg(long)]
        protocol: Option<String>,
        /// Length of each recorded trace [default: 1000]
        #[arg(long)]
        horizon: Option<u64>,
        /// First meeting gap in the tail fit [default: 1]
        #[arg(long)]
        kmin: Option<usize>,
        /// Last meeting gap in the tail fit [default: 20]
        #[arg(long)]
        kmax: Option<usize>,
        /// Explorer cover targets; repeatable
        #[arg(long = "target", allow_hyphen_values = true)]
        targets: Vec<String>,
    },
    /// Statistical check of a look-around walk law: lemma6, lemma7, lemma17, lemma50 or prop22
    #[command(allow_negative_numbers = true)]
    Lemma {
        name: Option<String>,
        /// Step law `ζ:ν:R@p;...` [default: simple random walk]
        #[arg(long, allow_hyphen_values = true)]
        law: Option<String>,
        /// Second walk's law for prop22 [default: --law]
        #[arg(long, allow_hyphen_values = true)]
        law2: Option<String>,
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        y: Option<f64>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        s1: Option<f64>,
        #[arg(long)]
        s2: Option<f64>,
        /// Interval `x,y` for prop22
        #[arg(long, allow_hyphen_values = true)]
        interval: Option<String>,
        /// u-grid for lemma7, comma separated
        #[arg(long)]
        grid: Option<String>,
        /// Targets x for a lemma7 scan, comma separated
        #[arg(long, allow_hyphen_values = true)]
        scan: Option<String>,
    },
    /// Exact probability of a walk event, checked against Monte Carlo
    #[command(allow_negative_numbers = true)]
    Oracle {
        #[arg(long, allow_hyphen_values = true)]
        law: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        law2: Option<String>,
        #[arg(long)]
        s0: Option<f64>,
        /// hit:KIND:VALUE:N, pos:N:Y or meet:START2:N
        #[arg(long, allow_hyphen_values = true)]
        event: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Simulate { .. } => "simulate",
            Command::Hitting { .. } => "hitting",
            Command::Analyze { .. } => "analyze",
            Command::Renewal { .. } => "renewal",
            Command::Lemma { .. } => "lemma",
            Command::Oracle { .. } => "oracle",
        }
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub json: Option<String>,
    pub csv: Option<String>,
    /// Artifacts for `--out-dir`, by file name.
    pub files: Vec<(String, String)>,
    pub code: i32,
    /// Root seed, stamped on every artifact of a randomized command.
    pub seed: Option<u64>,
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, &argv, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn execute(cli: &Cli, argv: &[OsString], out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let threads = cfg.pick(cli.threads, "threads")?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(usage)?;
    let outcome = pool.install(|| commands::dispatch(cli, &cfg))?;
    let format = cfg.pick(cli.format, "format")?.unwrap_or(Format::Json);
    let primary = match format {
        Format::Json => outcome.json.as_ref().or(outcome.csv.as_ref()),
        Format::Csv => outcome.csv.as_ref().or(outcome.json.as_ref()),
    };
    if let Some(text) = primary {
        out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        if !text.ends_with('\n') {
            let _ = out.write_all(b"\n");
        }
    }
    if let Some(dir) = cfg.pick(cli.out_dir.clone(), "out-dir")? {
        write_artifacts(&dir, cli.command.name(), &outcome, argv)?;
    }
    Ok(outcome.code)
}

fn write_artifacts(dir: &std::path::Path, command: &str, o: &Outcome, argv: &[OsString]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, content) in &o.files {
        let stamped;
        let body = match o.seed {
            Some(seed) if name.ends_with(".csv") => {
                stamped = format!("# seed={seed}\n{content}");
                &stamped
            }
            _ => content,
        };
        std::fs::write(dir.join(name), body).map_err(io)?;
    }
    let created = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = serde_json::json!({
        "command": command,
        "argv": argv.iter().map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": o.seed,
        "created_unix": created,
        "files": o.files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
    });
    std::fs::write(dir.join(format!("{command}.meta.json")), serde_json::to_string_pretty(&meta).expect("json")).map_err(io)
}

/// Entry point of the `scouts` binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    run(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
