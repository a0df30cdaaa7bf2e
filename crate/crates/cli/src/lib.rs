//! Command-line front end: loads a `key = value` config, applies overrides
//! and dispatches to the simulation, policy, valuation and verification
//! routines. Every output file starts with `#` metadata lines carrying the
//! config fingerprint.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rmerton::{Error, KvConfig, ParamBox, SelectorMode, SimConfig};

mod commands;
mod verdict;

pub use verdict::Verdict;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rmerton", version, about = "Robust log-utility portfolio experiments")]
pub struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the `seed` key.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worst-case selector; overrides the `mode` key.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Config override `key=value`, repeatable. Applied after the file.
    #[arg(long = "set", global = true, value_name = "K=V")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Paper,
    SignLogic,
}

impl From<ModeArg> for SelectorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => SelectorMode::Paper,
            ModeArg::SignLogic => SelectorMode::SignLogic,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate paths and write per-path terminal summaries.
    Simulate,
    /// Write the worst-case corner chosen at each rebalance date of each path.
    Policy,
    /// Estimate the robust value at a state (defaults to the initial state).
    Value {
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
    },
    /// Run one numerical check and write its verdict file.
    Verify {
        #[arg(value_enum)]
        check: Check,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Minimax,
    Corners,
    Mixture,
    Moments,
    Convergence,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().unwrap().get_name())
    }
}

/// Why a command did not succeed, with its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or output location.
    Usage(String),
    /// The computation ran but a check failed or produced no usable result.
    Failed(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Failed(_) => EXIT_FAILED,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::InvalidBox(_)
            | Error::InvalidConfig(_)
            | Error::MissingKey(_)
            | Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

/// Fully resolved inputs shared by every command.
#[derive(Debug, Clone)]
pub struct Setup {
    pub kv: KvConfig,
    pub bx: ParamBox,
    pub cfg: SimConfig,
    pub out: PathBuf,
}

impl Setup {
    pub fn fingerprint(&self) -> String {
        self.kv.fingerprint()
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Merges file, `--set` overrides and dedicated flags, in that order.
pub fn load(cli: &Cli) -> Result<Setup, Failure> {
    let mut kv = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            KvConfig::parse(&text)?
        }
        None => KvConfig::default(),
    };
    for assignment in &cli.set {
        kv.set_override(assignment)?;
    }
    if let Some(seed) = cli.seed {
        kv.set("seed", seed.to_string());
    }
    if let Some(mode) = cli.mode {
        kv.set("mode", SelectorMode::from(mode).to_string());
    }
    let bx = ParamBox::from_kv(&kv)?.validated()?;
    let cfg = SimConfig::from_kv(&kv)?;
    Ok(Setup {
        kv,
        bx,
        cfg,
        out: cli.out.clone(),
    })
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    let setup = load(cli)?;
    ensure_dir(&setup.out)?;
    match &cli.command {
        Command::Simulate => commands::simulate(&setup),
        Command::Policy => commands::policy(&setup),
        Command::Value { t, mu, nu, x } => commands::value(&setup, *t, *mu, *nu, *x),
        Command::Verify { check } => commands::verify(&setup, *check),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create output directory {}: {e}", dir.display())))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_PASS,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}
