//! `sgwave` command line: one subcommand per solver, each writing a data
//! artifact plus a manifest that is enough to replay it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SGWAVE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "sgwave",
    version,
    about = "Travelling waves of the damped, driven sine-Gordon equation",
    args_override_self = true
)]
pub struct Cli {
    /// Flat `section.key = value` file; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Well and barrier of the k-th cell of the washboard.
    Equilibria(EquilibriaArgs),
    /// Kink drag mu_hat and the resulting speeds.
    KinkMu(KinkMuArgs),
    /// Kink profile g(xi).
    KinkProfile(KinkProfileArgs),
    /// One period of a soliton array, by crossing slope or by period.
    Array(ArrayArgs),
    /// Saddle launch at an array's drag and its approach to the array.
    HalfArray(HalfArrayArgs),
    /// Undamped bounded kink-antikink pair.
    Pair(PairArgs),
    /// Periods of untilted pendulum orbits.
    Periods(PeriodsArgs),
    /// Propagate a kink or array in the field equation.
    PdeRun(PdeRunArgs),
    /// mu_hat over a list of tilts.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Equilibria(_) => "equilibria",
            Command::KinkMu(_) => "kink-mu",
            Command::KinkProfile(_) => "kink-profile",
            Command::Array(_) => "array",
            Command::HalfArray(_) => "half-array",
            Command::Pair(_) => "pair",
            Command::Periods(_) => "periods",
            Command::PdeRun(_) => "pde-run",
            Command::Sweep(_) => "sweep",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for emit::Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => emit::Format::Csv,
            FormatArg::Json => emit::Format::Json,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Data artifact; defaults to `$SGWAVE_OUT_DIR/<command>.<format>`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Tilt {
    /// Tilt; negative values are solved by the reflection phi -> -phi.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Damping of the field equation.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Shooting {
    /// Target accuracy of the drag search.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Launch offset from the saddle.
    #[arg(long, default_value_t = 1e-8)]
    pub delta: f64,
    /// Longest shot in xi.
    #[arg(long, default_value_t = 1e4)]
    pub horizon: f64,
    /// Grid spacing of emitted profiles.
    #[arg(long, default_value_t = 0.01)]
    pub spacing: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EquilibriaArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub k: i64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KinkMuArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tilt: Tilt,
    #[command(flatten)]
    #[serde(flatten)]
    pub shooting: Shooting,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KinkProfileArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tilt: Tilt,
    #[command(flatten)]
    #[serde(flatten)]
    pub shooting: Shooting,
    /// Half width of the closed-form profile used without tilt.
    #[arg(long, default_value_t = 20.0)]
    pub half_width: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ArrayArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tilt: Tilt,
    /// Slope at the barrier tops.
    #[arg(long, conflicts_with = "period", required_unless_present = "period")]
    pub gp0: Option<f64>,
    /// Target period Xi, solved for the slope.
    #[arg(long)]
    pub period: Option<f64>,
    /// Periods on the ring whose circumference goes in the header.
    #[arg(long, default_value_t = 1)]
    pub periods: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub shooting: Shooting,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HalfArrayArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tilt: Tilt,
    #[arg(long, default_value_t = 1.0)]
    pub gp0: f64,
    /// Length of the saddle launch in xi.
    #[arg(long, default_value_t = 500.0)]
    pub horizon: f64,
    /// Distance to the array orbit counted as arrival.
    #[arg(long, default_value_t = 1e-4)]
    pub threshold: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PairArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tilt: Tilt,
    #[arg(long, default_value_t = 15.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1501)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PeriodsArgs {
    /// Orbit energies `g'^2/2 - cos g`, comma separated.
    #[arg(
        long,
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub energy: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveArg {
    Kink,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainArg {
    Line,
    Circle,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PdeRunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tilt: Tilt,
    #[arg(long, value_enum, default_value_t = WaveArg::Kink)]
    pub wave: WaveArg,
    /// Array slope at the barrier tops.
    #[arg(long, default_value_t = 1.0)]
    pub gp0: f64,
    /// Domain; arrays need a circle.
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    #[arg(long, default_value_t = -60.0, allow_negative_numbers = true)]
    pub left: f64,
    #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
    pub right: f64,
    /// Array periods on the circle.
    #[arg(long, default_value_t = 1)]
    pub periods: u32,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub center: f64,
    /// Speed for a profile whose speed is free.
    #[arg(long, allow_negative_numbers = true)]
    pub velocity: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub dx: f64,
    #[arg(long, default_value_t = 0.04)]
    pub dt: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1.0)]
    pub record_every: f64,
    /// Leading fraction of the run left out of the speed fit.
    #[arg(long, default_value_t = 0.2)]
    pub discard: f64,
    /// Half width of the closed-form kink used without tilt.
    #[arg(long, default_value_t = 20.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Tilts, comma separated; rows keep this order.
    #[arg(
        long,
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub gammas: Vec<f64>,
    /// Damping for the speed column; omitted at 0.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where to write the replayed artifact instead of the recorded path.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Parse, merge the config file, dispatch; returns the exit status.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let args: Vec<OsString> = args.into_iter().collect();
    match parse(&args) {
        Ok(cli) => match commands::dispatch(&cli.command) {
            Ok(summary) => {
                println!("{summary}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(Parsed::Clap(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(Parsed::Cli(e)) => {
            eprintln!("error: {e}");
            eprintln!("{}", Cli::command().render_usage());
            e.exit_code()
        }
    }
}

enum Parsed {
    Clap(clap::Error),
    Cli(CliError),
}

fn parse(args: &[OsString]) -> Result<Cli, Parsed> {
    let path = config::config_path(args).map_err(Parsed::Cli)?;
    let args = match path {
        Some(path) => {
            let cfg = config::Config::load(&path).map_err(Parsed::Cli)?;
            let cmd = Cli::command();
            let sub = config::subcommand_index(args).and_then(|i| {
                cmd.find_subcommand(args[i].to_string_lossy().as_ref())
                    .cloned()
            });
            match sub {
                Some(sub) => config::inject(args, &cfg, |flag| {
                    sub.get_arguments().any(|a| a.get_long() == Some(flag))
                }),
                None => args.to_vec(),
            }
        }
        None => args.to_vec(),
    };
    Cli::try_parse_from(args).map_err(Parsed::Clap)
}
