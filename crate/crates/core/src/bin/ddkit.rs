use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ddkit::harness::{
    check_table, exit_code, load_preset, p1_table, run_experiment, ExperimentConfig, Format, Mode,
    ResultTable,
};
use ddkit::p1::{P1Params, WEIGHT_FLOOR};
use ddkit::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ddkit",
    version,
    about = "Dynamical decoupling analytics and Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct Output {
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct Experiment {
    /// Config file in the key = value format.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Name of a shipped preset such as fig3a.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trajectories: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact filter-function fidelities and closed-form envelopes.
    Analytic(Experiment),
    /// Monte Carlo fidelity curves.
    Simulate(Experiment),
    /// Decay time against pulse count.
    Scan(Experiment),
    /// ESR lines of both P1 centre types.
    P1Lines {
        #[arg(long, default_value_t = 114.0)]
        b0: f64,
        #[arg(long, default_value_t = 114.0)]
        a_z: f64,
        #[arg(long, default_value_t = 81.3)]
        a_x: f64,
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, default_value_t = WEIGHT_FLOOR)]
        floor: f64,
    },
    /// Pulse-error expansion residuals and the sensitivity table.
    Check,
}

fn load(exp: &Experiment, mode: Mode) -> Result<ExperimentConfig> {
    let mut cfg = match (&exp.config, &exp.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            ExperimentConfig::parse(&text)?
        }
        (None, Some(name)) => load_preset(name)?,
        (None, None) => return Err(Error::Config("need --config or --preset".into())),
    };
    cfg.mode = mode;
    if let Some(s) = exp.seed {
        cfg.seed = s;
    }
    if let Some(n) = exp.trajectories {
        cfg.trajectories = n;
    }
    Ok(cfg)
}

fn emit(table: &ResultTable, out: &Output) -> Result<()> {
    match &out.out {
        Some(path) => table.write(path, out.format),
        None => std::io::stdout()
            .write_all(&table.emit(out.format))
            .map_err(|source| Error::Io {
                path: Path::new("<stdout>").to_path_buf(),
                source,
            }),
    }
}

fn run(cli: Cli) -> Result<()> {
    let table = match cli.command {
        Command::Analytic(e) => run_experiment(&load(&e, Mode::Analytic)?)?,
        Command::Simulate(e) => run_experiment(&load(&e, Mode::Simulate)?)?,
        Command::Scan(e) => run_experiment(&load(&e, Mode::Scan)?)?,
        Command::P1Lines {
            b0,
            a_z,
            a_x,
            p,
            floor,
        } => {
            let params = P1Params {
                b0,
                a_z,
                a_x,
                p,
                ..P1Params::default()
            };
            p1_table(&params, floor)?
        }
        Command::Check => check_table()?,
    };
    emit(&table, &cli.out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ddkit: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
