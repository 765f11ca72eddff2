use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conformal_mass::report::{
    exit_code, run, DecTest, Emit, MassMethod, ModelSpec, RunCommand, RunConfig, SweepParameter, SweepSpec,
};
use conformal_mass::Error;

/// Mass constants of conformally flat model manifolds.
#[derive(Parser, Debug)]
#[command(name = "conformal-mass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mass of a model at its default base point.
    Mass(Common),
    /// Exact check of the radial asymptotics of the middle-degree form.
    SeriesVerify(Common),
    /// Cubical DEC checks on a 4-dimensional grid.
    DecCheck {
        #[command(flatten)]
        common: Common,
        /// Checks to run; all of them by default.
        #[arg(long = "test", value_delimiter = ',')]
        tests: Vec<DecTest>,
    },
    /// Every available mass method against the closed form, as a table.
    OracleCompare(Common),
    /// One mass per cylinder length (`--L 0.5,1,2`) or per perturbation
    /// seed (`--seeds 0..20`, with `--L` then fixing the cylinder length).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Seed range `a..b` (end exclusive) or comma-separated list.
        #[arg(long)]
        seeds: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// sphere, projective, cylinder or torus.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    /// Cylinder length; a comma-separated list for `sweep`.
    #[arg(long = "L", id = "length")]
    length: Option<String>,
    #[arg(long)]
    method: Option<MassMethod>,
    /// Spectral truncation degree.
    #[arg(long)]
    degree: Option<usize>,
    /// DEC cells per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Tolerance of the main agreement check.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    emit: Option<Emit>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record wall time in the report (breaks byte-for-byte reproducibility).
    #[arg(long)]
    timing: bool,
}

fn parse_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("not a number: `{s}`")))
        })
        .collect()
}

fn parse_seeds(text: &str) -> Result<Vec<f64>, Error> {
    match text.split_once("..") {
        Some((a, b)) => {
            let bound = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad seed range `{text}`")))
            };
            Ok((bound(a)?..bound(b)?).map(|s| s as f64).collect())
        }
        None => parse_list(text),
    }
}

fn config_from(cli: Cli) -> Result<RunConfig, Error> {
    let (command, common, tests, seeds) = match cli.command {
        Command::Mass(c) => (RunCommand::Mass, c, None, None),
        Command::SeriesVerify(c) => (RunCommand::SeriesVerify, c, None, None),
        Command::DecCheck { common, tests } => {
            (RunCommand::DecCheck, common, (!tests.is_empty()).then_some(tests), None)
        }
        Command::OracleCompare(c) => (RunCommand::OracleCompare, c, None, None),
        Command::Sweep { common, seeds } => (RunCommand::Sweep, common, None, seeds),
    };
    let base = match &common.config {
        Some(path) => RunConfig::from_json(
            &fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?,
        )?,
        None => RunConfig::default(),
    };
    if base.command.is_some_and(|c| c != command) {
        return Err(Error::InvalidArgument(format!(
            "config file is for `{}`, not `{}`",
            base.command.map(RunCommand::name).unwrap_or_default(),
            command.name()
        )));
    }

    let mut length = None;
    let mut sweep = None;
    let single = |text: &str| {
        text.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("bad L `{text}`")))
    };
    match (&seeds, &common.length) {
        (Some(s), l) => {
            sweep = Some(SweepSpec {
                parameter: SweepParameter::Seed,
                values: parse_seeds(s)?,
            });
            length = l.as_deref().map(single).transpose()?;
        }
        (None, Some(l)) if command == RunCommand::Sweep => {
            sweep = Some(SweepSpec {
                parameter: SweepParameter::Length,
                values: parse_list(l)?,
            });
        }
        (None, Some(l)) => length = Some(single(l)?),
        (None, None) => {}
    }
    let flags = RunConfig {
        command: Some(command),
        model: common.model.map(ModelSpec::Name),
        n: common.n,
        length,
        method: common.method,
        degree: common.degree,
        grid: common.grid,
        tol: common.tol,
        seed: common.seed,
        tests,
        sweep,
        emit: common.emit,
        out: common.out,
        timing: common.timing.then_some(true),
    };
    Ok(base.merged(flags))
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("CM_THREADS") else {
        return Ok(());
    };
    let threads = value
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("CM_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot size the worker pool: {e}")))
}

fn fail(error: &Error) -> ExitCode {
    eprintln!("error: {error}");
    ExitCode::from(exit_code(error) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return fail(&e);
    }
    let config = match config_from(cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let text = match report.render(config.emit()) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    match &config.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    for check in report.checks.iter().filter(|c| !c.pass) {
        eprintln!(
            "check failed: {} (measured {:e}, expected {:e}, tolerance {:e})",
            check.name, check.measured, check.expected, check.tolerance
        );
    }
    for row in &report.sweep {
        if let Some(f) = &row.failure {
            eprintln!("sweep point {} failed: {f}", row.param);
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
