use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use optimism_core::estimators::DEFAULT_SEED;
use optimism_core::experiments::{self, ProfileNoise, RunOptions, ScenarioResult};
use optimism_core::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_ESTIMATOR: u8 = 4;

#[derive(Parser)]
#[command(
    name = "optimism",
    version,
    about = "Optimism and degrees-of-freedom scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List scenarios in alphabetical order.
    List,
    /// Print a scenario's constants, grids and defaults.
    Describe { name: String },
    /// Run a scenario and write its rows.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    name: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Monte Carlo replicates per grid point or trial.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    replicates: Option<u64>,
    /// Random trials for the sweep scenarios.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    /// Output path, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Replaces the main grid, e.g. `--grid 0.1,0.5,1`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    grid: Option<Vec<f64>>,
    /// Lasso scenario: read the noise scale 0.02 as a standard deviation.
    #[arg(long)]
    noise_as_sd: bool,
    /// Ellipse profile: read the noise scales (0.1, 3) as variances.
    #[arg(long)]
    noise_as_variance: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownScenario(_) | Error::InvalidInput(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_ESTIMATOR,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn list() -> ExitCode {
    let width = experiments::SCENARIOS
        .iter()
        .map(|s| s.name.len())
        .max()
        .unwrap_or(0);
    for s in experiments::SCENARIOS {
        println!("{:width$}  {}", s.name, s.anchor);
    }
    ExitCode::SUCCESS
}

fn describe(name: &str) -> ExitCode {
    match experiments::find(name) {
        Ok(s) => {
            println!("{}: {}", s.name, s.anchor);
            println!("{}", s.description);
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn write_result(result: &ScenarioResult, args: &RunArgs) -> Result<(), Error> {
    let io = |e: io::Error| Error::Io(e.to_string());
    let emit = |out: &mut dyn Write| -> Result<(), Error> {
        match args.format {
            Format::Csv => result.write_csv(&mut *out)?,
            Format::Json => {
                result.write_json(&mut *out)?;
                out.write_all(b"\n").map_err(io)?;
            }
        }
        out.flush().map_err(io)
    };
    if args.out.as_os_str() == "-" {
        emit(&mut io::stdout().lock())
    } else {
        let file = File::create(&args.out)
            .map_err(|e| Error::Io(format!("{}: {e}", args.out.display())))?;
        emit(&mut BufWriter::new(file))
    }
}

fn run(args: RunArgs) -> ExitCode {
    if let Err(e) = experiments::find(&args.name) {
        return fail(e);
    }
    let opts = RunOptions {
        seed: args.seed,
        replicates: args.replicates,
        trials: args.trials,
        grid: args.grid.clone(),
        noise_as_sd: args.noise_as_sd,
        profile_noise: if args.noise_as_variance {
            ProfileNoise::Variance
        } else {
            ProfileNoise::StandardDeviation
        },
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return fail(Error::InvalidInput(format!("thread pool: {e}"))),
    };
    match pool.install(|| experiments::run(&args.name, &opts)) {
        Ok(result) => match write_result(&result, &args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => list(),
        Command::Describe { name } => describe(&name),
        Command::Run(args) => run(args),
    }
}
