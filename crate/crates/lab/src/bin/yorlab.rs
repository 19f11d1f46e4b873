use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use yorlab::config::{ConfigFile, ExperimentConfig, Params};
use yorlab::experiments::{find, UnknownExperiment, EXPERIMENTS};
use yorlab::run_experiment;

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn experiments_help() -> String {
    let mut s = String::from("Experiments and their CSV outputs (every CSV also has seed, dt, n_paths columns):\n");
    for e in EXPERIMENTS {
        s.push_str(&format!("\n  {}\n      {}\n      {}\n", e.name, e.summary, e.csv));
    }
    s
}

#[derive(Debug, Parser)]
#[command(name = "yorlab", version, about = "Seeded experiments for the Matsumoto-Yor process and its relatives")]
#[command(after_long_help = experiments_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write report.json plus CSV tables.
    Run(RunArgs),
    /// List experiment names, summaries and CSV columns.
    ListExperiments,
    /// Fast exact checks, no files written.
    Selftest,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment name (may also come from the config file).
    experiment: Option<String>,
    /// TOML config; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<u64>>,
    #[arg(long)]
    p: Option<usize>,
    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Number of replicas.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambda: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Steps for the discrete-time experiments.
    #[arg(long)]
    n: Option<usize>,
    /// Generator-test lag.
    #[arg(long)]
    h: Option<f64>,
    /// Overrides the main tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn flags(&self) -> Params {
        Params {
            q: self.q.clone(),
            p: self.p,
            horizon: self.horizon,
            dt: self.dt,
            paths: self.paths,
            lambda: self.lambda.clone(),
            seed: self.seed,
            n: self.n,
            h: self.h,
            tolerance: self.tolerance,
        }
    }
}

fn run(args: RunArgs) -> ExitCode {
    let file = match args.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let config = match ExperimentConfig::resolve(file, args.experiment.clone(), args.flags(), args.out.clone()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if find(&config.experiment).is_none() {
        eprintln!("error: {}", UnknownExperiment(config.experiment));
        return ExitCode::from(EXIT_USAGE);
    }
    let start = Instant::now();
    let outcome = match run_experiment(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_FAILED_CHECK);
        }
    };
    print!("{}", outcome.summary());
    match outcome.write(&config) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_FAILED_CHECK);
        }
    }
    println!("{} in {:.2?}", if outcome.passed() { "passed" } else { "FAILED" }, start.elapsed());
    if outcome.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAILED_CHECK) }
}

fn selftest() -> ExitCode {
    let quick = [
        ("pitman-discrete", Params { n: Some(10), ..Params::default() }),
        ("tree-samelaw", Params { n: Some(10), q: Some(vec![2, 3]), ..Params::default() }),
        ("toda-identity", Params::default()),
        ("spherical-limit", Params::default()),
        ("hoogenboom-det", Params::default()),
    ];
    let mut ok = true;
    for (name, params) in quick {
        match run_experiment(&ExperimentConfig::new(name, params)) {
            Ok(o) => {
                println!("[{}] {name}", if o.passed() { "ok" } else { "FAIL" });
                ok &= o.passed();
            }
            Err(e) => {
                println!("[error] {name}: {e:#}");
                ok = false;
            }
        }
    }
    if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAILED_CHECK) }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
        Command::ListExperiments => {
            print!("{}", experiments_help());
            ExitCode::SUCCESS
        }
        Command::Selftest => selftest(),
    }
}
