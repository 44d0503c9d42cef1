use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellspace_cli::{catalog, report::format_float, run, ConfigError, Scenario};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bellspace", about = "Run local-realism scenarios and write CSV reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a bundled scenario by name.
    Run {
        scenario: String,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List bundled scenarios.
    List,
    /// Print the version.
    Version,
}

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn load(scenario: &str) -> Result<Scenario, ConfigError> {
    let path = Path::new(scenario);
    if path.exists() {
        return Scenario::from_path(path);
    }
    catalog::load(scenario).unwrap_or_else(|| {
        Err(ConfigError::Read {
            path: scenario.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled scenario"),
        })
    })
}

fn run_command(scenario: &str, seed: Option<u64>, out_dir: &Path, threads: Option<usize>) -> ExitCode {
    let mut scenario = match load(scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let report = pool.install(|| run(&scenario));

    let written = match report.write(out_dir) {
        Ok(paths) => paths,
        Err(e) => {
            eprintln!("error: cannot write to {}: {e}", out_dir.display());
            return ExitCode::from(EXIT_INVALID);
        }
    };
    println!("{} ({}, seed {})", scenario.name, scenario.kind.label(), scenario.seed);
    for a in &report.assertions {
        println!("  {} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    for (k, v) in &report.findings {
        println!("  note {k}: {v}");
    }
    for (k, v) in &report.values {
        println!("  {k} = {}", format_float(*v));
    }
    for path in &written {
        println!("  wrote {}", path.display());
    }
    println!("  {:.3} s", report.wall_clock_seconds);
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, seed, out_dir, threads } => run_command(&scenario, seed, &out_dir, threads),
        Command::List => {
            for s in catalog::all() {
                println!("{:<26} {:<14} {}", s.name, s.kind.label(), s.description.as_deref().unwrap_or(""));
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("bellspace {}", bellspace_cli::runner::VERSION);
            ExitCode::SUCCESS
        }
    }
}
