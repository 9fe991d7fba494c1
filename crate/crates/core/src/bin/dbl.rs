//! `dbl`: run scenarios, verify the library, and plot results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dbl_core::plot::write_gnuplot_scripts;
use dbl_core::scenario::{run_scenario, ScenarioConfig, ScenarioError, BUNDLED_SCENARIO};
use dbl_core::verify::{run_checks, Level, DEFAULT_PATHS};

#[derive(Parser)]
#[command(name = "dbl", version, about = "Dynamic Black-Litterman portfolios and Monte-Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its tables.
    Run {
        /// Scenario JSON file.
        file: PathBuf,
        /// Override a scenario entry, e.g. `experiment.n_paths=5000` or `assets.mu.0=0.1`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory [default: $DBL_OUT_DIR, then the scenario's output.dir, then ./dbl_out].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the Monte-Carlo engine.
        #[arg(long)]
        threads: Option<usize>,
        /// Treat bankrupt paths as a numerical failure (exit 3) instead of a warning.
        #[arg(long)]
        strict: bool,
    },
    /// Run the built-in invariant and oracle checks.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Quick)]
        level: VerifyLevel,
        /// Monte-Carlo paths for the full-level experiments.
        #[arg(long, default_value_t = DEFAULT_PATHS)]
        paths: usize,
    },
    /// Write gnuplot scripts for the tables in an output directory.
    Gnuplot {
        /// Output directory of a previous run [default: $DBL_OUT_DIR or ./dbl_out].
        dir: Option<PathBuf>,
        /// Rebalancing plan shown in the frontier and CER plots.
        #[arg(long, default_value = "weekly")]
        plan: String,
    },
    /// Print the bundled five-asset scenario.
    Example,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    Quick,
    Full,
}

fn env_out_dir() -> Option<PathBuf> {
    std::env::var_os("DBL_OUT_DIR").filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn exit_code(e: &ScenarioError) -> u8 {
    match e {
        ScenarioError::Numerical(_) => 3,
        ScenarioError::Write(_) => 1,
        _ => 2,
    }
}

fn run(file: PathBuf, set: Vec<String>, out: Option<PathBuf>, threads: Option<usize>, strict: bool) -> ExitCode {
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = match ScenarioConfig::from_file(&file, &set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let out_dir = out
        .or_else(env_out_dir)
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.as_ref()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("dbl_out"));
    match run_scenario(&cfg, &out_dir) {
        Ok(art) => {
            for f in &art.files {
                println!("wrote {}", f.display());
            }
            match art.check_solvency() {
                Err(e) if strict => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
                Err(e) => {
                    eprintln!("warning: {e}; CER is left empty for bankrupt configurations");
                    ExitCode::SUCCESS
                }
                Ok(()) => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { file, set, out, threads, strict } => run(file, set, out, threads, strict),
        Command::Verify { level, paths } => {
            let level = match level {
                VerifyLevel::Quick => Level::Quick,
                VerifyLevel::Full => Level::Full,
            };
            let results = run_checks(level, paths);
            for r in &results {
                println!("{}", r.line());
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} of {} checks passed", results.len() - failed, results.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Gnuplot { dir, plan } => {
            let dir = dir.or_else(env_out_dir).unwrap_or_else(|| PathBuf::from("dbl_out"));
            match write_gnuplot_scripts(&dir, &plan) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {} (run `gnuplot {}` inside {})", f.display(), f.file_name().unwrap_or_default().to_string_lossy(), dir.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Example => {
            print!("{BUNDLED_SCENARIO}");
            ExitCode::SUCCESS
        }
    }
}
