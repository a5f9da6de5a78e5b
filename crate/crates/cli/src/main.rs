use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbshell::config::{parse_dt, DtSetting, ScenarioConfig};
use cbshell::constitutive::Technique;
use cbshell::output::write_text;
use cbshell::runner::{default_out_dir, run_to_directory, RunOptions};
use cbshell::scenarios::Scenario;
use cbshell::verify::{verify_scenario, Report};

/// Explicit-dynamics CB shell solver.
#[derive(Parser, Debug)]
#[command(name = "cbshell", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write probes, oracle curves, snapshot and manifest.
    Run {
        config: PathBuf,
        /// Output directory (default: $CBSHELL_OUT_DIR or ./cbshell-out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Constitutive update technique.
        #[arg(long, value_parser = parse_technique)]
        technique: Option<Technique>,
        /// Time step: `auto` or seconds.
        #[arg(long, value_parser = parse_dt)]
        dt: Option<DtSetting>,
        #[arg(long)]
        threads: Option<usize>,
        /// Write only the analytical reference curves.
        #[arg(long)]
        oracle_only: bool,
    },
    /// Run a scenario against its oracle; exit code 0 when every check passes.
    Verify {
        config: PathBuf,
        /// Directory for the CSV report (default: $CBSHELL_OUT_DIR or ./cbshell-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_technique(s: &str) -> Result<Technique, String> {
    let n: u8 = s.trim().parse().map_err(|_| format!("expected 1, 2 or 3, got `{s}`"))?;
    Technique::try_from(n)
}

fn load(path: &Path) -> cbshell::Result<Scenario> {
    Scenario::from_config(ScenarioConfig::load(path)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            technique,
            dt,
            threads,
            oracle_only,
        } => {
            let scenario = match load(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions {
                out_dir: out.unwrap_or_else(default_out_dir),
                technique,
                dt: dt.map(|d| d.0),
                threads,
                oracle_only,
            };
            match run_to_directory(&scenario, &opts) {
                Ok(report) => {
                    for f in &report.files {
                        println!("{}", f.display());
                    }
                    println!(
                        "{} steps, t = {:e} s, {:.1} s wall clock",
                        report.manifest.steps, report.manifest.final_time_s, report.manifest.wall_clock_s
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Verify { config, out } => {
            let scenario = match load(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let report = Report {
                criteria: vec![verify_scenario(&scenario)],
            };
            print!("{}", report.to_text());
            let dir = out.unwrap_or_else(default_out_dir);
            let path = dir.join(format!("{}_verify.csv", scenario.config.name));
            if let Err(e) = write_text(&path, &report.to_csv()) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            println!("{}", path.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
