use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use elh::cli_io::run::{render_sweep, run_sweep, worker_limit};
use elh::cli_io::{parse_config, read_csv, run_check_coeffs, run_identities, run_simulate, RunConfig, RunSummary};
use elh::ElhError;

const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;

#[derive(Parser)]
#[command(name = "elh", version, about = "Inertial Ericksen-Leslie simulator and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write the configured CSV and snapshots.
    Simulate { config: PathBuf },
    /// Print the coefficient relations and dissipativity class.
    CheckCoeffs { config: PathBuf },
    /// Evaluate the four stress-work identities on the configured initial data.
    Identities { config: PathBuf },
    /// Run independent simulations over one configuration key.
    Sweep {
        config: PathBuf,
        /// Key to vary, as section.key (e.g. initial.amplitude).
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Summarize a diagnostics CSV.
    Report {
        csv: PathBuf,
        /// Exit with status 4 if any acceptance threshold is violated.
        #[arg(long)]
        assert: bool,
    },
}

/// Prints without panicking when stdout has been closed early.
fn out(text: &str) {
    let mut o = std::io::stdout().lock();
    let _ = o.write_all(text.as_bytes()).and_then(|_| o.flush());
}

fn exit_code(e: &ElhError) -> u8 {
    match e {
        ElhError::Config(_) | ElhError::Coefficients(_) => EXIT_CONFIG,
        ElhError::BlowUp { .. } | ElhError::Cfl { .. } | ElhError::PicardDiverged { .. } => EXIT_BLOWUP,
        _ => 1,
    }
}

fn load_text(path: &Path) -> Result<String, ElhError> {
    std::fs::read_to_string(path).map_err(|e| ElhError::Config(vec![format!("cannot read {}: {e}", path.display())]))
}

fn load(path: &Path) -> Result<RunConfig, ElhError> {
    parse_config(&load_text(path)?)
}

fn run(cli: Cli) -> Result<u8, ElhError> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load(&config)?;
            match run_simulate(&cfg) {
                Ok(r) => {
                    out(&format!("{}\n", r.summary.render()));
                    Ok(0)
                }
                Err(e) => {
                    if let ElhError::BlowUp { last: Some(rec), .. } = &e {
                        eprintln!("last diagnostics: {rec:?}");
                    }
                    Err(e)
                }
            }
        }
        Command::CheckCoeffs { config } => {
            out(&run_check_coeffs(&load(&config)?));
            Ok(0)
        }
        Command::Identities { config } => {
            let checks = run_identities(&load(&config)?)?;
            let mut ok = true;
            for c in &checks {
                let pass = c.holds(1e-10);
                ok &= pass;
                out(&format!(
                    "{:<14} lhs={:.16e} rhs={:.16e} defect={:.3e} {}\n",
                    c.name,
                    c.lhs,
                    c.rhs,
                    c.defect(),
                    if pass { "ok" } else { "FAIL" }
                ));
            }
            Ok(if ok { 0 } else { EXIT_THRESHOLD })
        }
        Command::Sweep { config, axis, values } => {
            let text = load_text(&config)?;
            // validate the base file first so its errors are reported once
            parse_config(&text)?;
            let table = text.parse().map_err(|e: toml::de::Error| ElhError::Config(vec![e.to_string()]))?;
            let points = run_sweep(&table, &axis, &values, worker_limit());
            out(&render_sweep(&axis, &points));
            Ok(0)
        }
        Command::Report { csv, assert } => {
            let summary = RunSummary::from_records(&read_csv(&csv)?);
            out(&format!("{}\n", summary.render()));
            let failures = summary.failures();
            for f in &failures {
                out(&format!("  threshold: {f}\n"));
            }
            Ok(if assert && !failures.is_empty() { EXIT_THRESHOLD } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
