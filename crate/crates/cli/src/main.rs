use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use presym_lab::report::{Check, Relation};
use presym_lab::{emit_report, parse_config, report_path, run_experiment, selftest, HarnessError, Report};

#[derive(Parser)]
#[command(name = "presym-lab", version, about = "Presymplectic charge experiments and self-test")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a configuration file.
    Run {
        config: PathBuf,
        /// Directory for the JSON report and CSV time series.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tolerance override, e.g. `--tolerance noether_boost=1e-5`.
        #[arg(long = "tolerance", value_name = "NAME=VALUE")]
        tolerances: Vec<String>,
        /// Print only the final verdict.
        #[arg(long)]
        quiet: bool,
    },
    /// Run the full acceptance suite.
    Selftest {
        /// Directory for `selftest.json` and `selftest.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

fn print_check(c: &Check) {
    let rel = match c.relation {
        Relation::AtMost => "<=",
        Relation::AtLeast => ">=",
    };
    let verdict = if c.pass { "PASS" } else { "FAIL" };
    println!("{verdict}  {:<32} {:>12.3e} {rel} {:.1e}", c.name, c.value, c.tolerance);
}

fn summarize(r: &Report, quiet: bool) {
    if !quiet {
        for c in &r.results.checks {
            print_check(c);
        }
        for c in &r.results.criteria {
            println!("criterion {} {}: {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.title);
        }
    }
    println!("{} in {:.1} s", if r.results.pass { "pass" } else { "FAIL" }, r.runtime_s);
}

fn execute(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Run { config, out, tolerances, quiet } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|source| HarnessError::Io { path: config.clone(), source })?;
            let mut cfg = parse_config(&text)?;
            for t in &tolerances {
                let (k, v) = t.split_once('=').ok_or_else(|| presym_lab::ConfigError::Validation {
                    key: t.clone(),
                    reason: "expected NAME=VALUE".into(),
                })?;
                let v: f64 = v.trim().parse().map_err(|_| presym_lab::ConfigError::Validation {
                    key: k.to_string(),
                    reason: format!("cannot parse `{v}`"),
                })?;
                cfg.set_tolerance(k.trim(), v)?;
            }
            let report = run_experiment(&cfg)?;
            let path = report_path(&cfg, &config, out.as_deref());
            emit_report(&report, &path)?;
            summarize(&report, quiet);
            if !quiet {
                println!("report: {}", path.display());
            }
            Ok(report.results.pass)
        }
        Command::Selftest { out, quiet } => {
            let report = selftest()?;
            let path = out.unwrap_or_default().join("selftest.json");
            emit_report(&report, &path)?;
            summarize(&report, quiet);
            if !quiet {
                println!("report: {}", path.display());
            }
            Ok(report.results.pass)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
