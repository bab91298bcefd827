//! Configuration-driven experiment runner for presym-core: seeded
//! localized states, Klein-Gordon, Maxwell and finite-dimensional
//! constraint experiments, JSON and CSV reports.

pub mod config;
pub mod error;
pub mod oracle;
pub mod report;
pub mod run;
pub mod selftest;
pub mod systems;

use std::path::{Path, PathBuf};

pub use config::{parse_config, ExperimentConfig, Kind};
pub use error::{ConfigError, HarnessError};
pub use report::{deterministic_part, emit_report, Report};
pub use run::run_experiment;
pub use selftest::selftest;

/// Report location: `<out>/<stem>.json` when an output directory is given,
/// else the configured `output.path`, else `<stem>.json` in the working
/// directory.
pub fn report_path(cfg: &ExperimentConfig, config_path: &Path, out_dir: Option<&Path>) -> PathBuf {
    let stem = config_path.file_stem().map(|s| s.to_os_string()).unwrap_or_else(|| "report".into());
    let file = PathBuf::from(stem).with_extension("json");
    match (out_dir, &cfg.output) {
        (Some(dir), _) => dir.join(file),
        (None, Some(p)) => p.clone(),
        (None, None) => file,
    }
}
