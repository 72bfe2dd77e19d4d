//! Configuration, orchestration and output for the RIS/UAV studies:
//! objective fairness, minimum SINR against transmit power, and one-bit
//! against continuous phases.

pub mod config;
pub mod output;
pub mod plot;
pub mod runner;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{load_spec, Algorithm, ConfigError, ExperimentKind, ExperimentSpec, ObjectiveKind};
pub use plot::{emit_plot_script, PlotError};
pub use runner::{run_fairness, run_onebit_table, run_pmax_sweep};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run failed: {0}")]
    Run(#[from] ris_ddpg::DdpgError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Plot(#[from] PlotError),
}

impl ExperimentError {
    /// Process exit status for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Io { .. } | ExperimentError::Csv { .. } | ExperimentError::Plot(_) => 3,
            ExperimentError::Run(_) => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "config",
            ExperimentError::Io { .. } | ExperimentError::Csv { .. } | ExperimentError::Plot(_) => "output",
            ExperimentError::Run(_) => "run",
        }
    }
}

fn write_csv(path: &Path, write: impl FnOnce(std::io::BufWriter<std::fs::File>) -> csv::Result<()>) -> Result<(), ExperimentError> {
    let file = output::create(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write(file).map_err(|source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the spec's experiment and writes its CSV files and plot scripts
/// into `spec.output_dir`. Returns the paths written.
pub fn run_experiment(spec: &ExperimentSpec, log: &mut dyn FnMut(&str)) -> Result<Vec<PathBuf>, ExperimentError> {
    let dir = &spec.output_dir;
    let mut written = Vec::new();
    match spec.experiment {
        ExperimentKind::Fairness => {
            let runs = run_fairness(spec, log)?;
            let path = dir.join("fairness.csv");
            write_csv(&path, |f| output::write_fairness(f, &runs))?;
            written.push(path);
        }
        ExperimentKind::PmaxSweep => {
            let cells = run_pmax_sweep(spec, log)?;
            let path = dir.join("pmax_sweep.csv");
            write_csv(&path, |f| output::write_pmax_sweep(f, &cells))?;
            written.push(path);
        }
        ExperimentKind::OnebitTable => {
            let rows = run_onebit_table(spec, log)?;
            let path = dir.join("onebit_table.csv");
            write_csv(&path, |f| output::write_onebit_table(f, &rows))?;
            written.push(path);
            let phases = dir.join("onebit_phases.csv");
            write_csv(&phases, |f| output::write_onebit_phases(f, &rows))?;
            written.push(phases);
        }
    }
    let script = emit_plot_script(&written[0])?;
    written.push(script);
    Ok(written)
}
